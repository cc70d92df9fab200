"""Empirical strong order of Euler-Maruyama against the exact solutions.

Each Monte Carlo path is sampled once on a fine grid with step
``min(dts) / REFINE``; the exact solution on that grid is the reference and
every level runs Euler-Maruyama on the coarsened increments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kozlov import exact_paths
from .paths import sample_paths, stack_increments, uniform_grid
from .symmetry import SymmetricFamily
from .kernels import euler_maruyama_batch

REFINE = 16


class InsufficientLevels(ValueError):
    pass


class HighVarianceWarning(UserWarning):
    pass


@dataclass
class ConvergenceReport:
    family: str
    dts: list[float]
    rms_errors: list[float]
    slope: float
    paths: int
    used_paths: int
    excluded_paths: int
    T: float
    seed: int
    reference_dt: float
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "dts": self.dts,
            "rms_errors": self.rms_errors,
            "slope": self.slope,
            "paths": self.paths,
            "used_paths": self.used_paths,
            "excluded_paths": self.excluded_paths,
            "T": self.T,
            "seed": self.seed,
            "reference_dt": self.reference_dt,
            "warnings": self.warnings,
        }


def halving_levels(dt0: float, levels: int) -> list[float]:
    return [dt0 / 2 ** i for i in range(levels)]


def check_levels(dts) -> list[float]:
    dts = [float(d) for d in dts]
    if len(dts) < 3:
        raise InsufficientLevels(f"need at least 3 step sizes, got {len(dts)}")
    for a, b in zip(dts, dts[1:]):
        if not math.isclose(b, a / 2, rel_tol=1e-9):
            raise InsufficientLevels(f"step sizes must halve: {a} -> {b}")
    return dts


def convergence_study(family: SymmetricFamily, x0: float, dts, paths: int = 200,
                      seed: int = 0, T: float = 1.0, backend: str | None = None) -> ConvergenceReport:
    """RMS terminal error of EM versus the exact solution at each step size.

    The slope is the least-squares fit of ``log rms`` against ``log dt``.
    Paths on which either solution leaves the domain are excluded.
    """
    dts = check_levels(dts)
    if paths < 1:
        raise ValueError("paths must be at least 1")
    notes = []
    if paths == 1:
        msg = "a single path gives a high-variance order estimate"
        warnings.warn(msg, HighVarianceWarning, stacklevel=2)
        notes.append(msg)
    ref_dt = dts[-1] / REFINE
    fine_t = uniform_grid(T, ref_dt)
    for d in dts:
        uniform_grid(T, d)
    pths = sample_paths(len(family.noises), fine_t, seed, paths)
    dw = stack_increments(pths)
    del pths
    x_ref, _, ex_ref = exact_paths(family, x0, fine_t, dw)
    ok = ex_ref < 0
    terminal_ref = x_ref[:, -1]
    eq = family.equation
    errs = []
    for d in dts:
        factor = int(round(d / ref_dt))
        coarse = dw.reshape(dw.shape[0], dw.shape[1], -1, factor).sum(axis=3)
        times = fine_t[::factor]
        states, exits = euler_maruyama_batch(eq.drift, eq.noise_fns, x0, np.diff(times), coarse,
                                             eq.domain, backend)
        ok &= exits < 0
        errs.append(states[:, -1] - terminal_ref)
    used = int(ok.sum())
    if used == 0:
        raise RuntimeError("every path left the domain")
    rms = [float(np.sqrt(np.mean(e[ok] ** 2))) for e in errs]
    if min(rms) == 0.0:
        slope = math.nan
    else:
        slope = float(np.polyfit(np.log(dts), np.log(rms), 1)[0])
    return ConvergenceReport(family.tag, dts, rms, slope, paths, used, paths - used, T, seed,
                             ref_dt, notes)
