"""Seeded multi-noise Wiener paths, Euler-Maruyama and strong errors.

Seeds map to paths through :class:`numpy.random.SeedSequence`: noise ``k``
of a path draws from child ``k`` of the sequence built from the seed (and
the optional stream index), with ``standard_normal``.  The mapping is stable
for a given numpy version; cross-platform bit equality is not promised.

File formats
------------
``.npz``
    arrays ``times``, ``increments`` (N x steps), ``seed`` and ``stream``
    (-1 when absent); lossless.
``.csv``
    header ``t,dw_1,...,dw_N``; row ``n`` holds ``t_n`` and the increments
    over ``[t_{n-1}, t_n]`` (row 0 has zeros).  Values use ``repr`` so they
    round-trip exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadFactor, BadGrid, IncomparableTrajectories
from .kernels import euler_maruyama_batch

COMPLETE = "complete"
DOMAIN_EXIT = "domain_exit"


@dataclass(frozen=True, eq=False)
class WienerPath:
    """Time grid and per-noise increments ``increments[k, n] = w^k(t_{n+1}) - w^k(t_n)``."""

    times: np.ndarray
    increments: np.ndarray
    seed: int | None = None
    stream: int | None = None

    @property
    def n_noises(self) -> int:
        return self.increments.shape[0]

    @property
    def n_steps(self) -> int:
        return self.increments.shape[1]

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def values(self) -> np.ndarray:
        """``w^k(t_n)`` with ``w^k(0) = 0``; shape N x (steps + 1)."""
        out = np.zeros((self.n_noises, self.n_steps + 1))
        np.cumsum(self.increments, axis=1, out=out[:, 1:])
        return out


@dataclass(eq=False)
class Trajectory:
    """States at ``times`` up to (excluding) a domain exit, if any."""

    times: np.ndarray
    states: np.ndarray
    status: str = COMPLETE
    exit_time: float | None = None
    transformed: np.ndarray | None = field(default=None, repr=False)

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE

    @property
    def terminal(self) -> float:
        return float(self.states[-1])


def uniform_grid(T: float, dt: float) -> np.ndarray:
    """``[0, dt, ..., T]``; ``T`` must be a whole number of steps."""
    if T < 0 or dt <= 0:
        raise BadGrid("need T >= 0 and dt > 0")
    n = int(round(T / dt))
    if not math.isclose(n * dt, T, rel_tol=1e-9, abs_tol=1e-15):
        raise BadGrid(f"T={T} is not a multiple of dt={dt}")
    return np.linspace(0.0, T, n + 1) if n else np.zeros(1)


def _check_grid(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or len(t) < 1 or t[0] != 0.0:
        raise BadGrid("time grid must be a 1-d sequence starting at 0")
    if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
        raise BadGrid("time grid must be finite and strictly increasing")
    return t


def _seed_sequence(seed, stream):
    return np.random.SeedSequence(seed if stream is None else [seed, stream])


def sample_wiener(n_noises: int, t_grid, seed: int, stream: int | None = None) -> WienerPath:
    """Draw a reproducible path; each noise uses its own spawned substream."""
    if n_noises < 1:
        raise BadGrid("n_noises must be at least 1")
    t = _check_grid(t_grid)
    sq = np.sqrt(np.diff(t))
    children = _seed_sequence(seed, stream).spawn(n_noises)
    inc = np.empty((n_noises, len(t) - 1))
    for k, child in enumerate(children):
        inc[k] = np.random.default_rng(child).standard_normal(len(t) - 1) * sq
    return WienerPath(t, inc, seed, stream)


def sample_paths(n_noises: int, t_grid, seed: int, paths: int) -> list[WienerPath]:
    """``paths`` independent paths, path ``i`` on stream ``i`` of ``seed``."""
    return [sample_wiener(n_noises, t_grid, seed, i) for i in range(paths)]


def coarsen(path: WienerPath, factor: int) -> WienerPath:
    """Sum consecutive blocks of ``factor`` increments."""
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise BadFactor(f"factor must be a positive integer, got {factor!r}")
    if path.n_steps % factor:
        raise BadFactor(f"factor {factor} does not divide {path.n_steps} steps")
    inc = path.increments.reshape(path.n_noises, -1, factor).sum(axis=2)
    return WienerPath(path.times[::factor].copy(), inc, path.seed, path.stream)


def stack_increments(paths) -> np.ndarray:
    """Increments of same-grid paths as a (paths, N, steps) array."""
    times = paths[0].times
    for p in paths[1:]:
        if p.times.shape != times.shape or not np.array_equal(p.times, times):
            raise BadGrid("paths must share one time grid")
    return np.stack([p.increments for p in paths])


def _trajectory(times, row, exit_step):
    if exit_step < 0:
        return Trajectory(times, row)
    return Trajectory(times[:exit_step], row[:exit_step], DOMAIN_EXIT, float(times[exit_step]))


def euler_maruyama(eq, x0: float, path: WienerPath, backend: str | None = None) -> Trajectory:
    """``x_{n+1} = x_n + f(x_n) dt_n + sum_k sigma_k(x_n) dw^k_n``.

    Leaving the domain (or a non-finite state) stops the run; the trajectory
    keeps the states before the exit and records the exit time.
    """
    return euler_maruyama_many(eq, x0, [path], backend)[0]


def euler_maruyama_many(eq, x0: float, paths, backend: str | None = None) -> list[Trajectory]:
    if len(paths) == 0:
        return []
    eq.check_domain(x0)
    if paths[0].n_noises != eq.n_noises:
        raise BadGrid(f"path has {paths[0].n_noises} noises, equation has {eq.n_noises}")
    dw = stack_increments(paths)
    times = paths[0].times
    states, exits = euler_maruyama_batch(eq.drift, eq.noise_fns, x0, np.diff(times), dw,
                                         eq.domain, backend)
    return [_trajectory(times, states[i], int(exits[i])) for i in range(len(paths))]


def strong_error(a: Trajectory, b: Trajectory, sup: bool = False) -> float:
    """``|a_T - b_T|``, or the sup over shared times when ``sup``.

    ``b`` may live on a refinement of ``a``'s grid.
    """
    if not (a.complete and b.complete):
        raise IncomparableTrajectories("both trajectories must be complete")
    if not math.isclose(a.times[-1], b.times[-1], rel_tol=1e-12, abs_tol=1e-15):
        raise IncomparableTrajectories("terminal times differ")
    if not sup:
        return abs(a.terminal - b.terminal)
    idx = np.searchsorted(b.times, a.times)
    idx = np.clip(idx, 0, len(b.times) - 1)
    if not np.allclose(b.times[idx], a.times, rtol=1e-12, atol=1e-15):
        raise IncomparableTrajectories("grid of b does not contain the grid of a")
    return float(np.max(np.abs(a.states - b.states[idx])))


# -- I/O -----------------------------------------------------------------------


def save_path(path: WienerPath, dest) -> None:
    dest = Path(dest)
    if dest.suffix == ".npz":
        np.savez(dest, times=path.times, increments=path.increments,
                 seed=-1 if path.seed is None else path.seed,
                 stream=-1 if path.stream is None else path.stream)
        return
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"dw_{k + 1}" for k in range(path.n_noises)])
        zeros = np.zeros((path.n_noises, 1))
        inc = np.hstack([zeros, path.increments])
        for n, t in enumerate(path.times):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in inc[:, n]])


def load_path(src) -> WienerPath:
    src = Path(src)
    if src.suffix == ".npz":
        with np.load(src) as d:
            seed, stream = int(d["seed"]), int(d["stream"])
            return WienerPath(d["times"].copy(), d["increments"].copy(),
                              None if seed < 0 else seed, None if stream < 0 else stream)
    data = np.loadtxt(src, delimiter=",", skiprows=1, ndmin=2)
    return WienerPath(_check_grid(data[:, 0]), data[1:, 1:].T.copy())


def write_trajectory_csv(traj: Trajectory, path: WienerPath, dest) -> None:
    """Columns ``t, x, y, w_1..w_N``; ``y`` is empty when not available."""
    w = path.values()
    n = len(traj.times)
    with open(dest, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "x", "y"] + [f"w_{k + 1}" for k in range(path.n_noises)])
        for i in range(n):
            y = "" if traj.transformed is None else repr(float(traj.transformed[i]))
            out.writerow([repr(float(traj.times[i])), repr(float(traj.states[i])), y]
                         + [repr(float(v)) for v in w[:, i]])
