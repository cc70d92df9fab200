"""Integrating maps built from a symmetry and exact pathwise solutions.

For a family with ``phi = g(x) exp(kappa t + lambda . w)`` the map
``y = int dx / phi = G(x) E(t, w)``, ``E = exp(-kappa t - lambda . w)``,
turns the equation into ``dy = F dt + sum_k S_k dw^k`` with ``F`` and
``S_k`` free of ``y``.  For the families here ``F = F0 E`` and
``S_k = S0[k] E``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureFailure
from .model import ItoEquation
from .paths import COMPLETE, DOMAIN_EXIT, Trajectory, WienerPath
from .symmetry import FAMILIES, SymmetricFamily, SymmetryCoefficient, make_family

FD_STEP = 1e-4


def _resolve(family, params=None) -> SymmetricFamily:
    if isinstance(family, str):
        return make_family(family, **(params or {}))
    if params:
        return family.with_params(**params)
    return family


def _exponent(phi: SymmetryCoefficient, t, w):
    """``-kappa t - lambda . w`` for ``w`` of shape (..., N)."""
    lam = np.asarray(phi.rates_w, dtype=float)
    return -phi.rate_t * np.asarray(t, dtype=float) - np.asarray(w, dtype=float) @ lam


@dataclass(frozen=True)
class KozlovMap:
    """``forward(x, t, w) = G(x) E(t, w)`` and its inverse in ``x``.

    ``w`` is a sequence of the N Wiener values (or an array with them on the
    last axis).  The inverse is nan where ``y`` is outside the image.
    """

    family: SymmetricFamily

    def E(self, t, w):
        return np.exp(_exponent(self.family.phi, t, w))

    def forward(self, x, t, w):
        out = self.family.G(x) * self.E(t, w)
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, y, t, w):
        out = self.family.G_inv(np.asarray(y, dtype=float) / self.E(t, w))
        return float(out) if np.ndim(out) == 0 else out


def kozlov_map(family, params=None) -> KozlovMap:
    return KozlovMap(_resolve(family, params))


@dataclass(frozen=True)
class TransformedCoefficients:
    """``F(t, w)`` and ``S[k](t, w)`` of the equation for ``y``."""

    F: Callable
    S: tuple[Callable, ...]


def transformed_coefficients(family, params=None) -> TransformedCoefficients:
    fam = _resolve(family, params)
    km = KozlovMap(fam)
    F0, S0 = fam.F0, fam.S0

    def F(t, w):
        return F0 * km.E(t, w)

    def make_S(c):
        return lambda t, w: c * km.E(t, w)

    return TransformedCoefficients(F, tuple(make_S(c) for c in S0))


def _default_anchor(domain):
    lo, hi = domain
    if lo <= 1.0 < hi and lo >= 0.0:
        return 1.0
    if lo < 0.0 < hi:
        return 0.0
    return 0.5 * (lo + hi) if math.isfinite(lo + hi) else (lo + 1.0 if math.isfinite(lo) else hi - 1.0)


def _quad(fn, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        except (integrate.IntegrationWarning, DomainError, OverflowError, ZeroDivisionError) as exc:
            raise QuadratureFailure(f"quadrature on [{a}, {b}] did not converge: {exc}") from exc
    if not math.isfinite(val) or err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureFailure(f"quadrature on [{a}, {b}] error estimate {err:g}")
    return val


def _generic_at(eq: ItoEquation, phi: SymmetryCoefficient, x, t, ws, anchor):
    n = eq.n_noises

    def parts(xv):
        # every integrand is O(1/phi), so an overflowing phi contributes nothing;
        # inside the domain a non-finite phi can only be an overflow
        try:
            q = phi.partials((xv, t, *ws))
        except (OverflowError, DomainError):
            if not eq.contains(xv):
                raise
            return None
        return None if math.isinf(q.value) else q

    p = parts(x)
    sig = [s.fn.evaluate(x) for s in eq.noises]
    f = eq.drift.evaluate(x)
    F_local = f / p.value - math.fsum(
        sig[k] * p.w[k] / p.value ** 2 + sig[k] ** 2 * p.x / (2 * p.value ** 2) for k in range(n))

    def f_int(xv):
        q = parts(xv)
        if q is None:
            return 0.0
        v = q.value
        # ratios first so large phi cannot overflow the squares
        return (0.5 * math.fsum(q.ww[k] / v - 2 * (q.w[k] / v) ** 2 for k in range(n)) + q.t / v) / v

    F = F_local - _quad(f_int, anchor, x)
    S = []
    for k in range(n):
        def s_int(xv, k=k):
            q = parts(xv)
            return 0.0 if q is None else q.w[k] / q.value / q.value

        S.append(sig[k] / p.value - _quad(s_int, anchor, x))
    return F, tuple(S)


def transformed_coefficients_numeric(eq: ItoEquation, phi: SymmetryCoefficient, point,
                                     anchor: float | None = None, derivative: bool = False):
    """``F`` and ``S_k`` from the general change-of-variables formulas.

    The x-integrals run from ``anchor`` (default ``phi.anchor``, else a
    point inside the domain) by adaptive quadrature; they may start at an
    infinite endpoint.  With ``derivative`` the central-difference
    x-derivatives ``(dF/dx, dS_k/dx)`` are returned as well.
    """
    x, t, *ws = point
    x, t = float(x), float(t)
    ws = tuple(float(v) for v in ws)
    eq.check_domain(x)
    if anchor is None:
        anchor = phi.anchor if phi.anchor is not None else _default_anchor(eq.domain)
    F, S = _generic_at(eq, phi, x, t, ws, anchor)
    if not derivative:
        return F, S
    h = FD_STEP * max(1.0, abs(x))
    Fp, Sp = _generic_at(eq, phi, x + h, t, ws, anchor)
    Fm, Sm = _generic_at(eq, phi, x - h, t, ws, anchor)
    return (F, S), ((Fp - Fm) / (2 * h), tuple((a - b) / (2 * h) for a, b in zip(Sp, Sm)))


def exact_paths(family: SymmetricFamily, x0: float, times, dw):
    """Exact solutions for stacked increments ``dw`` of shape (P, N, steps).

    Returns ``(x, y, exit_step)``; rows past an exit are nan.
    """
    fam = family
    phi = fam.phi
    dw = np.asarray(dw, dtype=float)
    P, N, n = dw.shape
    if N != phi.n_noises:
        raise ValueError(f"path has {N} noises, family has {phi.n_noises}")
    lo, hi = fam.domain
    if not lo < x0 < hi:
        raise DomainError(f"x0={x0} outside domain {fam.domain}")
    dt = np.diff(np.asarray(times, dtype=float))
    w = np.zeros((P, n + 1, N))
    np.cumsum(np.moveaxis(dw, 1, 2), axis=1, out=w[:, 1:, :])
    ex = np.exp(_exponent(phi, times, w))  # (P, n+1)
    y0 = float(fam.G(x0))
    incr = fam.F0 * ex[:, :-1] * dt + np.einsum("k,pkn->pn", np.asarray(fam.S0), dw) * ex[:, :-1]
    y = np.empty((P, n + 1))
    y[:, 0] = y0
    np.cumsum(incr, axis=1, out=y[:, 1:])
    y[:, 1:] += y0
    x = fam.G_inv(y / ex)
    bad = ~(np.isfinite(x) & (x > lo) & (x < hi))
    exit_step = np.where(bad.any(axis=1), bad.argmax(axis=1), -1)
    for p in np.flatnonzero(exit_step >= 0):
        x[p, exit_step[p]:] = np.nan
        y[p, exit_step[p]:] = np.nan
    return x, y, exit_step


def exact_solution(family, params, x0: float, path: WienerPath) -> Trajectory:
    """Pathwise solution via left-point sums of the transformed equation.

    ``y`` starts at ``forward(x0, 0, 0)`` and is mapped back at every grid
    time; an invalid inverse ends the trajectory with a domain exit.
    """
    fam = _resolve(family, params)
    x, y, ex = exact_paths(fam, float(x0), path.times, path.increments[None])
    e = int(ex[0])
    if e < 0:
        return Trajectory(path.times, x[0], COMPLETE, None, y[0])
    return Trajectory(path.times[:e], x[0, :e], DOMAIN_EXIT, float(path.times[e]), y[0, :e])


__all__ = [
    "FAMILIES",
    "KozlovMap",
    "TransformedCoefficients",
    "kozlov_map",
    "transformed_coefficients",
    "transformed_coefficients_numeric",
    "exact_paths",
    "exact_solution",
]
