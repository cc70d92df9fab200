"""Standard symmetries ``phi(x, t, w) d/dx`` of scalar Ito equations.

Every symmetric family handled here has a coefficient of the shape
``phi = g(x) * exp(kappa t + sum_k lambda_k w^k)``, so all partials are
closed-form: the x-part comes from second-order jets of ``g`` and the t/w
parts are multiples of ``phi``.

Contents
--------
* :class:`SymmetryCoefficient` and the four families ``AM``, ``PM``, ``MS``
  and ``EA`` (see :data:`FAMILIES`).
* The pair compatibility test (``lambda_fn``, ``compat_J``, ``compat_K``,
  :func:`check_compatibility`, :func:`pairwise_compat`).
* :func:`classify`, which recognises the families from noise kinds.
* Determining-equation residuals for any number of noises.
* :func:`three_noise_probe`, a symmetric three-noise equation whose noises
  are necessarily linearly dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import ClassVar, Sequence

import numpy as np

from . import expr as E
from .errors import DegenerateNoises, DegenerateProbe
from .expr import Expr
from .model import (
    POSITIVE,
    REAL_LINE,
    Additive,
    ExpAffine,
    General,
    ItoEquation,
    Multiplicative,
    NoiseKind,
    Poisson,
    Simple,
    check_independence,
    default_window,
)

LAMBDA_EPS = 1e-14
DEFAULT_TOL = 1e-8


# -- symmetry coefficient ----------------------------------------------------


@dataclass(frozen=True)
class PhiPartials:
    """Closed-form partials of phi at one point; ``w[k]`` is d/dw^k."""

    value: float
    x: float
    xx: float
    t: float
    w: tuple[float, ...]
    xw: tuple[float, ...]
    ww: tuple[float, ...]

    # two-noise names
    @property
    def z(self):
        return self.w[1]

    @property
    def xz(self):
        return self.xw[1]

    @property
    def zz(self):
        return self.ww[1]


def _split(point):
    x, t, *ws = point
    if len(ws) == 1 and np.ndim(ws[0]) == 1:
        ws = list(ws[0])
    return float(x), float(t), tuple(float(v) for v in ws)


@dataclass(frozen=True)
class SymmetryCoefficient:
    """``phi = g(x) exp(rate_t * t + sum_k rates_w[k] * w^k)``.

    Points are ``(x, t, w^1, ..., w^N)``.  ``anchor`` is the x at which
    ``int dx / phi`` is taken to vanish (may be infinite).
    """

    g: Expr
    rate_t: float
    rates_w: tuple[float, ...]
    anchor: float | None = None

    @property
    def n_noises(self):
        return len(self.rates_w)

    def _exp(self, t, ws):
        if len(ws) != len(self.rates_w):
            raise ValueError(f"expected {len(self.rates_w)} Wiener values, got {len(ws)}")
        return math.exp(self.rate_t * t + math.fsum(l * w for l, w in zip(self.rates_w, ws)))

    def __call__(self, point) -> float:
        x, t, ws = _split(point)
        return self.g.evaluate(x) * self._exp(t, ws)

    def partials(self, point) -> PhiPartials:
        x, t, ws = _split(point)
        e = self._exp(t, ws)
        j = self.g.jet(x)
        v = j.value * e
        lam = self.rates_w
        return PhiPartials(
            value=v,
            x=j.d1 * e,
            xx=j.d2 * e,
            t=self.rate_t * v,
            w=tuple(l * v for l in lam),
            xw=tuple(l * j.d1 * e for l in lam),
            ww=tuple(l * l * v for l in lam),
        )

    def __str__(self):
        names = ["w", "z"] if self.n_noises == 2 else [f"w{k + 1}" for k in range(self.n_noises)]
        terms = [f"{self.rate_t!r}*t"] + [f"{l!r}*{n}" for l, n in zip(self.rates_w, names) if l != 0.0]
        return f"({self.g}) * exp({' + '.join(terms)})"


# -- families ----------------------------------------------------------------


def _noise(cls, *args):
    # a vanishing coefficient is legal in a family instance but not as a tagged kind
    return General(E.Const(0.0)) if args[0] == 0.0 else cls(*args)


@dataclass(frozen=True)
class SymmetricFamily:
    """Base for the classified families.

    Subclasses define the noises, the drift and ``phi``, plus the pieces of
    the integrating map ``y = G(x) * exp(-kappa t - lambda . w)`` where
    ``G' = 1/g``: :meth:`G`, its inverse :meth:`G_inv` (nan when invalid),
    the drift constant ``F0`` and noise constants ``S0`` of the transformed
    equation ``dy = F0 E dt + sum_k S0[k] E dw^k``.
    """

    tag: ClassVar[str] = ""
    domain: ClassVar[tuple[float, float]] = REAL_LINE
    free: ClassVar[tuple[str, ...]] = ()
    constraints: ClassVar[dict[str, str]] = {}

    @property
    def params(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def noises(self) -> tuple[NoiseKind, ...]:
        raise NotImplementedError

    @property
    def drift(self) -> Expr:
        raise NotImplementedError

    @property
    def phi(self) -> SymmetryCoefficient:
        raise NotImplementedError

    @property
    def equation(self) -> ItoEquation:
        return ItoEquation(self.drift, self.noises, self.domain)

    def G(self, x):
        raise NotImplementedError

    def G_inv(self, u):
        raise NotImplementedError

    @property
    def F0(self) -> float:
        raise NotImplementedError

    @property
    def S0(self) -> tuple[float, ...]:
        raise NotImplementedError

    def with_params(self, **kw):
        return type(self)(**{**self.params, **kw})


@dataclass(frozen=True)
class AM(SymmetricFamily):
    """Additive ``s1`` on w, multiplicative ``s2 x`` on z, drift ``alpha + beta x``."""

    s1: float
    s2: float
    alpha: float
    beta: float
    tag: ClassVar[str] = "AM"
    free: ClassVar[tuple[str, ...]] = ("alpha", "beta")

    @property
    def noises(self):
        return (_noise(Additive, self.s1), _noise(Multiplicative, self.s2))

    @property
    def drift(self):
        return E._sum([E.Const(self.alpha), E._scale(self.beta, E.x)])

    @property
    def phi(self):
        return SymmetryCoefficient(E.Const(1.0), self.beta - 0.5 * self.s2 ** 2,
                                   (0.0, self.s2), anchor=0.0)

    def G(self, x):
        return np.asarray(x, dtype=float) * 1.0

    def G_inv(self, u):
        return np.asarray(u, dtype=float) * 1.0

    @property
    def F0(self):
        return self.alpha

    @property
    def S0(self):
        return (self.s1, 0.0)


@dataclass(frozen=True)
class PM(SymmetricFamily):
    """Poisson ``s1 sqrt(x)`` on w, multiplicative ``s2 x`` on z.

    Drift ``s1^2/4 + c2 sqrt(x) + c3 x`` on x > 0.
    """

    s1: float
    s2: float
    c2: float
    c3: float
    tag: ClassVar[str] = "PM"
    domain: ClassVar[tuple[float, float]] = POSITIVE
    free: ClassVar[tuple[str, ...]] = ("c2", "c3")
    constraints: ClassVar[dict[str, str]] = {"c1": "s1^2/4"}

    @property
    def noises(self):
        return (_noise(Poisson, self.s1), _noise(Multiplicative, self.s2))

    @property
    def drift(self):
        return E._sum([E.Const(0.25 * self.s1 ** 2),
                       E._scale(self.c2, E.Power(E.x, 0.5)),
                       E._scale(self.c3, E.x)])

    @property
    def phi(self):
        return SymmetryCoefficient(E.Power(E.x, 0.5), 0.25 * (2 * self.c3 - self.s2 ** 2),
                                   (0.0, 0.5 * self.s2), anchor=0.0)

    def G(self, x):
        with np.errstate(invalid="ignore"):
            return 2.0 * np.sqrt(np.asarray(x, dtype=float))

    def G_inv(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(u > 0.0, (0.5 * u) ** 2, np.nan)

    @property
    def F0(self):
        return self.c2

    @property
    def S0(self):
        return (self.s1, 0.0)


@dataclass(frozen=True)
class MS(SymmetricFamily):
    """Simple ``s1 x^m`` on w, multiplicative ``s2 x`` on z, on x > 0.

    Drift ``((s2^2 - 2Q) x + m s1^2 x^(2m-1)) / 2 + C x^m``.
    """

    s1: float
    s2: float
    m: float
    C: float
    Q: float
    tag: ClassVar[str] = "MS"
    domain: ClassVar[tuple[float, float]] = POSITIVE
    free: ClassVar[tuple[str, ...]] = ("C", "Q")

    def __post_init__(self):
        if self.m in (0.0, 0.5, 1.0):
            raise ValueError(f"MS family requires m outside {{0, 1/2, 1}}, got {self.m}")

    @property
    def noises(self):
        return (_noise(Simple, self.s1, self.m), _noise(Multiplicative, self.s2))

    @property
    def drift(self):
        m = self.m
        return E._sum([E._scale(0.5 * (self.s2 ** 2 - 2 * self.Q), E.x),
                       E._scale(0.5 * m * self.s1 ** 2, E.Power(E.x, 2 * m - 1)),
                       E._scale(self.C, E.Power(E.x, m))])

    @property
    def phi(self):
        m = self.m
        return SymmetryCoefficient(E.Power(E.x, m), (m - 1) * self.Q, (0.0, -(m - 1) * self.s2),
                                   anchor=0.0 if m < 1 else math.inf)

    def G(self, x):
        p = 1.0 - self.m
        with np.errstate(all="ignore"):
            return np.power(np.asarray(x, dtype=float), p) / p

    def G_inv(self, u):
        p = 1.0 - self.m
        base = p * np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            return np.where(base > 0.0, np.power(base, 1.0 / p), np.nan)

    @property
    def F0(self):
        return self.C

    @property
    def S0(self):
        return (self.s1, 0.0)


@dataclass(frozen=True)
class EA(SymmetricFamily):
    """Noise ``alpha e^(gamma x) + beta`` on w, additive ``s2`` on z.

    Drift ``alpha^2 gamma e^(2 gamma x) / 2 + chi e^(gamma x) + delta``.
    """

    s2: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    chi: float
    tag: ClassVar[str] = "EA"
    free: ClassVar[tuple[str, ...]] = ("chi", "delta")

    def __post_init__(self):
        if self.alpha == 0.0 or self.gamma == 0.0:
            raise ValueError("EA family requires nonzero alpha and gamma")

    @property
    def noises(self):
        return (ExpAffine(self.alpha, self.gamma, self.beta), _noise(Additive, self.s2))

    @property
    def drift(self):
        eg = E.Exp(E._scale(self.gamma, E.x))
        e2g = E.Exp(E._scale(2 * self.gamma, E.x))
        return E._sum([E._scale(0.5 * self.alpha ** 2 * self.gamma, e2g),
                       E._scale(self.chi, eg), E.Const(self.delta)])

    @property
    def phi(self):
        g = self.gamma
        return SymmetryCoefficient(E.Exp(E._scale(g, E.x)), -g * self.delta,
                                   (-g * self.beta, -g * self.s2),
                                   anchor=math.inf if g > 0 else -math.inf)

    def G(self, x):
        with np.errstate(over="ignore"):
            return -np.exp(-self.gamma * np.asarray(x, dtype=float)) / self.gamma

    def G_inv(self, u):
        arg = -self.gamma * np.asarray(u, dtype=float)
        with np.errstate(all="ignore"):
            return np.where(arg > 0.0, -np.log(arg) / self.gamma, np.nan)

    @property
    def F0(self):
        return self.chi

    @property
    def S0(self):
        return (self.alpha, 0.0)


FAMILIES: dict[str, type[SymmetricFamily]] = {"AM": AM, "PM": PM, "MS": MS, "EA": EA}

DEFAULTS: dict[str, dict[str, float]] = {
    "AM": {"s1": 0.5, "s2": 0.4, "alpha": 0.3, "beta": 0.2},
    "PM": {"s1": 0.5, "s2": 0.4, "c2": 0.3, "c3": 0.2},
    "MS": {"s1": 0.1, "s2": 0.4, "m": 2.0, "C": -0.2, "Q": 0.1},
    "EA": {"s2": 0.5, "alpha": 0.3, "beta": 0.2, "gamma": 0.5, "delta": 0.1, "chi": -0.1},
}

DEFAULT_X0 = {"AM": 1.0, "PM": 1.0, "MS": 1.0, "EA": 0.0}


def make_family(tag: str, **params) -> SymmetricFamily:
    """Family ``tag`` with defaults overridden by ``params``."""
    try:
        cls = FAMILIES[tag.upper()]
    except KeyError:
        raise ValueError(f"unknown family {tag!r}; choose from {sorted(FAMILIES)}") from None
    merged = {**DEFAULTS[cls.tag], **params}
    unknown = set(merged) - {f.name for f in fields(cls)}
    if unknown:
        raise ValueError(f"unknown parameters for {cls.tag}: {sorted(unknown)}")
    return cls(**{k: float(v) for k, v in merged.items()})


def make_phi(family: SymmetricFamily) -> SymmetryCoefficient:
    return family.phi


# -- compatibility -----------------------------------------------------------


def lambda_fn(sigma: NoiseKind, rho: NoiseKind, x: float) -> float:
    """``sigma rho' - sigma' rho``."""
    s, r = sigma.jet(x), rho.jet(x)
    return s.value * r.d1 - s.d1 * r.value


def _jk(sigma, rho, x):
    s, r = sigma.jet(x), rho.jet(x)
    lam = s.value * r.d1 - s.d1 * r.value
    if abs(lam) < LAMBDA_EPS:
        raise DegenerateNoises(f"noises are functionally dependent at x={x}")
    dlam = s.value * r.d2 - s.d2 * r.value
    return (s.value * dlam - s.d1 * lam) / lam, (r.value * dlam - r.d1 * lam) / lam


def compat_J(sigma: NoiseKind, rho: NoiseKind, x: float) -> float:
    """``(sigma Lambda' - sigma' Lambda) / Lambda`` with ``Lambda = lambda_fn``."""
    return _jk(sigma, rho, x)[0]


def compat_K(sigma: NoiseKind, rho: NoiseKind, x: float) -> float:
    """``(rho Lambda' - rho' Lambda) / Lambda``; swapping the noises swaps J and K."""
    return _jk(sigma, rho, x)[1]


@dataclass(frozen=True)
class ConstancyReport:
    values_on_grid: np.ndarray = field(repr=False)
    mean: float
    spread: float
    is_constant: bool
    tol_used: float

    @classmethod
    def from_values(cls, values, tol):
        v = np.asarray(values, dtype=float)
        mean = float(np.mean(v))
        spread = float(np.max(v) - np.min(v))
        return cls(v, mean, spread, bool(spread <= tol * (1.0 + abs(mean))), tol)


def _grid_for(noises, grid):
    if grid is not None:
        return np.asarray(grid, dtype=float)
    dom = REAL_LINE
    for n in noises:
        d = n.domain
        dom = (max(dom[0], d[0]), min(dom[1], d[1]))
    return default_window(dom)


def check_compatibility(sigma: NoiseKind, rho: NoiseKind, grid=None,
                        tol: float = DEFAULT_TOL) -> tuple[ConstancyReport, ConstancyReport]:
    """Constancy reports for J and K of the pair on ``grid``."""
    grid = _grid_for((sigma, rho), grid)
    if len(grid) < 8:
        raise ValueError("compatibility grid needs at least 8 points")
    jk = np.array([_jk(sigma, rho, xv) for xv in grid])
    return ConstancyReport.from_values(jk[:, 0], tol), ConstancyReport.from_values(jk[:, 1], tol)


def pairwise_compat(noises: Sequence[NoiseKind], grid=None, tol: float = DEFAULT_TOL):
    """``{(m, n): (J report, K report)}`` for every pair ``m < n``."""
    if len(noises) < 2:
        raise ValueError("pairwise compatibility needs at least two noises")
    grid = _grid_for(noises, grid)
    check_independence(noises, grid)
    return {(i, j): check_compatibility(noises[i], noises[j], grid, tol)
            for i in range(len(noises)) for j in range(i + 1, len(noises))}


def all_compatible(reports) -> bool:
    return all(rj.is_constant and rk.is_constant for rj, rk in reports.values())


# -- classification ----------------------------------------------------------


NO_SYMMETRY_REASONS = ("IncompatibleJK", "ThreeOrMoreNoises", "AdditivePoisson",
                       "Unclassified", "DriftOutsideFamily")


@dataclass(frozen=True)
class Symmetric:
    """A recognised family: noise parameters fixed, drift parameters ``free``.

    ``noise_order[k]`` is the input position of the family's k-th noise.
    """

    family: str
    noise_params: dict
    noise_order: tuple[int, ...]

    @property
    def free(self):
        return FAMILIES[self.family].free

    @property
    def constraints(self):
        return FAMILIES[self.family].constraints

    def instantiate(self, **free) -> SymmetricFamily:
        dflt = {k: 0.0 for k in self.free}
        return FAMILIES[self.family](**self.noise_params, **{**dflt, **free})


@dataclass(frozen=True)
class NoSymmetry:
    reason: str

    def __post_init__(self):
        if self.reason not in NO_SYMMETRY_REASONS:
            raise ValueError(f"unknown reason {self.reason!r}")


ClassificationResult = Symmetric | NoSymmetry


def _structural(a: NoiseKind, b: NoiseKind):
    """Family match for the ordered pair (a, b), or None."""
    if isinstance(a, Additive) and isinstance(b, Multiplicative):
        return Symmetric("AM", {"s1": a.s, "s2": b.s}, (0, 1))
    if isinstance(a, Poisson) and isinstance(b, Multiplicative):
        return Symmetric("PM", {"s1": a.s, "s2": b.s}, (0, 1))
    if isinstance(a, Simple) and isinstance(b, Multiplicative):
        return Symmetric("MS", {"s1": a.s, "s2": b.s, "m": a.m}, (0, 1))
    if isinstance(a, ExpAffine) and isinstance(b, Additive):
        return Symmetric("EA", {"s2": b.s, "alpha": a.alpha, "beta": a.beta, "gamma": a.gamma},
                         (0, 1))
    if isinstance(a, Additive) and isinstance(b, Poisson):
        return NoSymmetry("AdditivePoisson")
    return None


def classify(noises: Sequence[NoiseKind], grid=None, tol: float = DEFAULT_TOL):
    """Classify a noise list by the standard symmetries its equations can admit.

    Returns :class:`Symmetric` for the recognised pairs (in either order) and
    :class:`NoSymmetry` otherwise.  Raises :class:`DegenerateNoises` for
    proportional noises.
    """
    noises = tuple(noises)
    if len(noises) >= 3:
        check_independence(noises, _grid_for(noises, grid))
        return NoSymmetry("ThreeOrMoreNoises")
    if len(noises) < 2:
        return NoSymmetry("Unclassified")
    g = _grid_for(noises, grid)
    check_independence(noises, g)
    for order in ((0, 1), (1, 0)):
        hit = _structural(noises[order[0]], noises[order[1]])
        if hit is not None:
            if isinstance(hit, Symmetric):
                return Symmetric(hit.family, hit.noise_params, order)
            return hit
    rj, rk = check_compatibility(noises[0], noises[1], g, tol)
    if not (rj.is_constant and rk.is_constant):
        return NoSymmetry("IncompatibleJK")
    return NoSymmetry("Unclassified")


def _drift_basis(fam: Symmetric):
    """Fixed part and free-parameter basis of the family drift."""
    p = fam.noise_params
    x = E.x
    if fam.family == "AM":
        return E.Const(0.0), {"alpha": E.Const(1.0), "beta": x}
    if fam.family == "PM":
        return E.Const(0.25 * p["s1"] ** 2), {"c2": E.Power(x, 0.5), "c3": x}
    if fam.family == "MS":
        m = p["m"]
        fixed = E._sum([E._scale(0.5 * p["s2"] ** 2, x),
                        E._scale(0.5 * m * p["s1"] ** 2, E.Power(x, 2 * m - 1))])
        return fixed, {"C": E.Power(x, m), "Q": E._scale(-1.0, x)}
    g = p["gamma"]
    fixed = E._scale(0.5 * p["alpha"] ** 2 * g, E.Exp(E._scale(2 * g, x)))
    return fixed, {"chi": E.Exp(E._scale(g, x)), "delta": E.Const(1.0)}


def fit_drift(result: Symmetric, drift: Expr, grid=None, tol: float = 1e-9):
    """Free drift parameters that reproduce ``drift`` within the family.

    Least squares on ``grid``; returns ``None`` when the relative misfit
    exceeds ``tol``.
    """
    fam_cls = FAMILIES[result.family]
    grid = np.asarray(grid, dtype=float) if grid is not None else default_window(fam_cls.domain)
    fixed, basis = _drift_basis(result)
    target = drift.evaluate_array(grid) - fixed.evaluate_array(grid)
    A = np.column_stack([b.evaluate_array(grid) for b in basis.values()])
    coef, *_ = np.linalg.lstsq(A, target, rcond=None)
    misfit = np.max(np.abs(A @ coef - target))
    scale = 1.0 + np.max(np.abs(drift.evaluate_array(grid)))
    if not np.isfinite(misfit) or misfit > tol * scale:
        return None
    return {k: float(c) for k, c in zip(basis, coef)}


# -- determining equations ---------------------------------------------------


def _check_n(eq, phi):
    if eq.n_noises != phi.n_noises:
        raise ValueError(f"equation has {eq.n_noises} noises, phi expects {phi.n_noises}")


def ito_laplacian(eq: ItoEquation, phi: SymmetryCoefficient, point) -> float:
    """``sum_k phi_kk + 2 sum_k sigma_k phi_xk + (sum_k sigma_k^2) phi_xx``."""
    _check_n(eq, phi)
    x = float(point[0])
    eq.check_domain(x)
    p = phi.partials(point)
    sig = [n.fn.evaluate(x) for n in eq.noises]
    return (math.fsum(p.ww) + 2.0 * math.fsum(s * d for s, d in zip(sig, p.xw))
            + math.fsum(s * s for s in sig) * p.xx)


def residual_second_order(eq: ItoEquation, phi: SymmetryCoefficient, point) -> float:
    """``phi_t + f phi_x - phi f' + lap(phi)/2``."""
    x = float(point[0])
    lap = ito_laplacian(eq, phi, point)
    p = phi.partials(point)
    f = eq.drift.jet(x)
    return p.t + f.value * p.x - p.value * f.d1 + 0.5 * lap


def residual_noise_eqs(eq: ItoEquation, phi: SymmetryCoefficient, point) -> tuple[float, ...]:
    """``phi_k + sigma_k phi_x - phi sigma_k'`` for each noise k."""
    _check_n(eq, phi)
    x = float(point[0])
    eq.check_domain(x)
    p = phi.partials(point)
    out = []
    for k, n in enumerate(eq.noises):
        s = n.jet(x)
        out.append(p.w[k] + s.value * p.x - p.value * s.d1)
    return tuple(out)


def residual_first_order(eq: ItoEquation, phi: SymmetryCoefficient, point) -> float:
    """``phi_t + b phi_x - phi b'`` with ``b`` the Stratonovich drift."""
    _check_n(eq, phi)
    x = float(point[0])
    eq.check_domain(x)
    p = phi.partials(point)
    f = eq.drift.jet(x)
    b, db = f.value, f.d1
    for n in eq.noises:
        s = n.jet(x)
        b -= 0.5 * s.value * s.d1
        db -= 0.5 * (s.d1 * s.d1 + s.value * s.d2)
    return p.t + b * p.x - p.value * db


# -- three noises ------------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    equation: ItoEquation
    phi: SymmetryCoefficient
    q: tuple[float, float, float]
    max_determining_residual: float
    max_dependence_residual: float
    grid: np.ndarray = field(repr=False)


def three_noise_probe(alpha, k1, c1, k2, c2, gamma, delta, q3, grid=None,
                      seed: int = 0) -> ProbeReport:
    """Build the symmetric three-noise equation and check its two properties.

    Noises ``c1 + k1 e^(alpha x)``, ``c2 + k2 e^(alpha x)`` and ``1``; drift
    ``alpha (k1^2 + k2^2) e^(2 alpha x) / 2 + gamma e^(alpha x) + delta`` and
    ``phi = exp(-alpha (delta t + c1 w1 + c2 w2 + w3 - x))``.  Residuals of
    all determining equations are maximised over ``grid`` (64 points on
    [-1, 1] by default) with ``(t, w)`` drawn from ``seed``; the dependence
    residual is ``max |q1 s1 + q2 s2 + q3|``.
    """
    det = c2 * k1 - c1 * k2
    if det == 0.0 or k1 == 0.0 or k2 == 0.0:
        raise DegenerateProbe("noises must be pairwise independent (c2 k1 != c1 k2, k1, k2 != 0)")
    if alpha == 0.0:
        raise DegenerateProbe("alpha must be nonzero")
    if q3 == 0.0:
        raise DegenerateProbe("q3 must be nonzero")
    ea = E.Exp(E._scale(alpha, E.x))
    sig1 = General(E._sum([E.Const(c1), E._scale(k1, ea)]))
    sig2 = General(E._sum([E.Const(c2), E._scale(k2, ea)]))
    sig3 = Additive(1.0)
    drift = E._sum([E._scale(0.5 * alpha * (k1 ** 2 + k2 ** 2), E.Exp(E._scale(2 * alpha, E.x))),
                    E._scale(gamma, ea), E.Const(delta)])
    eq = ItoEquation(drift, (sig1, sig2, sig3), REAL_LINE)
    phi = SymmetryCoefficient(ea, -alpha * delta, (-alpha * c1, -alpha * c2, -alpha))
    q1 = q3 * k2 / det
    q2 = q3 * k1 / (-det)

    grid = np.linspace(-1.0, 1.0, 64) if grid is None else np.asarray(grid, dtype=float)
    rng = np.random.default_rng(seed)
    res = 0.0
    for xv in grid:
        t = rng.uniform(0.0, 0.5)
        ws = rng.uniform(-0.5, 0.5, 3)
        pt = (xv, t, *ws)
        res = max(res, abs(residual_second_order(eq, phi, pt)),
                  max(abs(r) for r in residual_noise_eqs(eq, phi, pt)))
    dep = q1 * sig1.fn.evaluate_array(grid) + q2 * sig2.fn.evaluate_array(grid) + q3
    return ProbeReport(eq, phi, (q1, q2, q3), float(res), float(np.max(np.abs(dep))), grid)
