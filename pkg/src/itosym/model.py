"""Scalar autonomous Ito equations driven by several Wiener processes.

An :class:`ItoEquation` is ``dx = f(x) dt + sum_k sigma_k(x) dw^k`` on an open
interval.  Noise coefficients are tagged by kind (:class:`Additive`,
:class:`Multiplicative`, :class:`Poisson`, :class:`Simple`,
:class:`ExpAffine` or :class:`General`) so the classifier can recognise the
combinations for which symmetric drifts are known.

:func:`standard_form_reduce` moves to ``y = c * int dx / sigma_idx``, which
turns noise ``idx`` into the additive noise ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Sequence

import numpy as np
from scipy import integrate, interpolate

from . import expr as E
from .errors import DegenerateNoises, DomainError, SingularNoise, SpecError
from .expr import Compose, Expr, Jet2

__all__ = [
    "NoiseKind",
    "Additive",
    "Multiplicative",
    "Poisson",
    "Simple",
    "ExpAffine",
    "General",
    "ItoEquation",
    "ReducedEquation",
    "VariableChange",
    "stratonovich_drift",
    "standard_form_reduce",
    "default_window",
    "check_independence",
    "equation_from_json",
    "equation_to_json",
    "noise_from_json",
    "noise_to_json",
]

REAL_LINE = (-math.inf, math.inf)
POSITIVE = (0.0, math.inf)

# proportionality threshold for the functional-independence heuristic
INDEPENDENCE_TOL = 1e-12


# -- noise kinds -------------------------------------------------------------


class NoiseKind:
    """Tagged noise coefficient.  ``fn`` is the coefficient as an expression."""

    kind: ClassVar[str] = ""

    @property
    def fn(self) -> Expr:
        raise NotImplementedError

    @property
    def domain(self) -> tuple[float, float]:
        return E.natural_domain(self.fn)

    def __call__(self, x):
        return self.fn(x)

    def jet(self, x: float) -> Jet2:
        return self.fn.jet(x)


def _nonzero(name, v):
    if v == 0.0 or not math.isfinite(v):
        raise ValueError(f"{name} must be finite and nonzero, got {v}")


@dataclass(frozen=True)
class Additive(NoiseKind):
    s: float
    kind: ClassVar[str] = "additive"

    def __post_init__(self):
        _nonzero("s", self.s)

    @property
    def fn(self):
        return E.Const(self.s)


@dataclass(frozen=True)
class Multiplicative(NoiseKind):
    s: float
    kind: ClassVar[str] = "multiplicative"

    def __post_init__(self):
        _nonzero("s", self.s)

    @property
    def fn(self):
        return E.Scale(self.s, E.x)


@dataclass(frozen=True)
class Poisson(NoiseKind):
    s: float
    kind: ClassVar[str] = "poisson"

    def __post_init__(self):
        _nonzero("s", self.s)

    @property
    def fn(self):
        return E.Scale(self.s, E.Power(E.x, 0.5))


@dataclass(frozen=True)
class Simple(NoiseKind):
    """``s * x**m`` with ``m`` outside {0, 1/2, 1}."""

    s: float
    m: float
    kind: ClassVar[str] = "simple"

    def __post_init__(self):
        _nonzero("s", self.s)
        if self.m in (0.0, 0.5, 1.0):
            raise ValueError(
                f"Simple noise with m={self.m} must be given as Additive, Poisson or Multiplicative"
            )

    @property
    def fn(self):
        return E.Scale(self.s, E.Power(E.x, self.m))

    @property
    def domain(self):
        # negative exponents are singular at 0 even when integer
        return POSITIVE if (self.m < 0 or not float(self.m).is_integer()) else REAL_LINE


@dataclass(frozen=True)
class ExpAffine(NoiseKind):
    """``alpha * exp(gamma x) + beta``."""

    alpha: float
    gamma: float
    beta: float
    kind: ClassVar[str] = "exp_affine"

    def __post_init__(self):
        _nonzero("alpha", self.alpha)
        _nonzero("gamma", self.gamma)

    @property
    def fn(self):
        return E.Scale(self.alpha, E.Exp(E.Scale(self.gamma, E.x))) + self.beta


@dataclass(frozen=True)
class General(NoiseKind):
    """Arbitrary coefficient expression (no structural recognition)."""

    function: Expr
    kind: ClassVar[str] = "general"

    @property
    def fn(self):
        return self.function


# -- equations ---------------------------------------------------------------


def _intersect(a, b):
    return (max(a[0], b[0]), min(a[1], b[1]))


@dataclass(frozen=True)
class ItoEquation:
    """``dx = drift dt + sum_k noises[k] dw^k`` on the open interval ``domain``.

    When ``domain`` is omitted it is the intersection of the natural domains
    of the coefficients.
    """

    drift: Expr
    noises: tuple[NoiseKind, ...]
    domain: tuple[float, float] | None = None

    def __post_init__(self):
        noises = tuple(self.noises)
        if not noises:
            raise ValueError("an Ito equation needs at least one noise")
        object.__setattr__(self, "noises", noises)
        dom = (E.natural_domain(self.drift) if self.domain is None else
               (float(self.domain[0]), float(self.domain[1])))
        if self.domain is None:
            for n in noises:
                dom = _intersect(dom, n.domain)
        if not dom[0] < dom[1]:
            raise ValueError(f"empty domain {dom}")
        object.__setattr__(self, "domain", dom)

    @property
    def n_noises(self) -> int:
        return len(self.noises)

    @property
    def noise_fns(self) -> tuple[Expr, ...]:
        return tuple(n.fn for n in self.noises)

    def contains(self, x: float) -> bool:
        return self.domain[0] < x < self.domain[1]

    def check_domain(self, x: float) -> None:
        if not self.contains(x):
            raise DomainError(f"x={x} outside domain {self.domain}")

    def check_independence(self, grid=None) -> None:
        check_independence(self.noises, grid if grid is not None else default_window(self.domain))


def default_window(domain=POSITIVE, n: int = 64) -> np.ndarray:
    """Chebyshev points on a bounded working window inside ``domain``.

    The window is [0.5, 4] whenever that fits, mirrored for negative
    half-lines, otherwise the middle 80% of a bounded domain.
    """
    lo, hi = domain
    if lo <= 0.5 and hi >= 4.0:
        a, b = 0.5, 4.0
    elif lo <= -4.0 and hi >= -0.5:
        a, b = -4.0, -0.5
    elif math.isfinite(lo) and math.isfinite(hi):
        pad = 0.1 * (hi - lo)
        a, b = lo + pad, hi - pad
    elif math.isfinite(lo):
        a, b = lo + 0.5, lo + 4.0
    else:
        a, b = hi - 4.0, hi - 0.5
    k = np.arange(n)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * n))[::-1]
    return 0.5 * (a + b) + 0.5 * (b - a) * nodes


def check_independence(noises: Sequence[NoiseKind], grid) -> None:
    """Raise :class:`DegenerateNoises` if two coefficients look proportional.

    With ``x0`` the grid midpoint, a pair is rejected when
    ``|s_i(x) s_j(x0) - s_i(x0) s_j(x)|`` stays below the threshold,
    relative to the size of the two products, on the whole grid.
    """
    grid = np.asarray(grid, dtype=float)
    vals = [n.fn.evaluate_array(grid) for n in noises]
    x0 = len(grid) // 2
    for i in range(len(noises)):
        for j in range(i + 1, len(noises)):
            a = vals[i] * vals[j][x0]
            b = vals[i][x0] * vals[j]
            scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
            if scale == 0.0 or np.max(np.abs(a - b)) <= INDEPENDENCE_TOL * scale:
                raise DegenerateNoises(f"noises {i} and {j} are proportional on the grid")


def stratonovich_drift(eq: ItoEquation, x: float) -> float:
    """``f - 1/2 sum_k sigma_k sigma_k'`` at ``x``."""
    eq.check_domain(x)
    b = eq.drift.evaluate(x)
    for n in eq.noises:
        j = n.jet(x)
        b -= 0.5 * j.value * j.d1
    return b


# -- changes of variables ----------------------------------------------------


class VariableChange:
    """Monotone ``y = c * int dx / sigma(x)`` with its inverse.

    Subclasses provide ``forward`` and ``inverse`` in closed form (or
    numerically); the inverse's derivatives follow from ``dx/dy = sigma/c``.
    Inverses return nan outside the image of the domain.
    """

    def __init__(self, sigma: Expr, c: float, domain):
        self.sigma = sigma
        self.c = float(c)
        self.domain = domain

    def forward(self, x: float) -> float:
        return float(self.forward_array(np.asarray(x, dtype=float)))

    def inverse(self, y: float) -> float:
        return float(self.inverse_array(np.asarray(y, dtype=float)))

    def forward_array(self, x):
        raise NotImplementedError

    def inverse_array(self, y):
        raise NotImplementedError

    def inverse_jet(self, y: float) -> Jet2:
        xv = self.inverse(y)
        if not math.isfinite(xv):
            raise DomainError(f"y={y} outside the image of the change of variables")
        s = self.sigma.jet(xv)
        return Jet2(xv, s.value / self.c, s.value * s.d1 / (self.c * self.c))

    def inverse_derivative_expr(self) -> Expr:
        return E.Scale(1.0 / self.c, self.sigma)

    def image(self) -> tuple[float, float]:
        with np.errstate(all="ignore"):
            ends = self.forward_array(np.array(self.domain, dtype=float))
        ends = [v if not math.isnan(v) else (-math.inf if i == 0 else math.inf)
                for i, v in enumerate(ends.tolist())]
        lo, hi = min(ends), max(ends)
        if math.isnan(lo) or lo == hi:
            return REAL_LINE
        return (lo, hi)


class _Identity(VariableChange):
    def forward_array(self, x):
        return np.asarray(x, dtype=float) * 1.0

    def inverse_array(self, y):
        return np.asarray(y, dtype=float) * 1.0


class _AdditiveChange(VariableChange):
    def __init__(self, s, c, domain):
        super().__init__(E.Const(s), c, domain)
        self.k = c / s

    def forward_array(self, x):
        return self.k * np.asarray(x, dtype=float)

    def inverse_array(self, y):
        return np.asarray(y, dtype=float) / self.k


class _MultiplicativeChange(VariableChange):
    def __init__(self, s, c, domain):
        super().__init__(E.Scale(s, E.x), c, domain)
        if domain[0] < 0.0 < domain[1]:
            raise SingularNoise("multiplicative noise vanishes at x=0 inside the domain")
        self.sign = 1.0 if domain[0] >= 0.0 else -1.0
        self.k = c / s

    def forward_array(self, x):
        with np.errstate(all="ignore"):
            return self.k * np.log(self.sign * np.asarray(x, dtype=float))

    def inverse_array(self, y):
        with np.errstate(all="ignore"):
            return self.sign * np.exp(np.asarray(y, dtype=float) / self.k)


class _PowerChange(VariableChange):
    """sigma = s x^m with m != 1 on a positive domain (covers Poisson)."""

    def __init__(self, s, m, c, domain):
        super().__init__(E.Scale(s, E.Power(E.x, m)), c, domain)
        if domain[0] < 0.0:
            raise SingularNoise(f"noise s*x^{m} needs a domain inside x > 0")
        self.m = m
        self.k = c / (s * (1.0 - m))

    def forward_array(self, x):
        with np.errstate(all="ignore"):
            return self.k * np.power(np.asarray(x, dtype=float), 1.0 - self.m)

    def inverse_array(self, y):
        with np.errstate(all="ignore"):
            base = np.asarray(y, dtype=float) / self.k
            return np.where(base > 0.0, np.power(base, 1.0 / (1.0 - self.m)), np.nan)


class _ExpAffineChange(VariableChange):
    def __init__(self, noise: ExpAffine, c, domain):
        super().__init__(noise.fn, c, domain)
        a, g, b = noise.alpha, noise.gamma, noise.beta
        if b != 0.0 and -b / a > 0.0:
            root = math.log(-b / a) / g
            if domain[0] < root < domain[1]:
                raise SingularNoise(f"exp-affine noise vanishes at x={root} inside the domain")
            probe = root + (1.0 if domain[0] >= root else -1.0)
        else:
            probe = 0.0
        self.a, self.g, self.b = a, g, b
        self.sgn = math.copysign(1.0, a * math.exp(g * probe) + b)

    def forward_array(self, x):
        x = np.asarray(x, dtype=float)
        a, g, b, c = self.a, self.g, self.b, self.c
        with np.errstate(all="ignore"):
            if b == 0.0:
                return -c * np.exp(-g * x) / (a * g)
            return (c / b) * (x - np.log(np.abs(a * np.exp(g * x) + b)) / g)

    def inverse_array(self, y):
        y = np.asarray(y, dtype=float)
        a, g, b, c = self.a, self.g, self.b, self.c
        with np.errstate(all="ignore"):
            if b == 0.0:
                arg = -a * g * y / c
                return np.where(arg > 0.0, -np.log(arg) / g, np.nan)
            ev = np.exp(g * b * y / c)
            u = self.sgn * b * ev / (1.0 - self.sgn * a * ev)
            return np.where(u > 0.0, np.log(u) / g, np.nan)


class NumericChange(VariableChange):
    """Quadrature-backed change of variables for general noise coefficients.

    ``y`` is tabulated on a grid over ``window`` by adaptive quadrature; the
    inverse starts from monotone (PCHIP) interpolation of the table and is
    polished by Newton steps on a local quadrature.
    """

    def __init__(self, sigma: Expr, c, domain, window=None, nodes: int = 257):
        super().__init__(sigma, c, domain)
        lo, hi = window if window is not None else _numeric_window(domain)
        xs = np.linspace(lo, hi, nodes)
        sv = sigma.evaluate_array(xs)
        if not np.all(np.isfinite(sv)) or np.any(sv == 0.0) or np.ptp(np.sign(sv)) != 0:
            raise SingularNoise("general noise vanishes or changes sign on the window")
        self.anchor = xs[nodes // 2]
        ys = np.empty(nodes)
        ys[nodes // 2] = 0.0
        for i in range(nodes // 2 + 1, nodes):
            ys[i] = ys[i - 1] + self._segment(xs[i - 1], xs[i])
        for i in range(nodes // 2 - 1, -1, -1):
            ys[i] = ys[i + 1] - self._segment(xs[i], xs[i + 1])
        order = np.argsort(ys)
        self._xs, self._ys = xs, ys
        self._interp = interpolate.PchipInterpolator(ys[order], xs[order], extrapolate=False)

    def _segment(self, a, b):
        val, _ = integrate.quad(lambda t: self.c / self.sigma.evaluate(t), a, b,
                                epsabs=1e-14, epsrel=1e-13)
        return val

    def _forward_scalar(self, x):
        i = int(np.clip(np.searchsorted(self._xs, x), 1, len(self._xs) - 1))
        near = i if abs(self._xs[i] - x) < abs(self._xs[i - 1] - x) else i - 1
        return self._ys[near] + self._segment(self._xs[near], x)

    def forward_array(self, x):
        x = np.asarray(x, dtype=float)
        out = np.array([self._forward_scalar(v) if self._xs[0] <= v <= self._xs[-1] else np.nan
                        for v in x.ravel()])
        return out.reshape(x.shape)

    def inverse_array(self, y):
        y = np.asarray(y, dtype=float)
        flat = y.ravel()
        out = np.empty_like(flat)
        for i, yv in enumerate(flat):
            xv = float(self._interp(yv)) if np.isfinite(yv) else np.nan
            if np.isfinite(xv):
                for _ in range(4):
                    step = (self._forward_scalar(xv) - yv) * self.sigma.evaluate(xv) / self.c
                    xv -= step
                    if abs(step) <= 1e-15 * max(1.0, abs(xv)):
                        break
            out[i] = xv
        return out.reshape(y.shape)

    def image(self):
        return (float(np.min(self._ys)), float(np.max(self._ys)))


def _numeric_window(domain):
    lo, hi = domain
    lo = lo if math.isfinite(lo) else -10.0
    hi = hi if math.isfinite(hi) else lo + 20.0 if lo > -10.0 else 10.0
    pad = 1e-3 * (hi - lo)
    return lo + pad, hi - pad


def variable_change(noise: NoiseKind, c: float, domain) -> VariableChange:
    """Closed-form change of variables where the kind allows, numeric otherwise."""
    if isinstance(noise, Additive):
        if noise.s == c:
            return _Identity(noise.fn, c, domain)
        return _AdditiveChange(noise.s, c, domain)
    if isinstance(noise, Multiplicative):
        return _MultiplicativeChange(noise.s, c, domain)
    if isinstance(noise, Poisson):
        return _PowerChange(noise.s, 0.5, c, domain)
    if isinstance(noise, Simple):
        return _PowerChange(noise.s, noise.m, c, domain)
    if isinstance(noise, ExpAffine):
        return _ExpAffineChange(noise, c, domain)
    return NumericChange(noise.fn, c, domain)


@dataclass(frozen=True)
class ReducedEquation:
    """Equation in ``y = forward_map(x)`` where noise ``normalized_index`` is additive."""

    equation: ItoEquation
    change: VariableChange = field(repr=False)
    normalized_index: int

    def forward_map(self, x):
        return self.change.forward_array(x) if np.ndim(x) else self.change.forward(x)

    def inverse_map(self, y):
        return self.change.inverse_array(y) if np.ndim(y) else self.change.inverse(y)


def standard_form_reduce(eq: ItoEquation, idx: int, coefficient: float = 1.0) -> ReducedEquation:
    """Change variables so that noise ``idx`` becomes ``Additive(coefficient)``.

    With ``y = c * int dx / sigma_idx`` the Ito formula gives the drift
    ``c f / sigma_idx - (c/2) sigma_idx' sum_k sigma_k^2 / sigma_idx^2`` and
    the noises ``c sigma_k / sigma_idx``, all evaluated at ``x(y)``.
    """
    if not 0 <= idx < eq.n_noises:
        raise IndexError(f"noise index {idx} out of range")
    c = float(coefficient)
    _nonzero("coefficient", c)
    chg = variable_change(eq.noises[idx], c, eq.domain)
    if isinstance(chg, _Identity):
        return ReducedEquation(eq, chg, idx)
    sig = eq.noises[idx].fn
    total = E._sum([E._prod([n.fn, n.fn]) for n in eq.noises])
    outer = (E._scale(c, E._prod([eq.drift, E.Power(sig, -1.0)]))
             + E._scale(-0.5 * c, E._prod([sig.derivative(), total, E.Power(sig, -2.0)])))
    noises = []
    for k, n in enumerate(eq.noises):
        if k == idx:
            noises.append(Additive(c))
        else:
            noises.append(General(Compose(E._scale(c, E._prod([n.fn, E.Power(sig, -1.0)])), chg)))
    reduced = ItoEquation(Compose(outer, chg), tuple(noises), chg.image())
    return ReducedEquation(reduced, chg, idx)


# -- JSON ----------------------------------------------------------------------

_NOISE_FIELDS = {
    "additive": (Additive, ("s",)),
    "multiplicative": (Multiplicative, ("s",)),
    "poisson": (Poisson, ("s",)),
    "simple": (Simple, ("s", "m")),
    "exp_affine": (ExpAffine, ("alpha", "gamma", "beta")),
}


def noise_from_json(obj, where="noise") -> NoiseKind:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SpecError("noise must be an object with a 'kind' field", where)
    kind = obj["kind"]
    if kind == "general":
        if "fn" not in obj:
            raise SpecError("missing field 'fn'", where)
        return General(E.from_json(obj["fn"], f"{where}.fn"))
    if kind not in _NOISE_FIELDS:
        raise SpecError(f"unknown noise kind {kind!r}", f"{where}.kind")
    cls, names = _NOISE_FIELDS[kind]
    args = []
    for name in names:
        if name not in obj:
            raise SpecError(f"missing field {name!r}", where)
        args.append(E._number(obj[name], f"{where}.{name}"))
    try:
        return cls(*args)
    except ValueError as exc:
        raise SpecError(str(exc), where) from exc


def noise_to_json(noise: NoiseKind) -> dict:
    if isinstance(noise, General):
        return {"kind": "general", "fn": E.to_json(noise.function)}
    _, names = _NOISE_FIELDS[noise.kind]
    return {"kind": noise.kind, **{n: getattr(noise, n) for n in names}}


def _bound(v, where):
    if v is None:
        return None
    if isinstance(v, str) and v in ("-inf", "inf", "+inf"):
        return float(v)
    return E._number(v, where)


def equation_from_json(obj) -> ItoEquation:
    """Parse ``{"drift": <expr>, "noises": [...], "domain": [lo, hi]}``.

    Infinite domain ends are written as ``null`` or the strings ``"-inf"`` /
    ``"inf"``; ``domain`` may be omitted.
    """
    if not isinstance(obj, dict):
        raise SpecError("equation spec must be a JSON object")
    if "drift" not in obj:
        raise SpecError("missing field 'drift'")
    drift = E.from_json(obj["drift"], "drift")
    noises = obj.get("noises")
    if not isinstance(noises, list) or not noises:
        raise SpecError("'noises' must be a non-empty list", "noises")
    parsed = tuple(noise_from_json(n, f"noises[{i}]") for i, n in enumerate(noises))
    domain = None
    if obj.get("domain") is not None:
        d = obj["domain"]
        if not isinstance(d, list) or len(d) != 2:
            raise SpecError("domain must be [lo, hi]", "domain")
        lo = _bound(d[0], "domain[0]")
        hi = _bound(d[1], "domain[1]")
        domain = (-math.inf if lo is None else lo, math.inf if hi is None else hi)
    try:
        return ItoEquation(drift, parsed, domain)
    except ValueError as exc:
        raise SpecError(str(exc), "domain") from exc


def equation_to_json(eq: ItoEquation) -> dict:
    lo, hi = eq.domain
    return {
        "drift": E.to_json(eq.drift),
        "noises": [noise_to_json(n) for n in eq.noises],
        "domain": [None if math.isinf(lo) else lo, None if math.isinf(hi) else hi],
    }
