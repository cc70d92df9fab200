"""Expression trees for coefficient functions of one variable.

Every drift and noise coefficient in the package is an :class:`Expr`.  Values
and the first two derivatives are obtained by pushing a second-order forward
jet (:class:`Jet2`) through the tree, so derivative values are exact up to
rounding; there is no finite differencing and no symbolic rewriting on the
evaluation path.

Node kinds: ``const``, ``x``, ``power``, ``exp``, ``sum``, ``product`` and
``scale``.  A power with a non-integer exponent is only defined for a
strictly positive base.  :class:`Compose` is an internal node that evaluates
an outer tree at ``x(y)`` for a change of variables; it has no JSON form.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainError, SpecError

__all__ = [
    "Jet2",
    "Expr",
    "Const",
    "X",
    "Power",
    "Exp",
    "Sum",
    "Product",
    "Scale",
    "Compose",
    "const",
    "x",
    "evaluate",
    "eval_jet2",
    "natural_domain",
    "from_json",
    "to_json",
]


@dataclass(frozen=True)
class Jet2:
    """Value with first and second derivative, d/dx and d2/dx2."""

    value: float
    d1: float = 0.0
    d2: float = 0.0

    def __add__(self, other: Jet2) -> Jet2:
        return Jet2(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)

    def __sub__(self, other: Jet2) -> Jet2:
        return Jet2(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)

    def __mul__(self, other: Jet2 | float) -> Jet2:
        if isinstance(other, Jet2):
            a, b = self, other
            return Jet2(
                a.value * b.value,
                a.d1 * b.value + a.value * b.d1,
                a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2,
            )
        c = float(other)
        return Jet2(c * self.value, c * self.d1, c * self.d2)

    __rmul__ = __mul__

    def exp(self) -> Jet2:
        e = math.exp(self.value)
        return Jet2(e, e * self.d1, e * (self.d2 + self.d1 * self.d1))

    def pow(self, p: float) -> Jet2:
        a = self.value
        if p == 0.0:
            return Jet2(1.0)
        if p == 1.0:
            return self
        if not float(p).is_integer():
            if a <= 0.0:
                raise DomainError(f"non-integer power {p} of non-positive base {a}")
        elif p < 0 and a == 0.0:
            raise DomainError(f"negative power {p} of zero")
        v1 = p * a ** (p - 1.0)
        v2 = p * (p - 1.0) * a ** (p - 2.0) if p != 2.0 else 2.0
        return Jet2(a**p, v1 * self.d1, v2 * self.d1 * self.d1 + v1 * self.d2)

    def compose(self, inner: Jet2) -> Jet2:
        """Chain rule: ``self`` holds g(x), g', g'' at x = inner.value."""
        return Jet2(
            self.value,
            self.d1 * inner.d1,
            self.d2 * inner.d1 * inner.d1 + self.d1 * inner.d2,
        )


def _as_expr(obj: Any) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, numbers.Real):
        return Const(float(obj))
    raise TypeError(f"cannot use {type(obj).__name__} as an expression")


class Expr:
    """Base class of expression nodes.

    Arithmetic operators build new trees, so ``2 * x**0.5 + 1`` works as
    expected with ``x`` the module-level variable node.
    """

    __slots__ = ()

    # -- construction helpers -------------------------------------------
    def __add__(self, other):
        return _sum([self, _as_expr(other)])

    def __radd__(self, other):
        return _sum([_as_expr(other), self])

    def __sub__(self, other):
        return _sum([self, _scale(-1.0, _as_expr(other))])

    def __rsub__(self, other):
        return _sum([_as_expr(other), _scale(-1.0, self)])

    def __neg__(self):
        return _scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, numbers.Real):
            return _scale(float(other), self)
        return _prod([self, _as_expr(other)])

    def __rmul__(self, other):
        if isinstance(other, numbers.Real):
            return _scale(float(other), self)
        return _prod([_as_expr(other), self])

    def __truediv__(self, other):
        if isinstance(other, numbers.Real):
            return _scale(1.0 / float(other), self)
        return _prod([self, Power(_as_expr(other), -1.0)])

    def __rtruediv__(self, other):
        return _prod([_as_expr(other), Power(self, -1.0)])

    def __pow__(self, p):
        if not isinstance(p, numbers.Real):
            raise TypeError("only real constant exponents are supported")
        return Power(self, float(p))

    # -- evaluation -----------------------------------------------------
    def evaluate(self, x: float) -> float:
        try:
            v = self._value(float(x))
        except (OverflowError, ZeroDivisionError) as exc:
            raise DomainError(f"{self} not finite at x={x}") from exc
        if not math.isfinite(v):
            raise DomainError(f"{self} not finite at x={x}")
        return v

    def evaluate_array(self, x) -> np.ndarray:
        """Vectorised evaluation; invalid points come back as nan or inf."""
        with np.errstate(all="ignore"):
            return np.asarray(self._array(np.asarray(x, dtype=float)), dtype=float)

    def jet(self, x: float) -> Jet2:
        try:
            j = self._jet(float(x))
        except (OverflowError, ZeroDivisionError) as exc:
            raise DomainError(f"{self} not finite at x={x}") from exc
        if not (math.isfinite(j.value) and math.isfinite(j.d1) and math.isfinite(j.d2)):
            raise DomainError(f"{self} derivatives not finite at x={x}")
        return j

    def __call__(self, x):
        if np.ndim(x):
            return self.evaluate_array(x)
        return self.evaluate(x)

    def _value(self, x: float) -> float:
        raise NotImplementedError

    def _array(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _jet(self, x: float) -> Jet2:
        raise NotImplementedError

    def derivative(self) -> Expr:
        """Tree for d/dx, with trivial constant folding only."""
        raise NotImplementedError

    def children(self) -> tuple[Expr, ...]:
        return ()

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def _value(self, x):
        return self.value

    def _array(self, x):
        return np.full_like(x, self.value)

    def _jet(self, x):
        return Jet2(self.value)

    def derivative(self):
        return Const(0.0)

    def __str__(self):
        return _fmt(self.value)


@dataclass(frozen=True)
class X(Expr):
    def _value(self, x):
        return x

    def _array(self, x):
        return x

    def _jet(self, x):
        return Jet2(x, 1.0, 0.0)

    def derivative(self):
        return Const(1.0)

    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: float

    def _value(self, x):
        b = self.base._value(x)
        p = self.exponent
        if not float(p).is_integer():
            if b <= 0.0:
                raise DomainError(f"non-integer power {p} of non-positive base {b}")
        elif p < 0 and b == 0.0:
            raise DomainError(f"negative power {p} of zero")
        return b**p

    def _array(self, x):
        b = self.base._array(x)
        out = np.power(b, self.exponent)
        if not float(self.exponent).is_integer():
            out = np.where(b > 0.0, out, np.nan)
        return out

    def _jet(self, x):
        return self.base._jet(x).pow(self.exponent)

    def derivative(self):
        p = self.exponent
        if p == 0.0:
            return Const(0.0)
        if p == 1.0:
            return self.base.derivative()
        inner = self.base.derivative()
        outer = self.base if p == 2.0 else Power(self.base, p - 1.0)
        return _scale(p, _prod([outer, inner]))

    def children(self):
        return (self.base,)

    def __str__(self):
        return f"({self.base})^{_fmt(self.exponent)}"


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def _value(self, x):
        return math.exp(self.arg._value(x))

    def _array(self, x):
        return np.exp(self.arg._array(x))

    def _jet(self, x):
        return self.arg._jet(x).exp()

    def derivative(self):
        return _prod([self, self.arg.derivative()])

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"exp({self.arg})"


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def _value(self, x):
        return sum((t._value(x) for t in self.terms), 0.0)

    def _array(self, x):
        out = np.zeros_like(x)
        for t in self.terms:
            out = out + t._array(x)
        return out

    def _jet(self, x):
        acc = Jet2(0.0)
        for t in self.terms:
            acc = acc + t._jet(x)
        return acc

    def derivative(self):
        return _sum([t.derivative() for t in self.terms])

    def children(self):
        return self.terms

    def __str__(self):
        return "(" + " + ".join(str(t) for t in self.terms) + ")" if self.terms else "0"


@dataclass(frozen=True)
class Product(Expr):
    factors: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def _value(self, x):
        v = 1.0
        for f in self.factors:
            v *= f._value(x)
        return v

    def _array(self, x):
        out = np.ones_like(x)
        for f in self.factors:
            out = out * f._array(x)
        return out

    def _jet(self, x):
        acc = Jet2(1.0)
        for f in self.factors:
            acc = acc * f._jet(x)
        return acc

    def derivative(self):
        terms = []
        for i, f in enumerate(self.factors):
            rest = [g for j, g in enumerate(self.factors) if j != i]
            terms.append(_prod(rest + [f.derivative()]))
        return _sum(terms)

    def children(self):
        return self.factors

    def __str__(self):
        return "*".join(str(f) for f in self.factors) if self.factors else "1"


@dataclass(frozen=True)
class Scale(Expr):
    factor: float
    arg: Expr

    def _value(self, x):
        return self.factor * self.arg._value(x)

    def _array(self, x):
        return self.factor * self.arg._array(x)

    def _jet(self, x):
        return self.arg._jet(x) * self.factor

    def derivative(self):
        return _scale(self.factor, self.arg.derivative())

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"{_fmt(self.factor)}*{self.arg}"


@dataclass(frozen=True, eq=False)
class Compose(Expr):
    """``outer`` evaluated at ``x = inner.inverse(y)``.

    ``inner`` is a change of variables exposing ``inverse``,
    ``inverse_array``, ``inverse_jet`` and ``inverse_derivative_expr``
    (see :mod:`itosym.model`).
    """

    outer: Expr
    inner: Any

    def _value(self, y):
        return self.outer._value(self.inner.inverse(y))

    def _array(self, y):
        return self.outer._array(self.inner.inverse_array(y))

    def _jet(self, y):
        xj = self.inner.inverse_jet(y)
        return self.outer._jet(xj.value).compose(xj)

    def derivative(self):
        return Compose(
            _prod([self.outer.derivative(), self.inner.inverse_derivative_expr()]),
            self.inner,
        )

    def children(self):
        return (self.outer,)

    def __str__(self):
        return f"[{self.outer}]@x(y)"


# -- constant-folding constructors ----------------------------------------


def _sum(terms: list[Expr]) -> Expr:
    flat: list[Expr] = []
    c = 0.0
    for t in terms:
        if isinstance(t, Sum):
            stack = list(t.terms)
        else:
            stack = [t]
        for s in stack:
            if isinstance(s, Const):
                c += s.value
            else:
                flat.append(s)
    if c != 0.0 or not flat:
        flat.append(Const(c))
    return flat[0] if len(flat) == 1 else Sum(tuple(flat))


def _prod(factors: list[Expr]) -> Expr:
    flat: list[Expr] = []
    c = 1.0
    for f in factors:
        while isinstance(f, Scale):
            c *= f.factor
            f = f.arg
        if isinstance(f, Const):
            c *= f.value
        elif isinstance(f, Product):
            flat.extend(f.factors)
        else:
            flat.append(f)
    if c == 0.0:
        return Const(0.0)
    if not flat:
        return Const(c)
    body = flat[0] if len(flat) == 1 else Product(tuple(flat))
    return body if c == 1.0 else Scale(c, body)


def _scale(c: float, e: Expr) -> Expr:
    if c == 0.0:
        return Const(0.0)
    if c == 1.0:
        return e
    if isinstance(e, Const):
        return Const(c * e.value)
    if isinstance(e, Scale):
        return _scale(c * e.factor, e.arg)
    return Scale(c, e)


def _fmt(v: float) -> str:
    return repr(float(v))


# -- module-level API -----------------------------------------------------

x = X()


def const(v: float) -> Const:
    return Const(float(v))


def evaluate(fn: Expr, x: float) -> float:
    """Value of ``fn`` at ``x``; raises :class:`DomainError` outside its domain."""
    return fn.evaluate(x)


def eval_jet2(fn: Expr, x: float) -> Jet2:
    """``(fn(x), fn'(x), fn''(x))`` by forward jet propagation."""
    return fn.jet(x)


def natural_domain(fn: Expr) -> tuple[float, float]:
    """Interval on which ``fn`` is declared: x > 0 when any non-integer power occurs."""
    for node in fn.walk():
        if isinstance(node, Power) and not float(node.exponent).is_integer():
            return (0.0, math.inf)
    return (-math.inf, math.inf)


# -- JSON ------------------------------------------------------------------


def to_json(fn: Expr) -> dict:
    if isinstance(fn, Const):
        return {"kind": "const", "value": fn.value}
    if isinstance(fn, X):
        return {"kind": "x"}
    if isinstance(fn, Power):
        return {"kind": "power", "base": to_json(fn.base), "exp": fn.exponent}
    if isinstance(fn, Exp):
        return {"kind": "exp", "arg": to_json(fn.arg)}
    if isinstance(fn, Sum):
        return {"kind": "sum", "terms": [to_json(t) for t in fn.terms]}
    if isinstance(fn, Product):
        return {"kind": "product", "factors": [to_json(f) for f in fn.factors]}
    if isinstance(fn, Scale):
        return {"kind": "scale", "factor": fn.factor, "arg": to_json(fn.arg)}
    raise TypeError(f"{type(fn).__name__} nodes have no JSON form")


def _number(obj, where):
    if isinstance(obj, bool) or not isinstance(obj, numbers.Real):
        raise SpecError(f"expected a number, got {obj!r}", where)
    v = float(obj)
    if not math.isfinite(v):
        raise SpecError("number must be finite", where)
    return v


def _field(obj, key, where):
    if key not in obj:
        raise SpecError(f"missing field {key!r}", where)
    return obj[key]


def from_json(obj, where: str = "expr") -> Expr:
    """Parse the JSON form; bare numbers and the string ``"x"`` are shorthands."""
    if isinstance(obj, numbers.Real) and not isinstance(obj, bool):
        return Const(_number(obj, where))
    if obj == "x":
        return x
    if not isinstance(obj, dict):
        raise SpecError(f"expected an expression object, got {obj!r}", where)
    kind = _field(obj, "kind", where)
    if kind == "const":
        return Const(_number(_field(obj, "value", where), f"{where}.value"))
    if kind == "x":
        return x
    if kind == "power":
        base = from_json(_field(obj, "base", where), f"{where}.base")
        return Power(base, _number(_field(obj, "exp", where), f"{where}.exp"))
    if kind == "exp":
        return Exp(from_json(_field(obj, "arg", where), f"{where}.arg"))
    if kind in ("sum", "product"):
        key = "terms" if kind == "sum" else "factors"
        items = _field(obj, key, where)
        if not isinstance(items, list) or not items:
            raise SpecError(f"{key!r} must be a non-empty list", f"{where}.{key}")
        parsed = tuple(from_json(it, f"{where}.{key}[{i}]") for i, it in enumerate(items))
        return Sum(parsed) if kind == "sum" else Product(parsed)
    if kind == "scale":
        factor = _number(_field(obj, "factor", where), f"{where}.factor")
        return Scale(factor, from_json(_field(obj, "arg", where), f"{where}.arg"))
    raise SpecError(f"unknown expression kind {kind!r}", f"{where}.kind")
