"""Euler-Maruyama batch kernels.

Expression trees are flattened into postfix programs and interpreted by a
small stack machine inside an ``@njit`` loop over paths and steps.  Trees
containing :class:`~itosym.expr.Compose` nodes cannot be flattened; those,
and every tree when numba is unavailable or disabled, go through
:func:`em_numpy`, which steps all paths at once with ``evaluate_array``.
"""

from __future__ import annotations

import math

import numpy as np

from . import _jit
from . import expr as E
from ._jit import njit

OP_CONST, OP_X, OP_ADD, OP_MUL, OP_SCALE, OP_POW, OP_EXP = range(7)


class NotCompilable(Exception):
    pass


def _emit(node, ops, args, depth=0):
    """Append postfix code for ``node``; returns the max stack depth used."""
    if isinstance(node, E.Const):
        ops.append(OP_CONST)
        args.append(node.value)
        return depth + 1
    if isinstance(node, E.X):
        ops.append(OP_X)
        args.append(0.0)
        return depth + 1
    if isinstance(node, (E.Sum, E.Product)):
        items = node.terms if isinstance(node, E.Sum) else node.factors
        peak = depth
        for i, child in enumerate(items):
            peak = max(peak, _emit(child, ops, args, depth + i))
        ops.append(OP_ADD if isinstance(node, E.Sum) else OP_MUL)
        args.append(float(len(items)))
        return max(peak, depth + 1)
    if isinstance(node, E.Scale):
        peak = _emit(node.arg, ops, args, depth)
        ops.append(OP_SCALE)
        args.append(node.factor)
        return peak
    if isinstance(node, E.Power):
        peak = _emit(node.base, ops, args, depth)
        ops.append(OP_POW)
        args.append(float(node.exponent))
        return peak
    if isinstance(node, E.Exp):
        peak = _emit(node.arg, ops, args, depth)
        ops.append(OP_EXP)
        args.append(0.0)
        return peak
    raise NotCompilable(type(node).__name__)


def compile_programs(fns):
    """Concatenate postfix programs for ``fns``.

    Returns ``(ops, args, starts, stack_size)``; program ``i`` occupies
    ``ops[starts[i]:starts[i+1]]``.
    """
    ops, args, starts = [], [], [0]
    stack = 1
    for fn in fns:
        stack = max(stack, _emit(fn, ops, args))
        starts.append(len(ops))
    return (np.array(ops, dtype=np.int64), np.array(args, dtype=np.float64),
            np.array(starts, dtype=np.int64), stack)


@njit(cache=True)
def _run(ops, args, lo, hi, x, stack):
    sp = 0
    for i in range(lo, hi):
        op = ops[i]
        a = args[i]
        if op == 0:
            stack[sp] = a
            sp += 1
        elif op == 1:
            stack[sp] = x
            sp += 1
        elif op == 2:
            n = int(a)
            acc = 0.0
            for j in range(sp - n, sp):
                acc += stack[j]
            sp -= n
            stack[sp] = acc
            sp += 1
        elif op == 3:
            n = int(a)
            acc = 1.0
            for j in range(sp - n, sp):
                acc *= stack[j]
            sp -= n
            stack[sp] = acc
            sp += 1
        elif op == 4:
            stack[sp - 1] *= a
        elif op == 5:
            b = stack[sp - 1]
            if a == math.floor(a):
                if b == 0.0 and a < 0.0:
                    stack[sp - 1] = math.inf
                else:
                    stack[sp - 1] = b ** a
            elif b > 0.0:
                stack[sp - 1] = b ** a
            else:
                stack[sp - 1] = math.nan
        else:
            stack[sp - 1] = math.exp(stack[sp - 1])
    return stack[0]


@njit(cache=True)
def em_kernel(ops, args, starts, stack_size, x0, dt, dw, lo, hi):
    """Euler-Maruyama on ``dw[p, k, n]``; program 0 is the drift.

    Returns ``(states, exit_step)`` where ``exit_step[p] = -1`` for complete
    paths and otherwise the first step index whose state left ``(lo, hi)``;
    states from that index on are nan.
    """
    n_paths, n_noises, n_steps = dw.shape
    states = np.full((n_paths, n_steps + 1), np.nan)
    exit_step = np.full(n_paths, -1, dtype=np.int64)
    stack = np.empty(stack_size)
    for p in range(n_paths):
        x = x0
        states[p, 0] = x
        for n in range(n_steps):
            dx = _run(ops, args, starts[0], starts[1], x, stack) * dt[n]
            for k in range(n_noises):
                dx += _run(ops, args, starts[k + 1], starts[k + 2], x, stack) * dw[p, k, n]
            x = x + dx
            if not (lo < x < hi) or not math.isfinite(x):
                exit_step[p] = n + 1
                break
            states[p, n + 1] = x
    return states, exit_step


def em_numpy(drift, noises, x0, dt, dw, lo, hi):
    """Vectorised-over-paths Euler-Maruyama with the same contract as :func:`em_kernel`."""
    n_paths, n_noises, n_steps = dw.shape
    states = np.full((n_paths, n_steps + 1), np.nan)
    exit_step = np.full(n_paths, -1, dtype=np.int64)
    x = np.full(n_paths, float(x0))
    states[:, 0] = x
    alive = np.ones(n_paths, dtype=bool)
    for n in range(n_steps):
        xa = x[alive]
        with np.errstate(all="ignore"):
            dx = drift.evaluate_array(xa) * dt[n]
            for k, s in enumerate(noises):
                dx = dx + s.evaluate_array(xa) * dw[alive, k, n]
            xa = xa + dx
        x[alive] = xa
        ok = np.isfinite(xa) & (xa > lo) & (xa < hi)
        idx = np.flatnonzero(alive)
        exit_step[idx[~ok]] = n + 1
        states[idx[ok], n + 1] = xa[ok]
        alive[idx[~ok]] = False
        if not alive.any():
            break
    return states, exit_step


def numba_active() -> bool:
    return _jit.HAVE_NUMBA


def euler_maruyama_batch(drift, noises, x0, dt, dw, domain, backend: str | None = None):
    """Dispatch to the compiled or numpy kernel.

    ``backend`` is ``"numba"``, ``"numpy"`` or ``None`` (numba when
    available and the trees compile).
    """
    dt = np.ascontiguousarray(dt, dtype=np.float64)
    dw = np.ascontiguousarray(dw, dtype=np.float64)
    lo, hi = float(domain[0]), float(domain[1])
    if backend not in (None, "numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend != "numpy" and _jit.HAVE_NUMBA:
        try:
            ops, args, starts, stack = compile_programs([drift, *noises])
        except NotCompilable:
            if backend == "numba":
                raise
        else:
            return em_kernel(ops, args, starts, stack, float(x0), dt, dw, lo, hi)
    elif backend == "numba":
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    return em_numpy(drift, noises, x0, dt, dw, lo, hi)
