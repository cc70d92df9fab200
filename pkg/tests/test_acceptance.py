"""Acceptance suite: eight end-to-end checks at fixed tolerances.

Each ``check_N`` returns ``(ok, detail)``; the matching test asserts ``ok``
and the one-line verdicts are printed in the pytest terminal summary (or to
stdout when this file is run as a script).
"""

import math
import time

import numpy as np
import pytest

from itosym.expr import Const, Power, Scale, x
from itosym.kozlov import exact_solution, transformed_coefficients, transformed_coefficients_numeric
from itosym.model import (
    Additive,
    ExpAffine,
    General,
    ItoEquation,
    Multiplicative,
    Poisson,
    Simple,
    standard_form_reduce,
)
from itosym.convergence import convergence_study, halving_levels
from itosym.paths import euler_maruyama, sample_wiener, uniform_grid
from itosym.symmetry import (
    DEFAULT_X0,
    NoSymmetry,
    Symmetric,
    check_compatibility,
    classify,
    compat_J,
    compat_K,
    make_family,
    residual_first_order,
    residual_noise_eqs,
    residual_second_order,
    three_noise_probe,
)

RESULTS: list[str] = []
SEED = 20240601


def _record(n, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n} ({title}): {detail}"
    RESULTS.append(line)
    return ok, line


def _nonzero(rng, lo, hi):
    return float(rng.choice([-1.0, 1.0]) * rng.uniform(lo, hi))


def _draw(tag, rng, m=None):
    if tag == "AM":
        return make_family("AM", s1=_nonzero(rng, 0.1, 1.0), s2=_nonzero(rng, 0.1, 1.0),
                           alpha=rng.uniform(-1, 1), beta=rng.uniform(-1, 1))
    if tag == "PM":
        return make_family("PM", s1=_nonzero(rng, 0.1, 1.0), s2=_nonzero(rng, 0.1, 1.0),
                           c2=rng.uniform(-1, 1), c3=rng.uniform(-1, 1))
    if tag == "MS":
        return make_family("MS", s1=_nonzero(rng, 0.1, 1.0), s2=_nonzero(rng, 0.1, 1.0), m=m,
                           C=rng.uniform(-1, 1), Q=rng.uniform(-1, 1))
    return make_family("EA", s2=_nonzero(rng, 0.1, 1.0), alpha=_nonzero(rng, 0.1, 1.0),
                       beta=rng.uniform(-1, 1), gamma=_nonzero(rng, 0.2, 1.0),
                       delta=rng.uniform(-1, 1), chi=rng.uniform(-1, 1))


VARIANTS = [("AM", None), ("PM", None), ("MS", -1.0), ("MS", 2.0), ("MS", 3.0), ("EA", None)]


def _point(fam, rng):
    xv = rng.uniform(0.2, 3.0) if fam.domain[0] == 0.0 else rng.uniform(-2.0, 2.0)
    return (xv, rng.uniform(0.0, 1.0), *rng.uniform(-1.0, 1.0, 2))


# -- 1 and 2: determining equations ----------------------------------------------------

_residual_cache = {}


def _residual_sweep():
    if "sweep" not in _residual_cache:
        rng = np.random.default_rng(SEED)
        start = time.perf_counter()
        worst, gap = 0.0, 0.0
        for tag, m in VARIANTS:
            for _ in range(100):
                fam = _draw(tag, rng, m)
                eq, phi = fam.equation, fam.phi
                for _ in range(32):
                    pt = _point(fam, rng)
                    r2 = residual_second_order(eq, phi, pt)
                    r1 = residual_first_order(eq, phi, pt)
                    rn = residual_noise_eqs(eq, phi, pt)
                    worst = max(worst, abs(r2), *map(abs, rn))
                    gap = max(gap, abs(r1 - r2))
        _residual_cache["sweep"] = (worst, gap, time.perf_counter() - start)
    return _residual_cache["sweep"]


def check_1():
    worst, _, elapsed = _residual_sweep()
    ok = worst <= 1e-9 and elapsed < 5.0
    return _record(1, "symmetry residuals", ok,
                   f"max residual {worst:.2e} (<= 1e-9) in {elapsed:.2f} s (< 5 s)")


def check_2():
    _, gap, _ = _residual_sweep()
    return _record(2, "first/second order equivalence", gap <= 1e-10,
                   f"max |first - second| {gap:.2e} (<= 1e-10)")


# -- 3: compatibility classifier ----------------------------------------------------------


def _simple(s, l):
    return {0.0: Additive, 1.0: Multiplicative, 0.5: Poisson}.get(l, lambda v: Simple(v, l))(s)


def check_3():
    accept = [
        ((Additive(0.7), Multiplicative(1.1)), "AM"),
        ((Poisson(0.7), Multiplicative(-1.1)), "PM"),
        ((Multiplicative(0.4), Simple(0.6, 2.0)), "MS"),
        ((ExpAffine(0.5, 0.7, 0.2), Additive(0.8)), "EA"),
    ]
    reject = [(Additive(1.0), Poisson(1.0)), (Simple(1.0, 2.0), Simple(0.8, 3.0))]
    bad = []
    for noises, tag in accept:
        res = classify(noises)
        if not (isinstance(res, Symmetric) and res.family == tag):
            bad.append(f"{tag} not accepted ({res})")
        rj, rk = check_compatibility(*noises)
        if not (rj.is_constant and rk.is_constant):
            bad.append(f"{tag} has nonconstant J/K")
    for noises in reject:
        res = classify(noises)
        rj, rk = check_compatibility(*noises)
        if not isinstance(res, NoSymmetry) or (rj.is_constant and rk.is_constant):
            bad.append(f"{noises} not rejected via J/K ({res})")
    rng = np.random.default_rng(SEED + 3)
    exps = [0.0, 0.5, 1.0, 2.0, 3.0, -1.0, 1.5]
    jk_err = 0.0
    for _ in range(200):
        l, m = rng.choice(exps, 2, replace=False)
        s, r = _nonzero(rng, 0.2, 2.0), _nonzero(rng, 0.2, 2.0)
        xv = rng.uniform(0.3, 4.0)
        sig, rho = _simple(s, l), _simple(r, m)
        for got, want in ((compat_J(sig, rho, xv), (m - 1) * s * xv ** (l - 1)),
                          (compat_K(sig, rho, xv), (l - 1) * r * xv ** (m - 1))):
            jk_err = max(jk_err, abs(got - want) / max(1.0, abs(want)))
    ok = not bad and jk_err <= 1e-12
    detail = "; ".join(bad) if bad else "4 pairs accepted, 2 rejected by J/K"
    return _record(3, "compatibility classifier", ok, f"{detail}; simple-pair J/K error {jk_err:.2e} (<= 1e-12)")


# -- 4: x-independence of the transformed coefficients ---------------------------------------


def check_4():
    rng = np.random.default_rng(SEED + 4)
    dmax, cmax = 0.0, 0.0
    for tag, m in VARIANTS:
        fam = make_family(tag) if m is None else make_family(tag, m=m)
        tc = transformed_coefficients(fam)
        for _ in range(16):
            xv = rng.uniform(0.5, 2.0) if fam.domain[0] == 0.0 else rng.uniform(-1.0, 1.0)
            t, w = rng.uniform(0.0, 0.5), tuple(rng.uniform(-0.5, 0.5, 2))
            (F, S), (dF, dS) = transformed_coefficients_numeric(fam.equation, fam.phi, (xv, t, *w),
                                                                derivative=True)
            dmax = max(dmax, abs(dF), *map(abs, dS))
            cmax = max(cmax, abs(F - tc.F(t, w)), *(abs(a - b(t, w)) for a, b in zip(S, tc.S)))
    ok = dmax <= 1e-6 and cmax <= 1e-8
    return _record(4, "x-independence", ok,
                   f"max |d/dx| {dmax:.2e} (<= 1e-6); closed vs numeric {cmax:.2e} (<= 1e-8)")


# -- 5: pathwise exactness and strong order ------------------------------------------------------


def check_5():
    start = time.perf_counter()
    errs, slopes = {}, {}
    for tag in ("AM", "PM", "MS", "EA"):
        fam = make_family(tag)
        x0 = DEFAULT_X0[tag]
        path = sample_wiener(2, uniform_grid(0.5, 1e-5), 0)
        ex = exact_solution(fam, None, x0, path)
        em = euler_maruyama(fam.equation, x0, path)
        errs[tag] = abs(ex.terminal - em.terminal) if ex.complete and em.complete else math.inf
        rep = convergence_study(fam, x0, halving_levels(1e-2, 4), paths=200, seed=0, T=0.5)
        slopes[tag] = rep.slope
    elapsed = time.perf_counter() - start
    ok = (all(e <= 5e-3 for e in errs.values()) and all(0.4 <= s <= 0.6 for s in slopes.values())
          and elapsed < 30.0)
    detail = ", ".join(f"{k} err {errs[k]:.1e} slope {slopes[k]:.3f}" for k in errs)
    return _record(5, "pathwise exactness", ok,
                   f"{detail} (err <= 5e-3, slope in [0.4, 0.6]) in {elapsed:.1f} s (< 30 s)")


# -- 6: GBM identity ----------------------------------------------------------------------------


def check_6():
    worst = 0.0
    for k, (beta, s2, x0) in enumerate([(0.2, 0.4, 1.0), (-0.5, 0.9, 2.5), (1.0, -0.3, 0.1)]):
        fam = make_family("AM", alpha=0.0, s1=0.0, beta=beta, s2=s2)
        path = sample_wiener(2, uniform_grid(1.0, 1e-3), k)
        tr = exact_solution(fam, None, x0, path)
        z = path.values()[1]
        expect = x0 * np.exp((beta - s2 ** 2 / 2) * path.times + s2 * z)
        worst = max(worst, float(np.max(np.abs(tr.states - expect))))
    return _record(6, "GBM identity", worst <= 1e-12, f"max pathwise error {worst:.2e} (<= 1e-12)")


# -- 7: three noises --------------------------------------------------------------------------


def check_7():
    rng = np.random.default_rng(SEED + 7)
    det_res, dep_res, n = 0.0, 0.0, 0
    while n < 50:
        args = dict(alpha=_nonzero(rng, 0.2, 1.0), k1=_nonzero(rng, 0.3, 1.5), c1=rng.uniform(-1, 1),
                    k2=_nonzero(rng, 0.3, 1.5), c2=rng.uniform(-1, 1), gamma=rng.uniform(-1, 1),
                    delta=rng.uniform(-1, 1), q3=_nonzero(rng, 0.5, 2.0))
        if abs(args["c2"] * args["k1"] - args["c1"] * args["k2"]) < 0.1:
            continue
        rep = three_noise_probe(**args, seed=n)
        det_res = max(det_res, rep.max_determining_residual)
        dep_res = max(dep_res, rep.max_dependence_residual)
        n += 1
        if classify(rep.equation.noises) != NoSymmetry("ThreeOrMoreNoises"):
            return _record(7, "three-noise probes", False, "probe equation was not rejected")
    triples = [
        (Additive(1.0), Multiplicative(0.5), Poisson(0.3)),
        (Simple(1.0, 2.0), Multiplicative(0.5), ExpAffine(0.4, 0.6, 0.1)),
        (General(Const(0.5) + Scale(0.3, Power(x, 3.0))), Additive(1.0), Multiplicative(1.0)),
    ]
    tri_ok = all(classify(t) == NoSymmetry("ThreeOrMoreNoises") for t in triples)
    ok = det_res <= 1e-9 and dep_res <= 1e-12 and tri_ok
    return _record(7, "three-noise probes", ok,
                   f"50 probes: determining {det_res:.2e} (<= 1e-9), dependence {dep_res:.2e} "
                   f"(<= 1e-12); N = 3 rejected: {tri_ok}")


# -- 8: standard-form reduction -------------------------------------------------------------------


def check_8():
    s1, s2 = 0.5, 0.4
    f = Const(0.2) + Scale(0.3, Power(x, 0.5)) + Scale(-0.3, x)
    eq = ItoEquation(f, (Poisson(s1), Multiplicative(s2)))
    red = standard_form_reduce(eq, 1, coefficient=s2)
    ys = np.linspace(-2.0, 2.0, 81)
    ex = np.exp(ys)
    tilde = red.equation
    coef_err = max(
        float(np.max(np.abs(tilde.noises[0].fn(ys) - s1 * np.exp(-ys / 2)))),
        float(np.max(np.abs(tilde.noises[1].fn(ys) - s2))),
        float(np.max(np.abs(tilde.drift(ys) - (f.evaluate_array(ex) / ex
                                                - (s1 ** 2 + s2 ** 2 * ex) / (2 * ex))))),
        float(np.max(np.abs(red.forward_map(ex) - ys))),
    )
    path_err = 0.0
    for seed in range(5):
        path = sample_wiener(2, uniform_grid(0.5, 1e-4), seed)
        a = euler_maruyama(eq, 1.0, path)
        b = euler_maruyama(tilde, red.forward_map(1.0), path)
        if not (a.complete and b.complete):
            path_err = math.inf
            break
        path_err = max(path_err, float(np.max(np.abs(red.inverse_map(b.states) - a.states))))
    ok = coef_err <= 1e-12 and path_err <= 1e-2
    return _record(8, "standard-form reduction", ok,
                   f"coefficient error {coef_err:.2e} (<= 1e-12); pathwise {path_err:.2e} (<= 1e-2)")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i + 1}" for i in range(len(CHECKS))])
def test_acceptance(check):
    ok, line = check()
    print(line)
    assert ok, line


if __name__ == "__main__":
    for c in CHECKS:
        print(c()[1])
