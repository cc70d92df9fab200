import math

import numpy as np
import pytest

from itosym.errors import QuadratureFailure
from itosym.expr import Const, Exp, Power, Scale, x
from itosym.kozlov import (
    exact_solution,
    kozlov_map,
    transformed_coefficients,
    transformed_coefficients_numeric,
)
from itosym.model import Additive, ItoEquation, Multiplicative
from itosym.paths import euler_maruyama, sample_wiener, uniform_grid
from itosym.symmetry import DEFAULT_X0, SymmetryCoefficient, make_family

TAGS = ["AM", "PM", "MS", "EA"]
MS_M = [-1.0, 2.0, 3.0]


def _families():
    for tag in TAGS:
        if tag == "MS":
            for m in MS_M:
                yield make_family("MS", m=m)
        else:
            yield make_family(tag)


def _xs(fam, n=9):
    return np.linspace(0.5, 2.0, n) if fam.domain[0] == 0.0 else np.linspace(-1.0, 1.0, n)


# -- maps ----------------------------------------------------------------------


def test_am_identity_slice():
    km = kozlov_map(make_family("AM"))
    assert km.forward(1.7, 0.0, (0.4, 0.0)) == 1.7


def test_pm_value():
    assert kozlov_map("PM").forward(4.0, 0.0, (0.3, 0.0)) == pytest.approx(4.0)


def test_ms_inverse_round_trip():
    km = kozlov_map("MS", {"m": 2.0})
    rng = np.random.default_rng(5)
    for _ in range(10):
        t, z = rng.uniform(0, 1), rng.normal()
        y = km.forward(2.0, t, (0.1, z))
        assert km.inverse(y, t, (0.1, z)) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("fam", list(_families()), ids=lambda f: f"{f.tag}-{f.params.get('m', '')}")
def test_round_trip_and_monotone(fam):
    km = kozlov_map(fam)
    xs = _xs(fam)
    for t, w in [(0.0, (0.0, 0.0)), (0.4, (0.3, -0.2)), (1.0, (-0.5, 0.7))]:
        y = km.forward(xs, t, w)
        assert np.max(np.abs(km.forward(km.inverse(y, t, w), t, w) - y)) <= 1e-12 * max(1, np.max(np.abs(y)))
        assert np.all(np.diff(y) > 0)


@pytest.mark.parametrize("fam", list(_families()), ids=lambda f: f"{f.tag}-{f.params.get('m', '')}")
def test_map_derivative_is_one_over_phi(fam):
    km = kozlov_map(fam)
    t, w = 0.3, (0.2, -0.4)
    for xv in _xs(fam, 5):
        h = 1e-6
        d = (km.forward(xv + h, t, w) - km.forward(xv - h, t, w)) / (2 * h)
        assert d == pytest.approx(1.0 / fam.phi((xv, t, *w)), rel=1e-7)


def test_printed_maps():
    t, w, z = 0.3, 0.2, -0.4
    am = make_family("AM")
    assert kozlov_map(am).forward(1.3, t, (w, z)) == pytest.approx(
        math.exp(-(am.beta - am.s2 ** 2 / 2) * t - am.s2 * z) * 1.3, rel=1e-14)
    pm = make_family("PM")
    e = math.exp(-0.25 * ((2 * pm.c3 - pm.s2 ** 2) * t + 2 * pm.s2 * z))
    assert kozlov_map(pm).forward(1.3, t, (w, z)) == pytest.approx(2 * math.sqrt(1.3) * e, rel=1e-14)
    ms = make_family("MS", m=3.0)
    e = math.exp((1 - ms.m) * (ms.Q * t - ms.s2 * z))
    assert kozlov_map(ms).forward(1.3, t, (w, z)) == pytest.approx(1.3 ** -2 / -2 * e, rel=1e-14)
    ea = make_family("EA")
    e = math.exp(ea.gamma * (ea.s2 * z + ea.beta * w + ea.delta * t))
    assert kozlov_map(ea).forward(0.4, t, (w, z)) == pytest.approx(
        -math.exp(-ea.gamma * 0.4) / ea.gamma * e, rel=1e-14)


# -- transformed coefficients --------------------------------------------------------


def test_am_coefficients_example():
    tc = transformed_coefficients("AM", {"alpha": 1.0, "s1": 2.0, "beta": 0.0, "s2": 0.0})
    for t, w in [(0.0, (0.0, 0.0)), (0.7, (1.0, -2.0))]:
        assert tc.F(t, w) == pytest.approx(1.0)
        assert tc.S[0](t, w) == pytest.approx(2.0)
        assert tc.S[1](t, w) == 0.0


def test_pm_martingale():
    tc = transformed_coefficients("PM", {"c2": 0.0})
    assert tc.F(0.3, (0.1, 0.2)) == 0.0


@pytest.mark.parametrize("fam", list(_families()), ids=lambda f: f"{f.tag}-{f.params.get('m', '')}")
def test_numeric_matches_closed_form_and_is_x_free(fam):
    tc = transformed_coefficients(fam)
    rng = np.random.default_rng(2)
    for _ in range(6):
        xv = rng.uniform(0.5, 1.5) if fam.domain[0] == 0.0 else rng.uniform(-0.5, 0.5)
        t, w = rng.uniform(0, 0.5), tuple(rng.uniform(-0.5, 0.5, 2))
        (F, S), (dF, dS) = transformed_coefficients_numeric(fam.equation, fam.phi, (xv, t, *w),
                                                            derivative=True)
        assert F == pytest.approx(tc.F(t, w), abs=1e-8)
        assert S[0] == pytest.approx(tc.S[0](t, w), abs=1e-8)
        assert abs(S[1]) <= 1e-8
        assert max(abs(dF), *map(abs, dS)) <= 1e-6


def test_ea_second_noise_cancels():
    fam = make_family("EA")
    F, S = transformed_coefficients_numeric(fam.equation, fam.phi, (0.2, 0.1, 0.3, -0.2))
    assert abs(S[1]) <= 1e-12


def test_deterministic_symmetry_simplification():
    # phi = exp(kt) depends on t only: S_k = sigma_k / phi and F = f/phi - int phi_t/phi^2
    k = 0.3
    phi = SymmetryCoefficient(Const(1.0), k, (0.0,), anchor=0.0)
    eq = ItoEquation(Scale(k, x), (Additive(0.7),))
    (F, S) = transformed_coefficients_numeric(eq, phi, (1.2, 0.5, 0.1))
    e = math.exp(k * 0.5)
    assert S[0] == pytest.approx(0.7 / e, rel=1e-12)
    assert F == pytest.approx(k * 1.2 / e - k * 1.2 / e, abs=1e-12)


def test_numeric_default_anchor():
    phi = SymmetryCoefficient(Exp(x), 0.0, (0.0,))
    eq = ItoEquation(Const(0.0), (Additive(1.0),))
    F, S = transformed_coefficients_numeric(eq, phi, (0.5, 0.0, 0.0))
    assert S[0] == pytest.approx(math.exp(-0.5), rel=1e-12)


def test_quadrature_failure():
    # 1/phi^2 is not integrable at the anchor 0
    phi = SymmetryCoefficient(Power(x, 1.0), 0.5, (0.0,), anchor=0.0)
    eq = ItoEquation(Const(0.0), (Multiplicative(1.0),), (0.0, math.inf))
    with pytest.raises(QuadratureFailure):
        transformed_coefficients_numeric(eq, phi, (1.0, 0.0, 0.0))


# -- exact solutions ---------------------------------------------------------------


def test_gbm_identity():
    fam = make_family("AM", alpha=0.0, s1=0.0, beta=0.3, s2=0.5)
    path = sample_wiener(2, uniform_grid(1.0, 1e-3), 4)
    tr = exact_solution(fam, None, 1.5, path)
    z = path.values()[1]
    expect = 1.5 * np.exp((0.3 - 0.125) * path.times + 0.5 * z)
    assert np.max(np.abs(tr.states - expect)) <= 1e-12


def test_gbm_close_to_fine_em():
    fam = make_family("AM", alpha=0.0, s1=0.0)
    path = sample_wiener(2, uniform_grid(0.5, 1e-5), 8)
    ex = exact_solution(fam, None, 1.0, path)
    em = euler_maruyama(fam.equation, 1.0, path)
    assert abs(ex.terminal - em.terminal) < 2e-3


def test_constant_solution_when_all_zero():
    fam = make_family("AM", alpha=0.0, s1=0.0, s2=0.0, beta=0.0)
    tr = exact_solution(fam, None, 0.7, sample_wiener(2, uniform_grid(0.5, 1e-2), 0))
    assert np.all(tr.states == 0.7)
    fam = make_family("PM", s1=0.0, s2=0.0, c2=0.0, c3=0.0)
    tr = exact_solution(fam, None, 0.7, sample_wiener(2, uniform_grid(0.5, 1e-2), 0))
    assert np.allclose(tr.states, 0.7, rtol=1e-15)


def test_pm_defaults_match_em():
    fam = make_family("PM", s1=0.5, s2=0.4, c2=0.3, c3=0.2)
    path = sample_wiener(2, uniform_grid(0.5, 1e-5), 1)
    ex = exact_solution(fam, None, 1.0, path)
    em = euler_maruyama(fam.equation, 1.0, path)
    assert ex.complete and em.complete
    assert abs(ex.terminal - em.terminal) <= 5e-3


def test_exact_initial_and_transformed_values():
    fam = make_family("EA")
    path = sample_wiener(2, uniform_grid(0.2, 1e-3), 3)
    tr = exact_solution("EA", None, 0.0, path)
    assert tr.states[0] == 0.0
    assert tr.transformed[0] == pytest.approx(kozlov_map(fam).forward(0.0, 0.0, (0.0, 0.0)))
    km = kozlov_map(fam)
    w = path.values()
    for n in (0, 50, 200):
        assert km.forward(tr.states[n], path.times[n], w[:, n]) == pytest.approx(tr.transformed[n], rel=1e-12)


def test_exact_domain_exit():
    # PM with y pushed through zero by a large noise
    fam = make_family("PM", s1=3.0, s2=0.1, c2=-2.0, c3=0.0)
    path = sample_wiener(2, uniform_grid(2.0, 1e-3), 0)
    tr = exact_solution(fam, None, 0.05, path)
    assert tr.status == "domain_exit"
    assert len(tr.states) == len(tr.times) and np.all(np.isfinite(tr.states))
    assert tr.exit_time > tr.times[-1]


def test_params_override():
    path = sample_wiener(2, uniform_grid(0.1, 1e-2), 0)
    a = exact_solution("AM", {"alpha": 1.0}, 1.0, path)
    b = exact_solution(make_family("AM"), {"alpha": 1.0}, 1.0, path)
    assert np.array_equal(a.states, b.states)


@pytest.mark.parametrize("tag", TAGS)
def test_default_x0_is_inside(tag):
    fam = make_family(tag)
    assert fam.domain[0] < DEFAULT_X0[tag] < fam.domain[1]
