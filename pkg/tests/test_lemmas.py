import numpy as np
import pytest
from scipy import integrate

from bnsp import lemmas as lm


def _brute_convolution(X, K, g, rho_max):
    """3D convolution at |x| = X in (rho, cos theta) coordinates with plain dblquad."""
    f = lambda mu, rho: 2 * np.pi * rho * rho * g(rho) * K.value(np.sqrt(max(X * X + rho * rho - 2 * X * rho * mu, 0.0)))  # noqa: E731
    return integrate.dblquad(f, 0, rho_max, -1, 1, epsabs=1e-13, epsrel=1e-10)[0]


@pytest.mark.parametrize("K", [lm.Heat(3.0), lm.FrontHeat(4.0, 2.0), lm.Algebraic(2.0, 2.5),
                               lm.FrontAlgebraic(3.0, 1.5, 2.0), lm.Cone(3.0, 2.0), lm.DiracLike(1.0, 4.0)],
                         ids=lambda k: type(k).__name__)
def test_kernel_primitive_matches_quad(K):
    for q1, q2 in ((5.0, 0.5), (2.0, 1.0), (9.0, 3.5)):
        ref = integrate.quad(lambda q: q * K.value(q), q2, q1, points=[1.0, 3.0, 4.0], limit=200)[0]
        assert K.phi_diff(q1, q2) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_graded_nodes_exactness():
    r, w = lm.graded_nodes(0.0, 10.0, [3.0], [0.5])
    assert np.sum(w * r ** 5) == pytest.approx(1e6 / 6, rel=1e-13)
    r, w = lm.graded_nodes(0.0, 2.0, [0.0], [1.0], tail=True)
    tail = r > 2.0
    assert np.sum(w[tail] / r[tail] ** 2) == pytest.approx(0.5, rel=1e-13)


@pytest.mark.parametrize("which,X,t", [(1, 0.0, 2.0), (1, 3.0, 2.0), (2, 1.5, 1.0), (3, 2.0, 2.0)])
def test_data_convolution_against_dblquad(which, X, t):
    K, g, _ = lm._I_parts(which, X, t, 2.1, 1.0, lm.GAUSS_C)
    ref = _brute_convolution(X, K, g, 60.0)
    assert lm.I_value(which, X, t, 2.1) == pytest.approx(ref, rel=1e-6)


def test_data_convolution_hypotheses():
    with pytest.raises(ValueError):
        lm.check_I(3, [0.0], [1.0], 2.0)
    with pytest.raises(ValueError):
        lm.check_I(1, [0.0], [1.0], 1.5)


def test_shell_integral_closed_form():
    # int 4 pi r^2 (1 + r^2)^-2 dr = pi^2, and b^(3/2) pi^2 after r -> sqrt(b) r
    assert lm.lhs_shell(0.0, 1.0, 2.0) == pytest.approx(np.pi ** 2, rel=1e-12)
    for lam in (2.0, 5.0):
        assert lm.lhs_shell(0.0, lam ** 2, 2.0) == pytest.approx(lam ** 3 * np.pi ** 2, rel=1e-12)


def test_shell_integral_against_quad():
    a, b, N = 10.0, 2.0, 2.0
    ref = integrate.quad(lambda r: 4 * np.pi * r * r * (1 + (r - a) ** 2 / b) ** -N, 0, np.inf, points=None,
                         limit=400)[0]
    assert lm.lhs_shell(a, b, N) == pytest.approx(ref, rel=1e-8)


def test_shell_check_passes_and_validates():
    rep = lm.check_shell([0.0, 1.0, 10.0, 100.0], [1.0, 10.0])
    assert rep.passed and rep.refinement_delta < 1e-10
    with pytest.raises(ValueError):
        lm.check_shell([0.0], [1.0], N=1.5)


def test_envelope_comparison_scan():
    rep = lm.check_A1(10_000, seed=7)
    assert rep.violations == 0 and rep.passed
    # both parts are tight: tau = t with a^2 = 1 + t gives ratio 3^-l, part two gives 1 at a^2 = 1 + t
    for l in (0.5, 1.5, 3.0):
        t = 50.0
        a2 = 1 + t
        part1 = (1 + a2 / (1 + t)) ** -l / (3 ** l * (1 + a2 / (1 + t)) ** -l)
        part2 = 1 / (2 ** l * (1 + a2 / (1 + t)) ** -l)
        assert part1 <= 1 and part2 == pytest.approx(1.0)


def test_region_examples():
    assert "D1" in lm.cone_regions(0.0, 10.0)
    assert "D2" in lm.cone_regions(100.0, 100.0)
    assert lm.cone_regions(50.0, 100.0) == ["D4", "D5"]
    assert "D4" in lm.cone_regions(30.0, 100.0)
    assert lm.cone_regions(120.0, 100.0) == ["D3"]
    for t in (10.0, 20.0, 40.0):
        for tag, X in lm.region_points(t).items():
            assert tag in lm.cone_regions(X, t)


def test_regions_cover_the_half_space():
    assert lm.region_coverage([1.0, 3.0, 10.0, 100.0, 1000.0]) == 1.0


def test_early_integral_against_nested_quad():
    # N1 at the origin: heat kernel, prefactor tau^-2, data (1+s)^-3 (1 + r^2/(1+s))^-(3 - eps)
    X, t = 0.0, 10.0
    t0 = lm.t0_rule(X, t)
    eps = lm.EPS

    def inner(s):
        tau = t - s
        f = lambda r: 4 * np.pi * r * r * np.exp(-r * r / (lm.GAUSS_C * tau)) * (1 + r * r / (1 + s)) ** -(3 - eps)  # noqa: E731
        return tau ** -2.0 * (1 + s) ** -3.0 * integrate.quad(f, 0, np.inf, limit=200)[0]

    ref = integrate.quad(inner, 0, t0, epsrel=1e-10, limit=200)[0]
    val, _ = lm.N_value(1, X, t)
    assert val == pytest.approx(ref, rel=1e-6)


def test_late_integral_against_nested_quad():
    # N5 at the origin on [t0, t]: prefactor tau^-2 times a Gaussian of width tau, integrable at s = t
    X, t = 0.0, 10.0
    t0 = lm.t0_rule(X, t)
    m = 1.5 - lm.EPS

    def inner(s):
        tau = t - s
        f = lambda r: 4 * np.pi * r * r * np.exp(-r * r / (lm.GAUSS_C * tau)) * (1 + r * r / (1 + s)) ** -m  # noqa: E731
        return tau ** -2.0 * (1 + s) ** -1.5 * integrate.quad(f, 0, np.inf, limit=200)[0]

    ref = integrate.quad(inner, t0, t, epsrel=1e-10, limit=400)[0]
    val, expo = lm.N_value(5, X, t)
    assert val == pytest.approx(ref, rel=1e-5)
    assert expo == pytest.approx(-0.5, abs=0.01)


@pytest.mark.parametrize("i", [6, 7])
def test_front_kernel_late_integrals_diverge(i):
    rep = lm.check_A_integral(i, point_samples=[(10.0, 10.0)])
    assert rep.divergent and not rep.passed and rep.constant == np.inf
    assert "diverges" in rep.notes


def test_check_report_fields():
    rep = lm.check_A_integral(9, point_samples=[(0.0, 10.0), (0.0, 20.0)])
    d = rep.to_dict()
    assert set(d) >= {"lemma", "constant", "refinement_delta", "spread", "growth", "divergent", "passed"}
    assert rep.refinement_delta < 1e-6 and rep.points[0]["regions"] == ["D1"]
    with pytest.raises(ValueError):
        lm.check_A_integral(13)


def test_delta_convolution_basics():
    assert lm.delta_conv_value(0.0, 0.0, 1.5, 1.0) == 0.0
    t = 10.0
    xs = t + np.sqrt(1 + t) * np.linspace(-4, 4, 9)
    vals = [lm.delta_conv_value(X, t, 1.5, 1.0, "Hwave") for X in xs]
    assert abs(xs[int(np.argmax(vals))] - t) <= 3 * np.sqrt(1 + t)
    with pytest.raises(ValueError):
        lm.check_delta_conv(-1.0, 1.0)
    with pytest.raises(ValueError):
        lm.delta_conv_value(1.0, 1.0, 1.5, 1.0, "other")
