import numpy as np
import pytest

from bnsp.params import FluidParams
from bnsp.synthesis import (GridField, cone_coupling_integral, fft_crosscheck, fft_synthesize, grid_positions,
                            kirchhoff_apply, kirchhoff_fft, radial_inverse_scalar, radial_inverse_tensor,
                            radial_inverse_vector, radial_on_grid, resolution_dk, singular_ledger,
                            spherical_mean, synthesize_entry, synthesize_kernel)


def heat(r, t):
    return (4 * np.pi * t) ** -1.5 * np.exp(-r * r / (4 * t))


def test_heat_kernel_closed_form():
    r = np.linspace(0, 20, 201)
    f = radial_inverse_scalar(lambda k: np.exp(-k * k), r, (0, 8))
    assert np.max(np.abs(f.values - heat(r, 1.0))) < 1e-8


def test_vector_is_heat_gradient():
    # i xi exp(-k^2 t) is the transform of grad h with the exp(i xi.x) convention
    r, t = np.linspace(0, 6, 61), 1.0
    V = radial_inverse_vector(lambda k: k * np.exp(-k * k * t), r, (0, 10))
    assert np.max(np.abs(V.values - (-r / (2 * t)) * heat(r, t))) < 1e-10


def test_tensor_trace_and_origin():
    r = np.linspace(0, 8, 81)
    A, B = radial_inverse_tensor(lambda k: np.exp(-k * k), r, (0, 10))
    S = radial_inverse_scalar(lambda k: np.exp(-k * k), r, (0, 10))
    assert np.max(np.abs(3 * A.values + B.values - S.values)) < 1e-8
    assert abs(B.values[0]) < 1e-12
    assert A.values[0] == pytest.approx(S.values[0] / 3, abs=1e-12)


def test_tensor_against_fft():
    n, L = 64, 64.0
    T = fft_synthesize(lambda k: np.exp(-k * k), "tensor", n, L)
    r = np.linspace(0, 60, 6001)
    A, B = radial_inverse_tensor(lambda k: np.exp(-k * k), r, (0, 10))
    a, x, rg = radial_on_grid(A, n, L)
    b, _, _ = radial_on_grid(B, n, L)
    with np.errstate(invalid="ignore"):
        xh = np.where(rg > 0, x / np.where(rg > 0, rg, 1), 0)
    ref = a + b * xh[0] * xh[0]
    assert np.max(np.abs(T[0, 0] - ref)) / np.max(np.abs(ref)) < 1e-3


@pytest.mark.parametrize("system,entry", [("ns", "11"), ("ns", "21"), ("nsp", "12"), ("nsp", "22aniso")])
def test_fft_crosscheck(p, system, entry):
    assert fft_crosscheck(system, entry, 5.0, p) < 1e-3


def test_ns_density_front(p):
    t = 20.0
    r = np.linspace(0, t + 8 * np.sqrt(1 + t), 1200)
    f = synthesize_entry("ns", "11", t, r, p, band="long")
    rmax = r[np.argmax(np.abs(f.values))]
    assert abs(rmax - p.c * t) <= 2 * np.sqrt(1 + t)


def test_quadrature_convergence(p):
    t = 10.0
    r = np.linspace(0, 30, 121)
    dk = resolution_dk(30.0, t, p.c)
    a = synthesize_entry("ns", "11", t, r, p, dk=dk)
    b = synthesize_entry("ns", "11", t, r, p, dk=dk / 2)
    assert np.max(np.abs(a.values - b.values)) / np.max(np.abs(b.values)) < 1e-6


def test_profile_interpolation():
    r = np.linspace(0, 10, 201)
    f = radial_inverse_scalar(lambda k: np.exp(-k * k), r, (0, 8))
    assert f(np.array([1.234]))[0] == pytest.approx(heat(1.234, 1.0), rel=1e-6)
    assert f(np.array([11.0]))[0] == 0.0


def test_kirchhoff_constant():
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]])
    one = lambda q: np.ones(q.shape[:-1])  # noqa: E731
    grad = lambda q: np.zeros(q.shape)  # noqa: E731
    assert np.allclose(kirchhoff_apply(one, 2.5, pts), 2.5, atol=1e-13)
    assert np.allclose(kirchhoff_apply(one, 2.5, pts, mode="w_t", grad=grad), 1.0, atol=1e-13)
    assert np.allclose(kirchhoff_apply(one, 2.5, pts, mode="w_t"), 1.0, atol=1e-10)


def test_kirchhoff_matches_fourier_multiplier(rng):
    n, L = 64, 64.0
    x = grid_positions(n, L)
    g = np.exp(-np.sum(x * x, axis=0) / 8.0)
    origin = float(x[0, 0, 0, 0])
    pts = rng.uniform(-10, 10, size=(40, 3))
    for t in (1.0, 5.0):
        ref = GridField(kirchhoff_fft(g, t, L), L, origin)(pts)
        got = kirchhoff_apply(GridField(g, L, origin), t, pts, order=131)
        assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 1e-3


def test_kirchhoff_radial_profile_matches_lebedev():
    r = np.linspace(0, 40, 4001)
    prof = radial_inverse_scalar(lambda k: np.exp(-2 * k * k), r, (0, 8))
    pts = np.array([[0.5, 0.0, 0.0], [3.0, 1.0, -2.0]])
    g = lambda q: heat(np.sqrt(np.sum(q * q, axis=-1)), 2.0)  # noqa: E731
    a = kirchhoff_apply(prof, 3.0, pts)
    b = kirchhoff_apply(g, 3.0, pts, order=131)
    assert np.allclose(a, b, rtol=1e-6, atol=1e-12)


def test_spherical_mean_of_linear_function():
    pts = np.array([[1.0, 2.0, 3.0]])
    f = lambda q: q[..., 0] + 2 * q[..., 1]  # noqa: E731
    assert spherical_mean(f, pts, 4.0)[0] == pytest.approx(5.0)


def test_cone_coupling_closed_form_matches_quadrature():
    x = np.array([0.0, 1.0, 12.5, 25.0])
    a = cone_coupling_integral(x, 25.0, 4.0)
    b = cone_coupling_integral(x, 25.0, 4.0, method="quad2d")
    assert np.allclose(a, b, rtol=1e-8)
    with pytest.raises(ValueError):
        cone_coupling_integral(1.0, 0.0, 4.0)


def test_singular_ledger(p):
    led = singular_ledger("ns", [0.0, 1.0], p)
    assert np.allclose(led.delta_weight, [1.0, np.exp(-p.c ** 2 / p.mu)])
    assert led.summary()["tail"]["N"] == 4
    profs, led = synthesize_kernel("ns", "11", [1.0, 2.0], np.linspace(0, 5, 11), p)
    assert len(profs) == 2 and led.system == "ns"
