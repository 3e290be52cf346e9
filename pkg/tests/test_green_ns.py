import numpy as np
import pytest
from scipy.linalg import expm

from bnsp.green_ns import (ENTRIES, cutoffs, ghat_ns, longwave_decompose, ode_residual, shortwave_regular)
from bnsp.params import BandCutoffs


def longitudinal_expm(k, t, p, plasma=0.0):
    """Exact 2x2 propagator of (density, longitudinal momentum)."""
    coupling = p.c ** 2 * k + plasma / k
    M = np.array([[0, 1j * k], [1j * coupling, p.mu * k * k]])
    return expm(-M * t)


def test_symbol_matches_matrix_exponential(p, rng):
    for _ in range(40):
        k, t = 10 ** rng.uniform(-2, 1), rng.uniform(0, 10)
        g = ghat_ns(np.array(k), np.array(t), p)
        E = longitudinal_expm(k, t, p)
        assert complex(g.g11) == pytest.approx(E[0, 0], abs=1e-10)
        assert complex(g.g12) == pytest.approx(E[0, 1], abs=1e-10)
        assert complex(g.g21) == pytest.approx(E[1, 0], abs=1e-10)
        assert complex(g.iso + g.aniso) == pytest.approx(E[1, 1], abs=1e-10)
        assert complex(g.iso) == pytest.approx(np.exp(-p.mu1 * k * k * t), abs=1e-12)


def test_identity_at_t0(p):
    g = ghat_ns(np.array([0.3, 2.0, 7.0]), 0.0, p)
    assert np.allclose(g.g11, 1) and np.allclose(g.g12, 0) and np.allclose(g.g21, 0)
    assert np.allclose(g.iso, 1) and np.allclose(g.aniso, 0)


def test_degenerate_limit(p):
    g = ghat_ns(np.array([2.0]), 1.0, p)
    assert complex(g.g11[0]).real == pytest.approx(np.exp(-2) * 3, abs=1e-9)
    side = ghat_ns(np.array([2 - 1e-6, 2 + 1e-6]), 1.0, p)
    assert np.allclose(side.g11, g.g11, atol=1e-6)


def test_semigroup_residual(p, rng):
    for _ in range(100):
        k, t = 10 ** rng.uniform(-2, 1), rng.uniform(0.1, 10)
        xh = rng.normal(size=3)
        assert ode_residual("ns", k, t, xh / np.linalg.norm(xh), p) < 1e-6


def test_cutoffs(p, rng):
    b = BandCutoffs.default(p)
    assert np.allclose(cutoffs(np.array([b.eps1 / 2]), b), [[1], [0], [0]])
    assert np.allclose(cutoffs(np.array([b.K + 2]), b), [[0], [0], [1]])
    k = rng.uniform(0, 10, 1000)
    assert np.max(np.abs(sum(cutoffs(k, b)) - 1)) < 1e-15


def test_longwave_reconstruction(p, rng):
    b = BandCutoffs.default(p)
    k = rng.uniform(1e-3, 2 * b.eps1 * (1 - 1e-9), 1000)
    t = rng.uniform(0, 50, 1000)
    wc = longwave_decompose(k, t, p, b)
    ref = ghat_ns(k, t, p).scale(cutoffs(k, b)[0])
    assert wc.total().max_abs_diff(ref) < 1e-10


def test_longwave_pieces(p):
    k = np.array([0.2, 0.5])
    wc = longwave_decompose(k, 0.0, p)
    for e in ENTRIES:
        assert np.allclose(wc.R1.entry(e), 0)
    wc = longwave_decompose(k, 3.0, p)
    chi1 = cutoffs(k, BandCutoffs.default(p))[0]
    assert np.allclose(wc.E.g11, 0) and np.allclose(wc.E.g12, 0) and np.allclose(wc.E.g21, 0)
    assert np.allclose(wc.E.iso, chi1 * np.exp(-p.mu1 * k * k * 3.0))
    # E is the heat factor times the identity block; with R1 and the heat part of the
    # cosine term it rebuilds the rotational projector exp(-mu1 k^2 t) (I - xi_hat xi_hat^T)
    assert np.allclose(wc.E.aniso, 0)
    heat = chi1 * np.exp(-p.mu1 * k * k * 3.0)
    rot = wc.E.aniso + wc.R1.aniso - heat * np.cos(p.c * k * 3.0)
    assert np.allclose(rot, -heat)


def test_shortwave_split(p):
    b = BandCutoffs.default(p)
    k = np.array([b.K + 3.0, 50.0, 400.0])
    reg, led = shortwave_regular(k, 0.0, p)
    total = reg + led.symbol
    chi3 = cutoffs(k, b)[2]
    assert np.allclose(total.g11, chi3) and np.allclose(total.iso + total.aniso, chi3)
    _, led = shortwave_regular(np.array([1e4]), 1.0, p)
    assert float(np.squeeze(led.delta_weight)) == pytest.approx(np.exp(-p.c ** 2 / p.mu))
    assert complex(led.symbol.g11[0]).real == pytest.approx(np.exp(-p.c ** 2 / p.mu), rel=1e-6)
    k2 = 2 * b.K
    reg, _ = shortwave_regular(np.array([k2]), 1.0, p)
    fast = reg - ghat_ns(np.array([k2]), 1.0, p).scale(0)  # regular part is lambda_- plus rotational
    assert abs(complex(fast.g11[0])) <= np.exp(-p.mu * k2 ** 2 / 2)


def test_shortwave_rejects_low_k(p):
    with pytest.raises(ValueError):
        shortwave_regular(np.array([1.0]), 1.0, p)
