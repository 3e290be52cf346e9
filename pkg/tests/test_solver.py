import numpy as np
import pytest

from bnsp.params import FluidParams
from bnsp.solver import (Field3D, InitialDataSpec, Solver, Spectral, StepError, VacuumError, conservation_observer,
                         data_bound_constant, integrate, linear_reference, load_snapshot, make_initial_data,
                         nonlinear_rhs, poisson_solve, positions, recover_physical, save_snapshot, to_state)


def _smooth_state(n, L, amp, seed=0, kmax=3):
    """Random low-mode state, band-limited so quadratic products are resolved."""
    rng = np.random.default_rng(seed)
    x = positions(n, L)

    def field():
        f = np.zeros((n, n, n))
        for _ in range(6):
            m = rng.integers(-kmax, kmax + 1, 3)
            f += rng.normal() * np.cos(2 * np.pi / L * np.tensordot(m, x, 1) + rng.uniform(0, 2 * np.pi))
        return amp * f / np.max(np.abs(f))

    st = Field3D(n, L, field(), np.stack([field() for _ in range(3)]), field(), np.stack([field() for _ in range(3)]))
    st.n2 -= st.n2.mean()
    return st


def test_zero_state_is_fixed(p):
    st = Field3D.zeros(16, 32.0)
    out = Solver(16, 32.0, 0.1, p).step(st)
    assert out.t == pytest.approx(0.1)
    assert np.all(out.stack() == 0.0)


def test_poisson_single_mode():
    n, L = 16, 20.0
    x = positions(n, L)
    k = 2 * np.pi * 3 / L
    gphi = poisson_solve(np.cos(k * x[0]), L)
    # Laplacian phi = cos(kx)  =>  phi = -cos(kx)/k^2, d_x phi = sin(kx)/k
    assert np.allclose(gphi[0], np.sin(k * x[0]) / k, atol=1e-12)
    assert np.allclose(gphi[1:], 0.0, atol=1e-12)


def test_poisson_inverts_laplacian():
    st = _smooth_state(16, 30.0, 1e-2)
    sp = Spectral(16, 30.0)
    gphi = poisson_solve(st.n2, 30.0)
    div = sp.inv(sp.div(sp.fwd(gphi)))
    assert np.allclose(div, st.n2, atol=1e-13)


def test_poisson_rejects_nonzero_mean():
    with pytest.raises(ValueError, match="mean"):
        poisson_solve(np.ones((8, 8, 8)), 10.0)


def test_initial_data_properties():
    spec = InitialDataSpec(amplitude=1e-3)
    st = make_initial_data(spec, 64, 64.0)
    assert abs(st.n2.mean()) < 1e-12 * np.abs(st.n2).max()
    # pointwise bound with the analytic constant; 1 % slack for the spectral Laplacian
    r2 = np.sum(positions(64, 64.0) ** 2, axis=0)
    bound = data_bound_constant(spec, 64.0) * (1 + r2) ** (-spec.r2)
    assert np.all(np.abs(st.n2) <= 1.01 * bound)
    with pytest.raises(ValueError):
        InitialDataSpec(r1=2.0)
    with pytest.raises(ValueError):
        InitialDataSpec(r2=1.5)
    with pytest.raises(ValueError, match="amplitude"):
        make_initial_data(InitialDataSpec(amplitude=5.0), 64, 64.0)
    with pytest.raises(ValueError, match="unresolved"):
        make_initial_data(spec, 16, 64.0)


def test_rhs_vanishes_for_zero_and_equal_species(p):
    z = Field3D.zeros(16, 32.0)
    F1, F2 = nonlinear_rhs(z, p)
    assert np.all(F1 == 0) and np.all(F2 == 0)
    st = _smooth_state(16, 32.0, 1e-2)
    st.n2[:] = 0
    st.w2[:] = 0
    F1, F2 = nonlinear_rhs(st, p)
    assert np.max(np.abs(F2)) < 1e-15 and np.max(np.abs(F1)) > 0


def test_electric_forms_agree(p):
    st = _smooth_state(32, 40.0, 1e-2, kmax=3)
    a1, a2 = nonlinear_rhs(st, p, electric_form="divergence")
    b1, b2 = nonlinear_rhs(st, p, electric_form="direct")
    assert np.max(np.abs(a1 - b1)) <= 1e-8 * np.max(np.abs(a1))
    assert np.array_equal(a2, b2)
    with pytest.raises(ValueError):
        nonlinear_rhs(st, p, electric_form="other")


def test_rhs_detects_vacuum(p):
    st = Field3D.zeros(8, 10.0)
    st.n1[:] = -1.6
    with pytest.raises(VacuumError):
        nonlinear_rhs(st, p)


def test_conservation_in_nonlinear_steps(p):
    st0 = _smooth_state(16, 32.0, 2e-2)
    _, tr = integrate(st0, 1.0, 0.1, p, observers=[conservation_observer])
    for key in ("mass_n1", "mom_w1x", "mom_w1y", "mom_w1z"):
        col = tr.column(key)
        assert np.max(np.abs(col - col[0])) < 1e-12 * max(1.0, np.abs(st0.stack()).sum() * st0.cell_volume)
    assert np.max(np.abs(tr.column("mass_n2"))) < 1e-12


def test_equal_species_stay_equal(p):
    st = _smooth_state(16, 32.0, 2e-2)
    st.n2[:] = 0
    st.w2[:] = 0
    out, _ = integrate(st, 1.0, 0.1, p)
    assert np.max(np.abs(out.n2)) == 0.0 and np.max(np.abs(out.w2)) < 1e-15


def test_linear_step_matches_whole_space_reference(p):
    # at t = 3 undamped content above the grid Nyquist limits the NSP density to ~1e-3
    n, L, t = 64, 128.0, 5.0
    spec = InitialDataSpec(amplitude=1e-6)
    st0 = make_initial_data(spec, n, L, periodize=True)
    lin = Solver(n, L, t, p, linear_only=True).step(st0)
    for system, nf, wf in (("ns", lin.n1, lin.w1), ("nsp", lin.n2, lin.w2)):
        nr, wr = linear_reference(system, t, p, spec, n, L)
        for got, ref in ((nf, nr), (wf, wr)):
            got = got - got.mean(axis=(-3, -2, -1), keepdims=True)
            assert np.linalg.norm(got - ref) / np.linalg.norm(ref) < 1e-3


def test_linear_step_composes(p):
    st0 = _smooth_state(16, 32.0, 1e-3)
    one = Solver(16, 32.0, 1.0, p, linear_only=True).step(st0)
    two = Solver(16, 32.0, 0.5, p, linear_only=True)
    half = two.step(two.step(st0))
    assert np.allclose(one.stack(), half.stack(), atol=1e-14)


def test_time_step_convergence_order(p):
    st0 = _smooth_state(16, 32.0, 5e-2, seed=3, kmax=2)
    t_end = 2.0

    def run(dt):
        return integrate(st0, t_end, dt, p)[0].stack()

    ref = run(0.0125)
    errs = [np.linalg.norm(run(dt) - ref) for dt in (0.2, 0.1)]
    order = np.log2(errs[0] / errs[1])
    assert 1.7 <= order <= 2.3


def test_recover_physical_round_trip():
    st = _smooth_state(8, 10.0, 0.1)
    ph = recover_physical(st)
    back = to_state(ph["rho1"], ph["rho2"], ph["J1"], ph["J2"], 8, 10.0)
    assert np.allclose(back.stack(), st.stack(), atol=1e-15)
    assert np.allclose(ph["v1"], ph["u1"] + ph["u2"])
    assert np.allclose(ph["J1"], ph["rho1"] * ph["u1"])
    bad = Field3D.zeros(4, 1.0)
    bad.n1[0, 0, 0] = -2.5
    with pytest.raises(VacuumError):
        recover_physical(bad)


def test_snapshot_round_trip(tmp_path):
    st = _smooth_state(8, 10.0, 0.1)
    st.t = 2.5
    hp, bp = save_snapshot(st, tmp_path / "snap", extra={"note": "x"})
    assert bp.stat().st_size == 8 * 8 ** 3 * 8
    back = load_snapshot(tmp_path / "snap")
    assert back.t == 2.5 and back.L == 10.0
    assert np.array_equal(back.stack(), st.stack())


def test_front_guard_warns(p):
    with pytest.warns(RuntimeWarning, match="wrap"):
        integrate(Field3D.zeros(8, 10.0), 0.2, 0.1, p)


def test_step_errors(p):
    solver = Solver(8, 10.0, 0.1, p, linear_only=True)
    fast = Field3D.zeros(8, 10.0)
    fast.w1[0] = 100.0
    with pytest.raises(StepError, match="CFL"):
        solver.step(fast)
    bad = Field3D.zeros(8, 10.0)
    bad.n2[0, 0, 0] = np.nan
    with pytest.raises(StepError, match="non-finite"):
        solver.step(bad)


def test_parameters_change_dynamics():
    st0 = _smooth_state(16, 32.0, 1e-2)
    a = Solver(16, 32.0, 0.5, FluidParams(mu1=1.0)).step(st0)
    b = Solver(16, 32.0, 0.5, FluidParams(mu1=2.0)).step(st0)
    assert np.linalg.norm(a.w1 - b.w1) > 1e-6
