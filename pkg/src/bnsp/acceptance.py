"""Acceptance suite: one function per criterion, each returning a verdict.

Profiles
--------
``quick`` runs the identity and structural criteria plus shortened versions
of the heavier ones; ``full`` runs every criterion at its prescribed size.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable

import numpy as np

from .params import BandCutoffs, FluidParams, eigen

PROFILES = ("quick", "full")


@dataclass
class CriterionResult:
    """Verdict of one acceptance criterion."""

    id: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    runtime: float = 0.0
    notes: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} criterion {self.id}: {self.name} ({self.runtime:.1f} s)"


def _finish(cid, name, checks: dict, metrics: dict, t0: float, notes: str = "") -> CriterionResult:
    metrics = {k: _jsonable(v) for k, v in metrics.items()}
    metrics["checks"] = {k: bool(v) for k, v in checks.items()}
    return CriterionResult(cid, name, all(checks.values()), metrics, time.perf_counter() - t0, notes)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


# ---------------------------------------------------------------- 1-3: symbol identities

def criterion_1(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Vieta relations of the longitudinal roots and their values at k = 0."""
    t0 = time.perf_counter()
    p = FluidParams()
    rng = np.random.default_rng(seed)
    k = 10 ** rng.uniform(-3, 2, 10_000)
    m = {}
    for system, plasma in (("ns", 0.0), ("nsp", 2.0)):
        ep = eigen(system, k, p)
        s_ref = -p.mu * k * k
        q_ref = p.c ** 2 * k * k + plasma
        m[f"{system}_sum"] = float(np.max(np.abs(ep.lambda_plus + ep.lambda_minus - s_ref) / np.maximum(np.abs(s_ref), 1)))
        m[f"{system}_product"] = float(np.max(np.abs(ep.lambda_plus * ep.lambda_minus - q_ref) / np.maximum(q_ref, 1)))
    e0 = eigen("ns", np.array([0.0]), p)
    e1 = eigen("nsp", np.array([0.0]), p)
    m["ns_zero"] = float(max(abs(e0.lambda_plus[0]), abs(e0.lambda_minus[0])))
    m["nsp_zero"] = float(max(abs(e1.lambda_plus[0] - 1j * np.sqrt(2)), abs(e1.lambda_minus[0] + 1j * np.sqrt(2))))
    checks = {key: val < 1e-12 for key, val in m.items()}
    return _finish(1, "symbol identities", checks, m, t0)


def criterion_2(profile: str = "full", seed: int = 0) -> CriterionResult:
    """The symbol solves its ODE in time (central difference)."""
    from .green_ns import ode_residual

    t0 = time.perf_counter()
    p = FluidParams()
    rng = np.random.default_rng(seed)
    n = 100 if profile == "full" else 30
    m = {}
    for system in ("ns", "nsp"):
        worst = 0.0
        for _ in range(n):
            k = 10 ** rng.uniform(-2, 1)
            t = rng.uniform(0.1, 10)
            xh = rng.normal(size=3)
            worst = max(worst, ode_residual(system, k, t, xh / np.linalg.norm(xh), p, h=1e-4))
        m[f"{system}_residual"] = worst
    return _finish(2, "semigroup residual", {k: v < 1e-6 for k, v in m.items()}, m, t0)


def criterion_3(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Long-wave pieces add back up to the band-limited symbol."""
    from .green_ns import cutoffs, ghat_ns, longwave_decompose
    from .green_nsp import ghat_nsp, lowfreq_forms

    t0 = time.perf_counter()
    p = FluidParams()
    bands = BandCutoffs.default(p)
    rng = np.random.default_rng(seed)
    k = rng.uniform(1e-3, 2 * bands.eps1 * (1 - 1e-9), 1000)
    t = rng.uniform(0, 50, 1000)
    chi1 = cutoffs(k, bands)[0]
    ref = ghat_ns(k, t, p).scale(chi1)
    ns_err = longwave_decompose(k, t, p, bands).total().max_abs_diff(ref)
    gp, gm, g0 = lowfreq_forms(k, t, p, bands)
    nsp_err = (gp + gm + g0).max_abs_diff(ghat_nsp(k, t, p).scale(chi1))
    m = {"ns_reconstruction": ns_err, "nsp_reconstruction": nsp_err}
    return _finish(3, "long-wave reconstruction", {k_: v < 1e-10 for k_, v in m.items()}, m, t0)


# ---------------------------------------------------------------- 4-6, 11: synthesis

def criterion_4(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Radial quadrature against closed forms and 3D FFT synthesis."""
    from .synthesis import fft_crosscheck, radial_inverse_scalar

    t0 = time.perf_counter()
    p = FluidParams()
    r = np.linspace(0, 20, 201)
    heat = radial_inverse_scalar(lambda k: np.exp(-k * k), r, (0, 8))
    m = {"heat_kernel": float(np.max(np.abs(heat.values - (4 * np.pi) ** -1.5 * np.exp(-r * r / 4))))}
    checks = {"heat_kernel": m["heat_kernel"] < 1e-8}
    times = (1.0, 5.0) if profile == "full" else (1.0,)
    entries = ("11", "12", "21", "22iso", "22aniso")
    for system in ("ns", "nsp"):
        for t in times:
            for e in entries:
                key = f"{system}_{e}_t{t:g}"
                m[key] = fft_crosscheck(system, e, t, p)
                checks[key] = m[key] < 1e-3
    return _finish(4, "synthesis cross-validation", checks, m, t0)


def criterion_5(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Sound-front peak of the NS density kernel and its absence for NSP."""
    from .synthesis import synthesize_entry

    t0 = time.perf_counter()
    p = FluidParams()
    c = p.c
    times = np.array([5.0, 10.0, 20.0, 40.0])
    peaks, amps = [], []
    checks = {}
    for t in times:
        r = np.linspace(0, c * t + 8 * np.sqrt(1 + t), 1500)
        v = np.abs(synthesize_entry("ns", "11", t, r, p).values)
        i = int(np.argmax(v))
        peaks.append(r[i])
        amps.append(v[i])
        checks[f"ns_peak_t{t:g}"] = abs(r[i] - c * t) <= 2 * np.sqrt(1 + t)
    slope = float(np.polyfit(np.log(1 + times), np.log(amps), 1)[0])
    checks["ns_amplitude_slope"] = abs(slope + 2) <= 0.2
    m = {"ns_peak_r": peaks, "ns_peak_amp": amps, "ns_amplitude_slope": slope}
    for t in (10.0, 20.0, 40.0):
        r = np.linspace(0, 5 * c * t, 1500)
        v = np.abs(synthesize_entry("nsp", "11", t, r, p).values)
        m[f"nsp_peak_r_t{t:g}"] = float(r[np.argmax(v)])
        m[f"nsp_front_fraction_t{t:g}"] = float(np.interp(c * t, r, v) / v.max())
        checks[f"nsp_peak_t{t:g}"] = m[f"nsp_peak_r_t{t:g}"] <= 3 * np.sqrt(1 + t)
        checks[f"nsp_no_front_t{t:g}"] = m[f"nsp_front_fraction_t{t:g}"] < 0.1
    return _finish(5, "generalized Huygens principle", checks, m, t0)


def criterion_6(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Interior Riesz-wave profile of the isotropic momentum entry.

    The check uses the whole open cone ``r < ct``; the variation over the
    inner half ``r <= ct/2`` is reported alongside.
    """
    from .synthesis import synthesize_entry

    t0 = time.perf_counter()
    p = FluidParams()
    c = p.c
    consts, inner, where = {}, {}, {}
    for t in (10.0, 20.0, 40.0):
        r = np.linspace(0, c * t, 801)[:-1]
        v = np.abs(synthesize_entry("ns", "22iso", t, r, p).values)
        q = v / ((1 + t) ** -1.5 * (1 + r * r / (1 + t)) ** -1.5)
        consts[t] = float(np.max(q))
        where[t] = float(r[np.argmax(q)] / (c * t))
        inner[t] = float(np.max(q[r <= c * t / 2]))
    var = max(consts.values()) / min(consts.values())
    m = {"constants": {f"{k:g}": v for k, v in consts.items()}, "variation": var,
         "argmax_r_over_ct": {f"{k:g}": v for k, v in where.items()},
         "inner_constants": {f"{k:g}": v for k, v in inner.items()},
         "inner_variation": max(inner.values()) / min(inner.values())}
    return _finish(6, "Riesz-wave interior profile", {"variation": var < 2}, m, t0)


def criterion_11(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Surface-quadrature wave kernel against the Fourier multiplier."""
    from .synthesis import GridField, grid_positions, kirchhoff_apply, kirchhoff_fft

    t0 = time.perf_counter()
    n, L = 64, 64.0
    x = grid_positions(n, L)
    g = np.exp(-np.sum(x * x, axis=0) / 8.0)
    field_ = GridField(g, L, origin=float(x[0, 0, 0, 0]))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-12, 12, size=(200, 3))
    m, checks = {}, {}
    for t in (1.0, 5.0):
        fft = kirchhoff_fft(g, t, L)
        ref = GridField(fft, L, origin=float(x[0, 0, 0, 0]))(pts)
        quad = kirchhoff_apply(field_, t, pts, order=131)
        m[f"w_t{t:g}"] = float(np.max(np.abs(quad - ref)) / np.max(np.abs(ref)))
        checks[f"w_t{t:g}"] = m[f"w_t{t:g}"] < 1e-3
        one = kirchhoff_apply(lambda q: np.ones(q.shape[:-1]), t, pts[:5])
        m[f"w_one_t{t:g}"] = float(np.max(np.abs(one - t)))
        checks[f"w_one_t{t:g}"] = m[f"w_one_t{t:g}"] < 1e-12
    return _finish(11, "Kirchhoff identity", checks, m, t0)


# ---------------------------------------------------------------- 7-8: rate fits

def criterion_7(profile: str = "full", seed: int = 0) -> CriterionResult:
    """L2 decay rates of linearized evolution of localized data."""
    from .envelopes import fit_decay_exponent, linear_decay_series

    t0 = time.perf_counter()
    p = FluidParams()
    method = "radial" if profile == "full" else "parseval"
    times = np.linspace(10, 100, 91)
    targets = {("ns", "n"): (-0.75, 0.10), ("nsp", "n"): (-1.25, 0.15), ("nsp", "w"): (-0.75, 0.15)}
    m, checks = {"method": method}, {}
    for (system, q), (target, tol) in targets.items():
        slope, err = fit_decay_exponent(linear_decay_series(system, q, times, p, method=method))
        m[f"{system}_{q}_slope"] = slope
        m[f"{system}_{q}_stderr"] = err
        checks[f"{system}_{q}"] = abs(slope - target) <= tol
    return _finish(7, "L2 rate fits", checks, m, t0)


def criterion_8(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Crossing exponent of the H-wave and D-wave L^p decay rates."""
    from .envelopes import hd_crossover

    t0 = time.perf_counter()
    p_star, info = hd_crossover(window=(100.0, 1e4), n_times=25 if profile == "full" else 12)
    p_early, _ = hd_crossover(window=(10.0, 100.0), n_times=25 if profile == "full" else 12)
    m = {"p_star": p_star, "window": [100.0, 1e4], "p_star_window_10_100": p_early}
    return _finish(8, "H/D L^p crossover", {"p_star": abs(p_star - 2) <= 0.05}, m, t0)


# ---------------------------------------------------------------- 9: nonlinear solver

def criterion_9(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Small-data nonlinear run, equal-species symmetry and the linear regime."""
    from .solver import (InitialDataSpec, Solver, conservation_observer, envelope_observer, integrate,
                         linear_reference, make_initial_data, norm_observer)

    t0 = time.perf_counter()
    p = FluidParams()
    n, L = 64, 128.0
    t_end = 20.0 if profile == "full" else 4.0
    dt = 0.1
    m, checks = {}, {}

    st0 = make_initial_data(InitialDataSpec(amplitude=1e-3), n, L)
    _, tr = integrate(st0, t_end, dt, p, observers=[conservation_observer, norm_observer, envelope_observer()],
                      every=5)
    tt = np.array(tr.times)
    mass1 = tr.column("mass_n1")
    m["mass_n1_drift"] = float(np.max(np.abs(mass1 - mass1[0])) / abs(mass1[0]))
    scale2 = float(np.sum(np.abs(st0.n2)) * st0.cell_volume)
    m["mass_n2_drift"] = float(np.max(np.abs(tr.column("mass_n2") - tr.column("mass_n2")[0])) / scale2)
    checks["mass_n1"] = m["mass_n1_drift"] < 1e-10
    checks["mass_n2"] = m["mass_n2_drift"] < 1e-10
    m["rho_range"] = [float(tr.column("rho_min").min()), float(tr.column("rho_max").max())]
    checks["positivity"] = m["rho_range"][0] >= 0.5 and m["rho_range"][1] <= 1.5
    win = tt >= 1.0 - 1e-9
    i1 = int(np.argmin(np.abs(tt - 1.0)))
    for key in ("ratio_n2", "ratio_w2", "ratio_gradphi"):
        col = tr.column(key)
        growth = float(np.max(col[win]) / col[i1])
        m[f"{key}_t1"] = float(col[i1])
        m[f"{key}_growth"] = growth
        checks[key] = growth <= 2.0
    l2 = tr.column("l2_n2")
    late = tt >= t_end / 2
    m["l2_n2_slope_late"] = float(np.polyfit(np.log(1 + tt[late]), np.log(l2[late]), 1)[0])

    # equal species: the difference variables start and stay at zero
    sym = st0.copy()
    sym.n2[:] = 0
    sym.w2[:] = 0
    sym_end, _ = integrate(sym, t_end, dt, p)
    m["symmetry_defect"] = float(max(np.max(np.abs(sym_end.n2)), np.max(np.abs(sym_end.w2))))
    checks["symmetry"] = m["symmetry_defect"] < 1e-12

    # linear regime against the whole-space Green's-function synthesis
    spec = InitialDataSpec(amplitude=1e-6)
    lin0 = make_initial_data(spec, n, L, periodize=True)
    lin = Solver(n, L, 5.0, p, linear_only=True).step(lin0)

    def demean(f):
        return f - f.mean(axis=(-3, -2, -1), keepdims=True)

    for system, nf, wf in (("ns", lin.n1, lin.w1), ("nsp", lin.n2, lin.w2)):
        nr, wr = linear_reference(system, 5.0, p, spec, n, L)
        for q, got, ref in (("n", nf, nr), ("w", wf, wr)):
            key = f"linear_{system}_{q}"
            m[key] = float(np.linalg.norm(demean(got) - ref) / np.linalg.norm(ref))
            checks[key] = m[key] < 1e-3
    notes = "" if profile == "full" else f"shortened run, t_end = {t_end:g}"
    return _finish(9, "nonlinear small-data run", checks, m, t0, notes)


# ---------------------------------------------------------------- 10: lemma oracles

def criterion_10(profile: str = "full", seed: int = 0) -> CriterionResult:
    """Finite, refinement-stable constants for the convolution inequalities."""
    from . import lemmas as lm

    t0 = time.perf_counter()
    reports = []
    xs = [0.0, lambda t: t / 2, lambda t: t, lambda t: 2 * t]
    reports.append(lm.check_I(1, xs, [1.0, 10.0, 100.0], 2.1))
    reports.append(lm.check_I(2, xs, [1.0, 10.0, 100.0], 2.1))
    reports.append(lm.check_I(3, xs, [1.0, 10.0, 100.0], 2.1))
    reports.append(lm.check_shell([0.0, 1.0, 10.0, 100.0], [1.0, 10.0], 2.0))
    reports.append(lm.check_A1(10_000, seed=seed))
    if profile == "full":
        reports.append(lm.check_delta_conv(1.5, 1.0, "Dwave"))
        reports.append(lm.check_delta_conv(1.5, 1.0, "Hwave"))
        for i in range(1, 13):
            reports.append(lm.check_A_integral(i))
    else:
        pts = [(X, 20.0) for X in lm.region_points(20.0).values()]
        for i in (1, 5, 9):
            reports.append(lm.check_A_integral(i, point_samples=pts))
    m, checks = {}, {}
    for r in reports:
        m[r.lemma] = {"constant": r.constant, "refinement_delta": r.refinement_delta, "spread": r.spread,
                      "divergent": r.divergent, "violations": r.violations, "notes": r.notes}
        checks[r.lemma] = r.passed
    return _finish(10, "lemma oracles", checks, m, t0)


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def load_schema() -> dict:
    return json.loads(resources.files("bnsp").joinpath("schemas/acceptance.schema.json").read_text())


def acceptance_suite(profile: str = "quick", ids=None, seed: int = 0, log: Callable[[str], None] | None = None) -> dict:
    """Run criteria and collect a JSON-ready report.

    Returns
    -------
    dict
        ``{"profile", "seed", "passed", "criteria": [...]}``; ``passed`` is
        False when any criterion fails.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    ids = sorted(CRITERIA) if ids is None else list(ids)
    results = []
    for cid in ids:
        try:
            res = CRITERIA[cid](profile, seed)
        except Exception as exc:  # a crash counts as a failure, the suite goes on
            res = CriterionResult(cid, CRITERIA[cid].__doc__.splitlines()[0], False, {}, 0.0,
                                  f"error: {type(exc).__name__}: {exc}")
        if log:
            log(res.line())
        results.append(res)
    return {"profile": profile, "seed": seed, "passed": all(r.passed for r in results),
            "criteria": [asdict(r) for r in results]}


def validate_report(report: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if the report is malformed."""
    import jsonschema

    jsonschema.validate(report, load_schema())
