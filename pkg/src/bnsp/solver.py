"""Pseudo-spectral solver for the bipolar two-fluid system on a periodic box.

Unknowns are the total and difference variables
``n1 = rho1 + rho2 - 2``, ``w1 = J1 + J2``, ``n2 = rho1 - rho2``,
``w2 = J1 - J2``.  The linear part splits into a Navier-Stokes pair on
``(n1, w1)`` and a Navier-Stokes-Poisson pair on ``(n2, w2)``; each Fourier
mode is advanced exactly by the Green's symbol, and the nonlinear momentum
forcing by an explicit midpoint rule in integrating-factor form.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft

from .green_ns import ghat_ns
from .green_nsp import ghat_nsp
from .params import FluidParams

COMPONENTS = ("n1", "w1x", "w1y", "w1z", "n2", "w2x", "w2y", "w2z")


class VacuumError(RuntimeError):
    """Raised when a density comes too close to zero."""


class StepError(RuntimeError):
    """Raised on non-finite values or a CFL violation."""


@dataclass
class Field3D:
    """State on an ``n^3`` periodic grid of side ``L``.

    ``w1`` and ``w2`` have shape ``(3, n, n, n)``; the scalars ``(n, n, n)``.
    Grid points sit at ``x = (L/n) * j`` for ``j`` in ``[-n/2, n/2)`` stored
    in FFT order, so the origin is index 0.
    """

    n: int
    L: float
    n1: np.ndarray
    w1: np.ndarray
    n2: np.ndarray
    w2: np.ndarray
    t: float = 0.0

    @classmethod
    def zeros(cls, n: int, L: float) -> "Field3D":
        z = np.zeros((n, n, n))
        return cls(n, L, z.copy(), np.zeros((3, n, n, n)), z.copy(), np.zeros((3, n, n, n)))

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** 3

    def copy(self) -> "Field3D":
        return Field3D(self.n, self.L, self.n1.copy(), self.w1.copy(), self.n2.copy(), self.w2.copy(), self.t)

    def mass(self, name: str) -> float:
        """Box integral of a scalar component."""
        return float(np.sum(getattr(self, name)) * self.cell_volume)

    def momentum(self, name: str) -> np.ndarray:
        return np.sum(getattr(self, name), axis=(1, 2, 3)) * self.cell_volume

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in (self.n1, self.w1, self.n2, self.w2))

    def stack(self) -> np.ndarray:
        """All components as an ``(8, n, n, n)`` array in :data:`COMPONENTS` order."""
        return np.concatenate([self.n1[None], self.w1, self.n2[None], self.w2])


def positions(n: int, L: float) -> np.ndarray:
    """Minimum-image positions of the grid points, shape ``(3, n, n, n)``."""
    x1 = (L / n) * np.fft.fftfreq(n, d=1.0 / n)
    return np.stack(np.meshgrid(x1, x1, x1, indexing="ij"))


def rwavenumbers(n: int, L: float) -> np.ndarray:
    """Wave vectors of the real-FFT half grid, shape ``(3, n, n, n//2+1)``."""
    k = 2 * np.pi * np.fft.fftfreq(n, d=L / n)
    kz = 2 * np.pi * np.fft.rfftfreq(n, d=L / n)
    return np.stack(np.meshgrid(k, k, kz, indexing="ij"))


class Spectral:
    """Transforms, derivatives and the 2/3 dealiasing mask for one grid."""

    def __init__(self, n: int, L: float, workers: int | None = None):
        self.n, self.L = n, L
        self.workers = workers
        self.xi = rwavenumbers(n, L)
        self.k2 = np.sum(self.xi ** 2, axis=0)
        self.k = np.sqrt(self.k2)
        kmax = np.pi * n / L
        self.mask = np.all(np.abs(self.xi) < (2.0 / 3.0) * kmax, axis=0)

    def fwd(self, f):
        return sfft.rfftn(f, axes=(-3, -2, -1), workers=self.workers)

    def inv(self, F):
        return sfft.irfftn(F, s=(self.n,) * 3, axes=(-3, -2, -1), workers=self.workers)

    def grad(self, F):
        return 1j * self.xi * F

    def div(self, V):
        return 1j * np.sum(self.xi * V, axis=0)


def poisson_solve(n2, L: float, spectral: Spectral | None = None, tol: float = 1e-10):
    """Electric field ``grad phi`` from ``Laplacian phi = n2``.

    Mode-wise ``grad phi = -i xi n2_hat / |xi|^2`` with the zero mode set to 0.

    Raises
    ------
    ValueError
        If ``mean(n2)`` is not zero relative to ``max |n2|``.
    """
    n2 = np.asarray(n2, dtype=float)
    n = n2.shape[0]
    sp = spectral or Spectral(n, L)
    mean = float(np.mean(n2))
    scale = max(float(np.max(np.abs(n2))), 1e-300)
    if abs(mean) > tol * scale and abs(mean) > 1e-300:
        raise ValueError(f"Poisson solve needs mean(n2) = 0 (got mean {mean:.3e})")
    N = sp.fwd(n2)
    return sp.inv(_grad_phi_hat(N, sp))


def _grad_phi_hat(N2, sp: Spectral):
    with np.errstate(invalid="ignore", divide="ignore"):
        inv = np.where(sp.k2 > 0, 1.0 / np.where(sp.k2 > 0, sp.k2, 1.0), 0.0)
    return -1j * sp.xi * N2 * inv


# ---------------------------------------------------------------- initial data

@dataclass(frozen=True)
class InitialDataSpec:
    """Algebraically localized initial data.

    Parameters
    ----------
    amplitude : float
        Overall size ``eps0``-proxy of the data.
    r1 : float
        Decay exponent of ``(n1, w1)``: both are ``(1+|x|^2/l^2)^-r1``.
    r2 : float
        Decay exponent of ``(n2, w2)``.  ``n2 = Laplacian psi`` with
        ``psi = (1+|x|^2/l^2)^-r2`` and ``w2 = (1+|x|^2/l^2)^-(r2+1/2)``,
        both below ``C (1+|x|^2)^-r2``.
    width : float, optional
        Length scale ``l``; by default the largest value (at most 4) that
        keeps the data at the box faces below ``tail_tol`` of the peak.
    seed : int, optional
        When given, the momentum directions are random unit vectors;
        otherwise both point along ``e_z``.
    family : str
        ``"bump"`` (the only family).
    tail_tol : float
        Maximum data size at the box faces, relative to the peak.
    """

    amplitude: float = 1e-3
    r1: float = 2.1
    r2: float = 1.6
    width: float | None = None
    seed: int | None = None
    family: str = "bump"
    tail_tol: float = 1e-6

    def __post_init__(self):
        if self.r1 < 2.1:
            raise ValueError(f"r1 must be at least 21/10 (got {self.r1})")
        if self.r2 <= 1.5:
            raise ValueError(f"r2 must exceed 3/2 (got {self.r2})")
        if self.family != "bump":
            raise ValueError(f"unknown data family {self.family!r}")


def _tail_exponent(spec: InitialDataSpec) -> float:
    # slowest spatial decay r^-2a among n1, w1 (r1), n2 (r2 + 1), w2 (r2 + 1/2)
    return min(spec.r1, spec.r2 + 0.5)


def auto_width(spec: InitialDataSpec, L: float, cap: float = 4.0) -> float:
    """Largest length scale keeping the face value below ``tail_tol``."""
    a = _tail_exponent(spec)
    # (1 + (L/2l)^2)^-a <= tol
    q = spec.tail_tol ** (-1.0 / a) - 1.0
    return float(min(cap, (L / 2) / np.sqrt(q)))


def make_initial_data(spec: InitialDataSpec, n: int = 64, L: float = 128.0, periodize: bool = False) -> Field3D:
    """Sample localized data on the grid.

    With ``periodize`` the fields are the periodic image sums of the
    whole-space data, built from their closed-form Fourier transforms
    (momentum directions along ``e_z``).  Otherwise the profiles are
    sampled pointwise and the tails beyond the box are dropped.

    Raises
    ------
    ValueError
        If the width is below the grid spacing (unresolved), the face value
        exceeds ``tail_tol``, or a density would leave ``[1/2, 3/2]``.
    """
    dx = L / n
    if periodize:
        # image sums keep the tails, so only resolution limits the width
        l = spec.width if spec.width is not None else 4.0
    else:
        l = spec.width if spec.width is not None else auto_width(spec, L)
    if l < dx:
        raise ValueError(f"unresolved data: width {l:.3g} is below the grid spacing {dx:.3g}")
    if periodize:
        return _check_range(_periodized_data(spec, l, Spectral(n, L)))
    face = (1 + (L / (2 * l)) ** 2) ** (-_tail_exponent(spec))
    if face > spec.tail_tol:
        raise ValueError(f"unresolved tail: data at the box face is {face:.2e} of the peak (limit {spec.tail_tol:.1e})")
    x = positions(n, L)
    s = 1 + np.sum(x * x, axis=0) / l ** 2
    A = spec.amplitude
    if spec.seed is None:
        e1 = e2 = np.array([0.0, 0.0, 1.0])
    else:
        rng = np.random.default_rng(spec.seed)
        e1, e2 = (v / np.linalg.norm(v) for v in rng.normal(size=(2, 3)))
    st = Field3D.zeros(n, L)
    st.n1 = A * s ** (-spec.r1)
    st.w1 = A * s ** (-spec.r1) * e1[:, None, None, None]
    # closed-form Laplacian of psi = A s^-nu; the box mean (the flux lost
    # through the faces) is removed so that the Poisson problem is solvable
    nu = spec.r2
    st.n2 = A * 2 * nu / l ** 2 * s ** (-nu - 2) * ((2 * nu - 1) * (s - 1) - 3)
    st.n2 -= st.n2.mean()
    st.w2 = A * s ** (-(spec.r2 + 0.5)) * e2[:, None, None, None]
    return _check_range(st)


def _check_range(st: Field3D) -> Field3D:
    rho1 = (st.n1 + st.n2) / 2 + 1
    rho2 = (st.n1 - st.n2) / 2 + 1
    lo, hi = min(rho1.min(), rho2.min()), max(rho1.max(), rho2.max())
    if lo < 0.5 or hi > 1.5:
        raise ValueError(f"amplitude too large: densities span [{lo:.3f}, {hi:.3f}], outside [1/2, 3/2]")
    return st


def _periodized_data(spec: InitialDataSpec, l: float, sp: Spectral) -> Field3D:
    from .envelopes import algebraic_ft

    n, L = sp.n, sp.L
    k = sp.k
    kk = np.where(k > 0, k, 1e-12)
    scale = n ** 3 / L ** 3

    def field(nu, lap=False):
        F = spec.amplitude * l ** 3 * algebraic_ft(l * kk, nu)
        if lap:
            F = -k * k * F
            F[0, 0, 0] = 0.0
        return sp.inv(F * scale)

    st = Field3D.zeros(n, L)
    st.n1 = field(spec.r1)
    st.w1[2] = field(spec.r1)
    st.n2 = field(spec.r2, lap=True)
    st.w2[2] = field(spec.r2 + 0.5)
    return st


def data_bound_constant(spec: InitialDataSpec, L: float) -> float:
    """Constant ``C`` with ``|n2_0| <= C (1+|x|^2)^-r2`` for the analytic Laplacian.

    ``|Laplacian (1+r^2/l^2)^-nu| <= 6 nu / l^2 (1+r^2/l^2)^-(nu+1)`` and
    ``(1+r^2/l^2)^-r2 <= l^(2 r2) (1+r^2)^-r2`` for ``l >= 1``.
    """
    l = spec.width if spec.width is not None else auto_width(spec, L)
    nu = spec.r2
    return float(spec.amplitude * 6 * nu / l ** 2 * max(1.0, l ** (2 * spec.r2)))


# ---------------------------------------------------------------- physical variables

def recover_physical(state: Field3D):
    """Species densities, momenta and velocities.

    Returns
    -------
    dict
        ``rho1, rho2, J1, J2, u1, u2, v1, v2`` with ``v1 = u1 + u2`` and
        ``v2 = u1 - u2``.

    Raises
    ------
    VacuumError
        If a recovered density is not positive.
    """
    rho1 = (state.n1 + state.n2) / 2 + 1
    rho2 = (state.n1 - state.n2) / 2 + 1
    if rho1.min() <= 0 or rho2.min() <= 0:
        raise VacuumError("non-positive density after recovery")
    J1 = (state.w1 + state.w2) / 2
    J2 = (state.w1 - state.w2) / 2
    u1, u2 = J1 / rho1, J2 / rho2
    return {"rho1": rho1, "rho2": rho2, "J1": J1, "J2": J2, "u1": u1, "u2": u2, "v1": u1 + u2, "v2": u1 - u2}


def to_state(rho1, rho2, J1, J2, n: int, L: float, t: float = 0.0) -> Field3D:
    """Inverse of :func:`recover_physical` on densities and momenta."""
    return Field3D(n, L, rho1 + rho2 - 2, J1 + J2, rho1 - rho2, J1 - J2, t)


# ---------------------------------------------------------------- nonlinear forcing

_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def _sym_div_hat(sp: Spectral, S: dict, mask):
    """Fourier coefficients of ``div S`` for a symmetric tensor given by its six entries."""
    Sh = {ij: sp.fwd(S[ij]) * mask for ij in _PAIRS}
    out = np.zeros((3,) + sp.k.shape, dtype=complex)
    for (i, j), v in Sh.items():
        out[i] += 1j * sp.xi[j] * v
        if i != j:
            out[j] += 1j * sp.xi[i] * v
    return out


def nonlinear_rhs(state: Field3D, p: FluidParams, electric_form: str = "divergence",
                  spectral: Spectral | None = None, dealias: bool = True, spectral_out: bool = False):
    """Nonlinear momentum forcing ``(F1, F2)``.

    Each species contributes the convective flux ``J J / rho``, the pressure
    remainder ``P(rho) - c^2 rho`` and the viscous commutator
    ``(rho - 1) J / rho``.  ``F1`` carries ``n2 grad phi`` and ``F2``
    carries ``n1 grad phi``.

    Parameters
    ----------
    electric_form : {"divergence", "direct"}
        ``n2 grad phi`` as ``div(grad phi grad phi - |grad phi|^2 I / 2)``
        or as the pointwise product.
    spectral_out : bool
        Return Fourier coefficients instead of grid values.

    Raises
    ------
    VacuumError
        If a density drops below 1/4.
    """
    sp = spectral or Spectral(state.n, state.L)
    f = sp.fwd
    U = (f(state.n1), f(state.w1), f(state.n2), f(state.w2))
    F1, F2 = _rhs_hat(U, p, sp, electric_form, dealias)
    if spectral_out:
        return F1, F2
    return sp.inv(F1), sp.inv(F2)


def _rhs_hat(U, p: FluidParams, sp: Spectral, electric_form: str = "divergence", dealias: bool = True):
    mask = sp.mask if dealias else np.ones(sp.k.shape, dtype=bool)
    n1, w1, n2, w2 = (sp.inv(a * mask) for a in U)
    rho = [(n1 + n2) / 2 + 1, (n1 - n2) / 2 + 1]
    if min(rho[0].min(), rho[1].min()) < 0.25:
        raise VacuumError("density below 1/4: too close to vacuum")
    J = [(w1 + w2) / 2, (w1 - w2) / 2]
    c2 = p.c ** 2
    gphi = sp.inv(_grad_phi_hat(U[2] * mask, sp))
    out = []
    for sign in (1.0, -1.0):
        T = {(i, j): J[0][i] * J[0][j] / rho[0] + sign * J[1][i] * J[1][j] / rho[1] for i, j in _PAIRS}
        P = p.pressure(rho[0]) - c2 * rho[0] + sign * (p.pressure(rho[1]) - c2 * rho[1])
        Q = (rho[0] - 1) * J[0] / rho[0] + sign * (rho[1] - 1) * J[1] / rho[1]
        F = -_sym_div_hat(sp, T, mask)
        F -= 1j * sp.xi * (sp.fwd(P) * mask)
        Qhat = sp.fwd(Q) * mask
        F += p.mu1 * sp.k2 * Qhat
        F += p.mu2 * sp.xi * np.sum(sp.xi * Qhat, axis=0)
        if sign > 0:
            if electric_form == "divergence":
                half = 0.5 * np.sum(gphi * gphi, axis=0)
                S = {(i, j): gphi[i] * gphi[j] - (half if i == j else 0.0) for i, j in _PAIRS}
                F += _sym_div_hat(sp, S, mask)
            elif electric_form == "direct":
                F += sp.fwd(n2 * gphi) * mask
            else:
                raise ValueError(f"unknown electric_form {electric_form!r}")
        else:
            F += sp.fwd(n1 * gphi) * mask
        out.append(F)
    return out[0], out[1]


# ---------------------------------------------------------------- linear propagator

@dataclass
class _Propagator:
    g11: np.ndarray
    g12: np.ndarray
    g21: np.ndarray
    iso: np.ndarray
    aniso: np.ndarray

    def apply(self, N, W, xh):
        d = np.sum(xh * W, axis=0)
        Nn = self.g11 * N + self.g12 * d
        Wn = self.iso * W + xh * (self.g21 * N + self.aniso * d)
        return Nn, Wn


def propagator(system: str, sp: Spectral, t: float, p: FluidParams) -> _Propagator:
    """Exact per-mode linear propagator on the real-FFT grid."""
    k = sp.k
    pos = k > 0
    kk = np.where(pos, k, 1.0)
    g = (ghat_ns if system == "ns" else ghat_nsp)(kk, t, p)
    # the zero mode: momentum mean frozen; n2 mean is zero and n1 mean frozen
    g11 = np.where(pos, g.g11, 1.0 if system == "ns" else np.cos(np.sqrt(2.0) * t))
    parts = [np.where(pos, a, 0.0) for a in (g.g12, g.g21, g.aniso)]
    iso = np.where(pos, g.iso, 1.0)
    return _Propagator(g11, parts[0], parts[1], iso, parts[2])


class Solver:
    """Integrating-factor midpoint stepper for a fixed grid, step and parameter set."""

    def __init__(self, n: int, L: float, dt: float, p: FluidParams, electric_form: str = "divergence",
                 linear_only: bool = False, workers: int | None = None, dealias: bool = True):
        self.n, self.L, self.dt, self.p = n, L, dt, p
        self.electric_form = electric_form
        self.linear_only = linear_only
        self.dealias = dealias
        self.sp = Spectral(n, L, workers)
        k = self.sp.k
        self.xh = np.where(k > 0, self.sp.xi / np.where(k > 0, k, 1.0), 0.0)
        self.E = {(s, h): propagator(s, self.sp, h, p) for s in ("ns", "nsp") for h in (dt, dt / 2)}

    def _to_hat(self, st: Field3D):
        f = self.sp.fwd
        return f(st.n1), f(st.w1), f(st.n2), f(st.w2)

    def _from_hat(self, U, t):
        i = self.sp.inv
        return Field3D(self.n, self.L, i(U[0]), i(U[1]), i(U[2]), i(U[3]), t)

    def _lin(self, U, h):
        N1, W1 = self.E[("ns", h)].apply(U[0], U[1], self.xh)
        N2, W2 = self.E[("nsp", h)].apply(U[2], U[3], self.xh)
        return [N1, W1, N2, W2]

    def _forcing(self, U, t):
        if self.linear_only:
            return None
        return _rhs_hat(U, self.p, self.sp, self.electric_form, self.dealias)

    def _advance(self, U, t):
        dt, h = self.dt, self.dt / 2
        F = self._forcing(U, t)
        if F is None:
            return self._lin(U, dt)
        Uh = [U[0], U[1] + h * F[0], U[2], U[3] + h * F[1]]
        Uh = self._lin(Uh, h)
        Fh = self._forcing(Uh, t + h)
        V = self._lin(U, dt)
        # E(h) couples the momentum forcing into the densities as well
        G = self._lin([0 * U[0], Fh[0], 0 * U[2], Fh[1]], h)
        return [v + dt * g for v, g in zip(V, G)]

    def cfl(self, st: Field3D) -> float:
        """Advective Courant number ``max |u| dt / dx``."""
        ph = recover_physical(st)
        umax = max(np.max(np.sqrt(np.sum(ph["u1"] ** 2, axis=0))), np.max(np.sqrt(np.sum(ph["u2"] ** 2, axis=0))))
        return float(umax * self.dt / st.dx)

    def step(self, st: Field3D) -> Field3D:
        if self.cfl(st) > 0.5:
            raise StepError(f"CFL violated: Courant number {self.cfl(st):.3f} > 0.5")
        U = self._advance(list(self._to_hat(st)), st.t)
        out = self._from_hat(U, st.t + self.dt)
        if not out.is_finite():
            raise StepError(f"non-finite values at t={out.t:.4g}")
        return out


_SOLVERS: dict = {}


def step(state: Field3D, dt: float, p: FluidParams, **kw) -> Field3D:
    """Advance one step of size ``dt`` (solvers are cached per configuration)."""
    key = (state.n, state.L, dt, p, tuple(sorted(kw.items())))
    if key not in _SOLVERS:
        _SOLVERS.clear()
        _SOLVERS[key] = Solver(state.n, state.L, dt, p, **kw)
    return _SOLVERS[key].step(state)


# ---------------------------------------------------------------- integration and observers

@dataclass
class Trajectory:
    """Observer records and snapshots of one run."""

    times: list = field(default_factory=list)
    records: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records])


def front_guard(L: float, t_end: float, c: float = 1.0) -> bool:
    """True when ``c t_end + 6 sqrt(1 + t_end) < L / 2``."""
    return c * t_end + 6 * np.sqrt(1 + t_end) < L / 2


def integrate(state0: Field3D, t_end: float, dt: float, p: FluidParams,
              observers: Sequence[Callable] = (), every: int = 1, snapshot_times: Sequence[float] = (),
              **solver_kw) -> tuple[Field3D, Trajectory]:
    """Advance ``state0`` to ``t_end``.

    Parameters
    ----------
    observers : sequence of callable
        ``obs(state) -> dict``; called at the start and every ``every`` steps.
    snapshot_times : sequence of float
        Copies of the state are kept at the first step reaching each time.

    Returns
    -------
    state, Trajectory
    """
    if not front_guard(state0.L, t_end, p.c):
        warnings.warn("acoustic front will wrap around the periodic box before t_end", RuntimeWarning)
    solver = Solver(state0.n, state0.L, dt, p, **solver_kw)
    traj = Trajectory()
    pending = sorted(snapshot_times)
    nsteps = int(round((t_end - state0.t) / dt))
    st = state0

    def observe(s):
        rec = {"t": s.t}
        for obs in observers:
            rec.update(obs(s))
        traj.times.append(s.t)
        traj.records.append(rec)

    observe(st)
    for i in range(1, nsteps + 1):
        st = solver.step(st)
        if i % every == 0 or i == nsteps:
            observe(st)
        while pending and st.t >= pending[0] - 1e-9:
            traj.snapshots[pending.pop(0)] = st.copy()
    return st, traj


def conservation_observer(state: Field3D) -> dict:
    """Box integrals of ``n1``, ``n2`` and ``w1``, and density range."""
    w1 = state.momentum("w1")
    rho1 = (state.n1 + state.n2) / 2 + 1
    rho2 = (state.n1 - state.n2) / 2 + 1
    return {"mass_n1": state.mass("n1"), "mass_n2": state.mass("n2"),
            "mom_w1x": float(w1[0]), "mom_w1y": float(w1[1]), "mom_w1z": float(w1[2]),
            "rho_min": float(min(rho1.min(), rho2.min())), "rho_max": float(max(rho1.max(), rho2.max()))}


def norm_observer(state: Field3D) -> dict:
    """L² norms of the four unknowns."""
    dV = state.cell_volume
    out = {}
    for name in ("n1", "w1", "n2", "w2"):
        a = getattr(state, name)
        out[f"l2_{name}"] = float(np.sqrt(np.sum(a * a) * dV))
    return out


def envelope_observer(eps: float = 0.05, c: float = 1.0):
    """Sup-ratios of ``|n2|``, ``|w2|`` and ``|grad phi|`` to their envelopes."""
    from .envelopes import EnvelopeSpec, envelope_value

    specs = {"n2": EnvelopeSpec("psi3", eps, c), "w2": EnvelopeSpec("psi4", eps, c),
             "gradphi": EnvelopeSpec("gradphi", eps, c)}
    cache = {}

    def obs(state: Field3D) -> dict:
        key = (state.n, state.L)
        if key not in cache:
            x = positions(state.n, state.L)
            cache[key] = np.sqrt(np.sum(x * x, axis=0))
        r = cache[key]
        gphi = poisson_solve(state.n2 - np.mean(state.n2), state.L)
        vals = {"n2": np.abs(state.n2), "w2": np.sqrt(np.sum(state.w2 ** 2, axis=0)),
                "gradphi": np.sqrt(np.sum(gphi ** 2, axis=0))}
        return {f"ratio_{k}": float(np.max(vals[k] / envelope_value(specs[k], r, state.t))) for k in specs}

    return obs


# ---------------------------------------------------------------- snapshots

def save_snapshot(state: Field3D, stem: str | Path, extra: dict | None = None) -> tuple[Path, Path]:
    """Write ``<stem>.json`` (header) and ``<stem>.f64`` (little-endian float64)."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    data = state.stack().astype("<f8")
    header = {"format": "bnsp-snapshot-1", "dtype": "<f8", "order": "C", "shape": list(data.shape),
              "components": list(COMPONENTS), "n": state.n, "L": state.L, "t": state.t, **(extra or {})}
    hp, bp = stem.with_suffix(".json"), stem.with_suffix(".f64")
    hp.write_text(json.dumps(header, indent=2))
    bp.write_bytes(data.tobytes(order="C"))
    return hp, bp


def load_snapshot(stem: str | Path) -> Field3D:
    """Read a snapshot written by :func:`save_snapshot`."""
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    data = np.frombuffer(stem.with_suffix(".f64").read_bytes(), dtype=header["dtype"]).reshape(header["shape"])
    data = data.astype(float)
    return Field3D(header["n"], header["L"], data[0].copy(), data[1:4].copy(), data[4].copy(), data[5:8].copy(),
                   header["t"])


# ---------------------------------------------------------------- linear reference

def linear_reference(system: str, t: float, p: FluidParams, spec: InitialDataSpec, n: int, L: float,
                     images: int = 1, dr: float = 0.05):
    """Whole-space linear solution for periodized bump data, folded onto the box.

    The radial Green's-function synthesis of the solution is summed over
    periodic images within ``images`` boxes.  For NSP the momentum kernel has
    an ``r^-3`` tail whose lattice sum converges only conditionally; that
    piece (the jump of the momentum symbol at ``k = 0`` times a Gaussian) is
    folded in Fourier space in closed form instead.  Box means are removed,
    since the torus fixes them by conservation rather than by the tails.

    Returns
    -------
    n, w : ndarray
        Zero-mean density ``(n, n, n)`` and momentum ``(3, n, n, n)``.
    """
    from .envelopes import LocalizedData, linear_radial_solution
    from .synthesis import longrange_part

    l = spec.width if spec.width is not None else 4.0
    A = spec.amplitude
    if system == "ns":
        data = LocalizedData(spec.r1, spec.r1, A, A, False, l)
    else:
        data = LocalizedData(spec.r2, spec.r2 + 0.5, A, A, True, l)
    x = positions(n, L)
    span = np.sqrt(3) * (images + 0.5) * L + 1.0
    sol = linear_radial_solution(system, t, p, data, np.arange(0.0, span + dr, dr))
    lr = longrange_part(system, "22aniso", t, p, a=8.0) if system == "nsp" else None
    f0 = float(data.momentum_hat(1e-10))
    nf = np.zeros(x.shape[1:])
    wf = np.zeros(x.shape)
    rng = range(-images, images + 1)
    for m in np.ndindex(*(len(rng),) * 3):
        shift = (np.array(m) - images)[:, None, None, None] * L
        xs = x + shift
        a, b = sol.evaluate(xs)
        nf += a
        wf += b
        if lr is not None:
            r = np.sqrt(np.sum(xs * xs, axis=0))
            with np.errstate(invalid="ignore", divide="ignore"):
                xh = np.where(r > 0, xs / np.where(r > 0, r, 1.0), 0.0)
            Ar, Br = lr[1](r)
            wf -= f0 * (Br * xh[2] * xh)
            wf[2] -= f0 * Ar
    if lr is not None:
        sp = Spectral(n, L)
        k = sp.k
        xh = np.where(k > 0, sp.xi / np.where(k > 0, k, 1.0), 0.0)
        G = f0 * lr[0](k) * xh * xh[2]
        G[:, 0, 0, 0] = 0.0
        wf += sp.inv(G * n ** 3 / L ** 3)
    nf -= nf.mean()
    wf -= wf.mean(axis=(1, 2, 3), keepdims=True)
    return nf, wf
