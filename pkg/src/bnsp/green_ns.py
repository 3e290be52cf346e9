"""Fourier symbol of the linearized Navier-Stokes Green's function.

The 4x4 symbol acting on ``(n, w)`` is stored through four scalar amplitudes
because it only depends on ``k = |xi|`` and the direction ``xi_hat``::

    [[ g11,           a12 * xi_hat^T                        ],
     [ a21 * xi_hat,  iso * I + aniso * xi_hat xi_hat^T      ]]

The amplitudes are derived directly from the ODE ``(d/dt + A(xi)) G = 0``
with ``A = [[0, i xi^T], [i a(k) xi, mu1 k^2 I + mu2 xi xi^T]]`` where
``a(k) = c^2`` for NS and ``c^2 + 2/k^2`` for NSP.  Writing
``D = (exp(l+ t) - exp(l- t)) / (l+ - l-)``::

    g11  = exp(l- t) - l- D
    a12  = -i k D
    a21  = -i a(k) k D
    long = exp(l- t) + l+ D          (longitudinal part of the (2,2) block)
    iso  = exp(-mu1 k^2 t)
    aniso = long - iso

``D`` is evaluated as ``exp(l+ t) t phi(2 s t)`` with ``s = (l+ - l-)/2`` and
``phi(z) = (1 - exp(-z))/z``, which is smooth through the double root.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .params import BandCutoffs, EigenPair, FluidParams, eigen, ns_eigen

ENTRIES = ("11", "12", "21", "22iso", "22aniso")


@dataclass
class GreenHat:
    """Scalar amplitudes of a direction-structured 4x4 Fourier symbol.

    Attributes
    ----------
    g11 : ndarray
        Density-density entry.
    g12 : ndarray
        Amplitude of the row ``g12 * xi_hat^T``.
    g21 : ndarray
        Amplitude of the column ``g21 * xi_hat``.
    iso, aniso : ndarray
        The momentum block is ``iso * I + aniso * xi_hat xi_hat^T``.
    k, t : ndarray
        Broadcast wavenumbers and times.
    system : str
        ``"ns"`` or ``"nsp"``.
    nonlocal_flag : bool
        True when ``g21`` carries the ``1/k`` enhancement of the Poisson term.
    """

    g11: np.ndarray
    g12: np.ndarray
    g21: np.ndarray
    iso: np.ndarray
    aniso: np.ndarray
    k: np.ndarray
    t: np.ndarray
    system: str = "ns"
    nonlocal_flag: bool = False

    @property
    def g22(self):
        return self.iso, self.aniso

    @property
    def longitudinal(self):
        """Amplitude of the (2,2) block along ``xi_hat``."""
        return self.iso + self.aniso

    def entry(self, name: str) -> np.ndarray:
        """Return one scalar amplitude by name ("11", "12", "21", "22iso", "22aniso")."""
        table = {"11": self.g11, "12": self.g12, "21": self.g21, "22iso": self.iso, "22aniso": self.aniso}
        if name not in table:
            raise ValueError(f"unknown entry {name!r}; expected one of {ENTRIES}")
        return table[name]

    def _combine(self, other, op):
        return replace(
            self,
            g11=op(self.g11, other.g11),
            g12=op(self.g12, other.g12),
            g21=op(self.g21, other.g21),
            iso=op(self.iso, other.iso),
            aniso=op(self.aniso, other.aniso),
        )

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def scale(self, factor):
        """Multiply every amplitude by ``factor`` (scalar or broadcastable array)."""
        return replace(
            self,
            g11=factor * self.g11,
            g12=factor * self.g12,
            g21=factor * self.g21,
            iso=factor * self.iso,
            aniso=factor * self.aniso,
        )

    def max_abs_diff(self, other) -> float:
        """Largest componentwise difference over all five amplitudes."""
        d = self - other
        return float(max(np.max(np.abs(np.asarray(x))) for x in (d.g11, d.g12, d.g21, d.iso, d.aniso)))

    def matrix(self, xi_hat) -> np.ndarray:
        """Assemble the 4x4 matrix for a single sample and unit direction."""
        xh = np.asarray(xi_hat, dtype=float).reshape(3)
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = complex(np.asarray(self.g11))
        m[0, 1:] = complex(np.asarray(self.g12)) * xh
        m[1:, 0] = complex(np.asarray(self.g21)) * xh
        m[1:, 1:] = complex(np.asarray(self.iso)) * np.eye(3) + complex(np.asarray(self.aniso)) * np.outer(xh, xh)
        return m


def _phi(z):
    """``(1 - exp(-z)) / z`` with its Taylor series near zero."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    direct = -np.expm1(-zs) / zs
    series = 1.0 - z / 2.0 + z * z / 6.0 - z ** 3 / 24.0 + z ** 4 / 120.0
    return np.where(small, series, direct)


def coupling(system: str, k, p: FluidParams):
    """``a(k) * k``: the lower-left entry of ``A(xi)`` divided by ``i xi_hat``.

    The NSP value ``c^2 k + 2/k`` is grouped to avoid forming ``2/k^2``.
    """
    k = np.asarray(k, dtype=float)
    if system == "ns":
        return p.c ** 2 * k
    with np.errstate(divide="ignore"):
        return p.c ** 2 * k + 2.0 / k


def branch_weight(ep: EigenPair, t):
    """``(exp(l+ t) - exp(l- t)) / (l+ - l-)``, smooth through the double root."""
    t = np.asarray(t, dtype=float)
    return np.exp(ep.lambda_plus * t) * t * _phi(2.0 * ep.half_gap * t)


def _ghat(system: str, k, t, p: FluidParams) -> GreenHat:
    k, t = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    ep = eigen(system, k, p)
    D = branch_weight(ep, t)
    em = np.exp(ep.lambda_minus * t)
    g11 = em - ep.lambda_minus * D
    long = em + ep.lambda_plus * D
    a12 = -1j * k * D
    with np.errstate(invalid="ignore"):
        a21 = -1j * coupling(system, k, p) * D
    iso = np.exp(-p.mu1 * k * k * t).astype(complex)
    return GreenHat(g11, a12, a21, iso, long - iso, k, t, system, nonlocal_flag=(system == "nsp"))


def ghat_ns(k, t, p: FluidParams) -> GreenHat:
    """Exact Fourier symbol of the linearized NS Green's function.

    Parameters
    ----------
    k : array_like
        Wavenumbers ``>= 0``.  At ``k = 0`` the symbol is the identity in
        ``n`` and ``w`` (iso-only momentum block).
    t : array_like
        Times ``>= 0``, broadcast against ``k``.
    p : FluidParams

    Returns
    -------
    GreenHat
    """
    return _ghat("ns", k, t, p)


def ode_operator(system: str, k, xi_hat, p: FluidParams) -> np.ndarray:
    """The 4x4 matrix ``A(xi)`` with ``d/dt G = -A G``."""
    k = float(k)
    xh = np.asarray(xi_hat, dtype=float).reshape(3)
    xi = k * xh
    a = np.zeros((4, 4), dtype=complex)
    a[0, 1:] = 1j * xi
    a[1:, 0] = 1j * complex(coupling(system, k, p)) * xh
    a[1:, 1:] = p.mu1 * k * k * np.eye(3) + p.mu2 * np.outer(xi, xi)
    return a


def ode_residual(system: str, k, t, xi_hat, p: FluidParams, h: float = 1e-4) -> float:
    """Max-norm of ``dG/dt + A G`` with a central difference in time."""
    from .green_nsp import ghat_nsp

    g = ghat_ns if system == "ns" else ghat_nsp
    gp = g(k, t + h, p).matrix(xi_hat)
    gm = g(k, t - h, p).matrix(xi_hat)
    g0 = g(k, t, p).matrix(xi_hat)
    res = (gp - gm) / (2 * h) + ode_operator(system, k, xi_hat, p) @ g0
    return float(np.max(np.abs(res)))


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)


def cutoffs(k, bands: BandCutoffs):
    """Smooth partition of unity ``(chi1, chi2, chi3)``.

    ``chi1`` drops from 1 to 0 on ``[eps1, 2 eps1]``; ``chi3`` rises from 0
    to 1 on ``[K, K + width]``.  Transitions are the quintic smoothstep, so
    the cut-offs are twice continuously differentiable.
    """
    k = np.asarray(k, dtype=float)
    chi1 = 1.0 - _smoothstep((k - bands.eps1) / bands.eps1)
    chi3 = _smoothstep((k - bands.K) / bands.width)
    chi2 = 1.0 - chi1 - chi3
    return chi1, chi2, chi3


def branch_forms(system: str, k, t, p: FluidParams):
    """Split ``G = exp(l+ t) L1 + exp(l- t) L2 + exp(-mu1 k^2 t) L3``.

    Returns
    -------
    plus, minus, rot : GreenHat
        The three time-dependent pieces; their sum equals the full symbol.
    """
    k, t = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(t, dtype=float))
    ep = eigen(system, k, p)
    if np.any(ep.degenerate):
        raise ValueError("branch split is singular on the double-root ring")
    ak = coupling(system, k, p)
    e0, ep_, em_ = ep.eta0, ep.eta_plus, ep.eta_minus
    Ep = np.exp(ep.lambda_plus * t)
    Em = np.exp(ep.lambda_minus * t)
    zero = np.zeros_like(Ep)
    plus = GreenHat(-em_ * Ep, -1j * k * e0 * Ep, -1j * ak * e0 * Ep, zero, ep_ * Ep, k, t, system, system == "nsp")
    minus = GreenHat(ep_ * Em, 1j * k * e0 * Em, 1j * ak * e0 * Em, zero, -em_ * Em, k, t, system, system == "nsp")
    heat = np.exp(-p.mu1 * k * k * t).astype(complex)
    rot = GreenHat(zero, zero, zero, heat, -heat, k, t, system)
    return plus, minus, rot


@dataclass
class WaveComponents:
    """Long-wave split of ``chi1 * G`` into named wave pairs.

    ``E`` is the rotational (heat) pair, ``H`` the Huygens pair, ``R1`` and
    ``R2`` the two Riesz pairs and ``RE`` the remainder.
    """

    E: GreenHat
    H: GreenHat
    R1: GreenHat
    R2: GreenHat
    RE: GreenHat

    def total(self) -> GreenHat:
        return self.E + self.H + self.R1 + self.R2 + self.RE


def _hat(g11=0, g12=0, g21=0, iso=0, aniso=0, *, like):
    z = np.zeros_like(like, dtype=complex)
    return GreenHat(z + g11, z + g12, z + g21, z + iso, z + aniso, like, like, "ns")


def longwave_decompose(k, t, p: FluidParams, bands: BandCutoffs | None = None) -> WaveComponents:
    """Decompose the long-wave NS symbol into wave pairs.

    With ``A = exp(Re l+ t)``, ``Im l+ = k (c + beta)`` and
    ``La = xi_hat xi_hat^T``, ``Lb = k xi_hat xi_hat^T``, ``Lc = I``
    (all in the momentum block)::

        E  = exp(-mu1 k^2 t) Lc
        R1 = exp(-mu1 k^2 t) (cos(ckt) - 1) La
        R2 = (A - exp(-mu1 k^2 t)) cos(ckt) La
        H  = A [cos(ckt) (cos(k beta t) (L1+L2-La) + i sin(k beta t) (L1-L2-Lb))
                + sin(ckt) (-sin(k beta t) (L1+L2-La) + i cos(k beta t) (L1-L2-Lb))]
        RE = A [cos(ckt) ((cos(k beta t) - 1) La + i sin(k beta t) Lb)
                + sin(ckt) (-sin(k beta t) La + i cos(k beta t) Lb)]

    every piece multiplied by ``chi1(k)``.

    Parameters
    ----------
    k : array_like
        Positive wavenumbers inside the long-wave band ``k < 2 eps1``.
    t : array_like
    p : FluidParams
    bands : BandCutoffs, optional

    Returns
    -------
    WaveComponents
    """
    from .params import phase_correction_beta

    bands = bands or BandCutoffs.default(p)
    k, t = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(t, dtype=float))
    if np.any(k <= 0) or np.any(k >= 2 * bands.eps1):
        raise ValueError(f"long-wave decomposition needs 0 < k < 2*eps1 = {2 * bands.eps1}")
    chi1 = cutoffs(k, bands)[0]
    ep = ns_eigen(k, p)
    c = p.c
    amp = np.exp(ep.lambda_plus.real * t)
    heat = np.exp(-p.mu1 * k * k * t)
    kbt = k * phase_correction_beta(k, p) * t
    ckt = c * k * t
    cb, sb, cc, sc = np.cos(kbt), np.sin(kbt), np.cos(ckt), np.sin(ckt)

    # L1 + L2 - La = diag(1, 0); L1 - L2 - Lb from the eta weights
    e0, ep_, em_ = ep.eta0, ep.eta_plus, ep.eta_minus
    ak = coupling("ns", k, p)
    sum_g11 = np.ones_like(e0)
    dif = dict(g11=-em_ - ep_, g12=-2j * k * e0, g21=-2j * ak * e0, aniso=ep_ + em_ - k)

    def mix(cs, cd):
        # cs * (L1+L2-La) + cd * (L1-L2-Lb)
        return _hat(
            g11=cs * sum_g11 + cd * dif["g11"],
            g12=cd * dif["g12"],
            g21=cd * dif["g21"],
            aniso=cd * dif["aniso"],
            like=k,
        )

    H = mix(amp * (cc * cb - sc * sb), amp * 1j * (cc * sb + sc * cb))
    E = _hat(iso=heat, like=k)
    R1 = _hat(aniso=heat * (cc - 1.0), like=k)
    R2 = _hat(aniso=(amp - heat) * cc, like=k)
    re_a = amp * (cc * (cb - 1.0) - sc * sb)
    re_b = amp * 1j * (cc * sb + sc * cb)
    RE = _hat(aniso=re_a + re_b * k, like=k)
    comps = [g.scale(chi1) for g in (E, H, R1, R2, RE)]
    for g in comps:
        g.t = t
    return WaveComponents(*comps)


@dataclass
class SingularLedger:
    """Non-synthesizable short-wave branch, kept symbolically.

    The slow real root ``l+ -> -c^2/mu`` gives a symbol that does not decay in
    ``k``; in physical space it is a Dirac mass of weight ``delta_weight``
    plus a kernel that decays exponentially in time.
    """

    system: str
    t: np.ndarray
    delta_weight: np.ndarray  # exp(-c^2 t / mu)
    symbol: GreenHat | None = None  # chi3 * exp(l+ t) L1
    tail: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "system": self.system,
            "t": np.atleast_1d(self.t).tolist(),
            "delta_weight": np.atleast_1d(self.delta_weight).tolist(),
            "tail": dict(self.tail),
            "note": "Dirac mass in the density-density entry times exp(-c^2 t/mu); not rasterized",
        }


def _shortwave(system: str, k, t, p: FluidParams, bands: BandCutoffs | None):
    bands = bands or BandCutoffs.default(p)
    k, t = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(t, dtype=float))
    if np.any(k <= bands.K):
        raise ValueError(f"short-wave split needs k > K = {bands.K}")
    chi3 = cutoffs(k, bands)[2]
    plus, minus, rot = branch_forms(system, k, t, p)
    regular = (minus + rot).scale(chi3)
    ledger = SingularLedger(system, t, np.exp(-p.c ** 2 * t / p.mu), plus.scale(chi3), {"R": 1.0, "N": 4, "b": p.c ** 2 / p.mu})
    return regular, ledger


def shortwave_regular(k, t, p: FluidParams, bands: BandCutoffs | None = None):
    """Split the short-wave NS symbol into a regular part and a ledger entry.

    Parameters
    ----------
    k : array_like
        Wavenumbers ``> K``.
    t : array_like
    p : FluidParams
    bands : BandCutoffs, optional

    Returns
    -------
    regular : GreenHat
        ``chi3 * (exp(l- t) L2 + exp(-mu1 k^2 t) L3)``, decaying like a heat
        kernel in ``k``.
    ledger : SingularLedger
        ``chi3 * exp(l+ t) L1``, the Dirac-like part.
    """
    return _shortwave("ns", k, t, p, bands)
