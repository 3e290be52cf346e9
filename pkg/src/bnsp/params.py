"""Physical parameters and the eigenvalue layer shared by both linear systems.

The linearized Navier-Stokes (NS) system has the longitudinal characteristic
polynomial ``tau**2 + mu*k**2*tau + c**2*k**2`` and the linearized
Navier-Stokes-Poisson (NSP) system adds the plasma term,
``tau**2 + mu*k**2*tau + c**2*k**2 + 2``.  Everything downstream (Green's
symbols, decompositions, the solver propagator) is built from the roots
computed here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy.special import binom

SYSTEMS = ("ns", "nsp")

# relative tolerance on the discriminant for the double-root flag
DEGENERACY_TOL = 1e-9


class InvalidParameters(ValueError):
    """Raised when a parameter set violates a physical invariant."""


class SpectralGapViolation(RuntimeError):
    """Raised when a band scan finds a non-negative growth rate.

    Attributes
    ----------
    k : float
        Wavenumber at which the largest real part was found.
    value : float
        That largest real part.
    """

    def __init__(self, message: str, k: float, value: float):
        super().__init__(message)
        self.k = k
        self.value = value


@dataclass(frozen=True)
class FluidParams:
    """Viscosities, pressure law and sound speed of the two-fluid model.

    Parameters
    ----------
    mu1 : float
        Shear viscosity, must be positive.
    mu2 : float
        Second viscosity, ``mu1 + 2*mu2/3`` must be positive.
    gamma : float
        Exponent of the pressure law ``P(rho) = rho**gamma / gamma``.
    rho_bar : float
        Background density.  Fixed at 1.
    c : float, optional
        Sound speed.  Defaults to ``sqrt(P'(rho_bar)) = rho_bar**((gamma-1)/2)``.
    """

    mu1: float = 1.0
    mu2: float = 0.0
    gamma: float = 2.0
    rho_bar: float = 1.0
    c: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.mu1) or self.mu1 <= 0:
            raise InvalidParameters(f"invariant violated: mu1 > 0 (got mu1={self.mu1})")
        if self.mu1 + 2.0 * self.mu2 / 3.0 <= 0:
            raise InvalidParameters(
                f"invariant violated: mu1 + (2/3)*mu2 > 0 (got {self.mu1 + 2.0 * self.mu2 / 3.0})"
            )
        if self.mu1 + self.mu2 <= 0:
            raise InvalidParameters(f"invariant violated: mu = mu1 + mu2 > 0 (got {self.mu1 + self.mu2})")
        if self.rho_bar != 1.0:
            raise InvalidParameters(f"invariant violated: rho_bar == 1 (got {self.rho_bar})")
        if self.gamma < 1:
            raise InvalidParameters(f"invariant violated: gamma >= 1 (got {self.gamma})")
        if self.c is None:
            object.__setattr__(self, "c", float(self.rho_bar ** ((self.gamma - 1.0) / 2.0)))
        elif not self.c > 0:
            raise InvalidParameters(f"invariant violated: c > 0 (got c={self.c})")

    @property
    def mu(self) -> float:
        """Longitudinal viscosity ``mu1 + mu2``."""
        return self.mu1 + self.mu2

    def pressure(self, rho):
        """Pressure law ``rho**gamma / gamma``."""
        return np.asarray(rho) ** self.gamma / self.gamma

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BandCutoffs:
    """Edges of the long, middle and short wave bands.

    ``chi1`` equals one below ``eps1`` and vanishes above ``2*eps1``;
    ``chi3`` vanishes below ``K`` and equals one above ``K + width``.
    """

    eps1: float
    K: float
    width: float = 1.0

    def __post_init__(self):
        if not (0 < self.eps1 and 2 * self.eps1 < self.K and self.width > 0):
            raise InvalidParameters(
                f"invariant violated: 0 < eps1 < 2*eps1 < K (got eps1={self.eps1}, K={self.K})"
            )

    @classmethod
    def default(cls, p: FluidParams) -> "BandCutoffs":
        """Defaults ``eps1 = c/(2 mu)`` and ``K = 4 c / mu``."""
        return cls(eps1=p.c / (2.0 * p.mu), K=4.0 * p.c / p.mu)


@dataclass
class EigenPair:
    """Roots of the longitudinal characteristic polynomial and their weights.

    All fields are arrays broadcast against the input wavenumbers.
    ``lambda_plus`` is the root with the larger real part; below the
    crossover the pair is complex conjugate with ``Im lambda_plus > 0``.
    """

    k: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    discriminant: np.ndarray
    degenerate: np.ndarray
    eta0: np.ndarray = field(repr=False)
    eta_plus: np.ndarray = field(repr=False)
    eta_minus: np.ndarray = field(repr=False)
    half_gap: np.ndarray = field(repr=False)  # (lambda_plus - lambda_minus) / 2


def _eigen(k, p: FluidParams, plasma: float) -> EigenPair:
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("wavenumber must be non-negative")
    mu, c2 = p.mu, p.c ** 2
    k2 = k * k
    a = -0.5 * mu * k2
    prod = c2 * k2 + plasma
    disc = (mu * k2) ** 2 - 4.0 * prod
    s = 0.5 * np.sqrt(disc.astype(complex))
    lam_m = a - s
    # Vieta for the slow real root avoids cancellation in a + s
    real_branch = disc > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_p = np.where(real_branch, prod / np.where(lam_m == 0, 1.0, lam_m), a + s)
    lam_p = np.where(real_branch & (lam_m == 0), a + s, lam_p)
    degenerate = np.abs(disc) <= DEGENERACY_TOL * (mu * k2) ** 2
    gap = 2.0 * s
    with np.errstate(divide="ignore", invalid="ignore"):
        eta0 = 1.0 / gap
        eta_p = lam_p * eta0
        eta_m = lam_m * eta0
    return EigenPair(k, lam_p, lam_m, disc, degenerate, eta0, eta_p, eta_m, s)


def ns_eigen(k, p: FluidParams) -> EigenPair:
    """Roots of ``tau**2 + mu k**2 tau + c**2 k**2 = 0``.

    Parameters
    ----------
    k : array_like
        Wavenumber magnitudes, ``k >= 0``.
    p : FluidParams

    Returns
    -------
    EigenPair
    """
    return _eigen(k, p, 0.0)


def nsp_eigen(k, p: FluidParams) -> EigenPair:
    """Roots of ``lambda**2 + mu k**2 lambda + c**2 k**2 + 2 = 0``."""
    return _eigen(k, p, 2.0)


def eigen(system: str, k, p: FluidParams) -> EigenPair:
    """Dispatch to :func:`ns_eigen` or :func:`nsp_eigen`."""
    if system == "ns":
        return ns_eigen(k, p)
    if system == "nsp":
        return nsp_eigen(k, p)
    raise ValueError(f"unknown system {system!r}; expected one of {SYSTEMS}")


def crossover_k(system: str, p: FluidParams) -> float:
    """Wavenumber where the two roots collide."""
    mu, c = p.mu, p.c
    if system == "ns":
        return 2.0 * c / mu
    # mu^2 k^4 - 4 c^2 k^2 - 8 = 0
    k2 = (4 * c * c + np.sqrt(16 * c ** 4 + 32 * mu * mu)) / (2 * mu * mu)
    return float(np.sqrt(k2))


def spectral_gap_scan(system: str, band, p: FluidParams, samples: int = 1000) -> float:
    """Largest growth rate over a wavenumber band.

    Parameters
    ----------
    system : {"ns", "nsp"}
    band : tuple of float
        ``(lo, hi)`` with ``0 <= lo < hi``.
    p : FluidParams
    samples : int
        Number of uniformly spaced wavenumbers, endpoints included.

    Returns
    -------
    float
        ``max(Re lambda_plus, Re lambda_minus, -mu1 k**2)`` over the samples.

    Raises
    ------
    SpectralGapViolation
        If the maximum is not strictly negative.
    """
    lo, hi = float(band[0]), float(band[1])
    if not (0 <= lo < hi):
        raise ValueError(f"band must satisfy 0 <= lo < hi (got {band})")
    k = np.linspace(lo, hi, samples)
    ep = eigen(system, k, p)
    rates = np.maximum.reduce([ep.lambda_plus.real, ep.lambda_minus.real, -p.mu1 * k * k])
    i = int(np.argmax(rates))
    worst = float(rates[i])
    if worst >= 0:
        raise SpectralGapViolation(
            f"spectral gap violated: max growth rate {worst:.3e} >= 0 at k={k[i]:.6g}", float(k[i]), worst
        )
    return worst


def phase_correction_beta(k, p: FluidParams, order: int | None = None):
    """Dispersive phase correction of the NS acoustic branch.

    ``c + beta(k**2) = Im(lambda_plus) / k`` exactly, so
    ``beta = sqrt(c**2 - mu**2 k**2 / 4) - c``.

    Parameters
    ----------
    k : array_like
        Positive wavenumbers below the crossover ``2c/mu``.
    p : FluidParams
    order : int, optional
        If given, return the binomial series truncated after ``k**(2*order)``
        instead of the exact value.

    Returns
    -------
    ndarray
    """
    k = np.asarray(k, dtype=float)
    kc = crossover_k("ns", p)
    if np.any(k >= kc) or np.any(k < 0):
        raise ValueError(f"beta is only defined on the conjugate branch 0 <= k < {kc:.6g}")
    c = p.c
    x = (p.mu * k / (2.0 * c)) ** 2
    if order is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            im = ns_eigen(k, p).lambda_plus.imag
            beta = np.where(k > 0, im / np.where(k > 0, k, 1.0) - c, 0.0)
        # the quotient loses digits when k is tiny; use the cancellation-free form
        return np.where(x < 1e-3, -c * x / (1.0 + np.sqrt(1.0 - x)), beta)
    return c * sum(binom(0.5, j) * (-x) ** j for j in range(1, order + 1))


def load_config(path: str | Path | None) -> dict:
    """Read a JSON or YAML configuration file into a plain dict."""
    if path is None:
        return {}
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise InvalidParameters(f"config {path} must hold a mapping")
    return data


def params_from_config(cfg: Mapping[str, Any]) -> tuple[FluidParams, BandCutoffs]:
    """Build parameters and band edges from a config mapping.

    Recognised keys are ``mu1``, ``mu2``, ``gamma``, ``c``, ``epsilon1`` and
    ``K``; missing keys take their defaults.
    """
    p = FluidParams(
        mu1=float(cfg.get("mu1", 1.0)),
        mu2=float(cfg.get("mu2", 0.0)),
        gamma=float(cfg.get("gamma", 2.0)),
        c=None if cfg.get("c") is None else float(cfg["c"]),
    )
    d = BandCutoffs.default(p)
    bands = BandCutoffs(
        eps1=float(cfg.get("epsilon1", d.eps1)),
        K=float(cfg.get("K", d.K)),
    )
    return p, bands
