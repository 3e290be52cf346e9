"""Pointwise decay envelopes, envelope ratios and L^p decay-rate fits.

Envelopes are radial functions of ``(r, t)``.  The diffusion wave
``(1+t)^-a (1 + r^2/(1+t))^-b`` is centred at the origin and the
generalized Huygens wave ``(1+t)^-a (1 + (r-ct)^2/(1+t))^-b`` rides the
sound front ``r = c t``.  Comparisons against them are shape-and-rate tests
with a single calibrated constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.special import gamma as gamma_fn
from scipy.special import kv

from .green_ns import ghat_ns
from .green_nsp import ghat_nsp
from .params import BandCutoffs, FluidParams
from .synthesis import (
    RadialProfile,
    radial_inverse_scalar,
    radial_inverse_tensor,
    radial_inverse_vector,
    _green_symbol,
    _k_window,
)

KINDS = ("psi1", "psi2", "psi3", "psi4", "psi5", "psi6", "W3", "Hwave", "Dwave", "gradphi")


@dataclass(frozen=True)
class EnvelopeSpec:
    """One member of the envelope family.

    Parameters
    ----------
    kind : str
        ``psi1`` .. ``psi6``, ``W3``, ``Hwave``, ``Dwave`` or ``gradphi``
        (the electric-field bound ``(1+t)^-(3-eps)/2 (1+r^2/(1+t))^-(2-eps)/2``).
    eps : float
        Slack in the spatial exponent, ``0 < eps < 1``.
    c : float
        Front speed.
    D : float
        Diffusion constant of ``W3``.
    alpha_order : int
        Derivative count; multiplies by ``(1+t)^(-alpha_order/2)``.
    time_exponent : float, optional
        Time exponent of ``Hwave``/``Dwave`` (default 2).
    space_exponent : float
        Spatial exponent of ``Hwave``/``Dwave``.
    """

    kind: str
    eps: float = 0.05
    c: float = 1.0
    D: float = 1.0
    alpha_order: int = 0
    time_exponent: float | None = None
    space_exponent: float = 1.5

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown envelope kind {self.kind!r}; expected one of {KINDS}")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1) (got {self.eps})")
        if self.c <= 0 or self.D <= 0:
            raise ValueError("c and D must be positive")


def _dwave(r, t, a, b):
    return (1 + t) ** (-a) * (1 + r * r / (1 + t)) ** (-b)


def _hwave(r, t, a, b, c):
    return (1 + t) ** (-a) * (1 + (r - c * t) ** 2 / (1 + t)) ** (-b)


def envelope_value(spec: EnvelopeSpec, r, t):
    """Evaluate an envelope.

    Parameters
    ----------
    spec : EnvelopeSpec
    r : array_like
        Distance ``|x|`` from the origin, or points of shape ``(..., 3)``
        when the last axis has length 3 and ``r`` is at least 2-D.
    t : array_like
        Times ``>= 0``.

    Returns
    -------
    ndarray
        Strictly positive values.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim >= 2 and r.shape[-1] == 3:
        r = np.linalg.norm(r, axis=-1)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    e, c, b = spec.eps, spec.c, 1.5 - spec.eps
    k = spec.kind
    if k == "psi1":
        v = _dwave(r, t, 2, b) + _hwave(r, t, 2, b, c)
    elif k == "psi2":
        v = _dwave(r, t, 1.5, b) + _hwave(r, t, 2, b, c)
    elif k == "psi3":
        v = _dwave(r, t, 2, 1.5)
    elif k == "psi4":
        v = _dwave(r, t, 1.5, 1.5)
    elif k == "psi5":
        v = _dwave(r, t, 2, b)
    elif k == "psi6":
        v = _dwave(r, t, 1.5, b)
    elif k == "gradphi":
        v = _dwave(r, t, (3 - e) / 2, (2 - e) / 2)
    elif k == "Dwave":
        v = _dwave(r, t, 2.0 if spec.time_exponent is None else spec.time_exponent, spec.space_exponent)
    elif k == "Hwave":
        v = _hwave(r, t, 2.0 if spec.time_exponent is None else spec.time_exponent, spec.space_exponent, c)
    else:  # W3
        D = spec.D
        s = 1 + t
        front = np.abs(r - c * t)
        base = s ** (-1.5) / np.sqrt(D)
        v = np.where(front <= np.sqrt(D * s), base, base * np.exp(-front ** 2 / (4 * s * D)))
    if spec.alpha_order:
        v = v * (1 + t) ** (-spec.alpha_order / 2.0)
    return v


def envelope_ratio(profile, spec: EnvelopeSpec, t: float | None = None, r=None, mask=None):
    """Supremum of ``|value| / envelope`` and where it is attained.

    Parameters
    ----------
    profile : RadialProfile or ndarray
        A radial profile, or field values sampled at radii ``r``.
    spec : EnvelopeSpec
    t : float, optional
        Defaults to ``profile.t``.
    r : array_like, optional
        Radii of the samples when ``profile`` is an array.
    mask : array_like of bool, optional
        Restrict the supremum to these samples.

    Returns
    -------
    ratio : float
    r_at : float
        Radius of the maximizer.
    """
    if isinstance(profile, RadialProfile):
        vals, rr = np.asarray(profile.values), profile.r
        t = profile.t if t is None else t
    else:
        vals = np.asarray(profile)
        if r is None:
            raise ValueError("radii are required for raw arrays")
        rr = np.broadcast_to(np.asarray(r, dtype=float), vals.shape)
    if t is None:
        raise ValueError("time is required")
    vals, rr = np.ravel(vals), np.ravel(rr)
    if mask is not None:
        m = np.ravel(np.broadcast_to(mask, np.shape(profile.values) if isinstance(profile, RadialProfile) else vals.shape))
        vals, rr = vals[m], rr[m]
    if vals.size == 0:
        raise ValueError("empty grid")
    q = np.abs(vals) / envelope_value(spec, rr, t)
    i = int(np.argmax(q))
    return float(q[i]), float(rr[i])


def lp_norm(values, p: float, r=None, dV: float | None = None) -> float:
    """L^p norm of a radial profile or of gridded field values.

    Parameters
    ----------
    values : RadialProfile or ndarray
        Radial profiles are integrated against ``4 pi r^2`` with the
        trapezoid rule.  Arrays are treated as grid samples with cell
        volume ``dV`` (vector fields: leading axis of length 3 is the
        component axis when ``values.ndim == 4``).
    p : float
        Exponent in ``(1, inf]``.
    r : array_like, optional
        Radii for a raw radial array.
    dV : float, optional
        Grid cell volume; default 1.

    Returns
    -------
    float
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1 (got {p})")
    if isinstance(values, RadialProfile):
        r, v = values.r, np.abs(np.asarray(values.values))
    else:
        v = np.abs(np.asarray(values))
        if v.ndim == 4 and v.shape[0] == 3:
            v = np.sqrt(np.sum(v * v, axis=0))
    if v.size == 0:
        raise ValueError("empty grid")
    if np.isinf(p):
        return float(np.max(v))
    if r is not None:
        r = np.asarray(r, dtype=float)
        return float((4 * np.pi * integrate.trapezoid(r * r * v ** p, r)) ** (1 / p))
    return float((np.sum(v ** p) * (1.0 if dV is None else dV)) ** (1 / p))


def profile_lp_norm(spec: EnvelopeSpec, t: float, p: float) -> float:
    """L^p norm of a closed-form envelope by adaptive quadrature."""
    if not p > 1:
        raise ValueError(f"p must exceed 1 (got {p})")
    if np.isinf(p):
        rr = np.array([0.0, spec.c * t])
        return float(np.max(envelope_value(spec, rr, t)))
    w = np.sqrt(1 + t)
    f = lambda r: 4 * np.pi * r * r * envelope_value(spec, r, t) ** p  # noqa: E731
    ct = spec.c * t
    pieces = [(0.0, max(ct - 20 * w, 0.0)), (max(ct - 20 * w, 0.0), ct + 20 * w), (ct + 20 * w, np.inf)]
    total = 0.0
    for a, b in pieces:
        if b > a:
            pts = [ct] if a < ct < b and np.isfinite(b) else None
            total += integrate.quad(f, a, b, points=pts, limit=400, epsabs=0, epsrel=1e-11)[0]
    return float(total ** (1 / p))


@dataclass
class DecaySeries:
    """Norms of one quantity sampled at increasing times."""

    times: np.ndarray
    norms: np.ndarray
    p: float = 2.0
    quantity: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.norms = np.asarray(self.norms, dtype=float)
        if self.times.shape != self.norms.shape:
            raise ValueError("times and norms must have the same shape")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(~(self.norms > 0)):
            raise ValueError("norms must be positive")


def fit_decay_exponent(series: DecaySeries, window=None):
    """Least-squares slope of ``log norm`` against ``log(1+t)``.

    Parameters
    ----------
    series : DecaySeries
    window : tuple of float, optional
        ``(t_lo, t_hi)``, inclusive.  Defaults to all samples.

    Returns
    -------
    slope, stderr : float
    """
    t, y = series.times, series.norms
    if window is not None:
        m = (t >= window[0]) & (t <= window[1])
        t, y = t[m], y[m]
    if t.size < 5:
        raise ValueError(f"need at least 5 samples in the window (got {t.size})")
    x = np.log1p(t)
    if np.ptp(x) == 0:
        raise ValueError("degenerate window")
    X = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, np.log(y), rcond=None)
    resid = np.log(y) - X @ coef
    dof = t.size - 2
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return float(coef[0]), float(np.sqrt(max(cov[0, 0], 0.0)))


def profile_decay_series(spec: EnvelopeSpec, times, p: float) -> DecaySeries:
    """L^p norms of a closed-form envelope at the given times."""
    times = np.asarray(times, dtype=float)
    return DecaySeries(times, np.array([profile_lp_norm(spec, t, p) for t in times]), p, spec.kind)


def hd_crossover(window=(100.0, 1e4), c: float = 1.0, n_times: int = 25,
                 d_time_exponent: float = 1.5, h_time_exponent: float = 2.0, bracket=(1.5, 3.0)):
    """Exponent ``p`` at which H-wave and D-wave L^p rates coincide.

    The H-wave is ``(1+t)^-h (1+(r-ct)^2/(1+t))^-3/2`` and the D-wave
    ``(1+t)^-d (1+r^2/(1+t))^-3/2``, the two profiles bounding the momentum.
    Their fitted slopes over ``window`` are compared as functions of ``p``.

    Returns
    -------
    p_star : float
    info : dict
        Slopes at a few exponents for reporting.
    """
    times = np.geomspace(window[0], window[1], n_times)
    H = EnvelopeSpec("Hwave", c=c, time_exponent=h_time_exponent)
    Dw = EnvelopeSpec("Dwave", c=c, time_exponent=d_time_exponent)

    def gap(p):
        sh = fit_decay_exponent(profile_decay_series(H, times, p))[0]
        sd = fit_decay_exponent(profile_decay_series(Dw, times, p))[0]
        return sh - sd

    p_star = optimize.brentq(gap, *bracket, xtol=1e-6)
    info = {q: gap(q) for q in (1.5, 2.0, 3.0)}
    return float(p_star), info


def hd_exchange_check(a1: float, x_grid, t_grid, c: float = 1.0):
    """Empirical constant of the front-to-origin exchange inequality.

    Checks ``(1+(|x|-ct)^2/(1+t))^-a1 <= C (1+t)^(2 a1) (1+|x|^2/(1+t))^-a1``
    on the sweep and reports the smallest admissible ``C`` on each side of
    ``|x| = 2ct``.

    Returns
    -------
    dict
        ``C`` (overall), ``C_inner`` (``|x| <= 2ct``), ``C_outer``.
    """
    if not a1 > 0:
        raise ValueError("a1 must be positive")
    x = np.asarray(x_grid, dtype=float)[None, :]
    t = np.asarray(t_grid, dtype=float)[:, None]
    lhs = (1 + (x - c * t) ** 2 / (1 + t)) ** (-a1)
    rhs = (1 + t) ** (2 * a1) * (1 + x * x / (1 + t)) ** (-a1)
    q = lhs / rhs
    inner = x <= 2 * c * t
    C_in = float(np.max(np.where(inner, q, 0.0)))
    C_out = float(np.max(np.where(~inner, q, 0.0)))
    C = max(C_in, C_out)
    if not np.isfinite(C):
        raise AssertionError("exchange constant is not finite")
    return {"C": C, "C_inner": C_in, "C_outer": C_out}


# ---------------------------------------------------------------- linear evolution of localized data

def algebraic_ft(k, nu: float):
    """Fourier transform of ``(1 + r^2)^-nu`` in three dimensions.

    ``(2 pi)^(3/2) 2^(1-nu) / Gamma(nu) k^(nu-3/2) K_(nu-3/2)(k)``, valid
    for ``nu > 0`` and ``k > 0``.
    """
    k = np.asarray(k, dtype=float)
    a = nu - 1.5
    return (2 * np.pi) ** 1.5 * 2 ** (1 - nu) / gamma_fn(nu) * k ** a * kv(a, k)


@dataclass(frozen=True)
class LocalizedData:
    """Radial initial data for the linear problems.

    The density is ``amp_n (1+r^2/l^2)^-nu_n``, or ``Laplacian psi`` with
    ``psi = amp_n (1+r^2/l^2)^-nu_n`` when ``laplacian`` is set (zero total
    charge).  The momentum is ``amp_w (1+r^2/l^2)^-nu_w e_z``.  ``l`` is
    ``width``.
    """

    nu_n: float = 2.1
    nu_w: float = 2.1
    amp_n: float = 1.0
    amp_w: float = 1.0
    laplacian: bool = False
    width: float = 1.0

    def __post_init__(self):
        # Laplacian data decays like r^(-2 nu - 2), plain data like r^(-2 nu)
        nu_n = self.nu_n + 1.0 if self.laplacian else self.nu_n
        if min(nu_n, self.nu_w) <= 1.5:
            raise ValueError(f"data is not integrable (nu_n={self.nu_n}, nu_w={self.nu_w}, laplacian={self.laplacian})")
        if self.width <= 0:
            raise ValueError(f"width must be positive (got {self.width})")

    def _ft(self, k, nu):
        l = self.width
        return l ** 3 * algebraic_ft(l * np.asarray(k, dtype=float), nu)

    def density_hat(self, k):
        f = self.amp_n * self._ft(k, self.nu_n)
        return -np.asarray(k) ** 2 * f if self.laplacian else f

    def momentum_hat(self, k):
        return self.amp_w * self._ft(k, self.nu_w)


def default_data(system: str) -> LocalizedData:
    """Data used for the rate fits.

    NS: density and momentum decay like ``r^-4.2``.  NSP: the charge
    density is the Laplacian of ``(1+r^2)^-1.1`` and the momentum decays
    like ``r^-3.2``.
    """
    if system == "ns":
        return LocalizedData(nu_n=2.1, nu_w=2.1)
    return LocalizedData(nu_n=1.6 - 0.5, nu_w=1.6, laplacian=True)


def _ghat(system, k, t, p):
    return (ghat_ns if system == "ns" else ghat_nsp)(k, t, p)


def parseval_l2(system: str, quantity: str, t: float, p: FluidParams, data: LocalizedData,
                k_max: float = 60.0, n_nodes: int = 20000) -> float:
    """L² norm of the linear solution through Parseval, using the exact symbol.

    Parameters
    ----------
    quantity : {"n", "w"}
        Density or momentum.
    """
    x, wx = np.polynomial.legendre.leggauss(16)
    k_max = k_max / data.width
    edges = np.concatenate([np.geomspace(1e-8, 1.0, n_nodes // 32), np.linspace(1.0, max(k_max, 2.0), n_nodes // 32)[1:]])
    a, b = edges[:-1, None], edges[1:, None]
    k = (0.5 * (a + b) + 0.5 * (b - a) * x).ravel()
    w = (0.5 * (b - a) * wx).ravel()
    g = _ghat(system, k, t, p)
    n0, f0 = data.density_hat(k), data.momentum_hat(k)
    if quantity == "n":
        dens = np.abs(g.g11 * n0) ** 2 + np.abs(g.g12 * f0) ** 2 / 3
    elif quantity == "w":
        dens = np.abs(g.g21 * n0) ** 2 + np.abs(g.longitudinal * f0) ** 2 / 3 + 2 * np.abs(g.iso * f0) ** 2 / 3
    else:
        raise ValueError(f"unknown quantity {quantity!r}")
    return float(np.sqrt(np.sum(w * k * k * dens) / (2 * np.pi ** 2)))


@dataclass
class LinearRadialSolution:
    """Radial profiles of a linear solution with data along ``e_z``.

    Density ``S(r) + V(r) cos(theta)``; momentum
    ``V21(r) x_hat + IA(r) e_z + B(r) cos(theta) x_hat``.
    """

    r: np.ndarray
    t: float
    S: np.ndarray | None = None
    V: np.ndarray | None = None
    V21: np.ndarray | None = None
    IA: np.ndarray | None = None
    B: np.ndarray | None = None

    def density_l2(self) -> float:
        dens = np.abs(self.S) ** 2 + np.abs(self.V) ** 2 / 3
        return float(np.sqrt(4 * np.pi * integrate.trapezoid(self.r ** 2 * dens, self.r)))

    def momentum_l2(self) -> float:
        IA, B = self.IA, self.B
        dens = np.abs(self.V21) ** 2 + np.abs(IA) ** 2 + np.abs(B) ** 2 / 3 + 2 * np.real(IA * np.conj(B)) / 3
        return float(np.sqrt(4 * np.pi * integrate.trapezoid(self.r ** 2 * dens, self.r)))

    def evaluate(self, x):
        """Density and momentum at points ``x`` of shape ``(3, ...)``."""
        x = np.asarray(x, dtype=float)
        r = np.sqrt(np.sum(x * x, axis=0))
        with np.errstate(invalid="ignore", divide="ignore"):
            xh = np.where(r > 0, x / np.where(r > 0, r, 1.0), 0.0)
        cos = xh[2]

        def at(v):
            return np.interp(r, self.r, np.real(v))

        n = w = None
        if self.S is not None:
            n = at(self.S) + at(self.V) * cos
        if self.IA is not None:
            radial = at(self.V21) + at(self.B) * cos
            w = radial * xh
            w[2] += at(self.IA)
        return n, w


def linear_radial_solution(system: str, t: float, p: FluidParams, data: LocalizedData, r,
                           quantities=("n", "w"), bands: BandCutoffs | None = None) -> LinearRadialSolution:
    """Synthesize the linear solution from radial data as radial profiles.

    Uses the regular (non-delta) part of the symbol; the discarded
    short-wave branch is damped like ``exp(-c^2 t / mu)``.
    """
    bands = bands or BandCutoffs.default(p)
    r = np.asarray(r, dtype=float)
    window = _k_window(t, p, bands, "all")
    window = (1e-9, max(window[1], 40.0 / data.width) if t < 1 else window[1])
    bps = [bands.eps1, 2 * bands.eps1, bands.K, bands.K + bands.width, 1.0]
    kw = dict(t=t, c=p.c, breakpoints=bps)

    def G(k):
        return _green_symbol(system, k, t, p, bands, "all")

    sol = LinearRadialSolution(r, t)
    if "n" in quantities:
        sol.S = radial_inverse_scalar(lambda k: G(k).g11 * data.density_hat(k), r, window, **kw).values
        sol.V = radial_inverse_vector(lambda k: -1j * G(k).g12 * data.momentum_hat(k), r, window, **kw).values
    if "w" in quantities:
        sol.V21 = radial_inverse_vector(lambda k: -1j * G(k).g21 * data.density_hat(k), r, window, **kw).values
        iso = radial_inverse_scalar(lambda k: G(k).iso * data.momentum_hat(k), r, window, **kw).values
        A, B = radial_inverse_tensor(lambda k: G(k).aniso * data.momentum_hat(k), r, window, **kw)
        sol.IA, sol.B = iso + A.values, B.values
    return sol


def radial_l2(system: str, quantity: str, t: float, p: FluidParams, data: LocalizedData,
              bands: BandCutoffs | None = None, dr: float = 0.5, r_pad: float = 30.0) -> float:
    """L² norm of the linear solution synthesized as radial profiles.

    The angular average of the squared modulus is done in closed form and
    the radial integral by the trapezoid rule.
    """
    r_max = p.c * t + r_pad * np.sqrt(1 + t) * data.width
    r = np.arange(0.0, r_max + dr, dr)
    if quantity not in ("n", "w"):
        raise ValueError(f"unknown quantity {quantity!r}")
    sol = linear_radial_solution(system, t, p, data, r, (quantity,), bands)
    return sol.density_l2() if quantity == "n" else sol.momentum_l2()


def linear_decay_series(system: str, quantity: str, times, p: FluidParams, data: LocalizedData | None = None,
                        method: str = "radial", bands: BandCutoffs | None = None) -> DecaySeries:
    """L² norms of a linearized solution at several times.

    Parameters
    ----------
    method : {"radial", "parseval"}
    """
    data = data or default_data(system)
    times = np.asarray(times, dtype=float)
    if method == "radial":
        norms = [radial_l2(system, quantity, t, p, data, bands) for t in times]
    elif method == "parseval":
        norms = [parseval_l2(system, quantity, t, p, data) for t in times]
    else:
        raise ValueError(f"unknown method {method!r}")
    return DecaySeries(times, np.array(norms), 2.0, f"{system}:{quantity}", {"method": method})
