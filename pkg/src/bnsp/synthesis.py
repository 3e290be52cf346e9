"""Physical-space synthesis of radially structured Fourier symbols.

A symbol that depends on ``xi`` only through ``k = |xi|`` and ``xi_hat``
inverse-transforms (convention ``f(x) = (2 pi)^-3 int F(xi) e^{i xi.x} dxi``)
into radial profiles:

* scalar ``F(k)``                    -> ``f(r) = 1/(2 pi^2) int F k^2 j0(kr) dk``
* vector ``i xi_hat F(k)``           -> ``x_hat V(r)``, ``V = -1/(2 pi^2) int F k^2 j1(kr) dk``
* tensor ``xi_hat xi_hat^T F(k)``    -> ``A(r) I + B(r) x_hat x_hat^T`` with
  ``A = 1/(2 pi^2) int F k^2 j1(kr)/(kr) dk`` and ``B = -1/(2 pi^2) int F k^2 j2(kr) dk``.

The k-integrals use composite Gauss-Legendre panels whose mean node spacing
is at most ``pi / (10 (r_max + c t))``.  A 3D FFT on a periodic box is
provided as an independent oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sfft
from scipy.integrate import lebedev_rule
from scipy.ndimage import map_coordinates
from scipy.special import spherical_jn

from .green_ns import GreenHat, SingularLedger, branch_forms, cutoffs, ghat_ns
from .green_nsp import ghat_nsp
from .params import BandCutoffs, FluidParams

GL_ORDER = 8
DEFAULT_NODE_BUDGET = 400_000
_CHUNK = 2_000_000


class NodeBudgetError(RuntimeError):
    """Raised when resolving the oscillations would need too many k-nodes."""


@dataclass
class RadialProfile:
    """Samples of a radial kernel profile.

    Attributes
    ----------
    r : ndarray
        Monotone radii.
    values : ndarray
        Profile values (real or complex).
    t : float
        Time of the kernel.
    entry : str
        One of ``"11"``, ``"12"``, ``"21"``, ``"22iso"``, ``"22aniso"`` or a
        free-form tag for generic transforms.
    kind : str
        ``"scalar"``, ``"vector"`` (radial amplitude of ``x_hat``) or
        ``"tensor-iso"``/``"tensor-aniso"``.
    """

    r: np.ndarray
    values: np.ndarray
    t: float = 0.0
    entry: str = ""
    kind: str = "scalar"
    meta: dict = field(default_factory=dict)

    def __call__(self, r):
        """Cubic interpolation in ``r`` (zero beyond the sampled range)."""
        from scipy.interpolate import CubicSpline

        vals = np.asarray(self.values)
        r = np.asarray(r, dtype=float)
        if np.iscomplexobj(vals):
            re = CubicSpline(self.r, vals.real, extrapolate=False)(r)
            im = CubicSpline(self.r, vals.imag, extrapolate=False)(r)
            out = re + 1j * im
        else:
            out = CubicSpline(self.r, vals, extrapolate=False)(r)
        return np.nan_to_num(out, nan=0.0)


def k_nodes(window, breakpoints=(), dk: float = 0.01, budget: int = DEFAULT_NODE_BUDGET):
    """Composite Gauss-Legendre nodes on ``window`` with mean spacing ``<= dk``.

    Parameters
    ----------
    window : tuple of float
        ``(k_lo, k_hi)``.
    breakpoints : sequence of float
        Points where the symbol is not smooth; panels never straddle them.
    dk : float
        Upper bound on the mean node spacing.
    budget : int
        Maximum number of nodes.

    Returns
    -------
    k, w : ndarray
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError(f"empty k-window {window}")
    edges = np.unique(np.clip(np.concatenate([[lo, hi], np.asarray(breakpoints, float)]), lo, hi))
    x, wx = np.polynomial.legendre.leggauss(GL_ORDER)
    panel = GL_ORDER * dk
    counts = np.maximum(1, np.ceil(np.diff(edges) / panel).astype(int))
    total = int(counts.sum()) * GL_ORDER
    if total > budget:
        raise NodeBudgetError(f"{total} k-nodes needed (budget {budget}); reduce r_max or t, or raise the budget")
    ks, ws = [], []
    for a, b, m in zip(edges[:-1], edges[1:], counts):
        e = np.linspace(a, b, m + 1)
        h = np.diff(e)
        mid = 0.5 * (e[:-1] + e[1:])
        ks.append((mid[:, None] + 0.5 * h[:, None] * x[None, :]).ravel())
        ws.append((0.5 * h[:, None] * wx[None, :]).ravel())
    return np.concatenate(ks), np.concatenate(ws)


def resolution_dk(r_max: float, t: float = 0.0, c: float = 1.0) -> float:
    """Node spacing bound ``pi / (10 (r_max + c t))``."""
    return np.pi / (10.0 * max(r_max + c * t, 1.0))


def _bessel_sum(r, k, weights, order: int, divide: bool = False):
    """``sum_j weights_j j_order(k_j r)`` (optionally divided by ``k_j r``)."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape, dtype=complex if np.iscomplexobj(weights) else float)
    flat = r.ravel()
    res = out.ravel()
    step = max(1, _CHUNK // max(k.size, 1))
    for i in range(0, flat.size, step):
        z = np.outer(flat[i : i + step], k)
        if divide:
            # j1(z)/z -> 1/3 at z = 0
            small = z < 1e-6
            zz = np.where(small, 1.0, z)
            b = np.where(small, 1.0 / 3.0 - z * z / 30.0, spherical_jn(1, zz) / zz)
        else:
            b = spherical_jn(order, z)
        res[i : i + step] = b @ weights
    return res.reshape(r.shape)


def _prepare(symbol, window, r_grid, t, c, breakpoints, budget, dk):
    r = np.asarray(r_grid, dtype=float)
    if dk is None:
        dk = resolution_dk(float(np.max(r)) if r.size else 0.0, t, c)
    k, w = k_nodes(window, breakpoints, dk, budget)
    F = np.asarray(symbol(k))
    if not np.all(np.isfinite(F)):
        raise ValueError("symbol is not finite on the quadrature window")
    return r, k, w * F * k * k / (2.0 * np.pi ** 2)


def _maybe_real(v, tol=1e-12):
    v = np.asarray(v)
    if np.iscomplexobj(v) and np.max(np.abs(v.imag), initial=0.0) <= tol * max(np.max(np.abs(v.real), initial=0.0), 1e-300):
        return v.real.copy()
    return v


def radial_inverse_scalar(symbol: Callable, r_grid, window=(0.0, 10.0), *, t: float = 0.0, c: float = 1.0,
                          breakpoints=(), budget: int = DEFAULT_NODE_BUDGET, dk: float | None = None,
                          entry: str = "") -> RadialProfile:
    """Inverse Fourier transform of a radial scalar symbol.

    Parameters
    ----------
    symbol : callable
        ``F(k)`` evaluated on an array of wavenumbers.
    r_grid : array_like
        Radii where the profile is evaluated.
    window : tuple of float
        Integration range in ``k``; ``F`` is taken to vanish outside it.
    t, c : float
        Used only to size the node spacing against the phase ``c t k``.
    breakpoints : sequence of float
        Non-smooth points of ``F`` inside the window.
    budget : int
        Node budget.
    dk : float, optional
        Override of the node spacing.

    Returns
    -------
    RadialProfile
    """
    r, k, wf = _prepare(symbol, window, r_grid, t, c, breakpoints, budget, dk)
    vals = _bessel_sum(r, k, wf, 0)
    return RadialProfile(r, _maybe_real(vals), t, entry, "scalar", {"nodes": int(k.size)})


def radial_inverse_vector(symbol: Callable, r_grid, window=(0.0, 10.0), *, t: float = 0.0, c: float = 1.0,
                          breakpoints=(), budget: int = DEFAULT_NODE_BUDGET, dk: float | None = None,
                          entry: str = "") -> RadialProfile:
    """Radial amplitude ``V(r)`` of the inverse transform of ``i xi_hat F(k)``."""
    r, k, wf = _prepare(symbol, window, r_grid, t, c, breakpoints, budget, dk)
    vals = -_bessel_sum(r, k, wf, 1)
    return RadialProfile(r, _maybe_real(vals), t, entry, "vector", {"nodes": int(k.size)})


def radial_inverse_tensor(symbol: Callable, r_grid, window=(0.0, 10.0), *, t: float = 0.0, c: float = 1.0,
                          breakpoints=(), budget: int = DEFAULT_NODE_BUDGET, dk: float | None = None,
                          entry: str = ""):
    """Coefficients ``(A, B)`` of the inverse transform of ``xi_hat xi_hat^T F(k)``.

    Returns
    -------
    A, B : RadialProfile
        The kernel is ``A(r) I + B(r) x_hat x_hat^T``.
    """
    r, k, wf = _prepare(symbol, window, r_grid, t, c, breakpoints, budget, dk)
    A = _bessel_sum(r, k, wf, 1, divide=True)
    B = -_bessel_sum(r, k, wf, 2)
    meta = {"nodes": int(k.size)}
    return (RadialProfile(r, _maybe_real(A), t, entry, "tensor-iso", meta),
            RadialProfile(r, _maybe_real(B), t, entry, "tensor-aniso", meta))


# ---------------------------------------------------------------- FFT oracle

def grid_wavenumbers(n: int, L: float):
    """Angular wavenumbers of a full complex FFT grid, shape ``(3, n, n, n)``."""
    k1 = 2.0 * np.pi * np.fft.fftfreq(n, d=L / n)
    return np.stack(np.meshgrid(k1, k1, k1, indexing="ij"))


def grid_positions(n: int, L: float):
    """Positions matching an FFT grid with the origin at index 0 (wrapped)."""
    x1 = (L / n) * np.fft.fftfreq(n, d=1.0 / n)
    return np.stack(np.meshgrid(x1, x1, x1, indexing="ij"))


def fft_synthesize(symbol: Callable, kind: str = "scalar", n: int = 64, L: float = 64.0):
    """Inverse-transform a radial symbol on a periodic ``n^3`` grid of side ``L``.

    Parameters
    ----------
    symbol : callable
        ``F(k)``; sampled at the grid wavenumbers.
    kind : {"scalar", "vector", "tensor"}
        Block structure: ``F``, ``i xi_hat F`` or ``xi_hat xi_hat^T F``.
    n, L : int, float

    Returns
    -------
    ndarray
        Shape ``(n,n,n)`` for scalars, ``(3,n,n,n)`` for vectors and
        ``(3,3,n,n,n)`` for tensors, with the origin at index 0.
    """
    kv = grid_wavenumbers(n, L)
    kk = np.sqrt(np.sum(kv * kv, axis=0))
    F = np.asarray(symbol(np.where(kk > 0, kk, np.finfo(float).tiny)))
    if kind != "scalar":
        F = np.where(kk > 0, F, 0.0)
    norm = (n / L) ** 3
    with np.errstate(invalid="ignore", divide="ignore"):
        kh = np.where(kk > 0, kv / kk, 0.0)

    def inv(a):
        return sfft.ifftn(a, workers=-1) * norm

    if kind == "scalar":
        return inv(F)
    if kind == "vector":
        return np.stack([inv(1j * kh[i] * F) for i in range(3)])
    if kind == "tensor":
        out = np.empty((3, 3, n, n, n), dtype=complex)
        for i in range(3):
            for j in range(i, 3):
                out[i, j] = inv(kh[i] * kh[j] * F)
                out[j, i] = out[i, j]
        return out
    raise ValueError(f"unknown kind {kind!r}")


def radial_on_grid(profile_fn: Callable, n: int, L: float):
    """Evaluate a radial function on the FFT grid via its unique radii."""
    x = grid_positions(n, L)
    r = np.sqrt(np.sum(x * x, axis=0))
    ru, inv = np.unique(np.round(r, 12), return_inverse=True)
    return np.asarray(profile_fn(ru))[inv].reshape(r.shape), x, r


# ---------------------------------------------------------------- Kirchhoff operators

def sphere_rule(order: int = 7):
    """Lebedev nodes and weights on the unit sphere (weights sum to 4 pi)."""
    pts, w = lebedev_rule(order)
    return pts.T, w


def spherical_mean(g: Callable, x, R, order: int = 7):
    """``(1/4 pi) int_{|y|=1} g(x + R y) dS_y`` for points ``x`` of shape ``(..., 3)``."""
    y, w = sphere_rule(order)
    x = np.asarray(x, dtype=float)
    shp = x.shape[:-1]
    xf = x.reshape(-1, 3)
    R = np.broadcast_to(np.asarray(R, dtype=float), shp).reshape(-1)
    out = np.empty(xf.shape[0])
    step = max(1, _CHUNK // y.shape[0])
    for i in range(0, xf.shape[0], step):
        pts = xf[i : i + step, None, :] + R[i : i + step, None, None] * y[None, :, :]
        out[i : i + step] = np.asarray(g(pts)) @ w
    return (out / (4.0 * np.pi)).reshape(shp)


def _radial_spherical_mean(gr: Callable, r, R, order: int = 64):
    """Spherical mean of a radial function, reduced to one polar integral."""
    u, wu = np.polynomial.legendre.leggauss(order)
    r = np.asarray(r, dtype=float)[..., None]
    R = np.asarray(R, dtype=float)[..., None]
    q = np.sqrt(np.maximum(r * r + R * R + 2.0 * r * R * u, 0.0))
    return 0.5 * np.sum(np.asarray(gr(q)) * wu, axis=-1)


class GridField:
    """Periodic 3D samples with cubic-spline evaluation at arbitrary points.

    Parameters
    ----------
    values : ndarray
        Shape ``(n, n, n)``; sample ``[i, j, l]`` sits at
        ``origin + L/n * (i, j, l)``.
    L : float
        Box side.
    origin : float
        Coordinate of index 0 along every axis.
    """

    def __init__(self, values, L: float, origin: float = 0.0):
        from scipy.ndimage import spline_filter

        self.values = np.asarray(values, dtype=float)
        self.n = self.values.shape[0]
        self.L = float(L)
        self.origin = float(origin)
        self._coef = spline_filter(self.values, order=3, mode="grid-wrap")

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        idx = (pts - self.origin) * (self.n / self.L)
        coords = np.moveaxis(idx, -1, 0).reshape(3, -1)
        v = map_coordinates(self._coef, coords, order=3, mode="grid-wrap", prefilter=False)
        return v.reshape(pts.shape[:-1])

    def gradient(self):
        """Spectral gradient as three :class:`GridField` objects."""
        kv = grid_wavenumbers(self.n, self.L)
        fh = sfft.fftn(self.values, workers=-1)
        return [GridField(sfft.ifftn(1j * kv[i] * fh, workers=-1).real, self.L, self.origin) for i in range(3)]


def kirchhoff_apply(g, t: float, points, *, mode: str = "w", c: float = 1.0, order: int = 7,
                    grad: Callable | None = None, support: float | None = None):
    """Apply the wave kernel ``w`` or its time derivative ``w_t`` to ``g``.

    ``w * g (x) = (t / 4 pi) int_{|y|=1} g(x + c t y) dS_y`` and
    ``w_t * g = (1 / 4 pi) int g dS + (c t / 4 pi) int grad g(x + c t y) . y dS``.

    Parameters
    ----------
    g : callable, RadialProfile or GridField
        A callable receives points of shape ``(..., 3)``.  A
        :class:`RadialProfile` is handled by the exact polar reduction.
    t : float
        Time, ``t >= 0``.
    points : array_like
        Evaluation points, shape ``(..., 3)``.
    mode : {"w", "w_t"}
    c : float
        Sound speed.
    order : int
        Lebedev order (7 gives the 26-point rule).
    grad : callable, optional
        Gradient of ``g`` for ``mode="w_t"``; a radial derivative by central
        differences is used otherwise.
    support : float, optional
        Radius beyond which ``g`` is not sampled; a warning is issued when
        ``c t`` exceeds it.

    Returns
    -------
    ndarray
        Values at ``points``.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if mode not in ("w", "w_t"):
        raise ValueError("mode must be 'w' or 'w_t'")
    if support is not None and c * t > support:
        warnings.warn(f"c t = {c * t:g} exceeds the sampled support {support:g} of g", RuntimeWarning)
    R = c * t
    pts = np.asarray(points, dtype=float)
    if isinstance(g, RadialProfile):
        r = np.sqrt(np.sum(pts * pts, axis=-1))
        gr = g
        mean = _radial_spherical_mean(gr, r, R, max(order, 32))
        if mode == "w":
            return t * mean
        h = 1e-4 * max(1.0, R)
        dmean = (_radial_spherical_mean(gr, r, R + h, max(order, 32)) - _radial_spherical_mean(gr, r, max(R - h, 0.0), max(order, 32))) / (R + h - max(R - h, 0.0))
        return mean + R * dmean
    mean = spherical_mean(g, pts, R, order)
    if mode == "w":
        return t * mean
    if grad is not None:
        y, w = sphere_rule(order)
        flat = pts.reshape(-1, 3)
        acc = np.empty(flat.shape[0])
        step = max(1, _CHUNK // y.shape[0])
        for i in range(0, flat.shape[0], step):
            q = flat[i : i + step, None, :] + R * y[None]
            gv = np.asarray(grad(q))  # (..., 3)
            acc[i : i + step] = np.einsum("pqi,qi,q->p", gv, y, w)
        radial = (acc / (4.0 * np.pi)).reshape(pts.shape[:-1])
    else:
        h = 1e-4 * max(1.0, R)
        lo = max(R - h, 0.0)
        radial = (spherical_mean(g, pts, R + h, order) - spherical_mean(g, pts, lo, order)) / (R + h - lo)
    return mean + R * radial


def kirchhoff_fft(g_values, t: float, L: float, *, mode: str = "w", c: float = 1.0):
    """Fourier-multiplier version of :func:`kirchhoff_apply` on a periodic grid.

    Multiplies by ``sin(c k t)/(c k)`` (``mode="w"``) or ``cos(c k t)``.
    """
    n = g_values.shape[0]
    kv = grid_wavenumbers(n, L)
    kk = np.sqrt(np.sum(kv * kv, axis=0))
    ck = c * kk
    if mode == "w":
        with np.errstate(invalid="ignore", divide="ignore"):
            m = np.where(ck > 0, np.sin(ck * t) / np.where(ck > 0, ck, 1.0), t)
    else:
        m = np.cos(ck * t)
    return sfft.ifftn(m * sfft.fftn(g_values, workers=-1), workers=-1).real


def cone_coupling_integral(x, t: float, C: float, c: float = 1.0, n_s: int = 400, method: str = "closed"):
    """``int_0^t s int_{|y|=1} exp(-|x + c s y|^2 / (C t)) / t^{5/2} dS_y ds``.

    The polar-angle integral is done in closed form,
    ``int_{|y|=1} exp(-|x + R y|^2/b) dS = (pi b / (|x| R)) (exp(-(|x|-R)^2/b) - exp(-(|x|+R)^2/b))``,
    leaving a one-dimensional integral in ``s``.  ``method="quad2d"`` keeps the
    polar angle numerical instead (used as a cross-check).

    Parameters
    ----------
    x : float or array_like
        Distance ``|x|`` (the integral is radial in ``x``).
    t, C, c : float
    n_s : int
        Number of Gauss-Legendre panels in ``s`` (8 nodes each).
    method : {"closed", "quad2d"}
    """
    if t <= 0:
        raise ValueError("t must be positive")
    X = np.atleast_1d(np.asarray(x, dtype=float))
    s, ws = k_nodes((0.0, t), (), t / (GL_ORDER * n_s), budget=10 ** 7)
    b = C * t
    R = c * s
    if method == "closed":
        Xc = X[:, None]
        small = Xc * R[None, :] < 1e-8 * b
        XR = np.where(small, 1.0, Xc * R[None, :])
        val = np.pi * b / XR * (np.exp(-(Xc - R) ** 2 / b) - np.exp(-(Xc + R) ** 2 / b))
        val = np.where(small, 4.0 * np.pi * np.exp(-(Xc * Xc + R * R) / b), val)
    elif method == "quad2d":
        u, wu = np.polynomial.legendre.leggauss(200)
        q2 = X[:, None, None] ** 2 + R[None, :, None] ** 2 + 2.0 * X[:, None, None] * R[None, :, None] * u
        val = 2.0 * np.pi * np.sum(np.exp(-q2 / b) * wu, axis=-1)
    else:
        raise ValueError("method must be 'closed' or 'quad2d'")
    out = (val * s * ws).sum(axis=-1) / t ** 2.5
    return out if np.ndim(x) else float(out[0])


# ---------------------------------------------------------------- Green's kernels

def _green_symbol(system: str, k, t, p: FluidParams, bands: BandCutoffs, band: str = "all") -> GreenHat:
    """Synthesizable part of the symbol on ``band``.

    ``long``/``mid`` multiply the full symbol by ``chi1``/``chi2``; ``short``
    keeps only ``chi3`` times the decaying branches; ``all`` sums the three.
    """
    k = np.asarray(k, dtype=float)
    g = ghat_ns if system == "ns" else ghat_nsp
    chi1, chi2, chi3 = cutoffs(k, bands)
    full = g(k, t, p)
    out = full.scale(np.zeros_like(k))
    if band in ("long", "all"):
        out = out + full.scale(chi1)
    if band in ("mid", "all"):
        out = out + full.scale(chi2)
    if band in ("short", "all"):
        sel = k > bands.K
        if np.any(sel):
            _, minus, rot = branch_forms(system, k[sel], t, p)
            reg = (minus + rot).scale(chi3[sel])
            for name in ("g11", "g12", "g21", "iso", "aniso"):
                arr = np.array(getattr(out, name), dtype=complex)
                arr[sel] += getattr(reg, name)
                setattr(out, name, arr)
    return out


def _k_window(t: float, p: FluidParams, bands: BandCutoffs, band: str):
    if band == "long":
        return 0.0, 2.0 * bands.eps1
    if band == "mid":
        return bands.eps1, bands.K + bands.width
    rate = min(p.mu1, p.mu) * max(t, 1e-12)
    k_decay = np.sqrt(42.0 / rate + 2.0 * p.c ** 2 / (p.mu * min(p.mu1, p.mu)))
    lo = 0.0 if band == "all" else bands.K
    return lo, max(bands.K + bands.width, k_decay)


def green_entry_symbol(system: str, entry: str, t: float, p: FluidParams, bands: BandCutoffs | None = None,
                       band: str = "all") -> Callable:
    """Scalar function of ``k`` feeding the radial transform for one entry.

    For ``"12"``/``"21"`` the stored amplitude ``a`` is converted to the
    ``i xi_hat F`` form, ``F = -i a``.
    """
    bands = bands or BandCutoffs.default(p)

    def F(k):
        g = _green_symbol(system, k, t, p, bands, band)
        if entry == "11":
            return g.g11
        if entry == "12":
            return -1j * g.g12
        if entry == "21":
            return -1j * g.g21
        if entry == "22iso":
            return g.iso
        if entry in ("22aniso", "22long"):
            return g.aniso
        raise ValueError(f"unknown entry {entry!r}")

    return F


def synthesize_entry(system: str, entry: str, t: float, r_grid, p: FluidParams,
                     bands: BandCutoffs | None = None, band: str = "all",
                     budget: int = DEFAULT_NODE_BUDGET, dk: float | None = None) -> RadialProfile:
    """Physical profile of one Green's-function entry at time ``t``.

    ``"11"`` is a scalar profile, ``"12"``/``"21"`` the radial amplitude of
    ``x_hat``, ``"22iso"``/``"22aniso"`` the coefficients of ``I`` and
    ``x_hat x_hat^T`` in the momentum block.
    """
    bands = bands or BandCutoffs.default(p)
    window = _k_window(t, p, bands, band)
    bps = [bands.eps1, 2 * bands.eps1, bands.K, bands.K + bands.width]
    kw = dict(t=t, c=p.c, breakpoints=bps, budget=budget, dk=dk, entry=entry)
    if entry == "11":
        prof = radial_inverse_scalar(green_entry_symbol(system, "11", t, p, bands, band), r_grid, window, **kw)
    elif entry in ("12", "21"):
        prof = radial_inverse_vector(green_entry_symbol(system, entry, t, p, bands, band), r_grid, window, **kw)
    elif entry in ("22iso", "22aniso"):
        A, B = radial_inverse_tensor(green_entry_symbol(system, "22aniso", t, p, bands, band), r_grid, window, **kw)
        if entry == "22aniso":
            prof = B
        else:
            heat = radial_inverse_scalar(green_entry_symbol(system, "22iso", t, p, bands, band), r_grid, window, **kw)
            prof = RadialProfile(A.r, A.values + heat.values, t, entry, "tensor-iso", A.meta)
    else:
        raise ValueError(f"unknown entry {entry!r}")
    prof.entry = entry
    prof.meta.update(system=system, band=band)
    return prof


def singular_ledger(system: str, t, p: FluidParams) -> SingularLedger:
    """Ledger of the Dirac-like short-wave branch (never rasterized).

    ``tail`` records the bound parameters of the non-delta remainder: an
    ``|x|^-2`` core up to radius ``R`` and ``|x|^-N`` decay beyond, damped by
    ``exp(-b t)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return SingularLedger(system, t, np.exp(-p.c ** 2 * t / p.mu), None, {"R": 1.0, "N": 4, "b": p.c ** 2 / p.mu})


def synthesize_kernel(system: str, entry: str, t_list, r_grid, p: FluidParams,
                      bands: BandCutoffs | None = None, budget: int = DEFAULT_NODE_BUDGET):
    """Profiles of one entry at several times plus the singular ledger.

    Returns
    -------
    profiles : list of RadialProfile
    ledger : SingularLedger
    """
    profiles = [synthesize_entry(system, entry, float(t), r_grid, p, bands, "all", budget) for t in t_list]
    return profiles, singular_ledger(system, t_list, p)


# ---------------------------------------------------------------- FFT cross-validation

_GAUSS_A = 2.0  # exp(-a k^2) regularizer of the subtracted long-range parts


def _coulomb_u(r, a: float = _GAUSS_A):
    """``u = erf(r / (2 sqrt a)) / (4 pi r)`` with ``u'`` and ``u''``.

    ``u`` is the inverse transform of ``exp(-a k^2) / k^2``.
    """
    from scipy.special import erf

    r = np.asarray(r, dtype=float)
    s = 2.0 * np.sqrt(a)
    small = r < 0.05
    rr = np.where(small, 1.0, r)
    E = erf(rr / s)
    E1 = np.exp(-(rr / s) ** 2) * 2.0 / (np.sqrt(np.pi) * s)
    E2 = -2.0 * rr / s ** 2 * E1
    u = E / (4 * np.pi * rr)
    du = (E1 * rr - E) / (4 * np.pi * rr ** 2)
    d2u = E2 / (4 * np.pi * rr) - 2.0 * (E1 * rr - E) / (4 * np.pi * rr ** 3)
    # series in z = r / s for the origin
    c0 = 2.0 / (np.sqrt(np.pi) * s * 4 * np.pi)
    z2 = (r / s) ** 2
    u_s = c0 * (1 - z2 / 3 + z2 ** 2 / 10)
    du_over_r_s = c0 * (2.0 / s ** 2) * (-1.0 / 3 + z2 / 5 - z2 ** 2 / 14)
    du_s = du_over_r_s * r
    d2u_s = c0 * (2.0 / s ** 2) * (-1.0 / 3 + 3 * z2 / 5 - 5 * z2 ** 2 / 14)
    u = np.where(small, u_s, u)
    du = np.where(small, du_s, du)
    d2u = np.where(small, d2u_s, d2u)
    du_over_r = np.where(small, du_over_r_s, du / rr)
    return u, du, d2u, du_over_r


def longrange_part(system: str, entry: str, t: float, p: FluidParams, a: float = _GAUSS_A):
    """Long-range piece of a long-wave entry, split off with a Gaussian.

    The NSP entries "21" and "22aniso" do not vanish at ``k = 0`` (a ``1/k``
    pole and a jump of the projection ``xi_hat xi_hat^T``); their kernels have
    ``r^-2`` and ``r^-3`` tails that a periodic box cannot hold.  This
    returns ``(F_s, prof)`` where ``F_s`` is the k=0 behaviour times
    ``exp(-a k^2)`` and ``prof`` its exact inverse transform (a function of
    ``r`` returning the entry's radial coefficient, or ``(A, B)`` for the
    tensor).  Returns ``None`` when no subtraction is needed.
    """
    if system != "nsp" or entry not in ("21", "22aniso", "22iso"):
        return None
    w = np.sqrt(2.0)
    if entry == "21":
        d0 = np.sin(w * t) / w  # branch weight at k = 0

        def F(k):
            return -2.0 * d0 * np.exp(-a * k * k) / k

        def prof(r):
            return -2.0 * d0 * _coulomb_u(r, a)[1]

        return F, prof
    a0 = np.cos(w * t) - 1.0  # longitudinal minus transverse at k = 0

    def F(k):
        return a0 * np.exp(-a * k * k)

    def prof(r):
        _, du, d2u, du_r = _coulomb_u(r, a)
        return -a0 * du_r, -a0 * (d2u - du_r)

    return F, prof


def fft_crosscheck(system: str, entry: str, t: float, p: FluidParams, bands: BandCutoffs | None = None,
                   n: int = 64, L: float = 64.0) -> float:
    """Relative L-infinity gap between radial and FFT synthesis of a long-wave entry.

    The comparison uses the long-wave band ``chi1 * G`` (band-limited well
    inside the grid's Nyquist sphere).  Long-range pieces returned by
    :func:`longrange_part` are transformed in closed form and only the
    remainder goes through the FFT.

    Returns
    -------
    float
        ``max |fft - radial| / max |radial|`` over the grid.
    """
    bands = bands or BandCutoffs.default(p)
    x = grid_positions(n, L)
    r = np.sqrt(np.sum(x * x, axis=0))
    ru, inv = np.unique(np.round(r, 12), return_inverse=True)
    inv = inv.reshape(r.shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        xh = np.where(r > 0, x / np.where(r > 0, r, 1.0), 0.0)

    def radial(e):
        return synthesize_entry(system, e, t, ru, p, bands, "long").values[inv]

    if entry in ("11", "12", "21"):
        kind = "scalar" if entry == "11" else "vector"
        F = green_entry_symbol(system, entry, t, p, bands, "long")
        lr = longrange_part(system, entry, t, p)
        if lr is None:
            Fr, extra = F, 0.0
        else:
            Fs, prof = lr
            Fr = lambda k: F(k) - Fs(k)  # noqa: E731
            extra = prof(ru)[inv]
        got = fft_synthesize(Fr, kind, n, L)
        ref = radial(entry)
        if kind == "scalar":
            got = got + extra
            return float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
        ref_v = ref * xh
        got = got + extra * xh
        return float(np.max(np.abs(got - ref_v)) / np.max(np.abs(ref_v)))

    Fa = green_entry_symbol(system, "22aniso", t, p, bands, "long")
    lr = longrange_part(system, "22aniso", t, p)
    if lr is None:
        Fr, A_s, B_s = Fa, 0.0, 0.0
    else:
        Fs, prof = lr
        Fr = lambda k: Fa(k) - Fs(k)  # noqa: E731
        a_s, b_s = prof(ru)
        A_s, B_s = a_s[inv], b_s[inv]
    T = fft_synthesize(Fr, "tensor", n, L)
    heat = fft_synthesize(green_entry_symbol(system, "22iso", t, p, bands, "long"), "scalar", n, L)
    if entry == "22iso":
        # coefficient of I: compare the xx and yy entries after removing the x_hat x_hat part
        ref_iso = radial("22iso")
        ref_b = radial("22aniso")
        worst = 0.0
        for i in range(3):
            got = T[i, i] + heat + A_s + B_s * xh[i] ** 2
            ref = ref_iso + ref_b * xh[i] ** 2
            worst = max(worst, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref_iso))))
        return worst
    ref_b = radial("22aniso")
    got = T[0, 1] + B_s * xh[0] * xh[1]
    ref = ref_b * xh[0] * xh[1]
    return float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
