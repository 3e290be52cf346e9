"""Fourier symbol of the linearized Navier-Stokes-Poisson Green's function.

Same block layout as :mod:`bnsp.green_ns`; the electric field adds ``2/k^2``
to the pressure coupling, so ``a21 = -i (c^2 k + 2/k) D`` is enhanced like
``1/k`` at long waves and the longitudinal branch oscillates at the plasma
frequency ``sqrt(2)`` instead of propagating.
"""

from __future__ import annotations

import numpy as np

from .green_ns import GreenHat, _ghat, _shortwave, branch_forms, cutoffs
from .params import BandCutoffs, FluidParams

GreenHatNsp = GreenHat


def ghat_nsp(k, t, p: FluidParams) -> GreenHat:
    """Exact Fourier symbol of the linearized NSP Green's function.

    Parameters
    ----------
    k : array_like
        Wavenumbers ``> 0``.  The lower-left block is undefined at ``k = 0``;
        use :func:`plasma_mode` for the density entry there.
    t : array_like
    p : FluidParams

    Returns
    -------
    GreenHat
        With ``nonlocal_flag`` set.

    Raises
    ------
    ValueError
        If any ``k == 0``.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise ValueError("k = 0: the Poisson coupling 2/k^2 is undefined; use plasma_mode(t) for g11")
    return _ghat("nsp", k, t, p)


def plasma_mode(t, p: FluidParams | None = None):
    """Density entry of the NSP symbol at ``k = 0``: ``cos(sqrt(2) t)``."""
    return np.cos(np.sqrt(2.0) * np.asarray(t, dtype=float))


def lowfreq_forms(k, t, p: FluidParams, bands: BandCutoffs | None = None):
    """Long-wave NSP symbol split by branch.

    Returns ``(Gplus, Gminus, G0)`` with
    ``Gplus = chi1 exp(l+ t) L1``, ``Gminus = chi1 exp(l- t) L2`` and
    ``G0 = chi1 exp(-mu1 k^2 t) (I - xi_hat xi_hat^T)``; they sum to
    ``chi1 * ghat_nsp``.

    Parameters
    ----------
    k : array_like
        Wavenumbers with ``0 < k < 2 eps1``.
    t : array_like
    p : FluidParams
    bands : BandCutoffs, optional
    """
    bands = bands or BandCutoffs.default(p)
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0) or np.any(k >= 2 * bands.eps1):
        raise ValueError(f"low-frequency forms need 0 < k < 2*eps1 = {2 * bands.eps1}")
    chi1 = cutoffs(k, bands)[0]
    plus, minus, rot = branch_forms("nsp", k, t, p)
    return plus.scale(chi1), minus.scale(chi1), rot.scale(chi1)


def shortwave_regular_nsp(k, t, p: FluidParams, bands: BandCutoffs | None = None):
    """Short-wave NSP split into a regular part and the Dirac-like ledger.

    See :func:`bnsp.green_ns.shortwave_regular`.
    """
    return _shortwave("nsp", k, t, p, bands)
