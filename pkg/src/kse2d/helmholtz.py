"""Helmholtz-Leray decomposition u = grad q + v and gradient-drift measures.

Per mode k != 0 the solenoidal part is vhat = (I - k k^T/|k|^2) uhat; the
k = 0 mode is assigned to v so that q stays mean-zero.  All norms and inner
products here are plain L2(T^2) quantities (no 1/(4 pi^2) normalization) so
the energy identity

    d/dt 0.5*||v||^2 + ||Lap v||^2 = lam*||grad v||^2 - 2*(grad q . S, v)

holds term by term, with S the antisymmetric part of grad v.
"""

from dataclasses import dataclass

import numpy as np

from .fields import SpectralField, VectorField

TWO_PI_SQ = 4.0 * np.pi ** 2   # |T^2| = (2 pi)^2


@dataclass
class HodgeDecomposition:
    v: VectorField
    grad_q: VectorField
    q: SpectralField


def leray_project(u):
    """Split u into its mean-free gradient part and solenoidal remainder."""
    grid = u.grid
    f1 = u.u1.spectral
    f2 = u.u2.spectral
    ksq = np.where(grid.ksq > 0, grid.ksq, 1.0)
    div_over_ksq = (grid.k1 * f1 + grid.k2 * f2) / ksq
    g1 = grid.k1 * div_over_ksq
    g2 = grid.k2 * div_over_ksq
    g1[0, 0] = 0.0
    g2[0, 0] = 0.0
    qhat = -1j * div_over_ksq
    qhat[0, 0] = 0.0
    v = VectorField(SpectralField(grid, spectral=f1 - g1),
                    SpectralField(grid, spectral=f2 - g2))
    grad_q = VectorField(SpectralField(grid, spectral=g1),
                         SpectralField(grid, spectral=g2))
    return HodgeDecomposition(v=v, grad_q=grad_q, q=SpectralField(grid, spectral=qhat))


def _l2_sq(*fields):
    """Un-normalized ||.||_{L2}^2 via Parseval: 4 pi^2 * sum |fhat|^2."""
    return TWO_PI_SQ * sum(float(np.sum(np.abs(f.spectral) ** 2)) for f in fields)


def _inner(a, b):
    """Un-normalized L2 pairing of two real fields by Riemann sum."""
    grid = a.grid
    return float(grid.dx ** 2 * np.sum(a.physical * b.physical))


@dataclass
class DriftQuantities:
    norm_Pu_L2: float
    norm_grad_v_L2: float
    norm_lap_v_L2: float
    coupling_term: float


def drift_quantities(u):
    """Solenoidal-part norms and the coupling term 2*(grad q . S, v)."""
    grid = u.grid
    dec = leray_project(u)
    v1, v2 = dec.v.u1, dec.v.u2
    norm_pu = np.sqrt(_l2_sq(v1, v2))
    norm_grad_v = np.sqrt(_l2_sq(v1.derive((1, 0)), v1.derive((0, 1)),
                                 v2.derive((1, 0)), v2.derive((0, 1))))
    lap1 = SpectralField(grid, spectral=-grid.ksq * v1.spectral)
    lap2 = SpectralField(grid, spectral=-grid.ksq * v2.spectral)
    norm_lap_v = np.sqrt(_l2_sq(lap1, lap2))
    # 2*(grad q . S, v) = int (d_j q)(d_j v_i - d_i v_j) v_i; in 2D only the
    # S_12 component survives.
    s12 = 0.5 * (v2.derive((1, 0)).physical - v1.derive((0, 1)).physical)
    coupling = float(grid.dx ** 2 * np.sum(
        2.0 * s12 * (dec.grad_q.u1.physical * v2.physical
                     - dec.grad_q.u2.physical * v1.physical)))
    return DriftQuantities(norm_Pu_L2=float(norm_pu),
                           norm_grad_v_L2=float(norm_grad_v),
                           norm_lap_v_L2=float(norm_lap_v),
                           coupling_term=coupling)


def advection_inner_v(u):
    """((u.grad)u, v): independent route to the coupling term for checks."""
    dec = leray_project(u)
    u1p, u2p = u.u1.physical, u.u2.physical
    a1 = u1p * u.u1.derive((1, 0)).physical + u2p * u.u1.derive((0, 1)).physical
    a2 = u1p * u.u2.derive((1, 0)).physical + u2p * u.u2.derive((0, 1)).physical
    grid = u.grid
    return float(grid.dx ** 2 * np.sum(a1 * dec.v.u1.physical + a2 * dec.v.u2.physical))


def fit_drift_rate(times, norms, threshold_factor=1e3):
    """Least-squares slope of log(norm) vs t over the post-transient window.

    The window starts once the norm exceeds ``threshold_factor`` times the
    first nonzero sample.  Returns ``(rate, t_start)`` or ``(None, None)``
    when the window is degenerate (fewer than two usable samples).
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    pos = norms > 0
    if not pos.any():
        return None, None
    first = norms[pos][0]
    window = pos & (norms > threshold_factor * first)
    if window.sum() < 2:
        return None, None
    slope = np.polyfit(times[window], np.log(norms[window]), 1)[0]
    return float(slope), float(times[window][0])
