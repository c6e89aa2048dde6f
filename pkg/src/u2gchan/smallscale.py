"""Per-path small-scale parameter kernels: delays, powers, PVF, angles, phases.

The functions here are pure and vectorized; :mod:`u2gchan.channel` strings
them together over stationary segments.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateGeometryError, DomainError, GeometryError, PowerUnderflowError
from .scenario import SPEED_OF_LIGHT, TWO_PI, vector_angles, wrap_2pi


def _norm(v):
    return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)


# -- delays -------------------------------------------------------------------

def los_delay(tx_pos, rx_pos, e_p=0.0, e_q=0.0, c=SPEED_OF_LIGHT):
    """Element-to-element LoS delay ``|(L_tx + e_p) - (L_rx + e_q)| / c``."""
    dist = _norm((np.asarray(tx_pos, float) + e_p) - (np.asarray(rx_pos, float) + e_q))
    if np.any(dist == 0):
        raise DegenerateGeometryError("Tx and Rx elements coincide")
    return dist / c


def nlos_path_length(d_nm, h, xi_ngs, elevation, a, b):
    """Three-segment NLoS length: fuselage + free-space link + near-ground."""
    s = np.sin(np.asarray(elevation, dtype=float))
    if np.any(s <= 0):
        raise GeometryError("UAV must be above the ground terminal horizon (elevation > 0)")
    na, nb = _norm(a), _norm(b)
    if np.any(na == 0) or np.any(nb == 0):
        raise GeometryError("near-ground distance vectors must be non-zero")
    return np.asarray(d_nm, float) + (np.asarray(h, float) - xi_ngs) / s + nb + na


def nlos_delay(d_nm, h, xi_ngs, elevation, a, b, c=SPEED_OF_LIGHT):
    """NLoS delay; ``elevation`` is the positive elevation of the UAV."""
    return nlos_path_length(d_nm, h, xi_ngs, elevation, a, b) / c


def update_ngs_geometry(a0, tx_ngs0, rx0, e_p, e_q):
    """Drift the near-ground vectors inside a stationary segment.

    ``a`` points from the Rx element to the last-bounce scatterer and ``b``
    from the Tx reference point (on the LoS at the near-ground height) to the
    same scatterer.  ``e_p`` and ``e_q`` are the element displacements
    relative to the segment-start reference points ``tx_ngs0`` and ``rx0``.
    """
    a = np.asarray(a0, float) - e_q
    b = (np.asarray(rx0, float) - np.asarray(tx_ngs0, float)) + a + e_q - e_p
    if np.any(_norm(a) == 0) or np.any(_norm(b) == 0):
        raise GeometryError("near-ground distance vector collapsed to zero")
    return a, b


def lbs_range(direction, to_tx, excess):
    """Distance from Rx to a last-bounce scatterer along ``direction``.

    Chosen so that ``|a| + |a - to_tx| = |to_tx| + excess`` (an ellipse with
    foci at the Rx and the near-ground Tx point).  ``excess > 0``.
    """
    u = np.asarray(direction, float)
    g = np.asarray(to_tx, float)
    gl = _norm(g)
    total = gl + excess
    return (total**2 - gl**2) / (2.0 * (total - np.sum(u * g, axis=-1)))


# -- powers -------------------------------------------------------------------

def path_powers(delays, r_tau, sigma_tau, sf_c_db=0.0, axis=-1):
    """Delay-dependent exponential powers, normalized to sum to one along ``axis``."""
    if not r_tau > 1:
        raise DomainError("delay scalar r_tau must exceed 1")
    if not sigma_tau > 0:
        raise DomainError("delay spread must be positive")
    tau = np.asarray(delays, dtype=float)
    raw = np.exp(-tau * (r_tau - 1) / (r_tau * sigma_tau)) * 10.0 ** (-np.asarray(sf_c_db, float) / 10.0)
    total = np.sum(raw, axis=axis, keepdims=True)
    if np.any(total == 0):
        # retry relative to the earliest path before giving up
        tau_rel = tau - np.min(tau, axis=axis, keepdims=True)
        raw = np.exp(-tau_rel * (r_tau - 1) / (r_tau * sigma_tau)) * 10.0 ** (-np.asarray(sf_c_db, float) / 10.0)
        total = np.sum(raw, axis=axis, keepdims=True)
        if np.any(total == 0):
            raise PowerUnderflowError("all path powers underflowed to zero")
    return raw / total


def ramp_weight(w_lin):
    """Squared-sine ramp ``sin^2(pi w / 2)`` on [0, 1]."""
    w = np.asarray(w_lin, dtype=float)
    if np.any((w < 0) | (w > 1)):
        raise DomainError("linear ramp value must lie in [0, 1]")
    return np.sin(0.5 * np.pi * w) ** 2


# -- posture variation fading --------------------------------------------------

def pvf_factor(angle, hpbw):
    """Per-axis occlusion factor.

    Equal to 1 in the forward lobe, a quarter-cosine roll-off across the
    transition band of width ``hpbw`` centered on pi/2 (mirrored about pi),
    and 0 behind the fuselage.  The rising band is the mirror image of the
    falling one, which keeps the factor continuous at all four edges.
    """
    a = wrap_2pi(angle)
    folded = np.minimum(a, TWO_PI - a)
    hpbw = float(hpbw)
    if hpbw < 0:
        raise DomainError("hpbw projection must be non-negative")
    if hpbw == 0:
        return np.where(folded <= np.pi / 2, 1.0, 0.0)
    x = np.pi * (2.0 * folded + hpbw - np.pi) / (4.0 * hpbw)
    return np.where(x >= np.pi / 2, 0.0, np.cos(np.clip(x, 0.0, np.pi / 2)))


def pvf_coefficient(roll, pitch, yaw, hpbw):
    """Product of the roll, pitch and yaw factors; ``hpbw`` is (roll, pitch, yaw)."""
    return pvf_factor(roll, hpbw[0]) * pvf_factor(pitch, hpbw[1]) * pvf_factor(yaw, hpbw[2])


# -- angles ----------------------------------------------------------------------

def los_path_angles(tx_pos, rx_pos):
    """LoS departure/arrival angles ``(az_tx, el_tx, az_rx, el_rx)``.

    Departure angles follow the Tx->Rx displacement (so a UAV overhead has a
    negative departure elevation); arrival angles are the reverse direction.
    """
    disp = np.asarray(rx_pos, float) - np.asarray(tx_pos, float)
    if np.any(_norm(disp) == 0):
        raise DegenerateGeometryError("Tx and Rx coincide")
    az_tx, el_tx = vector_angles(disp)
    az_rx = wrap_2pi(az_tx + np.pi)
    return az_tx, el_tx, az_rx, -el_tx


# -- phases ----------------------------------------------------------------------

def draw_initial_phases(rng, kappa, size=()):
    """Random polarization phase matrices.

    Returns ``(los, nlos)`` complex arrays of shape ``size + (2, 2)``.  The LoS
    matrix is diagonal; NLoS off-diagonals have magnitude ``kappa**-0.5``.
    ``kappa`` is the linear cross-polar power ratio.
    """
    if not kappa > 0:
        raise DomainError("cross-polar ratio must be positive")
    size = (int(size),) if np.isscalar(size) else tuple(size)
    ph = rng.uniform(0.0, TWO_PI, size + (6,))
    los = np.zeros(size + (2, 2), complex)
    los[..., 0, 0] = np.exp(1j * ph[..., 0])
    los[..., 1, 1] = np.exp(1j * ph[..., 1])
    xp = 1.0 / np.sqrt(kappa)
    nlos = np.empty(size + (2, 2), complex)
    nlos[..., 0, 0] = np.exp(1j * ph[..., 2])
    nlos[..., 0, 1] = xp * np.exp(1j * ph[..., 3])
    nlos[..., 1, 0] = xp * np.exp(1j * ph[..., 4])
    nlos[..., 1, 1] = np.exp(1j * ph[..., 5])
    return los, nlos


def doppler_phase(path_length, wavelength):
    """Phase accumulated along a path of the given total length."""
    return TWO_PI * np.asarray(path_length, float) / wavelength


def los_doppler_phase(tx_pos, rx_pos, e_p, e_q, wavelength):
    return doppler_phase(_norm((np.asarray(tx_pos, float) + e_p) - (np.asarray(rx_pos, float) + e_q)), wavelength)


def nlos_doppler_phase(d_nm, h, xi_ngs, elevation, a, b, wavelength):
    return doppler_phase(nlos_path_length(d_nm, h, xi_ngs, elevation, a, b), wavelength)


def antenna_phase(r_element, rotation, direction, wavelength):
    """Array phase ``2 pi / lambda * r . (R s)`` for one side of the link."""
    rs = np.einsum("...ij,...j->...i", np.asarray(rotation, float), np.asarray(direction, float))
    return TWO_PI / wavelength * np.sum(np.asarray(r_element, float) * rs, axis=-1)
