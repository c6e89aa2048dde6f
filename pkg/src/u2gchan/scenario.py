"""Scenario description: kinematics, posture, antenna arrays and rotations.

All angles are radians, distances meters, times seconds.  Azimuth is measured
counter-clockwise from +x in the horizontal plane, elevation upward from the
horizontal plane.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

TWO_PI = 2.0 * np.pi
SPEED_OF_LIGHT = 299_792_458.0


# ---------------------------------------------------------------------------
# rotation / coordinate kernel

def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def posture_matrix(roll, pitch, yaw):
    """Posture rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``.

    Accepts scalars or equal-shape arrays; array input returns ``(..., 3, 3)``.
    Entries are written out so the batched path costs no Python loop.
    """
    w = np.asarray(roll, dtype=float)
    g = np.asarray(pitch, dtype=float)
    f = np.asarray(yaw, dtype=float)
    w, g, f = np.broadcast_arrays(w, g, f)
    cw, sw = np.cos(w), np.sin(w)
    cg, sg = np.cos(g), np.sin(g)
    cf, sf = np.cos(f), np.sin(f)
    r = np.empty(w.shape + (3, 3))
    r[..., 0, 0] = cf * cg
    r[..., 0, 1] = cf * sg * sw - sf * cw
    r[..., 0, 2] = cf * sg * cw + sf * sw
    r[..., 1, 0] = sf * cg
    r[..., 1, 1] = sf * sg * sw + cf * cw
    r[..., 1, 2] = sf * sg * cw - cf * sw
    r[..., 2, 0] = -sg
    r[..., 2, 1] = cg * sw
    r[..., 2, 2] = cg * cw
    return r


def angle_unit_vector(azimuth, elevation):
    """Unit vector ``(cos b cos a, cos b sin a, sin b)`` for azimuth a, elevation b."""
    a = np.asarray(azimuth, dtype=float)
    b = np.asarray(elevation, dtype=float)
    if np.any(np.abs(b) > np.pi / 2 + 1e-12):
        raise DomainError("elevation must lie in [-pi/2, pi/2]")
    cb = np.cos(b)
    return np.stack(np.broadcast_arrays(cb * np.cos(a), cb * np.sin(a), np.sin(b)), axis=-1)


def vector_angles(v):
    """Azimuth and elevation of (non-zero) vectors; azimuth is 0 at the poles."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1)
    horiz = np.hypot(v[..., 0], v[..., 1])
    az = np.where(horiz > 0, np.arctan2(v[..., 1], v[..., 0]), 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        el = np.arcsin(np.clip(v[..., 2] / n, -1.0, 1.0))
    return az, el


def velocity_rotation_matrix(v):
    """Rotation taking the array x-axis onto the direction of ``v``.

    Built as ``Rz(azimuth) @ Ry(-elevation)``; identity when ``v`` is zero.
    Accepts a single 3-vector or an ``(n, 3)`` stack.
    """
    v = np.asarray(v, dtype=float)
    speed = np.linalg.norm(v, axis=-1)
    az, el = vector_angles(v)
    az = np.where(speed > 0, az, 0.0)
    el = np.where(speed > 0, el, 0.0)
    # Ry(-el): [[c,0,-s],[0,1,0],[s,0,c]]
    ca, sa, ce, se = np.cos(az), np.sin(az), np.cos(el), np.sin(el)
    r = np.zeros(np.shape(az) + (3, 3))
    r[..., 0, 0] = ca * ce
    r[..., 0, 1] = -sa
    r[..., 0, 2] = -ca * se
    r[..., 1, 0] = sa * ce
    r[..., 1, 1] = ca
    r[..., 1, 2] = -sa * se
    r[..., 2, 0] = se
    r[..., 2, 2] = ce
    return r


def wrap_pi(a):
    """Wrap into (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + np.pi, TWO_PI) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def wrap_2pi(a):
    """Wrap into [0, 2*pi)."""
    w = np.mod(np.asarray(a, dtype=float), TWO_PI)
    return np.where(w >= TWO_PI, 0.0, w)


# ---------------------------------------------------------------------------
# kinematics

@dataclass(frozen=True)
class TrajectoryTrack:
    """Terminal trajectory with an analytically integrable velocity.

    kind:
      ``constant``  -- ``velocity`` (3,)
      ``piecewise`` -- velocity linear between ``knot_times`` (k,) with values
                       ``knot_velocities`` (k, 3); held constant outside
      ``circular``  -- horizontal circle about ``center`` (x, y) at
                       ``angular_rate`` rad/s, counter-clockwise when positive
      ``table``     -- positions sampled at ``knot_times``, linear in between
    """

    initial_position: np.ndarray
    kind: str = "constant"
    t0: float = 0.0
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    knot_times: Optional[np.ndarray] = None
    knot_velocities: Optional[np.ndarray] = None
    knot_positions: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    angular_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "initial_position", np.asarray(self.initial_position, float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, float).reshape(3))
        if not np.all(np.isfinite(self.initial_position)):
            raise ConfigurationError("non-finite initial position")
        if self.kind == "constant":
            if not np.all(np.isfinite(self.velocity)):
                raise ConfigurationError("non-finite velocity")
        elif self.kind == "piecewise":
            kt = np.asarray(self.knot_times, float)
            kv = np.asarray(self.knot_velocities, float).reshape(len(kt), 3)
            if len(kt) < 1 or np.any(np.diff(kt) <= 0) or not np.all(np.isfinite(kv)):
                raise ConfigurationError("piecewise knots must be finite with increasing times")
            object.__setattr__(self, "knot_times", kt)
            object.__setattr__(self, "knot_velocities", kv)
        elif self.kind == "circular":
            c = np.asarray(self.center, float).reshape(2)
            r = np.hypot(*(self.initial_position[:2] - c))
            if r == 0 or not np.isfinite(self.angular_rate):
                raise ConfigurationError("circular track needs a non-zero radius and finite rate")
            object.__setattr__(self, "center", c)
        elif self.kind == "table":
            kt = np.asarray(self.knot_times, float)
            kp = np.asarray(self.knot_positions, float).reshape(len(kt), 3)
            if len(kt) < 2 or np.any(np.diff(kt) <= 0) or not np.all(np.isfinite(kp)):
                raise ConfigurationError("table track needs >= 2 finite samples with increasing times")
            if kt[0] != self.t0 or not np.array_equal(kp[0], self.initial_position):
                raise ConfigurationError("table track must start at (t0, initial_position)")
            object.__setattr__(self, "knot_times", kt)
            object.__setattr__(self, "knot_positions", kp)
        else:
            raise ConfigurationError(f"unknown trajectory kind {self.kind!r}")

    # -- circular helpers
    def _circle(self):
        d = self.initial_position[:2] - self.center
        return np.hypot(*d), np.arctan2(d[1], d[0])

    def position(self, t):
        return integrate_position(self, t)

    def velocity_at(self, t):
        t = np.asarray(t, dtype=float)
        tau = t - self.t0
        if self.kind == "constant":
            return np.broadcast_to(self.velocity, t.shape + (3,)).copy()
        if self.kind == "circular":
            r, th0 = self._circle()
            w = self.angular_rate
            th = th0 + w * tau
            v = np.zeros(t.shape + (3,))
            v[..., 0] = -r * w * np.sin(th)
            v[..., 1] = r * w * np.cos(th)
            return v
        if self.kind == "piecewise":
            kt, kv = self.knot_times, self.knot_velocities
            return np.stack([np.interp(t, kt, kv[:, i]) for i in range(3)], axis=-1)
        # table: piecewise-constant velocity of the linear interpolant
        kt, kp = self.knot_times, self.knot_positions
        slopes = np.diff(kp, axis=0) / np.diff(kt)[:, None]
        idx = np.clip(np.searchsorted(kt, t, side="right") - 1, 0, len(slopes) - 1)
        return slopes[idx]


def integrate_position(track: TrajectoryTrack, t):
    """Position ``L(t0) + int_{t0}^{t} v dt'`` evaluated in closed form."""
    t = np.asarray(t, dtype=float)
    if np.any(t < track.t0):
        raise DomainError("position requested before the track start time t0")
    tau = t - track.t0
    p0 = track.initial_position
    if track.kind == "constant":
        return p0 + tau[..., None] * track.velocity
    if track.kind == "circular":
        r, th0 = track._circle()
        th = th0 + track.angular_rate * tau
        out = np.empty(t.shape + (3,))
        out[..., 0] = track.center[0] + r * np.cos(th)
        out[..., 1] = track.center[1] + r * np.sin(th)
        out[..., 2] = p0[2]
        # exact at t0 regardless of cos/sin round-off
        out[tau == 0] = p0
        return out
    if track.kind == "table":
        kt, kp = track.knot_times, track.knot_positions
        slopes = np.diff(kp, axis=0) / np.diff(kt)[:, None]
        idx = np.clip(np.searchsorted(kt, t, side="right") - 1, 0, len(slopes) - 1)
        return kp[idx] + (t - kt[idx])[..., None] * slopes[idx]
    # piecewise-linear velocity: breakpoints are t0 plus knots after t0
    kt, kv = track.knot_times, track.knot_velocities
    inner = kt[kt > track.t0]
    bps = np.concatenate([[track.t0], inner])
    vb = np.stack([np.interp(bps, kt, kv[:, i]) for i in range(3)], axis=-1)
    seg_int = 0.5 * (vb[1:] + vb[:-1]) * np.diff(bps)[:, None]
    cum = np.vstack([np.zeros(3), np.cumsum(seg_int, axis=0)])
    idx = np.searchsorted(bps, t, side="right") - 1
    ta = bps[idx]
    va = vb[idx]
    dt = (t - ta)[..., None]
    # slope of v over the piece containing t (zero after the last knot)
    nxt = np.minimum(idx + 1, len(bps) - 1)
    span = bps[nxt] - ta
    with np.errstate(invalid="ignore", divide="ignore"):
        slope = np.where((nxt > idx)[..., None], (vb[nxt] - va) / span[..., None], 0.0)
    return p0 + cum[idx] + va * dt + 0.5 * slope * dt**2


@dataclass(frozen=True)
class AngleTrack:
    """One posture angle: ``initial + rate * t``, or linear in a table."""

    initial: float = 0.0
    rate: float = 0.0
    times: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.times is not None:
            return np.interp(t, self.times, self.values)
        return self.initial + self.rate * t

    @property
    def is_static(self):
        if self.times is not None:
            return bool(np.all(np.asarray(self.values) == self.values[0]))
        return self.rate == 0.0


@dataclass(frozen=True)
class PostureTrack:
    roll: AngleTrack = field(default_factory=AngleTrack)
    pitch: AngleTrack = field(default_factory=AngleTrack)
    yaw: AngleTrack = field(default_factory=AngleTrack)

    def angles(self, t):
        """(roll, pitch, yaw) at ``t``, reduced to (-pi, pi], (-pi, pi], [0, 2pi)."""
        return wrap_pi(self.roll(t)), wrap_pi(self.pitch(t)), wrap_2pi(self.yaw(t))

    def matrix(self, t):
        return posture_matrix(*self.angles(t))

    @property
    def is_static(self):
        return self.roll.is_static and self.pitch.is_static and self.yaw.is_static


# ---------------------------------------------------------------------------
# antennas

def dipole_pattern(dirs):
    """Vertical half-wave dipole; returns (F_V, F_H) for local unit directions."""
    dirs = np.asarray(dirs, dtype=float)
    cos_t = np.clip(dirs[..., 2], -1.0, 1.0)
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t**2))
    with np.errstate(invalid="ignore", divide="ignore"):
        fv = np.where(sin_t > 1e-12, np.cos(0.5 * np.pi * cos_t) / sin_t, 0.0)
    return fv, np.zeros_like(fv)


def isotropic_pattern(dirs):
    shape = np.shape(dirs)[:-1]
    return np.ones(shape), np.zeros(shape)


@dataclass(frozen=True)
class AntennaArray:
    """Element positions relative to the array center plus a shared pattern.

    ``pattern`` is ``"isotropic"``, ``"dipole"`` or ``"table"``; a table holds
    ``table_az`` (n_a,), ``table_el`` (n_e,), ``table_fv`` and ``table_fh``
    (n_a, n_e) and is interpolated bilinearly.
    """

    element_offsets: np.ndarray = field(default_factory=lambda: np.zeros((1, 3)))
    pattern: str = "isotropic"
    hpbw: tuple = (np.pi / 2, np.pi / 2, np.pi / 2)  # roll, pitch, yaw projections
    table_az: Optional[np.ndarray] = None
    table_el: Optional[np.ndarray] = None
    table_fv: Optional[np.ndarray] = None
    table_fh: Optional[np.ndarray] = None

    def __post_init__(self):
        off = np.atleast_2d(np.asarray(self.element_offsets, dtype=float))
        if off.shape[0] < 1 or off.shape[1] != 3 or not np.all(np.isfinite(off)):
            raise ConfigurationError("element offsets must be a finite (n >= 1, 3) array")
        object.__setattr__(self, "element_offsets", off)
        if self.pattern not in ("isotropic", "dipole", "table"):
            raise ConfigurationError(f"unknown antenna pattern {self.pattern!r}")
        if self.pattern == "table" and self.table_fv is None:
            raise ConfigurationError("table pattern needs table_az/table_el/table_fv/table_fh")
        if any(h < 0 for h in self.hpbw):
            raise ConfigurationError("hpbw projections must be non-negative")

    @property
    def size(self):
        return self.element_offsets.shape[0]

    def response(self, local_dirs):
        """(F_V, F_H) for unit directions expressed in the array frame."""
        if self.pattern == "isotropic":
            return isotropic_pattern(local_dirs)
        if self.pattern == "dipole":
            return dipole_pattern(local_dirs)
        from scipy.interpolate import RegularGridInterpolator

        az, el = vector_angles(local_dirs)
        pts = np.stack([wrap_2pi(az), el], axis=-1)
        out = []
        for tab in (self.table_fv, self.table_fh):
            f = RegularGridInterpolator((self.table_az, self.table_el), np.asarray(tab, float),
                                        bounds_error=False, fill_value=None)
            out.append(f(pts))
        return out[0], out[1]

    @property
    def max_gain(self):
        if self.pattern == "table":
            return float(np.max(np.asarray(self.table_fv) ** 2 + np.asarray(self.table_fh) ** 2))
        return 1.0


def ula(n, spacing, axis=1):
    """Uniform linear array of ``n`` elements centered on the origin."""
    off = np.zeros((n, 3))
    off[:, axis] = (np.arange(n) - (n - 1) / 2) * spacing
    return off
