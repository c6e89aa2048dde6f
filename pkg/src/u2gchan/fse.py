"""Near-UAV segment: fuselage scatterers, single-bounce rays and FSE angles."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DegenerateGeometryError, DomainError
from .scenario import vector_angles

DEFAULT_BOUNDING_RADIUS = 5.0


@dataclass(frozen=True)
class FuselageScatterer:
    location: np.ndarray  # body frame, m
    reflection: complex = 0.5 + 0j

    def __post_init__(self):
        loc = np.asarray(self.location, dtype=float).reshape(3)
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "reflection", complex(self.reflection))
        if abs(self.reflection) > 1.0 + 1e-12:
            raise DomainError("reflection coefficient magnitude must not exceed 1")


@dataclass(frozen=True)
class FuselageScatterSet:
    scatterers: Tuple[FuselageScatterer, ...]
    bounding_radius: float = DEFAULT_BOUNDING_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        if not self.scatterers:
            raise DomainError("scatter set is empty")
        for s in self.scatterers:
            if np.linalg.norm(s.location) > self.bounding_radius:
                raise DomainError(f"scatterer {s.location} outside the {self.bounding_radius} m bound")

    def __len__(self):
        return len(self.scatterers)

    @property
    def locations(self):
        return np.array([s.location for s in self.scatterers])

    @property
    def reflections(self):
        return np.array([s.reflection for s in self.scatterers])


def hexacopter_scatter_set(arm_length=0.5, reflection=0.05 + 0j, n_arms=6):
    """Synthetic arm-tip layout of a hexacopter (not measured data)."""
    ang = np.arange(n_arms) * 2 * np.pi / n_arms
    locs = np.stack([arm_length * np.cos(ang), arm_length * np.sin(ang), np.zeros(n_arms)], axis=-1)
    return FuselageScatterSet(tuple(FuselageScatterer(l, reflection) for l in locs))


@dataclass(frozen=True)
class RayRecord:
    path_index: Tuple[int, int]
    length: float
    field: complex
    direction: np.ndarray  # unit departure direction


def ray_field(length, reflection, wavelength):
    """Field phasor of one reflected ray with a unit incident field."""
    length = np.asarray(length, dtype=float)
    return reflection * np.exp(-2j * np.pi * length / wavelength) / length


def trace_fuselage_rays(scatterers: FuselageScatterSet, uav_position, posture, observation_point,
                        wavelength, tx_offset=(0.0, 0.0, 0.0)) -> List[RayRecord]:
    """Single-bounce specular rays Tx -> fuselage point -> observation point.

    Scatterer ``k`` becomes ray ``(k, 0)``.  The Tx antenna sits at
    ``uav_position + posture @ tx_offset``.
    """
    uav = np.asarray(uav_position, dtype=float)
    posture = np.asarray(posture, dtype=float)
    obs = np.asarray(observation_point, dtype=float)
    tx = uav + posture @ np.asarray(tx_offset, dtype=float)
    world = scatterers.locations @ posture.T + uav
    leg1 = world - tx
    leg2 = obs - world
    n1 = np.linalg.norm(leg1, axis=1)
    n2 = np.linalg.norm(leg2, axis=1)
    if np.any(n1 == 0) or np.any(n2 == 0) or np.linalg.norm(obs - tx) == 0:
        raise DegenerateGeometryError("observation point or Tx coincides with a scatterer")
    d = n1 + n2
    fields = ray_field(d, scatterers.reflections, wavelength)
    return [RayRecord((k, 0), float(d[k]), complex(fields[k]), leg1[k] / n1[k]) for k in range(len(d))]


def direct_ray(tx, observation_point, wavelength, index=(-1, 0)):
    """Unobstructed Tx -> observation ray (reflection 1)."""
    v = np.asarray(observation_point, float) - np.asarray(tx, float)
    d = float(np.linalg.norm(v))
    if d == 0:
        raise DegenerateGeometryError("observation point coincides with Tx")
    return RayRecord(index, d, complex(ray_field(d, 1.0, wavelength)), v / d)


@dataclass(frozen=True)
class SuperposedField:
    field: float  # |sum of phasors|
    path_loss_db: float
    cancelled: bool


def superposed_field_and_pl(rays: Sequence[RayRecord], wavelength, e0) -> SuperposedField:
    """Coherent ray sum and the NUS path loss ``20 log10(E0 / E_RT)``.

    ``wavelength`` is accepted for signature symmetry with the tracer; the
    phasors already carry their propagation phase.
    """
    if len(rays) == 0:
        raise DomainError("no rays to superpose")
    if e0 <= 0:
        raise DomainError("E0 must be positive")
    total = sum(r.field for r in rays)
    mag = abs(total)
    scale = max(abs(r.field) for r in rays)
    if mag <= 1e-12 * scale:
        return SuperposedField(0.0, float("inf"), True)
    return SuperposedField(mag, 20.0 * np.log10(e0 / mag), False)


def fse_departure_angles(tx_location, scatterer_world):
    """Azimuth/elevation of ``D = tx_location - scatterer_world``.

    Vectorized over leading axes.  A vertical ``D`` gets azimuth 0.
    """
    d = np.asarray(tx_location, dtype=float) - np.asarray(scatterer_world, dtype=float)
    if np.any(np.linalg.norm(d, axis=-1) == 0):
        raise DegenerateGeometryError("Tx coincides with a fuselage scatterer")
    return vector_angles(d)


# -- batched helpers used by the channel generator ---------------------------

def nus_field_batch(uav, posture, obs, scatterers: FuselageScatterSet, wavelength, include_direct=True):
    """Coherent NUS field for stacks of geometries.

    uav, obs: (T, 3); posture: (T, 3, 3).  Returns |E_RT| (T,).
    """
    world = np.einsum("tij,kj->tki", posture, scatterers.locations) + uav[:, None, :]
    d = np.linalg.norm(world - uav[:, None, :], axis=-1) + np.linalg.norm(obs[:, None, :] - world, axis=-1)
    total = np.sum(ray_field(d, scatterers.reflections[None, :], wavelength), axis=1)
    if include_direct:
        total = total + ray_field(np.linalg.norm(obs - uav, axis=-1), 1.0, wavelength)
    return np.abs(total)


def fuselage_excess_lengths(uav, posture, obs, locations):
    """Extra length of each fuselage bounce over the direct NUS leg.

    uav, obs: (T, 3); posture: (T, 3, 3); locations: (S, 3).  Returns (T, S).
    """
    world = np.einsum("tij,kj->tki", posture, locations) + uav[:, None, :]
    d = np.linalg.norm(world - uav[:, None, :], axis=-1) + np.linalg.norm(obs[:, None, :] - world, axis=-1)
    return d - np.linalg.norm(obs - uav, axis=-1)[:, None]


def nus_extent(scatterers: FuselageScatterSet, direction, wavelength, threshold=0.1,
               d_min=1.0, d_max=500.0, n=4000, posture=None):
    """Largest distance along ``direction`` where the fuselage changes the
    free-space loss by at least ``threshold`` (relative, in dB).

    Returns ``(distance, relative_deviation_curve, distances)``.
    """
    u = np.asarray(direction, float)
    u = u / np.linalg.norm(u)
    posture = np.eye(3) if posture is None else np.asarray(posture, float)
    ds = np.geomspace(d_min, d_max, n)
    obs = ds[:, None] * u
    uav = np.zeros_like(obs)
    rot = np.broadcast_to(posture, (n, 3, 3))
    e_rt = nus_field_batch(uav, rot, obs, scatterers, wavelength)
    e0 = 4 * np.pi / wavelength
    pl = 20 * np.log10(e0 / e_rt)
    pl_free = 20 * np.log10(e0 * ds)
    dev = np.abs(pl - pl_free) / pl_free
    hit = np.nonzero(dev >= threshold)[0]
    dist = float(ds[hit[-1]]) if hit.size else 0.0
    return dist, dev, ds


# -- ray-table import ---------------------------------------------------------

RAY_TABLE_COLUMNS = ("n", "m", "d_m", "reflection_re", "reflection_im", "dir_x", "dir_y", "dir_z")


def read_ray_table(path, wavelength, delimiter=","):
    """Load externally traced rays; header line required."""
    rays = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = [h.strip() for h in next(reader)]
        if tuple(header) != RAY_TABLE_COLUMNS:
            raise DomainError(f"ray table header must be {','.join(RAY_TABLE_COLUMNS)}")
        for row in reader:
            if not row:
                continue
            n, m = int(row[0]), int(row[1])
            d = float(row[2])
            if d <= 0:
                raise DomainError("ray length must be positive")
            refl = complex(float(row[3]), float(row[4]))
            direction = np.array([float(x) for x in row[5:8]])
            direction = direction / np.linalg.norm(direction)
            rays.append(RayRecord((n, m), d, complex(ray_field(d, refl, wavelength)), direction))
    return rays


def write_ray_table(path, rays: Sequence[RayRecord], wavelength, delimiter=","):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(RAY_TABLE_COLUMNS)
        for r in rays:
            # recover the reflection coefficient from the stored phasor
            refl = r.field * r.length * np.exp(2j * np.pi * r.length / wavelength)
            w.writerow([r.path_index[0], r.path_index[1], *(format(float(x), ".17g") for x in
                        (r.length, refl.real, refl.imag, *r.direction))])
