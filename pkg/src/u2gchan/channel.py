"""Non-stationary CIR generation over stationary segments.

Pipeline per run: kinematics -> segment schedule -> large-scale loss and
shadowing -> per-segment path sets (delays, powers, angles, phases) -> tap
gains with cross-faded segment boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np

from . import fse
from .config import ScenarioConfig
from .errors import GeometryError, SequencingError
from .largescale import fsl_path_loss, default_ngs_model, sample_shadow_fading_db
from .mlp import MlpModel, load_model
from .rng import LOS_PHASE, SEGMENT, SHADOW, substream
from .scenario import TWO_PI, angle_unit_vector, posture_matrix, velocity_rotation_matrix, wrap_2pi
from .smallscale import draw_initial_phases, lbs_range, path_powers, pvf_coefficient, ramp_weight

VIRTUAL_FBS_RANGE = (5.0, 50.0)  # m, first-bounce scatterers when fuselage scattering is off
INTRA_CLUSTER_SPREAD = 10e-9  # s


# -- kinematics -------------------------------------------------------------------

@dataclass
class Kinematics:
    """Both terminals sampled on a time grid (leading axis T)."""

    t: np.ndarray
    tx: np.ndarray  # (T, 3) array centers
    rx: np.ndarray
    posture: np.ndarray  # (T, 3, 3)
    rx_rotation: np.ndarray  # (T, 3, 3)
    cp: np.ndarray  # (T,) posture-variation coefficient
    e_p: np.ndarray  # (T, P, 3) rotated Tx element offsets
    e_q: np.ndarray  # (T, Q, 3)
    los_dir: np.ndarray  # (T, 3) unit Tx -> Rx
    distance: np.ndarray  # (T,)
    height: np.ndarray  # (T,) Tx above Rx
    elevation: np.ndarray  # (T,) positive elevation of the UAV seen from the Rx
    azimuth_rx: np.ndarray  # (T,) azimuth of the UAV seen from the Rx
    tx_ngs: np.ndarray  # (T, 3) point on the LoS at the near-ground height
    nus_point: np.ndarray  # (T, 3) point on the LoS at the NUS boundary
    fsl_length: np.ndarray  # (T,) Tx -> tx_ngs


def sample_kinematics(cfg: ScenarioConfig, t) -> Kinematics:
    t = np.atleast_1d(np.asarray(t, float))
    tx = cfg.tx_track.position(t)
    rx = cfg.rx_track.position(t)
    if cfg.posture_enabled:
        roll, pitch, yaw = cfg.posture.angles(t)
        rp = posture_matrix(roll, pitch, yaw)
        cp = pvf_coefficient(roll, pitch, yaw, cfg.tx_array.hpbw)
    else:
        rp = np.broadcast_to(np.eye(3), (len(t), 3, 3)).copy()
        cp = np.ones(len(t))
    rr = velocity_rotation_matrix(cfg.rx_track.velocity_at(t))
    disp = rx - tx
    dist = np.linalg.norm(disp, axis=-1)
    if np.any(dist == 0):
        raise GeometryError(f"Tx and Rx coincide at time index {int(np.argmin(dist))}")
    u = disp / dist[:, None]
    height = tx[:, 2] - rx[:, 2]
    sin_b = height / dist
    bad = np.nonzero(height - cfg.xi_ngs <= 0)[0]
    if bad.size:
        raise GeometryError(f"UAV not above the near-ground segment at time index {int(bad[0])}")
    el = np.arcsin(sin_b)
    az_rx = wrap_2pi(np.arctan2(-disp[:, 1], -disp[:, 0]))
    fsl_len = (height - cfg.xi_ngs) / sin_b
    return Kinematics(
        t=t, tx=tx, rx=rx, posture=rp, rx_rotation=rr, cp=cp,
        e_p=np.einsum("tij,pj->tpi", rp, cfg.tx_array.element_offsets),
        e_q=np.einsum("tij,qj->tqi", rr, cfg.rx_array.element_offsets),
        los_dir=u, distance=dist, height=height, elevation=el, azimuth_rx=az_rx,
        tx_ngs=tx + u * fsl_len[:, None], nus_point=tx + u * (cfg.xi_nus / sin_b)[:, None],
        fsl_length=fsl_len)


def _slice(kin: Kinematics, sl) -> Kinematics:
    return Kinematics(**{k: v[sl] for k, v in kin.__dict__.items()})


# -- segment schedule ---------------------------------------------------------------

def segment_schedule(cfg: ScenarioConfig):
    """Start and end times of the stationary segments.

    A trailing remainder shorter than two ramp windows is merged into the
    previous segment.
    """
    starts = np.arange(0.0, cfg.duration, cfg.segment_length)
    if len(starts) > 1 and cfg.duration - starts[-1] < 2 * cfg.ramp_window:
        starts = starts[:-1]
    ends = np.append(starts[1:], cfg.duration)
    return starts, ends


def crossfade_weights(starts, ends, ramp, t):
    """Power weight of every segment at every time, shape (n_segments, T).

    Boundaries are centered in a ramp of length ``ramp``; the incoming set
    follows the squared-sine ramp and the outgoing set its complement.
    """
    t = np.asarray(t, float)
    n = len(starts)
    w = np.zeros((n, len(t)))
    half = 0.5 * ramp
    for i in range(n):
        lo = starts[i] - half if i > 0 else -np.inf
        hi = ends[i] + half if i < n - 1 else np.inf
        act = (t >= lo) & (t < hi)
        wi = np.ones(act.sum())
        ta = t[act]
        if i > 0:
            rising = ta < starts[i] + half
            wi[rising] = ramp_weight(np.clip((ta[rising] - lo) / ramp, 0.0, 1.0))
        if i < n - 1:
            falling = ta >= ends[i] - half
            x = np.clip((ta[falling] - (ends[i] - half)) / ramp, 0.0, 1.0)
            wi[falling] = 1.0 - ramp_weight(x)
        w[i, act] = wi
    return w


@dataclass(frozen=True)
class StationarySegment:
    """Frozen path set of one wide-sense-stationary window.

    Sub-path arrays are flattened to K = N * M entries; ``path_index`` maps
    each sub-path to its path.
    """

    index: int
    start: float
    end: float
    ramp: float
    n_paths: int
    subpaths: int
    path_index: np.ndarray  # (K,)
    aoa: np.ndarray  # (K, 2) azimuth, elevation
    a0: np.ndarray  # (K, 3) Rx -> last-bounce scatterer at the segment start
    tx_ngs0: np.ndarray  # (3,)
    rx0: np.ndarray  # (3,)
    sf_c_db: np.ndarray  # (K,)
    phases: np.ndarray  # (K, 2, 2)
    scatterer_index: np.ndarray  # (K,) fuselage scatterer of each sub-path
    virtual_fbs: np.ndarray  # (K, 3) world first-bounce points used without fuselage scattering
    shadow_db: float

    @property
    def n_subpaths(self):
        return len(self.path_index)

    @property
    def lbs(self):
        return self.rx0 + self.a0


def draw_segment(cfg: ScenarioConfig, seed: int, index: int, start: float, end: float) -> StationarySegment:
    rng = substream(seed, SEGMENT, index)
    lo, hi = cfg.path_count_range
    n = int(rng.integers(lo, hi + 1))
    m = cfg.subpaths
    k = n * m
    kin0 = sample_kinematics(cfg, [start])
    rx0, tx_ngs0, tx0 = kin0.rx[0], kin0.tx_ngs[0], kin0.tx[0]

    az = rng.uniform(0.0, TWO_PI, k)
    el = np.clip(rng.normal(cfg.aoa_elevation_mean, cfg.aoa_elevation_std, k), -np.pi / 2, np.pi / 2)
    u = angle_unit_vector(az, el)
    cluster_tau = -cfg.delay_scalar * cfg.delay_spread * np.log(rng.uniform(size=n))
    tau = np.repeat(cluster_tau, m) + rng.uniform(0.0, INTRA_CLUSTER_SPREAD, k) + 1e-9
    g = tx_ngs0 - rx0
    rho = lbs_range(u, g, cfg.wave_speed * tau)
    sf_c = np.repeat(rng.normal(0.0, cfg.cluster_sf_std_db, n), m)
    _, nlos = draw_initial_phases(rng, cfg.kappa, k)
    # first-bounce points around the Tx for the no-fuselage variant
    vaz = rng.uniform(0.0, TWO_PI, k)
    vel = np.arcsin(rng.uniform(-1.0, 1.0, k))
    vr = rng.uniform(*VIRTUAL_FBS_RANGE, k)
    vfbs = tx0 + vr[:, None] * angle_unit_vector(vaz, vel)
    shadow = float(sample_shadow_fading_db(substream(seed, SHADOW, index), cfg.shadow))
    pidx = np.repeat(np.arange(n), m)
    return StationarySegment(
        index=index, start=float(start), end=float(end), ramp=cfg.ramp_window, n_paths=n, subpaths=m,
        path_index=pidx, aoa=np.stack([az, el], -1), a0=rho[:, None] * u, tx_ngs0=tx_ngs0, rx0=rx0,
        sf_c_db=sf_c, phases=nlos, scatterer_index=pidx % len(cfg.fuselage), virtual_fbs=vfbs,
        shadow_db=shadow)


def advance_segments(cfg: ScenarioConfig, seed: Optional[int] = None):
    """Realize every stationary segment of the run, in order.

    Returns ``(segments, weights_fn)`` where ``weights_fn(t)`` gives the
    cross-fade power weights (n_segments, T).
    """
    seed = cfg.seed if seed is None else seed
    starts, ends = segment_schedule(cfg)
    segs = [draw_segment(cfg, seed, i, s, e) for i, (s, e) in enumerate(zip(starts, ends))]
    return segs, (lambda t: crossfade_weights(starts, ends, cfg.ramp_window, t))


# -- large-scale -------------------------------------------------------------------

@lru_cache(maxsize=8)
def _cached_model(fc, seed, n, hp):
    return default_ngs_model(fc, seed, n, hp)


def ngs_model_for(cfg: ScenarioConfig) -> MlpModel:
    if cfg.mlp_model_path:
        return load_model(cfg.mlp_model_path)
    return _cached_model(cfg.carrier_frequency, cfg.mlp.seed, cfg.corpus_size, cfg.mlp)


@dataclass
class LargeScale:
    """Per-sample large-scale quantities (all dB except amplitudes)."""

    pl_los: np.ndarray  # free-space loss of the direct path
    c1: np.ndarray
    c2: np.ndarray
    pl_ngs: np.ndarray  # segmented loss at the ground terminal, without shadowing
    shadow: np.ndarray
    los_amplitude: np.ndarray
    nlos_amplitude: np.ndarray

    @property
    def pl_nlos(self):
        return self.pl_ngs + self.shadow


def large_scale(cfg: ScenarioConfig, kin: Kinematics, shadow_db, model: MlpModel) -> LargeScale:
    """Loss of the direct path and of the near-ground branch; ``shadow_db`` is (T,)."""
    fc = cfg.carrier_frequency
    lam = cfg.wavelength
    sin_b = np.sin(kin.elevation)
    d1 = cfg.xi_nus / sin_b
    d2 = cfg.xi_ngs / sin_b
    e_rt = fse.nus_field_batch(kin.tx, kin.posture, kin.nus_point, cfg.fuselage, lam)
    with np.errstate(divide="ignore"):
        pl_nus = 20 * np.log10(4 * np.pi / lam / e_rt)
    c1 = pl_nus - 20 * np.log10(d1) - 20 * np.log10(fc)
    f0 = model.predict(np.zeros_like(d2), kin.azimuth_rx, kin.elevation)
    c2 = 20 * np.log10(kin.fsl_length) + 20 * np.log10(fc) + c1 - f0
    pl_ngs = model.predict(d2, kin.azimuth_rx, kin.elevation) + c2
    sf = np.asarray(shadow_db, float)
    pl_los = fsl_path_loss(kin.distance, fc)
    return LargeScale(pl_los, c1, c2, pl_ngs, sf, 10 ** (-pl_los / 20), 10 ** (-(pl_ngs + sf) / 20))


# -- tap evaluation ---------------------------------------------------------------

def _pol(f_tx, mat, f_rx):
    """F_tx^T M F_rx for stacked patterns."""
    return np.einsum("...i,...ij,...j->...", f_tx, mat, f_rx)


def _patterns(array, rotation, dirs):
    """Pattern (F_V, F_H) of ``array`` for world directions ``dirs`` (T, K, 3)."""
    local = np.einsum("tji,tkj->tki", rotation, dirs)
    fv, fh = array.response(local)
    return np.stack([fv, fh], axis=-1)


def los_taps(cfg: ScenarioConfig, kin: Kinematics, los_phase):
    """Unit-weight LoS tap per element pair: delays and gains (T, P, Q)."""
    lam = cfg.wavelength
    tx_el = kin.tx[:, None, :] + kin.e_p  # (T, P, 3)
    rx_el = kin.rx[:, None, :] + kin.e_q
    length = np.linalg.norm(tx_el[:, :, None, :] - rx_el[:, None, :, :], axis=-1)
    s_tx = kin.los_dir[:, None, :]
    s_rx = -s_tx
    f_tx = _patterns(cfg.tx_array, kin.posture, s_tx)[:, 0]
    f_rx = _patterns(cfg.rx_array, kin.rx_rotation, s_rx)[:, 0]
    pol = _pol(f_tx, los_phase[None], f_rx)
    phi_a = (TWO_PI / lam) * (np.einsum("tpi,ti->tp", kin.e_p, s_tx[:, 0])[:, :, None]
                              + np.einsum("tqi,ti->tq", kin.e_q, s_rx[:, 0])[:, None, :])
    phase = TWO_PI * length / lam + phi_a
    gain = (kin.cp * pol)[:, None, None] * np.exp(1j * phase)
    return length / cfg.wave_speed, gain


def segment_taps(cfg: ScenarioConfig, seg: StationarySegment, kin: Kinematics):
    """NLoS sub-path taps of one segment over ``kin``.

    Returns delays, unit-weight gains and normalized powers, each (T, P, Q, K).
    """
    lam = cfg.wavelength
    # near-ground legs
    eq_disp = kin.rx[:, None, :] + kin.e_q - seg.rx0  # (T, Q, 3)
    ep_disp = kin.tx_ngs[:, None, :] + kin.e_p - seg.tx_ngs0  # (T, P, 3)
    a = seg.a0[None, None] - eq_disp[:, :, None, :]  # (T, Q, K, 3)
    b = (seg.rx0 - seg.tx_ngs0 + seg.a0)[None, None] - ep_disp[:, :, None, :]  # (T, P, K, 3)
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    if np.any(na == 0) or np.any(nb == 0):
        raise GeometryError(f"near-ground vector collapsed in segment {seg.index}")
    # near-UAV leg and departure directions
    if cfg.fse_enabled:
        loc = cfg.fuselage.locations
        excess = fse.fuselage_excess_lengths(kin.tx, kin.posture, kin.nus_point, loc)[:, seg.scatterer_index]
        local = -loc[seg.scatterer_index] / np.linalg.norm(loc[seg.scatterer_index], axis=-1, keepdims=True)
        if cfg.first_path_aod is not None:
            local = local.copy()
            local[seg.path_index == 0] = angle_unit_vector(*cfg.first_path_aod)
        s_tx = np.einsum("tij,kj->tki", kin.posture, local)
    else:
        v = seg.virtual_fbs[None] - kin.tx[:, None, :]
        nv = np.linalg.norm(v, axis=-1)
        excess = nv + np.linalg.norm(kin.nus_point[:, None, :] - seg.virtual_fbs[None], axis=-1) \
            - (cfg.xi_nus / np.sin(kin.elevation))[:, None]
        s_tx = v / nv[..., None]
    s_rx = np.broadcast_to(angle_unit_vector(seg.aoa[:, 0], seg.aoa[:, 1]), (len(kin.t),) + seg.a0.shape)

    length = (excess[:, None, None, :] + kin.fsl_length[:, None, None, None]
              + nb[:, :, None, :] + na[:, None, :, :])
    delays = length / cfg.wave_speed
    powers = path_powers(delays, cfg.delay_scalar, cfg.delay_spread, seg.sf_c_db)

    f_tx = _patterns(cfg.tx_array, kin.posture, s_tx)
    f_rx = _patterns(cfg.rx_array, kin.rx_rotation, s_rx)
    pol = _pol(f_tx, seg.phases[None], f_rx)  # (T, K)
    phi_a = (TWO_PI / lam) * (np.einsum("tpi,tki->tpk", kin.e_p, s_tx)[:, :, None, :]
                              + np.einsum("tqi,tki->tqk", kin.e_q, s_rx)[:, None, :, :])
    phase = TWO_PI * length / lam + phi_a
    gains = (kin.cp[:, None] * pol)[:, None, None, :] * np.sqrt(powers) * np.exp(1j * phase)
    return delays, gains, powers


# -- CIR containers -----------------------------------------------------------------

@dataclass
class CirFrame:
    """Taps of every element pair at one time; tap 0 is the LoS tap."""

    t: float
    delays: np.ndarray  # (P, Q, L)
    gains: np.ndarray  # (P, Q, L) complex
    rice_factor: float

    def taps(self, p, q):
        return list(zip(self.delays[p, q], self.gains[p, q]))

    @property
    def narrowband(self):
        return self.gains.sum(axis=-1)


@dataclass
class ChannelRealization:
    seed: int
    times: np.ndarray
    rice_factor: np.ndarray  # (T,) linear
    cp: np.ndarray  # (T,)
    h_los: np.ndarray  # (T, P, Q) Rice-weighted LoS contribution, small-scale only
    h_nlos: np.ndarray  # (T, P, Q) Rice-weighted NLoS contribution, small-scale only
    nlos_power_sum: np.ndarray  # (T,) sum of cross-faded normalized NLoS powers, pair (0, 0)
    large: Optional[LargeScale]
    kinematics: Kinematics
    segments: List[StationarySegment]
    frames: Dict[int, CirFrame] = field(default_factory=dict)
    pdp_delays: Optional[np.ndarray] = None  # (B,) bin left edges, s
    pdp: Optional[np.ndarray] = None  # (T, B) binned small-scale power for ``pdp_pair``
    pdp_pair: tuple = (0, 0)

    @property
    def h(self):
        """Small-scale (normalized) narrowband coefficient."""
        return self.h_los + self.h_nlos

    @property
    def h_scaled(self):
        """Narrowband coefficient including path loss and shadowing when enabled."""
        if self.large is None:
            return self.h
        return (self.h_los * self.large.los_amplitude[:, None, None]
                + self.h_nlos * self.large.nlos_amplitude[:, None, None])

    @property
    def sample_period(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


def _rice_weights(k):
    k = np.asarray(k, float)
    inf = np.isinf(k)
    w_los = np.where(inf, 1.0, np.sqrt(np.where(inf, 0.0, k) / (np.where(inf, 0.0, k) + 1)))
    w_nlos = np.where(inf, 0.0, np.sqrt(1.0 / (np.where(inf, 0.0, k) + 1)))
    return w_los, w_nlos


class ChannelGenerator:
    """Runs the full generation pipeline for one configuration."""

    def __init__(self, cfg: ScenarioConfig, ngs_model: Optional[MlpModel] = None, chunk: int = 500):
        self.cfg = cfg
        self._model = ngs_model
        self.chunk = chunk

    @property
    def ngs_model(self):
        if self._model is None:
            self._model = ngs_model_for(self.cfg)
        return self._model

    def run(self, seed: Optional[int] = None, frame_stride: Optional[int] = None,
            pdp_pair=(0, 0), pdp_resolution: Optional[float] = None) -> ChannelRealization:
        cfg = self.cfg
        seed = cfg.seed if seed is None else int(seed)
        t = cfg.times
        stride = cfg.cir_frame_stride if frame_stride is None else frame_stride
        res = cfg.stats.pdp_resolution if pdp_resolution is None else pdp_resolution
        kin = sample_kinematics(cfg, t)
        segs, weights_fn = advance_segments(cfg, seed)
        w = weights_fn(t)

        # large-scale first, then small-scale assembly
        if cfg.large_scale_in_cir:
            ls = large_scale(cfg, kin, np.array([sg.shadow_db for sg in segs]) @ w, self.ngs_model)
            a_los, a_nlos = ls.los_amplitude, ls.nlos_amplitude
        else:
            ls = None
            a_los = a_nlos = np.ones(len(t))
        kf = cfg.rice_factor(t)
        w_los, w_nlos = _rice_weights(kf)
        los_m, _ = draw_initial_phases(substream(seed, LOS_PHASE), cfg.kappa)

        T = len(t)
        P, Q = cfg.tx_array.size, cfg.rx_array.size
        h_los = np.zeros((T, P, Q), complex)
        h_nlos = np.zeros((T, P, Q), complex)
        psum = np.zeros(T)
        frame_idx = np.arange(0, T, stride) if stride else np.array([], int)
        frame_parts: Dict[int, list] = {int(i): [] for i in frame_idx}
        pp, pq = pdp_pair
        pdp_parts = []  # (time indices, delays, powers)

        for lo in range(0, T, self.chunk):
            sl = slice(lo, min(lo + self.chunk, T))
            k = _slice(kin, sl)
            d, g = los_taps(cfg, k, los_m)
            g = g * w_los[sl, None, None]
            h_los[sl] = g
            idx = np.arange(sl.start, sl.stop)
            pdp_parts.append((idx[:, None], d[:, pp, pq, None], np.abs(g[:, pp, pq, None]) ** 2))
            for i in idx[np.isin(idx, frame_idx)]:
                frame_parts[int(i)].append((d[i - lo], g[i - lo] * a_los[i]))

        for s, seg in enumerate(segs):
            active = np.nonzero(w[s] > 0)[0]
            for lo in range(0, len(active), self.chunk):
                idx = active[lo:lo + self.chunk]
                sl = slice(idx[0], idx[-1] + 1)
                k = _slice(kin, sl)
                d, g, p = segment_taps(cfg, seg, k)
                amp = np.sqrt(w[s, sl]) * w_nlos[sl]
                g = g * amp[:, None, None, None]
                h_nlos[sl] += g.sum(axis=-1)
                psum[sl] += w[s, sl] * p[:, 0, 0].sum(axis=-1)
                pdp_parts.append((idx[:, None], d[:, pp, pq], np.abs(g[:, pp, pq]) ** 2))
                for i in idx[np.isin(idx, frame_idx)]:
                    frame_parts[int(i)].append((d[i - idx[0]], g[i - idx[0]] * a_nlos[i]))

        frames = {}
        for i, parts in frame_parts.items():
            frames[i] = CirFrame(float(t[i]), np.concatenate([p[0].reshape(P, Q, -1) for p in parts], -1),
                                 np.concatenate([p[1].reshape(P, Q, -1) for p in parts], -1), float(kf[i]))

        pdp_delays, pdp = _bin_pdp(pdp_parts, T, res)
        return ChannelRealization(seed, t, kf, kin.cp, h_los, h_nlos, psum, ls, kin, segs, frames,
                                  pdp_delays, pdp, tuple(pdp_pair))

    def frame_at(self, t: float, segments: List[StationarySegment], seed: Optional[int] = None) -> CirFrame:
        """Assemble the CIR at a single time from already realized segments."""
        return assemble_cir(self.cfg, t, segments, seed=seed,
                            ngs_model=self.ngs_model if self.cfg.large_scale_in_cir else None)


def _bin_pdp(parts, T, res):
    dmin = min(float(np.min(p[1])) for p in parts)
    dmax = max(float(np.max(p[1])) for p in parts)
    b0 = np.floor(dmin / res)
    nb = int(np.floor(dmax / res) - b0) + 1
    out = np.zeros(T * nb)
    for ti, d, pw in parts:
        b = (np.floor(d / res) - b0).astype(np.int64)
        flat = (np.broadcast_to(ti, b.shape) * nb + b).ravel()
        out += np.bincount(flat, weights=pw.ravel(), minlength=T * nb)
    return (b0 + np.arange(nb)) * res, out.reshape(T, nb)


def assemble_cir(cfg: ScenarioConfig, t: float, segments: List[StationarySegment],
                 seed: Optional[int] = None, ngs_model: Optional[MlpModel] = None) -> CirFrame:
    """CIR at one time instant from realized segment states."""
    seed = cfg.seed if seed is None else seed
    starts, ends = segment_schedule(cfg)
    if not segments:
        raise SequencingError("no segment state available")
    by_index = {s.index: s for s in segments}
    w = crossfade_weights(starts, ends, cfg.ramp_window, [t])[:, 0]
    needed = np.nonzero(w > 0)[0]
    missing = [int(i) for i in needed if int(i) not in by_index]
    if missing:
        raise SequencingError(f"segment state {missing} not realized for t = {t}")
    kin = sample_kinematics(cfg, [t])
    kf = cfg.rice_factor([t])
    w_los, w_nlos = _rice_weights(kf)
    if cfg.large_scale_in_cir:
        if ngs_model is None:
            ngs_model = ngs_model_for(cfg)
        sf = sum(w[i] * by_index[int(i)].shadow_db for i in needed)
        ls = large_scale(cfg, kin, np.array([sf]), ngs_model)
        a_los, a_nlos = ls.los_amplitude, ls.nlos_amplitude
    else:
        a_los = a_nlos = np.ones(1)
    los_m, _ = draw_initial_phases(substream(seed, LOS_PHASE), cfg.kappa)
    d, g = los_taps(cfg, kin, los_m)
    delays = [d[0][..., None]]
    gains = [(g * w_los * a_los)[0][..., None]]
    for i in needed:
        dd, gg, _ = segment_taps(cfg, by_index[int(i)], kin)
        delays.append(dd[0])
        gains.append(gg[0] * np.sqrt(w[i]) * w_nlos[0] * a_nlos[0])
    return CirFrame(float(t), np.concatenate(delays, -1), np.concatenate(gains, -1), float(kf[0]))


def subpath_gains(cfg: ScenarioConfig, t, segments: List[StationarySegment], seed: Optional[int] = None,
                  ngs_model: Optional[MlpModel] = None, large_scale_scaling: bool = False):
    """Tap delays and gains with a fixed tap identity over ``t``.

    Tap 0 is the LoS; then every sub-path of every segment in order, with
    zero gain outside the segment's cross-fade support.  Shapes (T, P, Q, L).
    Gains are small-scale only unless ``large_scale_scaling`` is set.
    """
    seed = cfg.seed if seed is None else seed
    t = np.atleast_1d(np.asarray(t, float))
    starts, ends = segment_schedule(cfg)
    if len(segments) != len(starts) or any(s.index != i for i, s in enumerate(segments)):
        raise SequencingError("segment list does not match the schedule")
    w = crossfade_weights(starts, ends, cfg.ramp_window, t)
    kin = sample_kinematics(cfg, t)
    w_los, w_nlos = _rice_weights(cfg.rice_factor(t))
    if large_scale_scaling:
        ls = large_scale(cfg, kin, np.array([s.shadow_db for s in segments]) @ w,
                         ngs_model if ngs_model is not None else ngs_model_for(cfg))
        w_los = w_los * ls.los_amplitude
        w_nlos = w_nlos * ls.nlos_amplitude
    los_m, _ = draw_initial_phases(substream(seed, LOS_PHASE), cfg.kappa)
    d, g = los_taps(cfg, kin, los_m)
    delays, gains = [d[..., None]], [(g * w_los[:, None, None])[..., None]]
    for i, seg in enumerate(segments):
        dd, gg, _ = segment_taps(cfg, seg, kin)
        delays.append(dd)
        gains.append(gg * (np.sqrt(w[i]) * w_nlos)[:, None, None, None])
    return np.concatenate(delays, -1), np.concatenate(gains, -1)


def ensemble_window(cfg: ScenarioConfig, seeds, t0: float, n: int, pair=(0, 0)):
    """Small-scale LoS and NLoS coefficients of ``pair`` for several seeds.

    Evaluates ``n`` samples from ``t0`` on the run's time grid without
    generating the full record.  Returns ``(los, nlos)``, each (S, n).
    """
    t = t0 + np.arange(n) / cfg.sample_rate
    if t[-1] > cfg.duration:
        raise SequencingError("window extends past the end of the run")
    p, q = pair
    los, nlos = [], []
    for seed in seeds:
        segs, _ = advance_segments(cfg, seed)
        _, g = subpath_gains(cfg, t, segs, seed)
        los.append(g[:, p, q, 0])
        nlos.append(g[:, p, q, 1:].sum(-1))
    return np.array(los), np.array(nlos)
