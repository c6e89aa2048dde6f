"""Scenario configuration: dataclass, TOML loading and validation.

The file format is documented in ``docs/config.md``.  Every field error is
raised as :class:`~u2gchan.errors.ConfigurationError` naming the field.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from typing import Optional

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigurationError
from .fse import FuselageScatterer, FuselageScatterSet, hexacopter_scatter_set
from .largescale import ShadowFadingParams
from .mlp import MlpHyperparams
from .scenario import (SPEED_OF_LIGHT, AngleTrack, AntennaArray, PostureTrack,
                       TrajectoryTrack, ula)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StatsConfig:
    acf_time: float = 0.0
    acf_max_lag: float = 0.05
    pdp_resolution: float = 10e-9
    n_avg: int = 10
    epsilon0: float = 0.8
    levels_db: tuple = tuple(range(-30, 11, 2))
    metrics: tuple = ("acf", "pdp", "lcr", "afd", "si")


@dataclass(frozen=True)
class ScenarioConfig:
    tx_track: TrajectoryTrack
    rx_track: TrajectoryTrack
    posture: PostureTrack = field(default_factory=PostureTrack)
    tx_array: AntennaArray = field(default_factory=AntennaArray)
    rx_array: AntennaArray = field(default_factory=AntennaArray)
    carrier_frequency: float = 2.4  # GHz
    wave_speed: float = SPEED_OF_LIGHT
    duration: float = 10.0
    sample_rate: float = 1000.0
    seed: int = 2023
    tx_height: Optional[float] = None
    xi_nus: float = 50.0
    xi_ngs: float = 15.0
    rice_factor_times: tuple = (0.0,)
    rice_factor_db: tuple = (6.0,)
    path_count_range: tuple = (4, 10)
    subpaths: int = 20
    delay_scalar: float = 2.3
    delay_spread: float = 0.3e-6
    xpr_db: float = 8.0
    cluster_sf_std_db: float = 3.0
    shadow: ShadowFadingParams = field(default_factory=ShadowFadingParams)
    segment_length: float = 1.0
    ramp_fraction: float = 0.1
    ramp_cap: float = 0.1
    aoa_elevation_mean: float = 0.2
    aoa_elevation_std: float = 0.15
    fse_enabled: bool = True
    fuselage: FuselageScatterSet = field(default_factory=hexacopter_scatter_set)
    first_path_aod: Optional[tuple] = (math.pi / 3, math.pi / 12)
    posture_enabled: bool = True
    large_scale_in_cir: bool = True
    cir_frame_stride: int = 100
    mlp: MlpHyperparams = field(default_factory=MlpHyperparams)
    corpus_size: int = 1000
    mlp_model_path: Optional[str] = None
    stats: StatsConfig = field(default_factory=StatsConfig)

    def __post_init__(self):
        if self.tx_height is None:
            object.__setattr__(self, "tx_height", float(self.tx_track.initial_position[2]))
        validate(self)

    # -- derived quantities
    @property
    def wavelength(self):
        return self.wave_speed / (self.carrier_frequency * 1e9)

    @property
    def n_samples(self):
        return int(round(self.duration * self.sample_rate))

    @property
    def times(self):
        return np.arange(self.n_samples) / self.sample_rate

    @property
    def kappa(self):
        return 10.0 ** (self.xpr_db / 10.0)

    @property
    def ramp_window(self):
        return min(self.ramp_fraction * self.segment_length, self.ramp_cap)

    def rice_factor(self, t):
        """Linear K(t) from the piecewise-linear dB track."""
        kt = np.asarray(self.rice_factor_times, float)
        kd = np.asarray(self.rice_factor_db, float)
        t = np.asarray(t, float)
        if np.all(np.isfinite(kd)):
            return 10.0 ** (np.interp(t, kt, kd) / 10.0)
        return np.interp(t, kt, 10.0 ** (kd / 10.0))

    def with_updates(self, **kw):
        return replace(self, **kw)

    def digest(self):
        """Stable hash of the numeric content of the configuration."""
        return hashlib.sha256(json.dumps(_plain(self), sort_keys=True).encode()).hexdigest()


def _plain(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    if isinstance(obj, complex):
        return [repr(obj.real), repr(obj.imag)]
    if isinstance(obj, float):
        return repr(obj)
    return obj


def validate(cfg: ScenarioConfig):
    def need(cond, name, msg):
        if not cond:
            raise ConfigurationError(msg, field=name)

    need(cfg.carrier_frequency > 0, "carrier_frequency_ghz", "must be positive")
    need(cfg.wave_speed > 0, "wave_speed", "must be positive")
    need(cfg.duration > 0, "duration_s", "must be positive")
    need(cfg.sample_rate > 0, "sample_rate_hz", "must be positive")
    need(0 <= cfg.seed < 2**64, "seed", "must be an unsigned 64-bit integer")
    need(0 < cfg.xi_ngs < cfg.tx_height - cfg.xi_nus, "xi_ngs_m",
         "need 0 < xi_ngs < tx_height - xi_nus")
    need(cfg.xi_nus > 0, "xi_nus_m", "must be positive")
    need(cfg.subpaths >= 1, "subpaths", "must be >= 1")
    lo, hi = cfg.path_count_range
    need(1 <= lo <= hi, "path_count_range", "need 1 <= min <= max")
    need(cfg.delay_scalar > 1, "delay_scalar", "must exceed 1")
    need(cfg.delay_spread > 0, "delay_spread_s", "must be positive")
    need(cfg.cluster_sf_std_db >= 0, "cluster_sf_std_db", "must be non-negative")
    need(len(cfg.rice_factor_times) == len(cfg.rice_factor_db) >= 1, "rice_factor_db",
         "need at least one (time, dB) knot")
    need(bool(np.all(np.diff(cfg.rice_factor_times) > 0)), "rice_factor_db", "knot times must increase")
    need(cfg.segment_length > 0, "segment_length_s", "must be positive")
    need(0 < cfg.ramp_fraction < 0.5, "ramp_fraction", "must lie in (0, 0.5)")
    need(cfg.ramp_cap > 0, "ramp_cap_s", "must be positive")
    need(cfg.segment_length >= 2 * cfg.ramp_window, "segment_length_s", "shorter than two ramp windows")
    need(cfg.aoa_elevation_std >= 0, "aoa_elevation_std_rad", "must be non-negative")
    need(cfg.cir_frame_stride >= 1, "cir_frame_stride", "must be >= 1")
    need(cfg.corpus_size >= 50, "corpus_size", "need at least 50 samples")
    need(0 < cfg.stats.epsilon0 < 1, "stats.epsilon0", "must lie in (0, 1)")
    need(cfg.stats.n_avg >= 1, "stats.n_avg", "must be >= 1")
    need(cfg.stats.pdp_resolution > 0, "stats.pdp_resolution_s", "must be positive")
    need(cfg.stats.acf_max_lag >= 0, "stats.acf_max_lag_s", "must be non-negative")
    need(0 <= cfg.stats.acf_time < cfg.duration, "stats.acf_time_s", "must lie inside the record")
    bad = set(cfg.stats.metrics) - set(StatsConfig().metrics)
    need(not bad, "stats.metrics", f"unknown metrics {sorted(bad)}")


# -- TOML parsing -------------------------------------------------------------

_TOP_KEYS = {
    "schema_version", "seed", "carrier_frequency_ghz", "wave_speed", "duration_s", "sample_rate_hz",
    "tx_height_m", "xi_nus_m", "xi_ngs_m", "rice_factor_db", "path_count_range", "subpaths",
    "delay_scalar", "delay_spread_s", "xpr_db", "cluster_sf_std_db", "sf_mu_db", "sf_sigma_db",
    "segment_length_s", "ramp_fraction", "ramp_cap_s", "aoa_elevation_mean_rad",
    "aoa_elevation_std_rad", "fse_enabled", "first_path_aod_rad", "posture_enabled",
    "large_scale_in_cir", "cir_frame_stride",
    "tx", "rx", "posture", "tx_antenna", "rx_antenna", "fuselage", "mlp", "stats",
}


def _check_keys(table, allowed, where):
    extra = set(table) - set(allowed)
    if extra:
        raise ConfigurationError(f"unknown keys {sorted(extra)}", field=where)


def _track(tab, name):
    _check_keys(tab, {"position", "motion", "velocity", "center", "angular_rate", "knot_times",
                      "knot_velocities", "knot_positions"}, name)
    if "position" not in tab:
        raise ConfigurationError("missing initial position", field=f"{name}.position")
    kind = tab.get("motion", "constant")
    try:
        return TrajectoryTrack(
            initial_position=tab["position"], kind=kind,
            velocity=tab.get("velocity", [0.0, 0.0, 0.0]),
            center=tab.get("center"), angular_rate=float(tab.get("angular_rate", 0.0)),
            knot_times=tab.get("knot_times"), knot_velocities=tab.get("knot_velocities"),
            knot_positions=tab.get("knot_positions"))
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), field=name) from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed trajectory ({exc})", field=name) from None


def _angle(tab, key):
    if f"{key}_table" in tab:
        t, v = np.asarray(tab[f"{key}_table"], float).T
        return AngleTrack(times=t, values=v)
    return AngleTrack(float(tab.get(key, 0.0)), float(tab.get(f"{key}_rate", 0.0)))


def _array(tab, name, wavelength):
    _check_keys(tab, {"pattern", "elements", "spacing_wavelengths", "axis", "offsets", "hpbw_rad",
                      "table_az", "table_el", "table_fv", "table_fh"}, name)
    if "offsets" in tab:
        off = np.asarray(tab["offsets"], float)
    else:
        axis = {"x": 0, "y": 1, "z": 2}[tab.get("axis", "y")]
        off = ula(int(tab.get("elements", 1)), float(tab.get("spacing_wavelengths", 0.5)) * wavelength, axis)
    try:
        return AntennaArray(off, tab.get("pattern", "isotropic"),
                            tuple(tab.get("hpbw_rad", (math.pi / 2,) * 3)),
                            *(np.asarray(tab[k], float) if k in tab else None
                              for k in ("table_az", "table_el", "table_fv", "table_fh")))
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), field=name) from None


def _fuselage(tab):
    _check_keys(tab, {"arm_length_m", "reflection", "n_arms", "scatterers", "bounding_radius_m"}, "fuselage")
    if "scatterers" in tab:
        sc = [FuselageScatterer(row[:3], complex(row[3], row[4] if len(row) > 4 else 0.0))
              for row in tab["scatterers"]]
        return FuselageScatterSet(tuple(sc), float(tab.get("bounding_radius_m", 5.0)))
    re_im = tab.get("reflection", [0.05, 0.0])
    return hexacopter_scatter_set(float(tab.get("arm_length_m", 0.5)), complex(*re_im), int(tab.get("n_arms", 6)))


def config_from_dict(doc: dict, overrides: Optional[dict] = None) -> ScenarioConfig:
    doc = dict(doc)
    if overrides:
        doc.update(overrides)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigurationError(f"must equal {SCHEMA_VERSION}", field="schema_version")
    _check_keys(doc, _TOP_KEYS, "<top level>")
    for key in ("tx", "rx"):
        if key not in doc:
            raise ConfigurationError("missing table", field=key)
    fc = float(doc.get("carrier_frequency_ghz", 2.4))
    c = float(doc.get("wave_speed", SPEED_OF_LIGHT))
    if fc <= 0 or c <= 0:
        raise ConfigurationError("must be positive", field="carrier_frequency_ghz")
    lam = c / (fc * 1e9)

    kw = {}
    simple = {
        "seed": ("seed", int), "carrier_frequency_ghz": ("carrier_frequency", float),
        "wave_speed": ("wave_speed", float), "duration_s": ("duration", float),
        "sample_rate_hz": ("sample_rate", float), "tx_height_m": ("tx_height", float),
        "xi_nus_m": ("xi_nus", float), "xi_ngs_m": ("xi_ngs", float), "subpaths": ("subpaths", int),
        "delay_scalar": ("delay_scalar", float), "delay_spread_s": ("delay_spread", float),
        "xpr_db": ("xpr_db", float), "cluster_sf_std_db": ("cluster_sf_std_db", float),
        "segment_length_s": ("segment_length", float), "ramp_fraction": ("ramp_fraction", float),
        "ramp_cap_s": ("ramp_cap", float), "aoa_elevation_mean_rad": ("aoa_elevation_mean", float),
        "aoa_elevation_std_rad": ("aoa_elevation_std", float), "fse_enabled": ("fse_enabled", bool),
        "posture_enabled": ("posture_enabled", bool), "large_scale_in_cir": ("large_scale_in_cir", bool),
        "cir_frame_stride": ("cir_frame_stride", int),
    }
    for key, (attr, typ) in simple.items():
        if key in doc:
            try:
                kw[attr] = typ(doc[key])
            except (TypeError, ValueError):
                raise ConfigurationError(f"expected {typ.__name__}", field=key) from None
    if "path_count_range" in doc:
        kw["path_count_range"] = tuple(int(x) for x in doc["path_count_range"])
    if "rice_factor_db" in doc:
        knots = np.asarray(doc["rice_factor_db"], float).reshape(-1, 2)
        kw["rice_factor_times"] = tuple(knots[:, 0])
        kw["rice_factor_db"] = tuple(knots[:, 1])
    if "sf_mu_db" in doc or "sf_sigma_db" in doc:
        try:
            kw["shadow"] = ShadowFadingParams(float(doc.get("sf_mu_db", 19.5)), float(doc.get("sf_sigma_db", 8.1)))
        except ValueError as exc:
            raise ConfigurationError(str(exc), field="sf_sigma_db") from None
    if "first_path_aod_rad" in doc:
        v = doc["first_path_aod_rad"]
        kw["first_path_aod"] = tuple(float(x) for x in v) if v else None

    kw["tx_track"] = _track(doc["tx"], "tx")
    kw["rx_track"] = _track(doc["rx"], "rx")
    if "posture" in doc:
        p = doc["posture"]
        _check_keys(p, {f"{a}{s}" for a in ("roll", "pitch", "yaw") for s in ("", "_rate", "_table")}, "posture")
        kw["posture"] = PostureTrack(_angle(p, "roll"), _angle(p, "pitch"), _angle(p, "yaw"))
    if "tx_antenna" in doc:
        kw["tx_array"] = _array(doc["tx_antenna"], "tx_antenna", lam)
    if "rx_antenna" in doc:
        kw["rx_array"] = _array(doc["rx_antenna"], "rx_antenna", lam)
    if "fuselage" in doc:
        kw["fuselage"] = _fuselage(doc["fuselage"])
    if "mlp" in doc:
        m = dict(doc["mlp"])
        _check_keys(m, {"hidden", "slope", "learning_rate", "epochs", "batch_size", "seed",
                        "corpus_size", "model_path"}, "mlp")
        kw["corpus_size"] = int(m.pop("corpus_size", 1000))
        path = m.pop("model_path", "")
        kw["mlp_model_path"] = path or None
        kw["mlp"] = MlpHyperparams(**m)
    if "stats" in doc:
        s = doc["stats"]
        _check_keys(s, {"acf_time_s", "acf_max_lag_s", "pdp_resolution_s", "n_avg", "epsilon0",
                        "levels_db", "metrics"}, "stats")
        kw["stats"] = StatsConfig(
            float(s.get("acf_time_s", 0.0)), float(s.get("acf_max_lag_s", 0.05)),
            float(s.get("pdp_resolution_s", 10e-9)), int(s.get("n_avg", 10)),
            float(s.get("epsilon0", 0.8)), tuple(float(x) for x in s.get("levels_db", StatsConfig.levels_db)),
            tuple(s.get("metrics", StatsConfig.metrics)))
    return ScenarioConfig(**kw)


def load_config(path, overrides: Optional[dict] = None) -> ScenarioConfig:
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"cannot parse TOML ({exc})", field="<file>") from None
    return config_from_dict(doc, overrides)


def default_config_text() -> str:
    return resources.files("u2gchan.data").joinpath("default_scenario.toml").read_text()


def default_config(**updates) -> ScenarioConfig:
    """The bundled default scenario, optionally with dataclass field updates."""
    cfg = config_from_dict(tomllib.loads(default_config_text()))
    return replace(cfg, **updates) if updates else cfg
