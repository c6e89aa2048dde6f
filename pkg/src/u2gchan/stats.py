"""Statistics of generated channels: ACF, PDP, LCR, AFD and stationary interval."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientDataError, UndefinedStatisticError


# -- containers ---------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeSeries:
    """Uniformly sampled complex channel coefficient of one element pair."""

    times: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, float)
        h = np.asarray(self.samples, complex)
        if t.ndim != 1 or h.shape != t.shape:
            raise DomainError("times and samples must be matching 1-D arrays")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(h))):
            raise DomainError("non-finite samples")
        if len(t) > 2:
            dt = np.diff(t)
            if np.max(np.abs(dt - dt[0])) > 1e-9 * max(abs(dt[0]), 1e-300) + 1e-15:
                raise DomainError("series must be uniformly sampled")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "samples", h)

    @property
    def envelope(self):
        return np.abs(self.samples)

    @property
    def dt(self):
        return float(self.times[1] - self.times[0])

    @property
    def duration(self):
        return (len(self.times) - 1) * self.dt

    @property
    def rms(self):
        return float(np.sqrt(np.mean(np.abs(self.samples) ** 2)))


@dataclass(frozen=True)
class PdpMatrix:
    """Power delay profiles on a common delay grid; ``n_avg`` drops per row."""

    times: np.ndarray  # (A,)
    delays: np.ndarray  # (B,)
    power: np.ndarray  # (A, B)
    n_avg: int = 1

    def __post_init__(self):
        p = np.asarray(self.power, float)
        d = np.asarray(self.delays, float)
        if np.any(p < 0):
            raise DomainError("powers must be non-negative")
        if np.any(np.diff(d) <= 0):
            raise DomainError("delay grid must be strictly increasing")
        object.__setattr__(self, "power", np.atleast_2d(p))
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "times", np.asarray(self.times, float))

    @property
    def spacing(self):
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


# -- ACF ----------------------------------------------------------------------------

def _lag_samples(lags, dt):
    k = np.rint(np.asarray(lags, float) / dt).astype(int)
    return k


def ensemble_correlation(h, t_index, lags):
    """``mean_s conj(h[s, t]) h[s, t + k]`` for sample lags ``k`` (may be negative).

    ``h`` is (S, T).
    """
    h = np.atleast_2d(np.asarray(h, complex))
    k = np.asarray(lags, int)
    idx = t_index + k
    if np.any(idx < 0) or np.any(idx >= h.shape[1]):
        raise DomainError("lag reaches outside the record")
    return np.mean(np.conj(h[:, t_index])[:, None] * h[:, idx], axis=0)


def temporal_acf(los, nlos, t, lags, dt, normalize=True):
    """Temporal ACF at time ``t`` for lags ``lags`` (seconds).

    ``los`` and ``nlos`` are (S, T) ensembles of the weighted LoS and NLoS
    contributions of one element pair; the two correlations are added.
    """
    ti = int(round(t / dt))
    k = _lag_samples(lags, dt)
    r = ensemble_correlation(los, ti, k) + ensemble_correlation(nlos, ti, k)
    if normalize:
        r0 = (ensemble_correlation(los, ti, [0]) + ensemble_correlation(nlos, ti, [0]))[0]
        if r0 == 0:
            raise UndefinedStatisticError("zero power at the reference time")
        r = r / r0
    return r


def time_averaged_acf(h, lags, dt):
    """Per-realization ACF estimated by averaging over the record."""
    h = np.asarray(h, complex)
    k = _lag_samples(lags, dt)
    if np.any(np.abs(k) >= len(h)):
        raise DomainError("lag reaches outside the record")
    p = np.mean(np.abs(h) ** 2)
    out = np.empty(len(k), complex)
    for i, kk in enumerate(k):
        if kk >= 0:
            out[i] = np.mean(np.conj(h[:len(h) - kk]) * h[kk:])
        else:
            out[i] = np.mean(np.conj(h[-kk:]) * h[:len(h) + kk])
    return out / p


# -- PDP ----------------------------------------------------------------------------

def pdp(delays, gains, resolution: Optional[float] = None):
    """Power per delay: ``(delay_grid, power)``.

    Without ``resolution`` taps at identical delays are summed; with it taps
    are binned on a grid of that spacing (left edges returned).
    """
    d = np.asarray(delays, float).ravel()
    p = np.abs(np.asarray(gains, complex).ravel()) ** 2
    if d.size == 0:
        raise DomainError("frame has no taps")
    if resolution is None:
        grid, inv = np.unique(d, return_inverse=True)
        return grid, np.bincount(inv, weights=p)
    b = np.floor(d / resolution).astype(np.int64)
    b0 = b.min()
    pw = np.bincount(b - b0, weights=p)
    return (b0 + np.arange(len(pw))) * resolution, pw


def averaged_pdp(pdps: PdpMatrix, n_avg: int, step: int = 1) -> PdpMatrix:
    """Average ``n_avg`` consecutive drops starting at every ``step``-th drop.

    ``step = 1`` is the sliding average with one output per drop;
    ``step = n_avg`` gives non-overlapping blocks.
    """
    if n_avg < 1 or step < 1:
        raise DomainError("n_avg and step must be >= 1")
    n = pdps.power.shape[0]
    if n < n_avg:
        raise InsufficientDataError("fewer drops than the averaging count")
    c = np.vstack([np.zeros((1, pdps.power.shape[1])), np.cumsum(pdps.power, axis=0)])
    starts = np.arange(0, n - n_avg + 1, step)
    p = np.maximum((c[starts + n_avg] - c[starts]) / n_avg, 0.0)
    return PdpMatrix(pdps.times[starts], pdps.delays, p, pdps.n_avg * n_avg)


def pdp_correlation(x, y):
    """Normalized PDP correlation ``sum(x y) / max(sum x^2, sum y^2)``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    den = max(float(x @ x), float(y @ y))
    if den == 0:
        return 1.0
    return float(x @ y) / den


@dataclass(frozen=True)
class StationaryInterval:
    times: np.ndarray  # drop times
    interval: np.ndarray  # s
    censored: np.ndarray  # bool: correlation never fell below the threshold


def stationary_interval(pdps: PdpMatrix, epsilon0: float = 0.8) -> StationaryInterval:
    """Time until the PDP correlation with each drop first falls below ``epsilon0``."""
    if not 0 < epsilon0 < 1:
        raise DomainError("epsilon0 must lie in (0, 1)")
    p = pdps.power
    n = p.shape[0]
    if n < 2:
        raise InsufficientDataError("need at least two drops")
    energy = np.einsum("ij,ij->i", p, p)
    step = pdps.spacing
    si = np.empty(n)
    cens = np.zeros(n, bool)
    for a in range(n):
        # scan forward in growing chunks; intervals are usually short
        found = -1
        lo, width = a + 1, 64
        while lo < n and found < 0:
            hi = min(n, lo + width)
            den = np.maximum(energy[a], energy[lo:hi])
            num = p[lo:hi] @ p[a]
            with np.errstate(invalid="ignore", divide="ignore"):
                eps = np.where(den > 0, num / den, 1.0)
            below = np.nonzero(eps < epsilon0)[0]
            if below.size:
                found = lo + below[0]
            lo, width = hi, width * 2
        if found >= 0:
            si[a] = (found - a) * step
        else:
            si[a] = (n - a) * step
            cens[a] = True
    return StationaryInterval(pdps.times.copy(), si, cens)


# -- level crossings ------------------------------------------------------------------

def _check_level(r):
    if not r > 0:
        raise DomainError("level must be positive")


def lcr(series: EnvelopeSeries, r: float) -> float:
    """Up-crossings of level ``r`` per second."""
    _check_level(r)
    x = series.envelope
    if len(x) < 2:
        raise InsufficientDataError("need at least two samples")
    ups = np.count_nonzero((x[:-1] < r) & (x[1:] >= r))
    return ups / series.duration


def time_below(series: EnvelopeSeries, r: float) -> float:
    """Time spent below ``r`` with linear interpolation between samples."""
    x = series.envelope
    x0, x1 = x[:-1], x[1:]
    frac = np.where((x0 < r) & (x1 < r), 1.0, 0.0)
    cross = (x0 < r) != (x1 < r)
    lo = np.minimum(x0, x1)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(cross, (r - lo) / np.abs(x1 - x0), frac)
    return float(frac.sum()) * series.dt


def afd(series: EnvelopeSeries, r: float) -> float:
    """Mean fade duration: time below ``r`` divided by the number of up-crossings.

    This is the ratio of the below-level probability to the LCR.  A record
    that ends inside its only fade (no up-crossing) counts that fade once.
    """
    _check_level(r)
    x = series.envelope
    below = x < r
    if not np.any(below):
        raise UndefinedStatisticError(f"envelope never falls below {r}")
    ups = np.count_nonzero(below[:-1] & (x[1:] >= r))
    return time_below(series, r) / max(ups, 1)


# -- report ---------------------------------------------------------------------------

@dataclass
class StatsReport:
    """Results with the parameters that produced them.

    ``metrics`` maps a metric name to a dict of equally long value arrays;
    ``params`` records the estimator settings.
    """

    params: Dict[str, object] = field(default_factory=dict)
    metrics: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = ["[parameters]"]
        for k, v in sorted(self.params.items()):
            lines.append(f"{k} = {v!r}")
        for name, cols in self.metrics.items():
            lines.append(f"\n[{name}]")
            for col, vals in cols.items():
                vals = np.asarray(vals)
                if np.iscomplexobj(vals):
                    vals = vals.real
                lines.append(f"{col} = [" + ", ".join(format(float(v), ".17g") for v in vals) + "]")
        return "\n".join(lines) + "\n"


METRICS = ("acf", "pdp", "lcr", "afd", "si")


def compute_report(realization, stats_cfg, acf_ensemble=None, pair=(0, 0),
                   metrics: Sequence[str] = METRICS) -> StatsReport:
    """Evaluate the selected metrics on a generated realization.

    ``acf_ensemble`` is ``(los, nlos)``, each (S, W): the weighted LoS and
    NLoS coefficients of ``pair`` for S seeds over a window that starts at
    the ACF reference time.  It is required when ``"acf"`` is selected.
    """
    bad = set(metrics) - set(METRICS)
    if bad or not metrics:
        raise DomainError(f"unknown or empty metric selection {sorted(bad)}; valid: {', '.join(METRICS)}")
    first = realization
    dt = first.sample_period
    p, q = pair
    rep = StatsReport(params={
        "pair": list(pair), "seed": first.seed,
        "acf_time_s": stats_cfg.acf_time, "acf_max_lag_s": stats_cfg.acf_max_lag,
        "pdp_resolution_s": stats_cfg.pdp_resolution, "n_avg": stats_cfg.n_avg,
        "epsilon0": stats_cfg.epsilon0, "levels_db_re_rms": list(stats_cfg.levels_db),
    })
    if "acf" in metrics:
        if acf_ensemble is None:
            raise DomainError("ACF requested without a seed ensemble")
        los, nlos = (np.atleast_2d(a) for a in acf_ensemble)
        rep.params["ensemble"] = los.shape[0]
        lags = np.arange(los.shape[1]) * dt
        r = temporal_acf(los, nlos, 0.0, lags, dt)
        rep.metrics["acf"] = {"dt_s": lags, "re": r.real, "im": r.imag, "abs": np.abs(r)}
    if "pdp" in metrics or "si" in metrics:
        mat = PdpMatrix(first.times, first.pdp_delays, first.pdp)
        avg = averaged_pdp(mat, stats_cfg.n_avg)
        if "pdp" in metrics:
            keep = np.arange(0, len(avg.times), max(1, int(round(0.1 / avg.spacing))) if avg.spacing else 1)
            tt, dd = np.meshgrid(avg.times[keep], avg.delays, indexing="ij")
            pw = avg.power[keep]
            nz = pw > 0
            rep.metrics["pdp"] = {"t_s": tt[nz], "delay_s": dd[nz], "power": pw[nz]}
        if "si" in metrics:
            si = stationary_interval(avg, stats_cfg.epsilon0)
            rep.metrics["si"] = {"t_s": si.times, "si_s": si.interval, "censored": si.censored.astype(float)}
    if "lcr" in metrics or "afd" in metrics:
        series = EnvelopeSeries(first.times, first.h[:, p, q])
        rms = series.rms
        levels_db = np.asarray(stats_cfg.levels_db, float)
        levels = rms * 10 ** (levels_db / 20)
        if "lcr" in metrics:
            rep.metrics["lcr"] = {"level_db": levels_db, "level": levels,
                                  "lcr_per_s": np.array([lcr(series, r) for r in levels])}
        if "afd" in metrics:
            vals = []
            for r in levels:
                try:
                    vals.append(afd(series, r))
                except UndefinedStatisticError:
                    vals.append(np.nan)
            rep.metrics["afd"] = {"level_db": levels_db, "level": levels, "afd_s": np.array(vals)}
    return rep


def subpath_acf(gains, normalize=True, component="all"):
    """ACF as the sum of per-tap correlations against the first time.

    ``gains`` is (T, L) with a fixed tap identity (tap 0 the LoS) and row 0
    the reference time; the result is the estimator with cross-tap terms,
    whose expectation vanishes under independent initial phases, removed.
    ``component`` selects ``"all"``, ``"los"`` or ``"nlos"`` taps.
    """
    g = np.asarray(gains, complex)
    if component == "los":
        g = g[:, :1]
    elif component == "nlos":
        g = g[:, 1:]
    elif component != "all":
        raise DomainError("component must be 'all', 'los' or 'nlos'")
    r = np.sum(np.conj(g[0]) * g, axis=-1)
    if normalize:
        if r[0] == 0:
            raise UndefinedStatisticError("zero power at the reference time")
        r = r / r[0]
    return r
