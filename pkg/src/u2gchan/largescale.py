"""Large-scale fading: three-segment path loss and log-normal shadowing."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fse
from .errors import (ConfigurationError, DegenerateFitError, DomainError,
                     GeometryError, InsufficientDataError)
from .mlp import MlpHyperparams, MlpModel, train_mlp

FSL_CONSTANT_DB = 32.4


def fsl_path_loss(d, fc_ghz):
    """Free-space loss in dB for distance in m and carrier in GHz."""
    d = np.asarray(d, dtype=float)
    fc = np.asarray(fc_ghz, dtype=float)
    if np.any(d <= 0) or np.any(fc <= 0):
        raise DomainError("distance and frequency must be positive")
    return 20.0 * np.log10(d) + 20.0 * np.log10(fc) + FSL_CONSTANT_DB


# -- shadow fading ------------------------------------------------------------

@dataclass(frozen=True)
class ShadowFadingParams:
    mu: float = 19.5
    sigma: float = 8.1

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("shadow fading sigma must be positive")


def sf_pdf(x, params: ShadowFadingParams):
    """Log-normal density of the linear-scale shadowing value."""
    if not params.sigma > 0:
        raise DomainError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("shadowing value must be non-negative")
    out = np.zeros_like(x)
    pos = x > 0
    lx = np.log(x[pos])
    out[pos] = np.exp(-((lx - params.mu) ** 2) / (2 * params.sigma**2)) / (np.sqrt(2 * np.pi) * params.sigma * x[pos])
    return out


def fit_shadow_fading(samples) -> ShadowFadingParams:
    """Maximum-likelihood (mu, sigma) from positive linear-scale samples."""
    s = np.asarray(samples, dtype=float)
    if s.size < 30:
        raise InsufficientDataError("need at least 30 shadowing samples")
    if np.any(s <= 0) or not np.all(np.isfinite(s)):
        raise DomainError("samples must be positive and finite")
    ls = np.log(s)
    sigma = float(np.sqrt(np.mean((ls - ls.mean()) ** 2)))
    if sigma == 0:
        raise DegenerateFitError("all samples equal; sigma would be zero")
    return ShadowFadingParams(float(ls.mean()), sigma)


def sample_shadow_fading(rng, params: ShadowFadingParams, size=None):
    """Draw ``exp(mu + sigma Z)``."""
    return np.exp(params.mu + params.sigma * rng.standard_normal(size))


def sample_shadow_fading_db(rng, params: ShadowFadingParams, size=None):
    """Shadowing loss in dB; the log domain of the density is read as dB."""
    return np.log(sample_shadow_fading(rng, params, size))


# -- near-ground training corpus -------------------------------------------

@dataclass(frozen=True)
class NgsCorpusGenerator:
    """Synthetic near-ground loss: free space + angle-dependent excess + clutter.

    Distances are measured from the virtual Tx at the near-ground height.
    """

    fc_ghz: float = 2.4
    d_range: tuple = (0.0, 300.0)
    elevation_range: tuple = (0.05, np.pi / 2)
    excess_db_per_m: float = 0.12
    elevation_loss_db: float = 6.0
    azimuth_ripple_db: float = 1.5
    clutter_sigma_db: float = 1.0

    def mean_loss(self, d, alpha, beta):
        d = np.asarray(d, float)
        low = 1.0 - np.sin(beta)
        return (fsl_path_loss(d + 1.0, self.fc_ghz) + self.excess_db_per_m * d * (0.5 + low)
                + self.elevation_loss_db * low + self.azimuth_ripple_db * np.cos(2 * np.asarray(alpha)))

    def sample(self, rng, n):
        d = rng.uniform(*self.d_range, n)
        a = rng.uniform(0.0, 2 * np.pi, n)
        b = rng.uniform(*self.elevation_range, n)
        pl = self.mean_loss(d, a, b) + self.clutter_sigma_db * rng.standard_normal(n)
        return d, a, b, pl


def plane_corpus(rng, n=1000):
    """Corpus on the plane ``PL = 0.1 d + 2 alpha + 3 beta + 40``."""
    d = rng.uniform(50.0, 500.0, n)
    a = rng.uniform(0.0, np.pi, n)
    b = rng.uniform(0.0, np.pi / 2, n)
    return d, a, b, 0.1 * d + 2 * a + 3 * b + 40.0


CORPUS_COLUMNS = ("d_m", "alpha_rad", "beta_rad", "pl_db")


def write_corpus(path, d, alpha, beta, pl):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CORPUS_COLUMNS)
        for row in zip(d, alpha, beta, pl):
            w.writerow([repr(float(x)) for x in row])


def read_corpus(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    missing = set(CORPUS_COLUMNS) - set(data.dtype.names or ())
    if missing:
        raise DomainError(f"corpus missing columns {sorted(missing)}")
    return tuple(np.atleast_1d(data[c]) for c in CORPUS_COLUMNS)


# -- segmented path loss ----------------------------------------------------

@dataclass(frozen=True)
class PlBreakpoints:
    d1: float  # NUS span along the path
    d2: float  # NGS span along the path
    c1: float
    c2: float
    fsl_end: float  # distance from Tx where the NGS begins


@dataclass
class SegmentedPathLoss:
    """Height-segmented path loss along a straight descent from the UAV.

    Distances ``d`` are measured from the Tx along the path; the observing
    height at ``d`` is ``tx_height - d sin(elevation)``.  ``elevation`` is the
    (positive) depression angle of the path; ``azimuth`` its heading.
    """

    fc_ghz: float
    tx_height: float
    xi_nus: float
    xi_ngs: float
    scatterers: Optional[fse.FuselageScatterSet] = None
    model: Optional[MlpModel] = None
    wave_speed: float = 299_792_458.0
    posture: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0 < self.xi_ngs < self.tx_height - self.xi_nus:
            raise ConfigurationError("need 0 < xi_ngs < tx_height - xi_nus")

    @property
    def wavelength(self):
        return self.wave_speed / (self.fc_ghz * 1e9)

    def _direction(self, azimuth, elevation):
        ce = np.cos(elevation)
        return np.array([ce * np.cos(azimuth), ce * np.sin(azimuth), -np.sin(elevation)])

    def nus_loss(self, d, azimuth, elevation):
        d = np.atleast_1d(np.asarray(d, float))
        u = self._direction(azimuth, elevation)
        obs = d[:, None] * u
        e0 = 4 * np.pi / self.wavelength
        if self.scatterers is None:
            return 20 * np.log10(e0 * d)
        rot = np.broadcast_to(np.eye(3) if self.posture is None else self.posture, (len(d), 3, 3))
        e_rt = fse.nus_field_batch(np.zeros_like(obs), rot, obs, self.scatterers, self.wavelength)
        with np.errstate(divide="ignore"):
            return 20 * np.log10(e0 / e_rt)

    def ngs_model_loss(self, d_ngs, azimuth, elevation):
        if self.model is None:
            raise ConfigurationError("near-ground branch requires a trained MLP model")
        return self.model.predict(d_ngs, azimuth, elevation)

    def breakpoints(self, azimuth, elevation) -> PlBreakpoints:
        if not np.sin(elevation) > 0:
            raise GeometryError("path elevation must be positive")
        s = np.sin(elevation)
        d1 = self.xi_nus / s
        d2 = self.xi_ngs / s
        fsl_end = (self.tx_height - self.xi_ngs) / s
        c1 = float(self.nus_loss(d1, azimuth, elevation)[0] - 20 * np.log10(d1) - 20 * np.log10(self.fc_ghz))
        c2 = float(20 * np.log10(fsl_end) + 20 * np.log10(self.fc_ghz) + c1
                   - self.ngs_model_loss(0.0, azimuth, elevation)) if self.model is not None else float("nan")
        return PlBreakpoints(d1, d2, c1, c2, fsl_end)

    def branch_values(self, d, azimuth, elevation, bp: Optional[PlBreakpoints] = None):
        """All three branch formulas evaluated at ``d`` (for continuity checks)."""
        bp = bp or self.breakpoints(azimuth, elevation)
        d = np.atleast_1d(np.asarray(d, float))
        nus = self.nus_loss(d, azimuth, elevation)
        fsl = 20 * np.log10(d) + 20 * np.log10(self.fc_ghz) + bp.c1
        ngs = (self.ngs_model_loss(d - bp.fsl_end, azimuth, elevation) + bp.c2
               if self.model is not None else np.full_like(d, np.nan))
        return nus, fsl, ngs

    def __call__(self, h, d, azimuth, elevation):
        """Path loss at observing height ``h`` and path distance ``d``."""
        h = np.atleast_1d(np.asarray(h, float))
        d = np.atleast_1d(np.asarray(d, float))
        if np.any(h > self.tx_height) or np.any(d <= 0):
            raise GeometryError("observation above the Tx or at zero distance")
        bp = self.breakpoints(azimuth, elevation)
        out = np.empty(np.broadcast(h, d).shape)
        h, d = np.broadcast_arrays(h, d)
        in_nus = h >= self.tx_height - self.xi_nus
        in_ngs = h <= self.xi_ngs
        in_fsl = ~in_nus & ~in_ngs
        if np.any(in_nus):
            out[in_nus] = self.nus_loss(d[in_nus], azimuth, elevation)
        if np.any(in_fsl):
            out[in_fsl] = 20 * np.log10(d[in_fsl]) + 20 * np.log10(self.fc_ghz) + bp.c1
        if np.any(in_ngs):
            out[in_ngs] = self.ngs_model_loss(d[in_ngs] - bp.fsl_end, azimuth, elevation) + bp.c2
        return out

    def profile(self, azimuth, elevation, n=400):
        """Loss along the full descent from the UAV to the ground."""
        total = self.tx_height / np.sin(elevation)
        d = np.linspace(total / n, total, n)
        h = self.tx_height - d * np.sin(elevation)
        return d, h, self(h, d, azimuth, elevation)


def default_ngs_model(fc_ghz=2.4, seed=0, n=1000, hp: Optional[MlpHyperparams] = None):
    """Train the near-ground model on the built-in synthetic corpus."""
    from .rng import CORPUS, substream

    gen = NgsCorpusGenerator(fc_ghz=fc_ghz)
    d, a, b, pl = gen.sample(substream(seed, CORPUS), n)
    hp = hp or MlpHyperparams(seed=seed)
    return train_mlp(d, a, b, pl, hp)
