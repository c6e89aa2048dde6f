import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from u2gchan.errors import (ConfigurationError, DegenerateFitError, DomainError, GeometryError,
                            InsufficientDataError)
from u2gchan.fse import hexacopter_scatter_set
from u2gchan.largescale import (NgsCorpusGenerator, SegmentedPathLoss, ShadowFadingParams, fit_shadow_fading,
                                fsl_path_loss, read_corpus, sample_shadow_fading, sample_shadow_fading_db,
                                sf_pdf, write_corpus)


def test_fsl_values():
    assert fsl_path_loss(1.0, 1.0) == pytest.approx(32.4, abs=1e-12)
    assert fsl_path_loss(100.0, 2.4) == pytest.approx(80.004, abs=1e-3)


@given(st.floats(0.1, 1e4), st.floats(1.01, 10.0))
def test_fsl_monotone(d, k):
    assert fsl_path_loss(d * k, 2.4) > fsl_path_loss(d, 2.4)


def test_fsl_domain():
    with pytest.raises(DomainError):
        fsl_path_loss(0.0, 2.4)
    with pytest.raises(DomainError):
        fsl_path_loss(10.0, -1.0)


# -- shadowing ------------------------------------------------------------------

@pytest.mark.parametrize("mu,sigma", [(0.0, 1.0), (1.0, 0.5), (19.5, 8.1)])
def test_sf_pdf_normalized(mu, sigma):
    p = ShadowFadingParams(mu, sigma)
    # integrate in the log domain where the density is a plain Gaussian
    val, _ = quad(lambda u: sf_pdf(np.exp(u), p) * np.exp(u), mu - 12 * sigma, mu + 12 * sigma)
    assert val == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("mu,sigma", [(0.0, 1.0), (1.0, 0.5), (19.5, 8.1)])
def test_sf_pdf_mode(mu, sigma):
    p = ShadowFadingParams(mu, sigma)
    mode = np.exp(mu - sigma**2)
    f = sf_pdf(np.array([mode * (1 - 1e-3), mode, mode * (1 + 1e-3)]), p)
    assert f[1] > f[0] and f[1] > f[2]


def test_sf_pdf_at_zero_and_domain():
    assert sf_pdf(np.array([0.0]), ShadowFadingParams())[0] == 0.0
    with pytest.raises(DomainError):
        ShadowFadingParams(0.0, 0.0)
    with pytest.raises(DomainError):
        sf_pdf(np.array([-1.0]), ShadowFadingParams())


def test_fit_recovers_generator():
    p = ShadowFadingParams(19.5, 8.1)
    s = sample_shadow_fading(np.random.default_rng(0), p, 100_000)
    fit = fit_shadow_fading(s)
    assert fit.mu == pytest.approx(19.5, rel=0.02)
    assert fit.sigma == pytest.approx(8.1, rel=0.02)


def test_fit_errors():
    with pytest.raises(DegenerateFitError):
        fit_shadow_fading(np.full(50, 3.0))
    with pytest.raises(InsufficientDataError):
        fit_shadow_fading(np.ones(10))


def test_sampling_deterministic():
    p = ShadowFadingParams()
    a = sample_shadow_fading_db(np.random.default_rng(9), p, 20)
    b = sample_shadow_fading_db(np.random.default_rng(9), p, 20)
    np.testing.assert_array_equal(a, b)
    # the log-domain value is the dB reading
    z = np.random.default_rng(9).standard_normal(20)
    np.testing.assert_allclose(a, p.mu + p.sigma * z, rtol=1e-12)


# -- segmented path loss ------------------------------------------------------

@pytest.fixture(scope="module")
def segmented(ngs_model):
    return SegmentedPathLoss(2.4, 150.0, 50.0, 15.0, hexacopter_scatter_set(0.5, 0.05), ngs_model)


@pytest.mark.parametrize("az,el", [(0.0, np.pi / 2), (0.7, np.pi / 4), (2.0, 0.3)])
def test_branch_continuity(segmented, az, el):
    bp = segmented.breakpoints(az, el)
    nus, fsl, _ = segmented.branch_values(bp.d1, az, el, bp)
    assert abs(nus[0] - fsl[0]) < 1e-9
    _, fsl, ngs = segmented.branch_values(bp.fsl_end, az, el, bp)
    assert abs(fsl[0] - ngs[0]) < 1e-9


def test_fsl_branch_slope(segmented):
    az, el = 0.3, np.pi / 3
    bp = segmented.breakpoints(az, el)
    d = 0.5 * (bp.d1 + bp.fsl_end)
    _, fsl, _ = segmented.branch_values(np.array([d, d / 2, d * 10 / 10]), az, el, bp)
    assert fsl[0] - fsl[1] == pytest.approx(6.0206, abs=1e-4)
    _, f1, _ = segmented.branch_values(np.array([10.0, 100.0]), az, el, bp)
    assert abs((f1[1] - f1[0]) - 20.0) < 1e-9


def test_branch_offset_signs(segmented):
    az, el = 0.0, np.pi / 2
    bp = segmented.breakpoints(az, el)
    # fuselage reflections add received power near the UAV, so the offset
    # sits below the exact free-space constant
    free_const = 20 * np.log10(4 * np.pi * 1e9 / 299_792_458.0)
    assert bp.c1 < free_const
    d1 = np.linspace(1.0, bp.d1, 50)
    nus, _, _ = segmented.branch_values(d1, az, el, bp)
    assert np.median(nus - fsl_path_loss(d1, 2.4) - (free_const - 32.4)) < 0
    d, h, pl = segmented.profile(az, el, n=600)
    ngs = h <= segmented.xi_ngs
    fsl = ~ngs & (h < segmented.tx_height - segmented.xi_nus)
    free = 20 * np.log10(d) + 20 * np.log10(2.4) + bp.c1
    # near ground attenuates faster than free space
    assert np.all(pl[ngs][1:] - free[ngs][1:] > 0)
    np.testing.assert_allclose(pl[fsl], free[fsl], atol=1e-9)


def test_missing_model_rejected():
    s = SegmentedPathLoss(2.4, 150.0, 50.0, 15.0)
    with pytest.raises(ConfigurationError):
        s(np.array([5.0]), np.array([145.0]), 0.0, np.pi / 2)


def test_geometry_validation():
    with pytest.raises(ConfigurationError):
        SegmentedPathLoss(2.4, 50.0, 50.0, 15.0)
    s = SegmentedPathLoss(2.4, 150.0, 50.0, 15.0)
    with pytest.raises(GeometryError):
        s.breakpoints(0.0, 0.0)


def test_corpus_round_trip(tmp_path):
    d, a, b, pl = NgsCorpusGenerator().sample(np.random.default_rng(1), 40)
    p = tmp_path / "corpus.csv"
    write_corpus(p, d, a, b, pl)
    for x, y in zip((d, a, b, pl), read_corpus(p)):
        np.testing.assert_array_equal(x, y)
