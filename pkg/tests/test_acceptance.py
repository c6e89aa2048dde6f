"""Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the summary section lists
the lines.  Scenario choices for each criterion are documented inline.
"""
import hashlib
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from u2gchan.channel import ChannelGenerator, advance_segments, ngs_model_for, subpath_gains
from u2gchan.config import default_config
from u2gchan.fse import hexacopter_scatter_set
from u2gchan.largescale import SegmentedPathLoss, plane_corpus
from u2gchan.mlp import MlpHyperparams, train_mlp
from u2gchan.scenario import AngleTrack, AntennaArray, PostureTrack, TrajectoryTrack, posture_matrix
from u2gchan.smallscale import pvf_coefficient, pvf_factor
from u2gchan.stats import (EnvelopeSeries, PdpMatrix, afd, averaged_pdp, lcr, stationary_interval, subpath_acf,
                           time_below)

ISO = AntennaArray(np.zeros((1, 3)), "isotropic")


def report(n, ok, detail):
    line = f"[AC{n:02d}] {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    return ok


def quiet_cfg(**kw):
    """Isotropic single elements, static posture, no large-scale scaling."""
    base = dict(tx_array=ISO, rx_array=ISO, posture=PostureTrack(), large_scale_in_cir=False)
    base.update(kw)
    return default_config(**base)


# 1 ---------------------------------------------------------------------------------

def test_ac01_rotation_kernel():
    rng = np.random.default_rng(1)
    a = rng.uniform(-4 * np.pi, 4 * np.pi, (10_000, 3))
    t0 = time.perf_counter()
    r = posture_matrix(a[:, 0], a[:, 1], a[:, 2])
    ortho = np.max(np.abs(np.einsum("nji,njk->nik", r, r) - np.eye(3)))
    det = np.max(np.abs(np.linalg.det(r) - 1.0))
    elapsed = time.perf_counter() - t0
    ok = ortho < 1e-12 and det < 1e-12 and elapsed < 1.0
    assert report(1, ok, f"max|R^T R - I| = {ortho:.2e}, max|det - 1| = {det:.2e}, {elapsed:.3f} s")


# 2 ---------------------------------------------------------------------------------

def test_ac02_segmented_pl_continuity(ngs_model):
    cfg = default_config()
    tx, rx = cfg.tx_track.position(0.0), cfg.rx_track.position(0.0)
    disp = rx - tx
    az = float(np.arctan2(-disp[1], -disp[0]))
    el = float(np.arcsin(-disp[2] / np.linalg.norm(disp)))
    model = SegmentedPathLoss(cfg.carrier_frequency, 150.0, 50.0, 15.0, cfg.fuselage, ngs_model)
    bp = model.breakpoints(az, el)
    nus, fsl1, _ = model.branch_values(bp.d1, az, el, bp)
    _, fsl2, ngs = model.branch_values(bp.fsl_end, az, el, bp)
    gap1, gap2 = abs(nus[0] - fsl1[0]), abs(fsl2[0] - ngs[0])
    _, f, _ = model.branch_values(np.array([bp.d1, bp.d1 * 10]), az, el, bp)
    slope_err = abs((f[1] - f[0]) - 20.0)
    # fuselage raises received power near the UAV: offset below free space
    free_const = 20 * np.log10(4 * np.pi * 1e9 / cfg.wave_speed)
    nus_above = bp.c1 < free_const
    # near ground the loss grows faster than the free-space continuation
    d = bp.fsl_end + np.linspace(1.0, bp.d2, 20)
    _, fsl_ext, ngs_vals = model.branch_values(d, az, el, bp)
    excess = ngs_vals - fsl_ext
    ngs_faster = bool(np.all(excess > 0) and excess[-1] > excess[0])
    ok = gap1 < 1e-9 and gap2 < 1e-9 and slope_err < 1e-9 and nus_above and ngs_faster
    assert report(2, ok, f"|gap d1| = {gap1:.1e} dB, |gap d2| = {gap2:.1e} dB, slope err = {slope_err:.1e}, "
                         f"C1 = {bp.c1:.3f} < {free_const:.3f}, NGS excess {excess[0]:.2f}->{excess[-1]:.2f} dB")


# 3 ---------------------------------------------------------------------------------

def test_ac03_mlp_plane():
    data = plane_corpus(np.random.default_rng(0), 1000)
    hp = MlpHyperparams(epochs=2000, seed=0, train_fraction=0.7)
    t0 = time.perf_counter()
    m1 = train_mlp(*data, hp)
    elapsed = time.perf_counter() - t0
    m2 = train_mlp(*data, hp)
    same = np.array_equal(m1.w1, m2.w1) and np.array_equal(m1.w2, m2.w2) and np.array_equal(m1.b1, m2.b1)
    ok = m1.validation_rmse < 1.0 and same and elapsed < 30.0
    assert report(3, ok, f"validation RMSE = {m1.validation_rmse:.3f} dB, deterministic = {same}, "
                         f"{elapsed:.1f} s per training")


# 4 ---------------------------------------------------------------------------------

def test_ac04_power_bookkeeping():
    real = ChannelGenerator(default_config(large_scale_in_cir=False)).run(frame_stride=0)
    dev = float(np.max(np.abs(real.nlos_power_sum - 1.0)))
    # K = 0, unit patterns: E|h|^2 over 100 seeds, averaged over the record
    cfg = quiet_cfg(rice_factor_db=(-np.inf,), duration=3.0)
    gen = ChannelGenerator(cfg)
    p = np.array([np.abs(gen.run(seed=s, frame_stride=0).h[:, 0, 0]) ** 2 for s in range(100)])
    mean = float(p.mean())
    ok = dev < 1e-12 and abs(mean - 1.0) < 0.03
    assert report(4, ok, f"max|sum P - 1| = {dev:.1e} over {len(real.times)} snapshots, "
                         f"K=0 ensemble mean |h|^2 = {mean:.4f}")


# 5 ---------------------------------------------------------------------------------

def test_ac05_pvf():
    worst = 0.0
    for hp in (np.pi / 6, np.pi / 2, np.pi):
        for e in (np.pi / 2 - hp / 2, np.pi / 2 + hp / 2, 3 * np.pi / 2 - hp / 2, 3 * np.pi / 2 + hp / 2):
            worst = max(worst, abs(pvf_factor(e - 1e-12, hp) - pvf_factor(e + 1e-12, hp)))
    spot = float(pvf_coefficient(0.0, np.pi / 2, 0.0, (np.pi / 2,) * 3))

    def dominant_tap(pitch):
        cfg = quiet_cfg(duration=2.0, posture=PostureTrack(pitch=AngleTrack(pitch)))
        real = ChannelGenerator(cfg).run(frame_stride=0)
        return float(np.median(real.pdp.max(axis=1)))

    p0, ppi = dominant_tap(0.0), dominant_tap(np.pi)
    drop = np.inf if ppi == 0 else 10 * np.log10(p0 / ppi)
    ok = worst < 1e-9 and abs(spot - 0.7071) < 1e-4 and drop > 20
    assert report(5, ok, f"max edge jump = {worst:.1e}, C(pi/2) = {spot:.5f}, "
                         f"dominant-tap drop pitch 0 -> pi = {drop:.1f} dB")


# 6 ---------------------------------------------------------------------------------

def test_ac06_rayleigh_limit():
    cfg = quiet_cfg(rice_factor_db=(-np.inf,), duration=3.0, subpaths=20)
    gen = ChannelGenerator(cfg)
    ref = stats.rayleigh(scale=np.sqrt(0.5)).cdf
    t0 = time.perf_counter()
    pv = []
    for s in range(50):
        env = np.abs(gen.run(seed=1000 + s, frame_stride=0).h[::10, 0, 0])  # thinned to 10 ms
        pv.append(stats.kstest(env, ref).pvalue)
    elapsed = time.perf_counter() - t0
    n_pass = int(np.sum(np.array(pv) > 0.01))
    ok = n_pass >= 45 and elapsed < 60
    assert report(6, ok, f"{n_pass}/50 seeds pass KS at p > 0.01 (median p = {np.median(pv):.2f}), "
                         f"{elapsed:.1f} s")


# 7 ---------------------------------------------------------------------------------

def test_ac07_doppler():
    tx = np.array([0.0, 0.0, 150.0])
    rx0 = np.array([-200.0, 0.0, 0.0])
    u = (tx - rx0) / np.linalg.norm(tx - rx0)
    cfg = quiet_cfg(duration=1.0, tx_track=TrajectoryTrack(tx), rx_track=TrajectoryTrack(rx0, velocity=10.0 * u),
                    rice_factor_db=(90.0,))
    real = ChannelGenerator(cfg).run(frame_stride=0)
    ph = np.unwrap(np.angle(real.h_los[:, 0, 0]))
    slope = abs(np.polyfit(real.times, ph, 1)[0])
    target = 2 * np.pi * 10.0 / cfg.wavelength
    rel = abs(slope - target) / target
    assert report(7, rel < 1e-3, f"|slope| = {slope:.4f} rad/s vs {target:.4f} (rel err {rel:.1e})")


# 8 ---------------------------------------------------------------------------------

def test_ac08_lcr_afd_identities():
    real = ChannelGenerator(default_config(large_scale_in_cir=False)).run(frame_stride=0)
    worst, checked = 0.0, 0
    for p in range(real.h.shape[1]):
        for q in range(real.h.shape[2]):
            s = EnvelopeSeries(real.times, real.h[:, p, q])
            for db in np.arange(-30.0, 11.0, 1.0):
                r = s.rms * 10 ** (db / 20)
                n = lcr(s, r)
                if n == 0:
                    continue
                frac = time_below(s, r) / s.duration
                worst = max(worst, abs(afd(s, r) * n - frac) / frac)
                checked += 1
    f = 5.0
    t = np.arange(int(100 / f * 2000) + 1) / 2000.0
    sin = EnvelopeSeries(t, 1.0 + 0.5 * np.sin(2 * np.pi * f * t) + 0j)
    lcr_ok = abs(lcr(sin, 1.0) * sin.duration - 100) <= 1
    afd_err = abs(afd(sin, 1.0) - 1 / (2 * f)) * 2 * f
    ok = worst < 0.01 and checked > 0 and lcr_ok and afd_err < 0.02
    assert report(8, ok, f"max rel |AFD*LCR - P(below)| = {worst:.1e} over {checked} level/pair cases, "
                         f"sinusoid LCR ok = {lcr_ok}, AFD rel err = {afd_err:.1e}")


# 9 ---------------------------------------------------------------------------------

def _median_si(cfg, seeds):
    gen = ChannelGenerator(cfg)
    out = []
    for s in seeds:
        r = gen.run(seed=s, frame_stride=0)
        avg = averaged_pdp(PdpMatrix(r.times, r.pdp_delays, r.pdp), cfg.stats.n_avg)
        out.append(np.median(stationary_interval(avg, 0.8).interval))
    return float(np.median(out))


def _median_acf5(cfg, seeds, component):
    t = np.arange(6) / cfg.sample_rate  # lags 0..5 ms
    out = []
    for s in seeds:
        segs, _ = advance_segments(cfg, s)
        _, g = subpath_gains(cfg, t, segs, s)
        out.append(abs(subpath_acf(g[:, 0, 0], component=component)[5]))
    return float(np.median(out))


def test_ac09_si_and_acf_trends():
    t0 = time.perf_counter()
    seeds = range(50)
    # hovering UAV with the default ground vehicle: posture is the only UAV-side change
    hover = default_config(duration=3.0, large_scale_in_cir=False,
                           tx_track=TrajectoryTrack([100.0, 0.0, 150.0]))
    si_still = _median_si(hover.with_updates(posture=PostureTrack()), seeds)
    si_roll = _median_si(hover.with_updates(posture=PostureTrack(roll=AngleTrack(0.0, np.pi / 4))), seeds)

    dflt = default_config(duration=1.0)
    nlos_fse = _median_acf5(dflt, seeds, "nlos")
    nlos_nofse = _median_acf5(dflt.with_updates(fse_enabled=False), seeds, "nlos")
    pure = dflt.with_updates(tx_array=ISO, rx_array=ISO, rice_factor_db=(-np.inf,))
    all_fse = _median_acf5(pure, seeds, "all")
    all_nofse = _median_acf5(pure.with_updates(fse_enabled=False), seeds, "all")
    info_fse, info_nofse = _median_acf5(dflt, seeds, "all"), _median_acf5(dflt.with_updates(fse_enabled=False),
                                                                         seeds, "all")
    elapsed = time.perf_counter() - t0
    ok = si_roll < si_still and nlos_fse > nlos_nofse and all_fse > all_nofse and elapsed < 300
    print(f"  info: total |ACF(5 ms)| at default K and dipoles, FSE {info_fse:.3f} vs no FSE {info_nofse:.3f}")
    assert report(9, ok, f"median SI roll pi/4 = {si_roll * 1e3:.1f} ms < still = {si_still * 1e3:.1f} ms; "
                         f"|ACF_NLoS(5 ms)| FSE {nlos_fse:.3f} > no FSE {nlos_nofse:.3f}; "
                         f"pure-NLoS |ACF(5 ms)| {all_fse:.3f} > {all_nofse:.3f}; {elapsed:.0f} s")


# 10 --------------------------------------------------------------------------------

def _digest_tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            if f == "manifest.json":
                continue
            p = os.path.join(dirpath, f)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, root)] = hashlib.sha256(fh.read()).hexdigest()
    return out


@pytest.mark.slow
def test_ac10_determinism(tmp_path):
    times, trees = [], []
    for name in ("a", "b"):
        out = tmp_path / name
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "u2gchan.cli", "--output-dir", str(out), "--emit", "all",
                               "--quiet"], capture_output=True, text=True)
        times.append(time.perf_counter() - t0)
        assert proc.returncode == 0, proc.stderr
        trees.append(_digest_tree(out))
    same = trees[0] == trees[1] and len(trees[0]) > 0
    ok = same and max(times) < 60
    assert report(10, ok, f"{len(trees[0])} files byte-identical = {same}, "
                          f"run times {times[0]:.1f} s / {times[1]:.1f} s")
