import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from u2gchan.errors import DegenerateGeometryError, DomainError, GeometryError, PowerUnderflowError
from u2gchan.scenario import SPEED_OF_LIGHT, angle_unit_vector, rot_z
from u2gchan.smallscale import (antenna_phase, doppler_phase, draw_initial_phases, lbs_range, los_delay,
                                los_doppler_phase, los_path_angles, nlos_delay, path_powers, pvf_coefficient,
                                pvf_factor, ramp_weight, update_ngs_geometry)

C = SPEED_OF_LIGHT
LAM = C / 2.4e9


def test_los_delay_vertical():
    assert los_delay([0, 0, 150.0], [0, 0, 0]) == pytest.approx(5.0035e-7, rel=1e-4)
    assert los_delay([0, 0, 150.0], [0, 0, 0]) == 150.0 / C
    with pytest.raises(DegenerateGeometryError):
        los_delay([1, 2, 3.0], [1, 2, 3.0])


def test_nlos_delay_example():
    a = np.array([10.0, 0, 0])
    b = np.array([0, 10.0, 0])
    assert nlos_delay(0.0, 145.0, 15.0, np.pi / 2, a, b) == pytest.approx((130 + 20) / C, rel=1e-12)


def test_nlos_delay_errors():
    a = np.array([10.0, 0, 0])
    with pytest.raises(GeometryError):
        nlos_delay(0.0, 145.0, 15.0, 0.0, a, a)
    with pytest.raises(GeometryError):
        nlos_delay(0.0, 145.0, 15.0, 0.5, np.zeros(3), a)


@given(st.floats(0.05, np.pi / 2), st.floats(0, 20), st.floats(20, 300))
def test_nlos_never_shorter_than_los(el, d_nm, rng_h):
    # Tx overhead of a ground Rx; scatterer somewhere around the Rx
    tx = np.array([rng_h / np.tan(el), 0.0, rng_h])
    rx = np.zeros(3)
    xi = min(15.0, 0.5 * rng_h)
    tx_ngs = rx + (tx - rx) * xi / rng_h
    u = angle_unit_vector(1.3, 0.1)
    a = u * lbs_range(u, tx_ngs - rx, 5.0)
    b = a - (tx_ngs - rx)
    assert nlos_delay(d_nm, rng_h, xi, el, a, b) >= los_delay(tx, rx) - 1e-15


def test_lbs_range_on_ellipse():
    rng = np.random.default_rng(0)
    g = np.array([3.0, 1.0, 14.0])
    for _ in range(20):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        r = lbs_range(u, g, 7.0)
        a = r * u
        assert np.linalg.norm(a) + np.linalg.norm(a - g) == pytest.approx(np.linalg.norm(g) + 7.0)


def test_ngs_geometry_static_and_drift():
    a0, t0, r0 = np.array([5.0, 5, 0]), np.array([0, 0, 15.0]), np.zeros(3)
    a, b = update_ngs_geometry(a0, t0, r0, 0.0, 0.0)
    np.testing.assert_array_equal(a, a0)
    np.testing.assert_allclose(b, a0 - t0)
    eq = np.array([1.0, 0, 0])
    a, b = update_ngs_geometry(a0, t0, r0, 0.0, eq)
    np.testing.assert_allclose(a, a0 - eq)
    np.testing.assert_allclose(b, a0 - t0)
    with pytest.raises(GeometryError):
        update_ngs_geometry(a0, t0, r0, 0.0, a0)


def test_path_powers_cases():
    np.testing.assert_allclose(path_powers(np.full(12, 1e-6), 2.3, 0.3e-6), 1 / 12)
    single = path_powers(np.zeros(1), 2.3, 0.3e-6)
    assert single[0] == 1.0
    p = path_powers(np.array([0.0, 1e-6]), 2.3, 0.3e-6)
    assert p[1] / p[0] == pytest.approx(np.exp(-1e-6 * 1.3 / (2.3 * 0.3e-6)))
    # huge delays underflow absolutely but recover relative to the first path
    far = path_powers(np.array([1.0, 1.0 + 1e-7]), 2.3, 0.3e-6)
    assert far.sum() == pytest.approx(1.0)
    with pytest.raises(PowerUnderflowError):
        path_powers(np.zeros(2), 2.3, 0.3e-6, sf_c_db=np.array([1e4, 1e4]))
    with pytest.raises(DomainError):
        path_powers(np.zeros(2), 1.0, 0.3e-6)


@given(st.lists(st.floats(0, 5e-6), min_size=1, max_size=40),
       st.lists(st.floats(-10, 10), min_size=40, max_size=40))
def test_path_powers_normalized(delays, sf):
    p = path_powers(np.array(delays), 2.3, 0.3e-6, np.array(sf[:len(delays)]))
    assert abs(p.sum() - 1.0) < 1e-12
    assert np.all(p >= 0)


def test_ramp_weight():
    assert ramp_weight(0.0) == 0.0
    assert ramp_weight(1.0) == 1.0
    assert ramp_weight(0.5) == pytest.approx(0.5)
    w = np.linspace(0, 1, 101)
    np.testing.assert_allclose(ramp_weight(w) + ramp_weight(1 - w), 1.0, atol=1e-15)
    with pytest.raises(DomainError):
        ramp_weight(1.2)


# -- PVF --------------------------------------------------------------------------

def test_pvf_spot_values():
    hp = (np.pi / 2,) * 3
    assert pvf_coefficient(0.0, 0.0, 0.0, hp) == 1.0
    assert pvf_coefficient(0.0, np.pi, 0.0, (0, np.pi / 2, 0)) == pytest.approx(0.0, abs=1e-15)
    assert pvf_coefficient(0.0, np.pi / 2, 0.0, (0, np.pi / 2, 0)) == pytest.approx(0.7071, abs=1e-4)


@pytest.mark.parametrize("hpbw", [np.pi / 6, np.pi / 2, np.pi])
def test_pvf_continuous_at_edges(hpbw):
    edges = [np.pi / 2 - hpbw / 2, np.pi / 2 + hpbw / 2, 3 * np.pi / 2 - hpbw / 2, 3 * np.pi / 2 + hpbw / 2]
    for e in edges:
        lo, hi = pvf_factor(e - 1e-12, hpbw), pvf_factor(e + 1e-12, hpbw)
        assert abs(lo - hi) < 1e-9


@given(st.floats(-20, 20), st.floats(1e-3, np.pi))
def test_pvf_bounded_and_smooth(angle, hpbw):
    f = pvf_factor(angle, hpbw)
    assert 0.0 <= f <= 1.0
    assert abs(pvf_factor(angle + 1e-6, hpbw) - f) < 1e-4


def test_pvf_zero_region():
    a = np.linspace(3 * np.pi / 4 + 1e-9, 5 * np.pi / 4 - 1e-9, 50)
    np.testing.assert_array_equal(pvf_factor(a, np.pi / 2), 0.0)


# -- angles and phases ----------------------------------------------------------

def test_los_angles():
    a_t, e_t, a_r, e_r = los_path_angles([0, 0, 100.0], [0, 0, 0.0])
    assert e_t == pytest.approx(-np.pi / 2) and e_r == pytest.approx(np.pi / 2)
    a_t, e_t, a_r, e_r = los_path_angles([0, 0, 0.0], [1.0, 0, 0])
    assert a_t == 0.0 and e_t == 0.0 and a_r == pytest.approx(np.pi)
    with pytest.raises(DegenerateGeometryError):
        los_path_angles([1, 1, 1.0], [1, 1, 1.0])


def test_initial_phase_matrices():
    los, nlos = draw_initial_phases(np.random.default_rng(0), 10 ** 0.8, (1000,))
    assert los.shape == (1000, 2, 2)
    np.testing.assert_array_equal(los[:, 0, 1], 0)
    np.testing.assert_allclose(np.abs(nlos[:, 0, 1]), 10 ** -0.4)
    np.testing.assert_allclose(np.abs(nlos[:, 1, 1]), 1.0)
    _, big = draw_initial_phases(np.random.default_rng(0), 1e12, 5)
    assert np.max(np.abs(big[:, 0, 1])) < 1e-5
    again, _ = draw_initial_phases(np.random.default_rng(0), 10 ** 0.8, (1000,))
    np.testing.assert_array_equal(los, again)
    with pytest.raises(DomainError):
        draw_initial_phases(np.random.default_rng(0), 0.0)


def test_initial_phases_uniform():
    _, nlos = draw_initial_phases(np.random.default_rng(1), 4.0, (5000,))
    ph = np.mod(np.angle(nlos[:, 0, 0]), 2 * np.pi)
    assert stats.kstest(ph, stats.uniform(0, 2 * np.pi).cdf).pvalue > 0.01


def test_doppler_phase():
    assert doppler_phase(LAM, LAM) == pytest.approx(2 * np.pi)
    t = np.linspace(0, 1, 11)
    static = los_doppler_phase(np.array([0, 0, 100.0]), np.zeros(3), 0.0, 0.0, LAM)
    assert np.ptp(np.broadcast_to(static, t.shape)) == 0
    v = 10.0
    rx = np.stack([t * v, 0 * t, 0 * t], axis=-1)
    ph = los_doppler_phase(np.array([500.0, 0, 0]), rx, 0.0, 0.0, LAM)
    slope = np.polyfit(t, ph, 1)[0]
    assert slope == pytest.approx(-2 * np.pi * v / LAM, rel=1e-3)


def test_antenna_phase():
    s = np.array([0.0, 1.0, 0.0])
    assert antenna_phase(np.zeros(3), np.eye(3), s, LAM) == 0.0
    assert antenna_phase(s * LAM / 2, np.eye(3), s, LAM) == pytest.approx(np.pi)
    # rotating the direction into the element axis
    assert antenna_phase(s * LAM / 2, rot_z(np.pi / 2), [1.0, 0, 0], LAM) == pytest.approx(np.pi)
