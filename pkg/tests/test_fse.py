import numpy as np
import pytest

from u2gchan.errors import DegenerateGeometryError, DomainError
from u2gchan.fse import (FuselageScatterer, FuselageScatterSet, direct_ray, fse_departure_angles,
                         fuselage_excess_lengths, hexacopter_scatter_set, nus_extent, nus_field_batch,
                         read_ray_table, superposed_field_and_pl, trace_fuselage_rays, write_ray_table)

LAM = 0.125


def one(loc, refl=1.0):
    return FuselageScatterSet((FuselageScatterer(loc, refl),))


def test_collinear_length():
    rays = trace_fuselage_rays(one([1.0, 0.0, 0.0]), np.zeros(3), np.eye(3), [10.0, 0.0, 0.0], LAM)
    assert len(rays) == 1
    assert rays[0].length == pytest.approx(10.0)
    assert abs(rays[0].field) == pytest.approx(0.1)
    np.testing.assert_allclose(rays[0].direction, [1, 0, 0])


def test_posture_moves_scatterer():
    # yaw pi/2 puts body +x on world +y
    r = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    rays = trace_fuselage_rays(one([1.0, 0.0, 0.0]), np.zeros(3), r, [0.0, 10.0, 0.0], LAM)
    assert rays[0].length == pytest.approx(10.0)


def test_two_in_phase_rays_double():
    s = FuselageScatterSet((FuselageScatterer([0, 1.0, 0], 1.0), FuselageScatterer([0, -1.0, 0], 1.0)))
    obs = np.array([10.0, 0.0, 0.0])
    d = 1.0 + np.sqrt(101.0)
    lam = d / 80.0
    rays = trace_fuselage_rays(s, np.zeros(3), np.eye(3), obs, lam)
    res = superposed_field_and_pl(rays, lam, 1.0)
    assert res.field == pytest.approx(2.0 / d, rel=1e-9)
    assert not res.cancelled


def test_antiphase_cancellation_flagged():
    # second ray half a wavelength longer; equal magnitudes via scaled reflection
    lam = 0.1
    r1 = direct_ray([0, 0, 0], [10.0, 0, 0], lam)
    r2 = direct_ray([0, 0, 0], [10.05, 0, 0], lam)
    r2 = type(r2)(r2.path_index, r2.length, r2.field * r2.length / r1.length, r2.direction)
    res = superposed_field_and_pl([r1, r2], lam, 1.0)
    assert res.cancelled and res.path_loss_db == float("inf")


def test_pl_ratio_values():
    r = direct_ray([0, 0, 0], [5.0, 0, 0], LAM)
    e = abs(r.field)
    assert superposed_field_and_pl([r], LAM, e).path_loss_db == pytest.approx(0.0, abs=1e-12)
    assert superposed_field_and_pl([r], LAM, 10 * e).path_loss_db == pytest.approx(20.0)


def test_superpose_validation():
    with pytest.raises(DomainError):
        superposed_field_and_pl([], LAM, 1.0)
    with pytest.raises(DomainError):
        superposed_field_and_pl([direct_ray([0, 0, 0], [1, 0, 0], LAM)], LAM, 0.0)


def test_degenerate_geometry():
    with pytest.raises(DegenerateGeometryError):
        trace_fuselage_rays(one([1.0, 0, 0]), np.zeros(3), np.eye(3), [1.0, 0, 0], LAM)
    with pytest.raises(DegenerateGeometryError):
        fse_departure_angles([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])


def test_departure_angles():
    assert fse_departure_angles([1.0, 0, 0], [0, 0, 0]) == pytest.approx((0.0, 0.0))
    a, e = fse_departure_angles([0, 0, 2.0], [0, 0, 0])
    assert a == 0.0 and e == pytest.approx(np.pi / 2)
    assert fse_departure_angles([1.0, 1.0, 0], [0, 0, 0]) == pytest.approx((np.pi / 4, 0.0))


def test_scatter_set_validation():
    with pytest.raises(DomainError):
        FuselageScatterer([0, 0, 0], 1.5)
    with pytest.raises(DomainError):
        FuselageScatterSet(())
    with pytest.raises(DomainError):
        one([10.0, 0, 0])


def test_hexacopter_layout():
    s = hexacopter_scatter_set(0.5)
    assert len(s) == 6
    np.testing.assert_allclose(np.linalg.norm(s.locations, axis=1), 0.5)


def test_batch_matches_ray_list():
    s = hexacopter_scatter_set(0.5, 0.3)
    uav = np.array([[1.0, 2.0, 100.0]])
    obs = np.array([[40.0, -10.0, 60.0]])
    rot = np.eye(3)[None]
    rays = trace_fuselage_rays(s, uav[0], rot[0], obs[0], LAM)
    rays.append(direct_ray(uav[0], obs[0], LAM))
    ref = superposed_field_and_pl(rays, LAM, 1.0).field
    assert nus_field_batch(uav, rot, obs, s, LAM)[0] == pytest.approx(ref, rel=1e-12)
    ex = fuselage_excess_lengths(uav, rot, obs, s.locations)
    np.testing.assert_allclose(ex[0], [r.length for r in rays[:-1]] - np.linalg.norm(obs - uav), atol=1e-12)
    assert np.all(ex >= -1e-12)


def test_nus_extent_grows_with_reflection():
    u = [1.0, 0.0, -1.0]
    weak, _, _ = nus_extent(hexacopter_scatter_set(0.5, 0.05), u, LAM)
    strong, _, _ = nus_extent(hexacopter_scatter_set(0.5, 0.5), u, LAM)
    assert strong >= weak
    assert strong > 0


def test_ray_table_round_trip(tmp_path):
    s = hexacopter_scatter_set(0.5, 0.2 - 0.1j)
    rays = trace_fuselage_rays(s, np.zeros(3), np.eye(3), [30.0, 5.0, -40.0], LAM)
    p = tmp_path / "rays.csv"
    write_ray_table(p, rays, LAM)
    back = read_ray_table(p, LAM)
    for a, b in zip(rays, back):
        assert a.path_index == b.path_index and a.length == b.length
        assert abs(a.field - b.field) < 1e-14
        np.testing.assert_allclose(a.direction, b.direction, atol=1e-15)


def test_ray_table_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(DomainError):
        read_ray_table(p, LAM)
