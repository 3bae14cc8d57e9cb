import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bmdm.dynamics import (forced_deformation, free_deformation, fundamental_frequency,
                           interferer_kinematics, sample_deformation_truth, spatial_directions,
                           to_spherical)
from bmdm.errors import DegenerateGeometry
from bmdm.scenario import (BridgeParams, ExcitationSource, Interferer, RadioParams,
                           ScenarioConfig, preset_condition)

TABLE = BridgeParams()
F_BRIDGE = 0.4177070559068678  # frozen from the closed form


def test_fundamental_frequency_table_values():
    assert fundamental_frequency(TABLE) == pytest.approx(0.42, abs=0.005)
    assert fundamental_frequency(TABLE) == pytest.approx(F_BRIDGE, rel=1e-12)


def test_frequency_scaling():
    f = fundamental_frequency(TABLE)
    assert fundamental_frequency(BridgeParams(span=200)) == pytest.approx(f / 4)
    assert fundamental_frequency(BridgeParams(youngs_modulus=4 * TABLE.youngs_modulus)) == pytest.approx(2 * f)


def test_free_deformation_samples():
    assert free_deformation(0.0, TABLE) == 0.0
    assert free_deformation(1 / (4 * F_BRIDGE), TABLE) == pytest.approx(1.35e-3)
    assert free_deformation(1.0, TABLE) == pytest.approx(0.0006673430502537093, rel=1e-12)


def test_forced_deformation_examples():
    mp = (180.0, 60.0, -25.0)
    assert forced_deformation(0.3, [], mp, 0.02) == 0.0
    at_monitor = ExcitationSource(2e-3, 1.5, position=mp)
    assert forced_deformation(1 / (4 * 1.5), [at_monitor], mp, 0.02) == pytest.approx(2e-3)
    src3 = ExcitationSource(4.59e-3, 0.6, position=(180.0, 60.0, -25.0))
    assert forced_deformation(0.5, [src3], mp, 0.02) == pytest.approx(4.59e-3 * math.sin(0.6 * math.pi))


def test_forced_deformation_damping():
    src = ExcitationSource(1e-3, 1.0, position=(200.0, 60.0, -25.0))
    val = forced_deformation(0.25, [src], (180.0, 60.0, -25.0), -0.02)
    assert val == pytest.approx(1e-3 * math.exp(-0.4))


def test_truth_free_only_matches_free_term():
    cfg = ScenarioConfig(radio=RadioParams(num_frames=4))
    truth = sample_deformation_truth(cfg)
    expected = [free_deformation(p * 0.01, cfg.bridge) for p in range(4)]
    np.testing.assert_allclose(truth, expected, rtol=0, atol=1e-18)


def test_truth_all_zero():
    cfg = ScenarioConfig(bridge=BridgeParams(free_amplitude=0.0), radio=RadioParams(num_frames=8),
                         sources=(ExcitationSource(0.0, 1.0, position=(0, 0, 0)),))
    assert np.all(sample_deformation_truth(cfg) == 0)


def test_condition_one_centimetre_scale():
    truth = sample_deformation_truth(preset_condition(1))
    assert truth.size == 1500
    assert 1e-3 < np.max(np.abs(truth)) < 5e-2


def test_truth_superposition():
    a = (ExcitationSource(1e-3, 0.7, position=(170.0, 60.0, -25.0)),)
    b = (ExcitationSource(3e-3, 2.1, phase=0.4, position=(190.0, 60.0, -25.0)),)
    radio = RadioParams(num_frames=50)
    t = lambda s: sample_deformation_truth(ScenarioConfig(radio=radio, sources=s))
    free = t(())
    np.testing.assert_allclose(t(a + b), t(a) + t(b) - free, atol=1e-18)


class TestSpherical:
    def test_monitor_range(self):
        pose = to_spherical((180.0, 60.0, -25.0))
        assert pose.distance == pytest.approx(191.3765920900464, rel=1e-14)
        assert math.degrees(pose.azimuth) == pytest.approx(18.43494882292201)

    def test_unit_x(self):
        pose = to_spherical((1.0, 0.0, 0.0))
        assert (pose.azimuth, pose.elevation, float(pose.distance)) == pytest.approx((0.0, math.pi / 2, 1.0))

    def test_one_millimetre_uplift(self):
        mp = (180.0, 60.0, -25.0)
        r0 = to_spherical(mp).distance
        dr = float(to_spherical(mp, 1e-3).distance - r0)
        assert dr == pytest.approx(-0.13063e-3, abs=1e-8)
        # linear projection z/R plus the curvature term
        quad = -25 / r0 * 1e-3 + (1 - (25 / r0) ** 2) * 1e-6 / (2 * r0)
        assert abs(dr - quad) < 1e-11

    def test_origin(self):
        with pytest.raises(DegenerateGeometry):
            to_spherical((0.0, 0.0, 0.0))

    def test_spatial_directions(self):
        assert spatial_directions(0.0, 0.0) == pytest.approx((1.0, 0.0))
        assert spatial_directions(math.pi / 2, 0.3)[0] == pytest.approx(0.0, abs=1e-16)
        pose = to_spherical((180.0, 60.0, -25.0))
        psi, omega = spatial_directions(pose.azimuth, pose.elevation)
        assert psi == pytest.approx(-0.12392885771580407)
        assert omega == pytest.approx(0.9914308617264331)

    @given(dd=st.floats(-0.05, 0.05), z=st.floats(-100, -1))
    def test_range_decreasing_when_below(self, dd, z):
        mp = (180.0, 60.0, z)
        r = lambda d: float(to_spherical(mp, d).distance)
        assert r(dd + 1e-4) < r(dd)


class TestKinematics:
    def _scene(self, start, speed):
        bridge = BridgeParams(span=1000.0)
        radio = RadioParams(monitor_point=(start[0], start[1], start[2]), num_frames=200)
        return ScenarioConfig(bridge=bridge, radio=radio,
                              interferers=(Interferer(start, speed),))

    def test_parked(self):
        s = interferer_kinematics(self._scene((100.0, 0.0, 0.0), 0.0), 0)
        assert np.all(s.distance == 100.0) and np.all(s.radial_velocity == 0.0)

    def test_line_of_sight(self):
        s = interferer_kinematics(self._scene((100.0, 0.0, 0.0), 10.0), 0, frames=[100])
        np.testing.assert_allclose(s.position, [[110.0, 0.0, 0.0]])
        assert s.distance[0] == pytest.approx(110.0)
        assert s.radial_velocity[0] == pytest.approx(10.0)

    def test_condition_two_frame_500(self):
        s = interferer_kinematics(preset_condition(2), 0, frames=[500])
        L = (165.0 + 12.0 * 5.0, 60.0, -25.0)
        R = math.sqrt(sum(c * c for c in L))
        assert s.distance[0] == pytest.approx(R, rel=1e-14)
        assert s.radial_velocity[0] == pytest.approx(12.0 * L[0] / R, rel=1e-12)
        assert s.distance[0] == pytest.approx(234.2007685726074)

    def test_through_base_station(self):
        cfg = ScenarioConfig(bridge=BridgeParams(span=400.0),
                             radio=RadioParams(monitor_point=(100.0, 0.0, 0.0)),
                             interferers=(Interferer((0.0, 0.0, 0.0), 1.0),))
        with pytest.raises(DegenerateGeometry):
            interferer_kinematics(cfg, 0)

    @given(k=st.integers(0, 2), condition=st.just(3))
    def test_speed_bounds(self, k, condition):
        cfg = preset_condition(condition)
        s = interferer_kinematics(cfg, k)
        v = abs(cfg.interferers[k].speed)
        assert np.all(np.abs(s.radial_velocity) <= v * (1 + 1e-12))
        assert np.all(np.abs(np.diff(s.distance)) <= v * cfg.radio.frame_duration * (1 + 1e-12))
        np.testing.assert_array_equal(s.distance, np.linalg.norm(s.position, axis=-1))
