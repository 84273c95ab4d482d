"""
Test suite for the saturated-penalty schedule
"""
import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from algorithms.model import DrivePoint
from algorithms.path_optimizer import TargetSpec, seed_path, segment_regions
from algorithms.penalty import path_penalty
from algorithms.schedule import (arc_at_time, build_schedule, controls_at, dwell_fractions, instantaneous_penalty,
                                 static_schedule, time_at_arc)


class TestBuildSchedule(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.path = seed_path(TargetSpec(1, delta_max=100.0, dim=24, n_vertices=10))
        cls.profile = path_penalty(cls.path, 24, samples_per_edge=4)
        cls.regions = segment_regions(cls.path, cls.profile)

    def test_endpoints(self):
        sched = build_schedule(self.path, self.profile, 7.0, grid_points=512)
        self.assertEqual(len(sched), 512)
        self.assertEqual(sched.times[0], 0.0)
        self.assertEqual(sched.times[-1], 7.0)
        self.assertEqual((sched.start.delta, sched.start.beta), (100.0, 0.0))
        self.assertEqual((sched.end.delta, sched.end.beta), (-0.5, 0.0))
        self.assertTrue(np.all(np.diff(sched.arc) >= 0))
        print("✅ Schedule runs from (delta_max, 0) to (delta_f, 0) in time T")

    def test_saturated_penalty(self):
        T = 5.0
        sched = build_schedule(self.path, self.profile, T)
        rate = instantaneous_penalty(sched)
        # cells carrying a negligible share lose precision in the cumulative sum
        weight = sched.cell_q * np.diff(sched.s_bounds)
        resolved = weight > 1e-6 * weight.sum()
        np.testing.assert_allclose(rate[resolved], self.profile.total / T, rtol=1e-6)
        self.assertGreaterEqual(len(sched.s_bounds) - 1, 2000)
        print(f"✅ P(t) = I/T = {self.profile.total / T:.4f} on every cell")

    def test_time_map_endpoints(self):
        sched = build_schedule(self.path, self.profile, 3.0)
        self.assertAlmostEqual(float(time_at_arc(sched, 0.0)), 0.0)
        self.assertAlmostEqual(float(time_at_arc(sched, self.path.arc_length)), 3.0)
        self.assertAlmostEqual(float(arc_at_time(sched, 3.0)), self.path.arc_length)
        print("✅ t(0) = 0 and t(S) = T")

    def test_time_map_inverse(self):
        sched = build_schedule(self.path, self.profile, 4.0)
        times = np.linspace(0.0, 4.0, 257)
        np.testing.assert_allclose(time_at_arc(sched, arc_at_time(sched, times)), times, atol=1e-8)
        dt = np.diff(sched.t_bounds)
        arcs = sched.s_bounds[1:-1][(dt[:-1] > 0) & (dt[1:] > 0)]
        np.testing.assert_allclose(arc_at_time(sched, time_at_arc(sched, arcs)), arcs, atol=1e-8)
        print("✅ s(t) and t(s) invert each other")

    def test_doubling_time_halves_rate(self):
        short = instantaneous_penalty(build_schedule(self.path, self.profile, 3.0))
        long = instantaneous_penalty(build_schedule(self.path, self.profile, 6.0))
        finite = np.isfinite(short) & np.isfinite(long)
        np.testing.assert_allclose(long[finite], 0.5 * short[finite], rtol=1e-9)
        print("✅ P(t) halves when T doubles")

    def test_stretch_moves_time_into_region_b(self):
        plain = dwell_fractions(build_schedule(self.path, self.profile, 10.0, 1.0, self.regions))
        stretched = dwell_fractions(build_schedule(self.path, self.profile, 10.0, 2.5, self.regions))
        self.assertAlmostEqual(sum(plain.values()), 1.0, places=12)
        self.assertAlmostEqual(sum(stretched.values()), 1.0, places=12)
        self.assertGreater(stretched["B"], plain["B"])
        self.assertLess(stretched["C"], plain["C"])
        print(f"✅ Region B dwell: k=1 {plain['B']:.3f}, k=2.5 {stretched['B']:.3f}")

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            build_schedule(self.path, self.profile, 0.0)
        with self.assertRaises(ValueError):
            build_schedule(self.path, self.profile, 1.0, stretch=0.5)
        other = seed_path(TargetSpec(1, delta_max=5.0, dim=24, n_vertices=10))
        with self.assertRaises(ValueError):
            build_schedule(other, self.profile, 1.0)
        print("✅ Non-positive T, k < 1 and foreign profiles rejected")

    def test_controls_at(self):
        sched = build_schedule(self.path, self.profile, 2.0, grid_points=256)
        start = controls_at(sched, 0.0)
        self.assertEqual((start.delta, start.beta), (100.0, 0.0))
        with self.assertRaises(ValueError):
            controls_at(sched, 2.5)
        print("✅ Controls interpolated inside [0, T] only")

    def test_frame(self):
        frame = build_schedule(self.path, self.profile, 2.0, grid_points=64).to_frame()
        self.assertEqual(list(frame.columns), ["t", "delta", "beta", "s", "region"])
        self.assertEqual(frame["region"].iloc[0], "A")
        self.assertEqual(frame["region"].iloc[-1], "C")
        print("✅ Schedule table layout")


class TestStaticSchedule(unittest.TestCase):

    def test_constant_controls(self):
        sched = static_schedule(DrivePoint(1.5, 0.2), 4.0, grid_points=5)
        np.testing.assert_array_equal(sched.deltas, np.full(5, 1.5))
        np.testing.assert_array_equal(sched.betas, np.full(5, 0.2))
        self.assertIsNone(sched.labels)
        self.assertEqual(dwell_fractions(sched), {})
        self.assertEqual(list(sched.to_frame().columns), ["t", "delta", "beta", "s"])
        print("✅ Static schedule holds the controls")

    def test_rejects_non_positive_time(self):
        with self.assertRaises(ValueError):
            static_schedule(DrivePoint(0.0, 0.0), 0.0)
        print("✅ Static schedule needs T > 0")


if __name__ == '__main__':
    unittest.main(verbosity=2)
