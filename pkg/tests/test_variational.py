"""
Test suite for the variational ansatz and the final-approach geometry
"""
import math
import os
import sys
import unittest

import numpy as np
from scipy.optimize import minimize_scalar

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from algorithms.model import DrivePoint, final_detuning, kerr_hamiltonian
from algorithms.penalty import penalty_density
from algorithms.spectral import eigensystem
from algorithms.variational import (ansatz_overlap, approximate_offset, coherent_alpha, coherent_ansatz,
                                    displaced_alpha, displaced_ansatz, final_interval_offset, optimal_offset,
                                    q_beta_analytic, region_b_beta, solve_depressed_cubic)


class TestCubicRoots(unittest.TestCase):

    def test_residuals(self):
        for c in (-6.0, -3.0, -0.2, 0.0, 0.4, 5.0, 30.0):
            for beta in (0.0, 1e-6, 0.3, 2.0, 73.2):
                result = solve_depressed_cubic(c, beta)
                self.assertLess(result.residual, 1e-9 * max(1.0, beta))
        print("✅ Cubic roots satisfy alpha^3 + c alpha + beta = 0")

    def test_most_negative_branch(self):
        c, beta = -3.0, 0.5
        real_roots = [r.real for r in np.roots([1.0, 0.0, c, beta]) if abs(r.imag) < 1e-9]
        self.assertEqual(len(real_roots), 3)
        self.assertAlmostEqual(solve_depressed_cubic(c, beta).alpha, min(real_roots), places=10)
        print("✅ Three real roots: the most negative one is taken")

    def test_odd_symmetry(self):
        for delta, beta in ((2.0, 0.7), (-1.5, 0.2), (30.0, 73.2)):
            self.assertAlmostEqual(coherent_alpha(delta, -beta).alpha, -coherent_alpha(delta, beta).alpha,
                                   places=12)
        print("✅ alpha(-beta) = -alpha(beta)")

    def test_displaced_shift(self):
        n, delta, beta = 3, -2.5, 0.4
        self.assertAlmostEqual(displaced_alpha(n, delta, beta).alpha,
                               solve_depressed_cubic(delta + 2 * n, beta).alpha, places=14)
        with self.assertRaises(ValueError):
            displaced_alpha(-1, 0.0, 0.1)
        print("✅ Displaced-Fock coefficient is delta + 2n")


class TestCoherentRegime(unittest.TestCase):

    def test_region_b_line(self):
        self.assertAlmostEqual(region_b_beta(30.0, -4.5), math.sqrt(4.5) * 34.5, places=12)
        self.assertEqual(region_b_beta(-4.5, -4.5), 0.0)
        with self.assertRaises(ValueError):
            region_b_beta(0.0, 0.5)
        with self.assertRaises(ValueError):
            region_b_beta(-5.0, -4.5)
        print("✅ beta = sqrt(-delta_f) (delta - delta_f)")

    def test_coherent_ansatz_tracks_ground_state(self):
        delta_f = -4.5
        for delta in (15.0, 20.0, 30.0):
            beta = region_b_beta(delta, delta_f)
            point = DrivePoint(delta, beta)
            es = eigensystem(kerr_hamiltonian(point, 40), point)
            overlap = ansatz_overlap(coherent_ansatz(delta, beta, 40), es)
            self.assertGreaterEqual(overlap, 0.99)
            print(f"✅ Coherent ansatz overlap at delta={delta}: {overlap:.5f}")


class TestFinalApproach(unittest.TestCase):

    def test_analytic_penalty(self):
        self.assertAlmostEqual(q_beta_analytic(1, 0.0), 4 * (math.sqrt(2) + 1), places=12)
        with self.assertRaises(ValueError):
            q_beta_analytic(1, 0.5)
        with self.assertRaises(ValueError):
            q_beta_analytic(0, 0.0)
        print("✅ Vertical penalty at zero drive")

    def test_optimal_offset_n1(self):
        geometry = optimal_offset(1)
        self.assertAlmostEqual(geometry.delta_star, 0.028849, delta=1e-6)
        print(f"✅ delta*(1) = {geometry.delta_star:.6f}")

    def test_optimal_offset_is_minimizer(self):
        for n in range(1, 6):
            geometry = optimal_offset(n)
            numeric = minimize_scalar(lambda d: q_beta_analytic(n, d), bounds=(-0.45, 0.45), method="bounded",
                                      options={"xatol": 1e-10})
            self.assertAlmostEqual(geometry.delta_star, numeric.x, delta=5e-3)
            self.assertLessEqual(geometry.q_beta_min, numeric.fun + 1e-9)
            self.assertAlmostEqual(geometry.delta_approx, geometry.delta_star, delta=5e-3)
        print("✅ Closed-form offset minimizes the vertical penalty for n = 1..5")

    def test_numerical_density_minimum(self):
        for n in range(1, 6):
            delta_f = final_detuning(n)
            density = lambda d: penalty_density(DrivePoint(delta_f + d, 1e-4), (0.0, 1.0), 40)
            numeric = minimize_scalar(density, bounds=(-0.3, 0.3), method="bounded", options={"xatol": 1e-9})
            self.assertAlmostEqual(numeric.x, optimal_offset(n).delta_star, delta=1e-4)
        print("✅ Vertical penalty density at beta = 1e-4 is smallest at delta_f + delta*")

    def test_displaced_ansatz_near_axis(self):
        for n in range(1, 6):
            delta = final_detuning(n) + optimal_offset(n).delta_star
            point = DrivePoint(delta, 1e-3)
            es = eigensystem(kerr_hamiltonian(point, 40), point)
            overlap = ansatz_overlap(displaced_ansatz(n, delta, 1e-3, 40), es)
            self.assertGreaterEqual(overlap, 0.999)
        print("✅ D(alpha_n)|n> matches the ground state at small drive for n = 1..5")

    def test_offset_of_detuning(self):
        self.assertAlmostEqual(final_interval_offset(-4.47, 5), 0.03, places=12)
        self.assertGreater(approximate_offset(1), approximate_offset(5))
        print("✅ Offsets measured from the interval midpoint")


if __name__ == '__main__':
    unittest.main(verbosity=2)
