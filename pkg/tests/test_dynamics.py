"""
Test suite for the dynamics engine
Covers closed and open propagation, analytic oracles, Wigner grids and the (T, k) scan
"""
import math
import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from algorithms.dynamics import (ControlledHamiltonian, LossModel, evolve_closed, evolve_lindblad, fidelity,
                                 propagate, rabi_tuned_fidelity, step_count, theoretical_decay, wigner_grid)
from algorithms.exceptions import ConvergenceError
from algorithms.fock_core import DensityMatrix, StateVector, coherent_state, fock_state
from algorithms.model import DrivePoint
from algorithms.path_optimizer import TargetSpec, seed_path
from algorithms.penalty import path_penalty
from algorithms.schedule import build_schedule, static_schedule


class TestLossModel(unittest.TestCase):

    def test_validation(self):
        with self.assertRaises(ValueError):
            LossModel(-1e-3)
        with self.assertRaises(ValueError):
            LossModel(float("nan"))
        self.assertEqual(LossModel(0.0).decay_time(3), math.inf)
        self.assertAlmostEqual(LossModel(0.01).decay_time(5), 20.0)
        print("✅ Loss rate validated, tau_n = 1/(n kappa)")


class TestClosedSystem(unittest.TestCase):

    def test_fock_state_is_stationary_without_drive(self):
        sched = static_schedule(DrivePoint(1.0, 0.0), 1.0)
        result = evolve_closed(sched, fock_state(3, 12), n_target=3, output_points=11)
        self.assertAlmostEqual(result.final_fidelity, 1.0, places=10)
        self.assertLess(result.diagnostics["norm_drift"], 1e-8)
        print("✅ Undriven Fock state keeps its population")

    def test_resonant_rabi_flop(self):
        beta = 0.01
        sched = static_schedule(DrivePoint(0.0, beta), math.pi / (2 * beta))
        result = evolve_closed(sched, dim=5, n_target=1, output_points=21)
        self.assertGreater(result.final_fidelity, 0.99)
        self.assertEqual(result.times.shape, (21,))
        print(f"✅ Resonant pi pulse |0> -> |1>: F = {result.final_fidelity:.5f}")

    def test_step_count_is_multiple_of_outputs(self):
        ham = ControlledHamiltonian.kerr_cavity(8)
        n = step_count(ham, np.array([[1.0, 0.5], [0.0, 0.2]]), 3.0, output_points=11)
        self.assertEqual(n % 10, 0)
        bound = ham.norm_bound(np.array([[1.0, 0.5], [0.0, 0.2]]))
        self.assertLessEqual(bound * 3.0 / n, 0.05 + 1e-12)
        print(f"✅ {n} RK4 steps keep ||H|| dt <= 0.05")

    def test_explicit_step_count_validated(self):
        ham = ControlledHamiltonian.free(4)
        with self.assertRaises(ValueError):
            propagate(ham, [0.0, 1.0], np.zeros((2, 2)), fock_state(0, 4).amplitudes, output_points=11, n_steps=15)
        print("✅ Step count must divide into output segments")

    def test_initial_state_dimension_checked(self):
        sched = static_schedule(DrivePoint(1.0, 0.0), 1.0)
        with self.assertRaises(ValueError):
            evolve_closed(sched, fock_state(0, 6), dim=8)
        with self.assertRaises(IndexError):
            evolve_closed(sched, dim=6, n_target=6)
        print("✅ Dimension and target index validated")


class TestOpenSystem(unittest.TestCase):

    def test_pure_loss_oracle(self):
        kappa, T = 0.1, 5.0
        sched = static_schedule(DrivePoint(0.0, 0.0), T)
        ham = ControlledHamiltonian.free(10)
        for n in range(1, 7):
            rho0 = fock_state(n, 10).to_density_matrix()
            result = evolve_lindblad(sched, rho0, LossModel(kappa), n_target=n, output_points=51, ham=ham)
            expected = theoretical_decay(n, kappa, result.times)
            np.testing.assert_allclose(result.fidelity_series, expected, atol=1e-6)
            self.assertLess(result.diagnostics["trace_drift"], 1e-6)
        print("✅ <n|rho(t)|n> = exp(-n kappa t) under pure loss")

    def test_lossless_master_equation_matches_schroedinger(self):
        sched = static_schedule(DrivePoint(0.5, 0.3), 4.0)
        closed = evolve_closed(sched, dim=10, n_target=1, output_points=11)
        mixed = evolve_lindblad(sched, loss=LossModel(0.0), dim=10, n_target=1, output_points=11)
        np.testing.assert_allclose(mixed.fidelity_series, closed.fidelity_series, atol=1e-9)
        print("✅ kappa = 0 master equation reproduces the pure-state run")

    def test_physicality_under_loss(self):
        sched = static_schedule(DrivePoint(1.0, 0.3), 5.0)
        result = evolve_lindblad(sched, loss=LossModel(0.05), dim=10, n_target=0, output_points=11,
                                 snapshot_fractions=(0.0, 0.5, 1.0))
        self.assertLess(result.diagnostics["hermiticity_error"], 1e-10)
        self.assertGreater(result.diagnostics["min_eigenvalue"], -1e-8)
        self.assertTrue(result.final_state.check_physical(trace_tol=1e-6))
        self.assertEqual(sorted(result.snapshots), [0.0, 0.5, 1.0])
        frame = result.to_frame()
        self.assertEqual(list(frame.columns[:4]), ["t", "fidelity", "trace", "tail"])
        self.assertEqual(frame.shape[1], 4 + 10)
        print("✅ Density matrix stays Hermitian, positive and normalized")

    def test_unphysical_initial_state_rejected(self):
        sched = static_schedule(DrivePoint(1.0, 0.0), 1.0)
        with self.assertRaises(ValueError):
            evolve_lindblad(sched, DensityMatrix(np.diag([1.2, -0.2, 0.0])))
        print("✅ Unphysical initial density matrix rejected")

    def test_step_doubling_check(self):
        sched = static_schedule(DrivePoint(1.0, 0.2), 2.0)
        result = evolve_closed(sched, dim=8, n_target=0, output_points=11, verify=True)
        self.assertLessEqual(result.diagnostics["step_doubling_delta"], 1e-7)
        superposition = StateVector(np.array([1, 0, 1, 0, 0, 0, 0, 0]) / math.sqrt(2))
        coarse = static_schedule(DrivePoint(1.0, 0.0), 2.0)
        with self.assertRaises(ConvergenceError) as ctx:
            evolve_closed(coarse, superposition, n_target=0, output_points=2, step_factor=3.0, verify=True)
        self.assertTrue(ctx.exception.diagnostics)
        print("✅ Step-doubling verification")


class TestFidelity(unittest.TestCase):

    def test_pure_and_mixed(self):
        psi = coherent_state(0.8, 20)
        self.assertAlmostEqual(fidelity(psi, 1), fidelity(psi.to_density_matrix(), 1), places=14)
        with self.assertRaises(IndexError):
            fidelity(psi, 20)
        print("✅ Fidelity for pure and mixed states")


class TestWigner(unittest.TestCase):

    def test_fock_values_at_origin(self):
        for n in range(4):
            grid = wigner_grid(fock_state(n, 12), resolution=41)
            self.assertAlmostEqual(grid.value_at(0.0, 0.0), (-1) ** n * 2 / math.pi, places=10)
        print("✅ W(0) = (-1)^n 2/pi for Fock states")

    def test_normalization(self):
        grid = wigner_grid(fock_state(3, 12), resolution=121)
        self.assertAlmostEqual(grid.integral(), 1.0, delta=1e-3)
        self.assertLess(grid.min_value, 0.0)
        print(f"✅ Wigner integral {grid.integral():.5f}")

    def test_coherent_state_peak(self):
        alpha = 1.0 + 0.5j
        grid = wigner_grid(coherent_state(alpha, 30), x_range=(-2.0, 2.0), p_range=(-2.0, 2.0), resolution=81)
        self.assertAlmostEqual(grid.value_at(1.0, 0.5), 2 / math.pi, delta=1e-5)
        self.assertGreater(grid.min_value, -1e-6)
        print("✅ Coherent-state Gaussian centred at alpha")

    def test_chunking_does_not_change_values(self):
        rho = fock_state(2, 8).to_density_matrix()
        whole = wigner_grid(rho, resolution=21)
        pieces = wigner_grid(rho, resolution=21, chunk=37)
        np.testing.assert_allclose(pieces.values, whole.values, atol=1e-14)
        print("✅ Chunked evaluation")


class TestGenerationLimits(unittest.TestCase):
    """Seed paths timed with the saturated-penalty law"""

    def test_sudden_limit_leaves_vacuum(self):
        spec = TargetSpec(5, delta_max=10.0, dim=30, n_vertices=12)
        path = seed_path(spec)
        sched = build_schedule(path, path_penalty(path, 30, samples_per_edge=4), 0.01, grid_points=256)
        result = evolve_closed(sched, dim=30, n_target=5, output_points=11)
        self.assertLessEqual(result.final_fidelity, 0.05)
        print(f"✅ T = 0.01: F(|5>) = {result.final_fidelity:.2e}")

    def test_one_photon_at_generous_time(self):
        path = seed_path(TargetSpec(1, delta_max=3.0, dim=12, n_vertices=10))
        scan = rabi_tuned_fidelity(path, [40.0, 80.0], [1.0, 2.0], LossModel(0.0), 1, 12,
                                   grid_points=2048, output_points=11)
        self.assertGreaterEqual(scan.best_fidelity, 0.99)
        print(f"✅ |1> closed: F = {scan.best_fidelity:.5f} at T={scan.best_time}, k={scan.best_stretch}")


class TestRabiScan(unittest.TestCase):

    def test_small_grid(self):
        path = seed_path(TargetSpec(1, delta_max=3.0, dim=14, n_vertices=8))
        scan = rabi_tuned_fidelity(path, [2.0, 4.0], [1.0, 1.5], LossModel(0.0), 1, 14,
                                   grid_points=256, output_points=11)
        self.assertEqual(len(scan.table), 4)
        self.assertEqual(list(scan.table.columns), ["n", "kappa", "T", "k", "fidelity", "penalty", "runtime"])
        self.assertEqual(scan.best_fidelity, scan.table["fidelity"].max())
        self.assertTrue(np.all((scan.table["fidelity"] >= 0) & (scan.table["fidelity"] <= 1 + 1e-9)))
        self.assertEqual(scan.best(), (scan.best_time, scan.best_stretch, scan.best_fidelity))
        print(f"✅ Best of 2 x 2 grid: F = {scan.best_fidelity:.4f} at T={scan.best_time}, k={scan.best_stretch}")

    def test_empty_grid(self):
        path = seed_path(TargetSpec(1, delta_max=3.0, dim=14, n_vertices=8))
        with self.assertRaises(ValueError):
            rabi_tuned_fidelity(path, [], [1.0], LossModel(0.0), 1, 14)
        print("✅ Empty grids rejected")


if __name__ == '__main__':
    unittest.main(verbosity=2)
