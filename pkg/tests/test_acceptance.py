"""
Long-running acceptance suite: optimized paths, scaling, generation fidelity and numerical hygiene.

Skipped unless FOCK_ACCEPTANCE=1; a full run takes on the order of an hour.
"""
import json
import math
import os
import sys
import tempfile
import unittest
from functools import lru_cache
from pathlib import Path

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from algorithms.dynamics import LossModel, evolve_closed, evolve_lindblad, rabi_tuned_fidelity, wigner_grid
from algorithms.path_optimizer import seed_path, segment_regions, terminal_column, vertex_regions
from algorithms.penalty import path_penalty
from algorithms.schedule import build_schedule, instantaneous_penalty
from algorithms.variational import optimal_offset
from harness.commands import cmd_scaling
from harness.commands.optimize import run_optimization, target_spec
from harness.schemas import RunConfig

ENABLED = os.getenv("FOCK_ACCEPTANCE") == "1"
ANCHORS_FILE = Path(__file__).with_name("regression_anchors.json")


@lru_cache(maxsize=None)
def optimized(n: int, delta_max: float = 30.0):
    config = RunConfig(target={"n": n, "delta_max": delta_max})
    result, spec = run_optimization(config)
    profile = path_penalty(result.path, spec.resolved_dim(), refine=True)
    return result, profile, spec.resolved_dim()


def load_anchors():
    with open(ANCHORS_FILE, "r", encoding="utf-8") as handle:
        return json.load(handle)


def record_anchor(name: str, fidelity: float) -> dict:
    """Write a measured fidelity into an unlocked anchor; later runs compare against it"""
    anchors = load_anchors()
    anchors["anchors"][name]["fidelity"] = round(float(fidelity), 6)
    with open(ANCHORS_FILE, "w", encoding="utf-8") as handle:
        json.dump(anchors, handle, indent=2)
        handle.write("\n")
    return anchors


@unittest.skipUnless(ENABLED, "set FOCK_ACCEPTANCE=1 to run the acceptance suite")
class TestOptimizedGeometry(unittest.TestCase):

    def test_region_b_follows_coherent_line(self):
        result, profile, _ = optimized(5)
        labels = np.array(vertex_regions(result.path, profile, segment_regions(result.path, profile)))
        middle = result.path.vertices[labels == "B"]
        quarter = len(middle) // 4
        core = middle[quarter:len(middle) - quarter]
        slope = np.polyfit(core[:, 0], core[:, 1], 1)[0]
        self.assertAlmostEqual(abs(slope) / math.sqrt(4.5), 1.0, delta=0.10)
        beta_max = result.path.vertices[:, 1].max()
        self.assertAlmostEqual(beta_max / (math.sqrt(4.5) * 34.5), 1.0, delta=0.10)
        print(f"✅ |5> region B slope {abs(slope):.3f}, beta_max {beta_max:.2f}")

    def test_delta_max_insensitivity(self):
        near, _, _ = optimized(5, 30.0)
        far, _, _ = optimized(5, 100.0)
        self.assertAlmostEqual(far.total_penalty / near.total_penalty, 1.0, delta=0.05)
        print(f"✅ I[C] at delta_max 30 vs 100: {near.total_penalty:.4f} / {far.total_penalty:.4f}")

    def test_quadrature_converged(self):
        result, profile, dim = optimized(5)
        doubled = path_penalty(result.path, dim, 2 * profile.samples_per_edge)
        self.assertLessEqual(abs(doubled.total / profile.total - 1.0), 0.005)
        print(f"✅ Quadrature settled at {profile.samples_per_edge} samples/edge")

    def test_optimum_below_seed(self):
        result, profile, dim = optimized(5)
        config = RunConfig(target={"n": 5, "delta_max": 30.0})
        seed = path_penalty(seed_path(target_spec(config)), dim, refine=True)
        self.assertLessEqual(profile.total, seed.total * (1 + 1e-9))
        print(f"✅ |5> refined I[C]: seed {seed.total:.4f}, optimized {profile.total:.4f}")

    def test_vertical_terminal_approach(self):
        for n in (1, 5):
            result, _, _ = optimized(n)
            vertices = result.path.vertices
            top, foot = terminal_column(vertices)
            approach = vertices[top:foot]
            target = -n + 0.5 + optimal_offset(n).delta_star
            self.assertTrue(np.all(approach[:, 1] > 0))
            np.testing.assert_allclose(approach[:, 0], target, atol=5e-3)
            print(f"✅ |{n}> last drive-on vertices sit at delta = {target:.4f}")

    def test_sqrt_scaling(self):
        with tempfile.TemporaryDirectory() as tmp:
            study = cmd_scaling(RunConfig(), range(1, 7), tmp, jobs=os.cpu_count() or 1)
        self.assertTrue(study["within_band"])
        self.assertTrue(study["monotone"])
        print(f"✅ I[C_n] ~ n^{study['gamma']:.3f}")


@unittest.skipUnless(ENABLED, "set FOCK_ACCEPTANCE=1 to run the acceptance suite")
class TestGeneration(unittest.TestCase):

    def test_closed_generation_of_three_photons(self):
        result, profile, dim = optimized(3)
        coarse = rabi_tuned_fidelity(result.path, [10.0, 40.0], [1.0, 2.0], LossModel(0.0), 3, dim,
                                     profile=profile, output_points=11)
        fine = rabi_tuned_fidelity(result.path, [5.0, 10.0, 20.0, 40.0], [1.0, 1.5, 2.0], LossModel(0.0), 3, dim,
                                   profile=profile, output_points=11)
        self.assertGreaterEqual(fine.best_fidelity, coarse.best_fidelity)
        self.assertGreaterEqual(fine.best_fidelity, 0.99)

        sched = build_schedule(result.path, profile, fine.best_time, fine.best_stretch)
        checked = evolve_closed(sched, dim=dim, n_target=3, output_points=11, verify=True)
        self.assertLessEqual(checked.diagnostics["step_doubling_delta"], 1e-7)
        self.assertLess(checked.diagnostics["norm_drift"], 1e-8)
        wider = evolve_closed(sched, dim=dim + 10, n_target=3, output_points=11)
        self.assertLessEqual(abs(wider.final_fidelity - checked.final_fidelity), 1e-4)
        print(f"✅ |3> closed: F = {fine.best_fidelity:.5f} at T={fine.best_time}, k={fine.best_stretch}")

    def test_loss_lowers_best_fidelity(self):
        result, profile, dim = optimized(3)
        best = [rabi_tuned_fidelity(result.path, [10.0, 20.0], [1.0], LossModel(kappa), 3, dim,
                                    profile=profile, output_points=11).best_fidelity
                for kappa in (0.0, 1e-3, 1e-2)]
        self.assertGreater(best[0], best[1])
        self.assertGreater(best[1], best[2])
        print(f"✅ Best F at kappa 0, 1e-3, 1e-2: {best[0]:.4f} > {best[1]:.4f} > {best[2]:.4f}")

    def test_schedule_saturation_outside_stretch(self):
        result, profile, _ = optimized(5)
        sched = build_schedule(result.path, profile, 11.0, 2.0)
        rate = instantaneous_penalty(sched)
        weight = sched.cell_q * np.diff(sched.s_bounds)
        keep = (sched.cell_labels != "B") & (weight > 1e-6 * weight.sum())
        level = rate[keep]
        self.assertLessEqual((level.max() - level.min()) / np.median(level), 0.02)
        print("✅ P(t) constant outside region B")


@unittest.skipUnless(ENABLED, "set FOCK_ACCEPTANCE=1 to run the acceptance suite")
class TestOpenSystemRegression(unittest.TestCase):
    """|5> at T = 11 with kappa = 1e-3"""

    def run_once(self):
        result, profile, dim = optimized(5)
        sched = build_schedule(result.path, profile, 11.0)
        return evolve_lindblad(sched, loss=LossModel(1e-3), dim=dim, n_target=5, output_points=51,
                               snapshot_fractions=(1.0,))

    def test_terminal_state(self):
        run = self.run_once()
        self.assertLess(run.diagnostics["trace_drift"], 1e-6)
        self.assertGreater(run.diagnostics["min_eigenvalue"], -1e-8)
        grid = wigner_grid(run.snapshots[1.0], resolution=81)
        self.assertAlmostEqual(grid.value_at(0.0, 0.0) / (-2 / math.pi), 1.0, delta=0.10)

        name = "open_n5_T11_kappa1e-3"
        anchors = load_anchors()
        if anchors["anchors"][name]["fidelity"] is None:
            again = self.run_once()
            self.assertAlmostEqual(again.final_fidelity, run.final_fidelity, delta=anchors["tolerance"])
            anchors = record_anchor(name, run.final_fidelity)
            print(f"🔒 Anchor {name} locked at F = {anchors['anchors'][name]['fidelity']:.6f}")
        locked = anchors["anchors"][name]["fidelity"]
        self.assertAlmostEqual(run.final_fidelity, locked, delta=anchors["tolerance"])
        print(f"✅ |5> with loss: F = {run.final_fidelity:.4f}, W(0) = {grid.value_at(0.0, 0.0):.4f}")


if __name__ == '__main__':
    unittest.main(verbosity=2)
