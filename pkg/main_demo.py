"""
Main Demo Script for Adiabatic Fock-State Generation
Walks one small target through the workflow: spectrum, path optimization, timing, dynamics and Wigner export
"""
import math
import sys

from algorithms.dynamics import LossModel, evolve_closed, evolve_lindblad, wigner_grid
from algorithms.exceptions import FockSchemeError
from algorithms.model import DrivePoint, kerr_hamiltonian, odd_crossings
from algorithms.path_optimizer import PathOptimizer, SearchOptions, TargetSpec, seed_path, segment_regions
from algorithms.penalty import path_penalty
from algorithms.schedule import build_schedule, dwell_fractions
from algorithms.spectral import eigensystem, energy_levels
from algorithms.variational import optimal_offset

N_TARGET = 2
DELTA_MAX = 10.0


def main():
    print("🌀" * 20)
    print("   KERR CAVITY FOCK-STATE GENERATION")
    print(f"   Adiabatic preparation of |{N_TARGET}>")
    print("🌀" * 20)

    spec = TargetSpec(N_TARGET, delta_max=DELTA_MAX, n_vertices=24)
    dim = spec.resolved_dim()

    # Step 1: Undriven spectrum and the crossings on the way down
    print("\n📂 Step 1: Level Structure...")
    print("-" * 40)
    crossings = odd_crossings(N_TARGET)
    print(f"✅ Truncation dimension: {dim}")
    print(f"✅ Final detuning delta_f = {spec.delta_f}")
    print(f"✅ Ground-state crossings to pass: {crossings}")
    levels = energy_levels([DELTA_MAX, 0.0, spec.delta_f], 0.0, dim, n_levels=4)
    for _, row in levels.iterrows():
        print(f"   delta={row['delta']:6.2f}: E0..E3 = {row['E0']:7.2f} {row['E1']:7.2f} {row['E2']:7.2f} {row['E3']:7.2f}")

    # Step 2: Final-approach geometry
    print("\n⚡ Step 2: Final Approach...")
    print("-" * 40)
    geometry = optimal_offset(N_TARGET)
    print(f"🎯 Optimal vertical offset delta* = {geometry.delta_star:.5f} "
          f"(approximation {geometry.delta_approx:.5f})")
    print(f"   Minimal vertical penalty: {geometry.q_beta_min:.4f}")

    # Step 3: Path optimization
    print("\n🚀 Step 3: Optimizing the Drive Path...")
    print("-" * 40)
    options = SearchOptions(seed=1, max_sweeps=20, min_sweeps=10, samples_per_edge=6)
    try:
        result = PathOptimizer(spec, options).optimize(seed_path(spec))
    except FockSchemeError as e:
        print(f"❌ Optimization failed: {e}")
        return 1

    print(f"\n📊 Optimization Results Summary:")
    print(f"{'Method':<26} {'Initial I[C]':<14} {'Final I[C]':<12} {'Sweeps':<8} {'Time (s)':<10}")
    print("-" * 72)
    print(f"{result.method:<26} {result.initial_penalty:<14.4f} {result.total_penalty:<12.4f} "
          f"{result.sweeps:<8} {result.computation_time:<10.2f}")

    profile = path_penalty(result.path, dim, options.samples_per_edge, refine=True)
    regions = segment_regions(result.path, profile)
    print(f"✅ Region sizes (samples): {regions.counts()}")

    # Step 4: Saturated-penalty schedule
    print("\n⏱️  Step 4: Timing the Path...")
    print("-" * 40)
    total_time = 8.0
    sched = build_schedule(result.path, profile, total_time, stretch=1.5, regions=regions, grid_points=1024)
    dwell = dwell_fractions(sched)
    print(f"✅ T = {total_time}, k = 1.5, constant P(t) = {profile.total / total_time:.4f}")
    print(f"   Dwell fractions A/B/C: {dwell['A']:.3f} / {dwell['B']:.3f} / {dwell['C']:.3f}")

    # Step 5: Dynamics
    print("\n🔬 Step 5: Simulating the Cavity...")
    print("-" * 40)
    closed = evolve_closed(sched, dim=dim, n_target=N_TARGET, output_points=51)
    lossy = evolve_lindblad(sched, loss=LossModel(1e-3), dim=dim, n_target=N_TARGET, output_points=51,
                            snapshot_fractions=(1.0,))
    print(f"{'Model':<20} {'Fidelity':<10} {'Tail':<10}")
    print("-" * 40)
    print(f"{'closed':<20} {closed.final_fidelity:<10.5f} {closed.tail_series[-1]:<10.2e}")
    print(f"{'kappa = 1e-3':<20} {lossy.final_fidelity:<10.5f} {lossy.tail_series[-1]:<10.2e}")

    final = eigensystem(kerr_hamiltonian(DrivePoint(spec.delta_f, 0.0), dim), DrivePoint(spec.delta_f, 0.0))
    print(f"✅ Ground energy at delta_f: {final.energies[0]:.4f}")

    # Step 6: Wigner function of the final state
    print("\n🎨 Step 6: Wigner Function...")
    print("-" * 40)
    grid = wigner_grid(lossy.snapshots[1.0], resolution=61)
    expected = (-1) ** N_TARGET * 2 / math.pi
    print(f"✅ W(0, 0) = {grid.value_at(0.0, 0.0):.4f} (ideal |{N_TARGET}>: {expected:.4f})")
    print(f"✅ Most negative value: {grid.min_value:.4f}, integral {grid.integral():.4f}")

    print("\n🏆 Demo complete. Use `python -m harness --help` for the full pipeline.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
