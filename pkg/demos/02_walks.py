"""
Adaptive walks under different life cycles
==========================================

A species is a single point on the landscape.  Every generation it proposes
a variant and keeps it only when the fitness selection sees is strictly
higher.  The regimes differ in what is proposed and in how that fitness is
scored: plain mutation, lifetime learning, endomitotic doubling, syngamy,
and two-step meiosis with recombination.
"""

from baldwin_nk import (
    AsexualDiploid,
    BaldwinLearning,
    Baseline,
    CrossoverKind,
    Endomitosis,
    RunConfig,
    Syngamy,
    TwoStepMeiosis,
    derive_seeds,
    run_walk,
)

N, K, GENERATIONS = 20, 6, 20_000

regimes = {
    "baseline": Baseline(),
    "learning L=3": BaldwinLearning(3),
    "endomitosis x2": Endomitosis(2),
    "syngamy": Syngamy(),
    "meiosis single": TwoStepMeiosis(CrossoverKind.SINGLE_POINT),
    "meiosis uniform": TwoStepMeiosis(CrossoverKind.UNIFORM),
    "asexual diploid": AsexualDiploid(),
}

# All regimes share the same landscape and starting genome.
landscape_seed, run_seed = derive_seeds(master_seed=3, landscape_index=0, run_index=0)

for label, strategy in regimes.items():
    config = RunConfig(N, K, strategy, GENERATIONS, landscape_seed, run_seed, trajectory_stride=5000)
    record = run_walk(config)
    path = "  ".join(f"{g}:{f:.3f}" for g, f in record.trajectory)
    print(f"{label:>16}  final {record.final_fitness:.4f}   {path}")

# The stored fitness never decreases: selection is elitist.
record = run_walk(RunConfig(N, K, BaldwinLearning(5), 2000, landscape_seed, run_seed, trajectory_stride=1))
fits = [f for _, f in record.trajectory]
assert all(b >= a for a, b in zip(fits, fits[1:]))
