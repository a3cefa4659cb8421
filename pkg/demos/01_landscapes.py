"""
NK landscapes: ruggedness and the global optimum
================================================

Each gene of an NK genome contributes a value looked up from its own random
table, indexed by its allele and the alleles of K other genes.  With K=0 the
landscape has a single peak; raising K couples the genes and the surface
breaks into many local optima.
"""

import numpy as np

from baldwin_nk import NkLandscape, dumps, fitness, generate_landscape, global_optimum, loads

# A small landscape: 12 genes, each reading 2 neighbours.
land = generate_landscape(12, 2, seed=7)
print("neighbours of gene 0:", land.neighbors[0])
print("table of gene 0 has", land.tables.shape[1], "entries")

# Fitness is the mean of per-gene contributions, so it always lies in [0, 1].
genome = np.zeros(12, dtype=np.uint8)
print("fitness of the all-zero genome:", round(fitness(land, genome), 4))

# For small N the optimum can be found by enumerating all 2^N genomes.
best, value = global_optimum(land)
print("global optimum:", "".join(map(str, best)), round(value, 4))

# Count local optima (no single flip improves) as K rises.
def local_optima(land):
    n = land.n
    codes = np.arange(2**n)
    genomes = ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)
    fits = np.array([fitness(land, g) for g in genomes])
    neighbour_fits = np.stack([fits[codes ^ (1 << (n - 1 - i))] for i in range(n)], axis=1)
    return int((fits[:, None] >= neighbour_fits).all(axis=1).sum())

for k in (0, 2, 5, 9):
    print(f"K={k}: {local_optima(generate_landscape(10, k, seed=1))} local optima on N=10")

# Landscapes serialise to a plain text format and round-trip exactly.
text = dumps(land)
again = loads(text)
assert isinstance(again, NkLandscape) and again.same_as(land)
print(text.splitlines()[0])
