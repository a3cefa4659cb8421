"""Variation operators on binary genomes.

Random draws follow a fixed protocol shared with :mod:`baldwin_nk.engine`:

* a locus is ``rng.integers(0, n)``, redrawn while it collides with an
  excluded or already chosen locus;
* a single-point cut is ``rng.integers(1, n)``;
* uniform crossover consumes one ``rng.random()`` per locus and swaps the
  alleles when the draw is below one half.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable

import numpy as np

from .landscape import Genome, as_genome

UNIFORM_SWAP_PROBABILITY = 0.5


class CrossoverKind(enum.Enum):
    NONE = "none"
    SINGLE_POINT = "single"
    UNIFORM = "uniform"


def flip_loci(genome, loci: Iterable[int]) -> Genome:
    """Return a copy of ``genome`` with every locus in ``loci`` complemented.

    Raises
    ------
    ValueError
        If a locus is out of range or repeated.
    """
    g = as_genome(genome).copy()
    loci = list(loci)
    if len(set(loci)) != len(loci):
        raise ValueError(f"mutation loci must be distinct, got {loci}")
    for locus in loci:
        if not 0 <= locus < g.shape[0]:
            raise ValueError(f"locus {locus} out of range [0, {g.shape[0]})")
        g[locus] ^= 1
    return g


def draw_distinct_loci(n: int, count: int, exclude: Iterable[int], rng: np.random.Generator) -> list[int]:
    """Draw ``count`` distinct loci uniformly from ``range(n)`` minus ``exclude``."""
    taken = set(exclude)
    if count < 0 or count + len(taken) > n:
        raise ValueError(f"cannot draw {count} distinct loci from n={n} with {len(taken)} excluded")
    loci: list[int] = []
    while len(loci) < count:
        locus = int(rng.integers(0, n))
        if locus not in taken:
            taken.add(locus)
            loci.append(locus)
    return loci


def _pair(a, b) -> tuple[Genome, Genome]:
    a, b = as_genome(a), as_genome(b)
    if a.shape != b.shape:
        raise ValueError(f"parent lengths differ: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def single_point_crossover(a, b, rng: np.random.Generator | None = None, cut: int | None = None) -> tuple[Genome, Genome]:
    """Swap the tails of ``a`` and ``b`` from ``cut`` onwards.

    ``cut`` is drawn uniformly from ``[1, n-1]`` when not given, so every
    event actually exchanges material.
    """
    a, b = _pair(a, b)
    n = a.shape[0]
    if cut is None:
        if rng is None:
            raise ValueError("either cut or rng is required")
        if n < 2:
            raise ValueError("single-point crossover needs n >= 2")
        cut = int(rng.integers(1, n))
    if not 1 <= cut <= n - 1:
        raise ValueError(f"cut must lie in [1, {n - 1}], got {cut}")
    return np.concatenate([a[:cut], b[cut:]]), np.concatenate([b[:cut], a[cut:]])


def uniform_crossover(a, b, rng: np.random.Generator) -> tuple[Genome, Genome]:
    """Exchange the alleles at each locus independently with probability 1/2."""
    a, b = _pair(a, b)
    c1, c2 = a.copy(), b.copy()
    for i in range(a.shape[0]):
        if rng.random() < UNIFORM_SWAP_PROBABILITY:
            c1[i], c2[i] = b[i], a[i]
    return c1, c2


def recombine(a, b, kind: CrossoverKind, rng: np.random.Generator) -> tuple[Genome, Genome]:
    if kind is CrossoverKind.NONE:
        a, b = _pair(a, b)
        return a.copy(), b.copy()
    if kind is CrossoverKind.SINGLE_POINT:
        return single_point_crossover(a, b, rng)
    return uniform_crossover(a, b, rng)


def hamming(a, b) -> int:
    return int(np.count_nonzero(as_genome(a) != as_genome(b)))
