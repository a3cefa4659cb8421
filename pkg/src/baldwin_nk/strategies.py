"""Generation steps for each reproduction regime of a converged species.

A species is a "population of size one": one to eight haploid genomes and the
fitness selection compares new candidates against.  Every step is elitist and
strict: a candidate replaces the state only if its fitness is greater than the
stored value.

These functions are the readable reference.  :mod:`baldwin_nk.engine` runs the
same regimes compiled and consumes the generator in the same order, so a walk
folded from these steps is bit-identical to an engine walk from the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .genetics import CrossoverKind, draw_distinct_loci, flip_loci, recombine
from .landscape import Genome, NkLandscape, as_genome, fitness

VALID_PLOIDY = (2, 4, 8)


class ConfigurationError(ValueError):
    """A strategy, state and landscape that do not fit together."""


# -- dominance -----------------------------------------------------------------

@dataclass(frozen=True)
class Average:
    """Cell fitness is the mean of its members' fitnesses."""


@dataclass(frozen=True)
class RandomDominant:
    """Cell fitness is that of one member picked uniformly at random."""


@dataclass(frozen=True)
class HaploidWeighted:
    """A share ``lam`` from one random member, the rest from the mean."""

    lam: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")


DominanceMode = Union[Average, RandomDominant, HaploidWeighted]


# -- strategy configurations --------------------------------------------------

@dataclass(frozen=True)
class Baseline:
    mode = "baseline"


@dataclass(frozen=True)
class BaldwinLearning:
    L: int
    weight: float = 0.5
    period: int = 1
    mode = "baldwin"

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if not 0.0 < self.weight <= 1.0:
            raise ValueError(f"weight must lie in (0, 1], got {self.weight}")
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")


@dataclass(frozen=True)
class Endomitosis:
    ploidy: int = 2
    mode = "endomitosis"

    def __post_init__(self) -> None:
        if self.ploidy not in VALID_PLOIDY:
            raise ValueError(f"ploidy must be one of {VALID_PLOIDY}, got {self.ploidy}")


@dataclass(frozen=True)
class Syngamy:
    mode = "syngamy"


@dataclass(frozen=True)
class TwoStepMeiosis:
    crossover: CrossoverKind = CrossoverKind.SINGLE_POINT
    dominance: DominanceMode = field(default_factory=Average)
    asexual_ratio: int = 0
    mode = "meiosis"

    def __post_init__(self) -> None:
        if self.asexual_ratio < 0:
            raise ValueError(f"asexual_ratio must be >= 0, got {self.asexual_ratio}")


@dataclass(frozen=True)
class AsexualDiploid:
    best_of_three: bool = False
    mode = "asexual"


StrategyConfig = Union[Baseline, BaldwinLearning, Endomitosis, Syngamy, TwoStepMeiosis, AsexualDiploid]


def genome_count(config: StrategyConfig) -> int:
    """Number of genomes a species starts with under ``config``."""
    return 2 if isinstance(config, (Syngamy, TwoStepMeiosis, AsexualDiploid)) else 1


def validate(config: StrategyConfig, n: int) -> None:
    """Check that ``config`` can run on genomes of length ``n``."""
    if isinstance(config, BaldwinLearning) and config.L > n - 1:
        raise ConfigurationError(f"L={config.L} needs n > L, got n={n}")
    if isinstance(config, Endomitosis) and config.ploidy > n:
        raise ConfigurationError(f"ploidy {config.ploidy} needs n >= {config.ploidy} distinct loci, got n={n}")
    if genome_count(config) == 2 and n < 2:
        raise ConfigurationError(f"{config.mode} needs n >= 2")
    if isinstance(config, TwoStepMeiosis) and config.crossover is CrossoverKind.SINGLE_POINT and n < 2:
        raise ConfigurationError("single-point crossover needs n >= 2")


# -- state --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpeciesState:
    """Current genomes of the species and the fitness selection acts on.

    ``parent`` indexes the member an endomitotic species reduces to; the next
    endomitosis event starts from that haploid.  Other regimes ignore it.
    """

    genomes: tuple[Genome, ...]
    stored_fitness: float
    parent: int = 0

    def __post_init__(self) -> None:
        if len(self.genomes) not in (1, 2, 4, 8):
            raise ValueError(f"a species holds 1, 2, 4 or 8 genomes, got {len(self.genomes)}")
        if len({g.shape[0] for g in self.genomes}) != 1:
            raise ValueError("all genomes must share one length")
        if not 0.0 <= self.stored_fitness <= 1.0:
            raise ValueError(f"stored_fitness must lie in [0, 1], got {self.stored_fitness}")

    @property
    def ploidy(self) -> int:
        return len(self.genomes)


def initial_state(config: StrategyConfig, genome, landscape: NkLandscape) -> SpeciesState:
    """Start a species at ``genome`` (duplicated for two-genome regimes).

    The starting stored fitness is the plain fitness of ``genome``.
    """
    g = as_genome(genome, landscape.n).copy()
    genomes = tuple(g.copy() for _ in range(genome_count(config)))
    return SpeciesState(genomes, fitness(landscape, g))


def _require_ploidy(state: SpeciesState, ploidy: int, step: str) -> None:
    if state.ploidy != ploidy:
        raise ConfigurationError(f"{step} needs {ploidy} genome(s), state has {state.ploidy}")


# -- evaluation ---------------------------------------------------------------

def evaluate_cell(genomes, landscape: NkLandscape, dominance: DominanceMode, rng: np.random.Generator) -> float:
    """Fitness of a cell made of ``genomes`` under ``dominance``.

    ``RandomDominant`` and ``HaploidWeighted`` draw their member with
    ``rng.integers(0, len(genomes))`` at every call, including singletons.
    """
    if len(genomes) == 0:
        raise ValueError("a cell needs at least one genome")
    fits = [fitness(landscape, g) for g in genomes]
    return combine_fitnesses(fits, dominance, rng)


def combine_fitnesses(fits: list[float], dominance: DominanceMode, rng: np.random.Generator) -> float:
    mean = sum(fits) / len(fits)
    if isinstance(dominance, Average):
        return mean
    pick = fits[int(rng.integers(0, len(fits)))]
    if isinstance(dominance, RandomDominant):
        return pick
    return (1.0 - dominance.lam) * mean + dominance.lam * pick


# -- steps --------------------------------------------------------------------

def baseline_step(state: SpeciesState, landscape: NkLandscape, rng: np.random.Generator) -> SpeciesState:
    """Flip one random gene; move there on strict improvement."""
    _require_ploidy(state, 1, "baseline_step")
    (locus,) = draw_distinct_loci(landscape.n, 1, (), rng)
    mutant = flip_loci(state.genomes[0], [locus])
    f = fitness(landscape, mutant)
    if f > state.stored_fitness:
        return SpeciesState((mutant,), f)
    return state


def learning_pair(genome, n: int, L: int, rng: np.random.Generator) -> tuple[Genome, Genome]:
    """One-flip mutant of ``genome`` and that mutant with ``L`` more distinct flips."""
    (first,) = draw_distinct_loci(n, 1, (), rng)
    mutant = flip_loci(genome, [first])
    return mutant, flip_loci(mutant, draw_distinct_loci(n, L, (first,), rng))


def baldwin_step(state: SpeciesState, landscape: NkLandscape, L: int, w: float, rng: np.random.Generator) -> SpeciesState:
    """Mutation followed by ``L`` further random "learning" flips.

    The candidate is scored ``(1 - w) * f(mutant) + w * f(learned)``.  On
    acceptance the species moves to the mutant with that score; the learned
    configuration is never inherited.
    """
    _require_ploidy(state, 1, "baldwin_step")
    if not 1 <= L <= landscape.n - 1:
        raise ValueError(f"L must lie in [1, {landscape.n - 1}], got {L}")
    mutant, learned = learning_pair(state.genomes[0], landscape.n, L, rng)
    score = (1.0 - w) * fitness(landscape, mutant) + w * fitness(landscape, learned)
    if score > state.stored_fitness:
        return SpeciesState((mutant,), score)
    return state


def endomitosis_members(base, n: int, ploidy: int, rng: np.random.Generator) -> list[Genome]:
    """Mutate ``base`` once, then double by copy-and-flip until ``ploidy`` genomes.

    Each round walks the current members in order and appends a copy of each
    with one fresh locus flipped; all loci of the event are distinct.
    """
    (first,) = draw_distinct_loci(n, 1, (), rng)
    used = {first}
    members = [flip_loci(base, [first])]
    while len(members) < ploidy:
        for g in list(members):
            (locus,) = draw_distinct_loci(n, 1, used, rng)
            used.add(locus)
            members.append(flip_loci(g, [locus]))
    return members


def endomitosis_step(state: SpeciesState, landscape: NkLandscape, ploidy: int, rng: np.random.Generator) -> SpeciesState:
    if ploidy not in VALID_PLOIDY:
        raise ValueError(f"ploidy must be one of {VALID_PLOIDY}, got {ploidy}")
    if ploidy > landscape.n:
        raise ValueError(f"ploidy {ploidy} needs n >= {ploidy}")
    base = state.genomes[state.parent]
    members = endomitosis_members(base, landscape.n, ploidy, rng)
    score = evaluate_cell(members, landscape, Average(), rng)
    if score > state.stored_fitness:
        return SpeciesState(tuple(members), score, int(rng.integers(0, ploidy)))
    return state


def syngamy_step(state: SpeciesState, landscape: NkLandscape, rng: np.random.Generator) -> SpeciesState:
    """Each offspring copies a random parent genome and flips one gene."""
    _require_ploidy(state, 2, "syngamy_step")
    src = [int(rng.integers(0, 2)), int(rng.integers(0, 2))]
    loci = draw_distinct_loci(landscape.n, 2, (), rng)
    pair = (flip_loci(state.genomes[src[0]], [loci[0]]), flip_loci(state.genomes[src[1]], [loci[1]]))
    score = evaluate_cell(pair, landscape, Average(), rng)
    if score > state.stored_fitness:
        return SpeciesState(pair, score)
    return state


def choose_two_of_four(rng: np.random.Generator) -> tuple[int, int]:
    """Uniform unordered pair of distinct indices from ``range(4)``."""
    i = int(rng.integers(0, 4))
    j = int(rng.integers(0, 3))
    return i, j + (j >= i)


def meiosis_gametes(state: SpeciesState, n: int, crossover: CrossoverKind, rng: np.random.Generator) -> list[Genome]:
    """Gamete pool ``[p1, p2, r1, r2]`` of a two-step meiosis."""
    p1, p2 = state.genomes
    loci = draw_distinct_loci(n, 2, (), rng)
    m1, m2 = flip_loci(p1, [loci[0]]), flip_loci(p2, [loci[1]])
    r1, r2 = recombine(m1, m2, crossover, rng)
    return [p1, p2, r1, r2]


def meiosis_two_step(
    state: SpeciesState,
    landscape: NkLandscape,
    crossover: CrossoverKind,
    dominance: DominanceMode,
    rng: np.random.Generator,
) -> SpeciesState:
    """Parents and their recombined one-mutants form four gametes; two fuse."""
    _require_ploidy(state, 2, "meiosis_two_step")
    pool = meiosis_gametes(state, landscape.n, crossover, rng)
    i, j = choose_two_of_four(rng)
    pair = (pool[i].copy(), pool[j].copy())
    score = evaluate_cell(pair, landscape, dominance, rng)
    if score > state.stored_fitness:
        return SpeciesState(pair, score)
    return state


def asexual_diploid_step(state: SpeciesState, landscape: NkLandscape, best_of_three: bool, rng: np.random.Generator) -> SpeciesState:
    """Mutate each haploid of the diploid once; never reduce to haploid.

    With ``best_of_three`` the pairings ``(o1, o1)``, ``(o1, o2)`` and
    ``(o2, o2)`` are all scored and the first fittest is the candidate.
    """
    _require_ploidy(state, 2, "asexual_diploid_step")
    loci = draw_distinct_loci(landscape.n, 2, (), rng)
    o1 = flip_loci(state.genomes[0], [loci[0]])
    o2 = flip_loci(state.genomes[1], [loci[1]])
    f1, f2 = fitness(landscape, o1), fitness(landscape, o2)
    pair, score = (o1, o2), (f1 + f2) / 2.0
    if best_of_three:
        # max() keeps the first of equal scores
        pair, score = max(
            [((o1, o1.copy()), f1), ((o1, o2), score), ((o2, o2.copy()), f2)],
            key=lambda c: c[1],
        )
    if score > state.stored_fitness:
        return SpeciesState(pair, score)
    return state


def is_sexual_generation(config: TwoStepMeiosis, generation_index: int) -> bool:
    ratio = config.asexual_ratio
    return generation_index % (ratio + 1) == ratio


def is_learning_generation(config: BaldwinLearning, generation_index: int) -> bool:
    return generation_index % config.period == 0


def apply_generation(
    state: SpeciesState,
    config: StrategyConfig,
    landscape: NkLandscape,
    generation_index: int,
    rng: np.random.Generator,
) -> SpeciesState:
    """Advance the species by one generation under ``config``."""
    expected = genome_count(config)
    if isinstance(config, Endomitosis):
        if state.ploidy not in (1, config.ploidy):
            raise ConfigurationError(f"endomitosis({config.ploidy}) cannot step a state of {state.ploidy} genomes")
    elif state.ploidy != expected:
        raise ConfigurationError(f"{config.mode} needs {expected} genome(s), state has {state.ploidy}")

    if isinstance(config, Baseline):
        return baseline_step(state, landscape, rng)
    if isinstance(config, BaldwinLearning):
        if is_learning_generation(config, generation_index):
            return baldwin_step(state, landscape, config.L, config.weight, rng)
        return baseline_step(state, landscape, rng)
    if isinstance(config, Endomitosis):
        return endomitosis_step(state, landscape, config.ploidy, rng)
    if isinstance(config, Syngamy):
        return syngamy_step(state, landscape, rng)
    if isinstance(config, TwoStepMeiosis):
        if is_sexual_generation(config, generation_index):
            return meiosis_two_step(state, landscape, config.crossover, config.dominance, rng)
        return asexual_diploid_step(state, landscape, False, rng)
    if isinstance(config, AsexualDiploid):
        return asexual_diploid_step(state, landscape, config.best_of_three, rng)
    raise ConfigurationError(f"unknown strategy {config!r}")
