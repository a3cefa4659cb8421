import copy
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from baldwin_nk import strategies as S
from baldwin_nk.genetics import CrossoverKind, draw_distinct_loci, hamming
from baldwin_nk.landscape import NkLandscape, fitness, generate_landscape, genome_str, global_optimum


def k0(*tables):
    return NkLandscape(len(tables), 0, np.zeros((len(tables), 0)), tables)


def state(*genomes, stored):
    return S.SpeciesState(tuple(np.array([int(c) for c in g], dtype=np.uint8) for g in genomes), stored)


def rng(seed=0):
    return np.random.default_rng(seed)


ALL_CONFIGS = [
    S.Baseline(), S.BaldwinLearning(1), S.BaldwinLearning(4, 0.25, 2), S.Endomitosis(2), S.Endomitosis(4),
    S.Endomitosis(8), S.Syngamy(), S.TwoStepMeiosis(), S.TwoStepMeiosis(CrossoverKind.UNIFORM),
    S.TwoStepMeiosis(CrossoverKind.NONE, S.RandomDominant()), S.TwoStepMeiosis(dominance=S.HaploidWeighted(0.5), asexual_ratio=3),
    S.AsexualDiploid(), S.AsexualDiploid(True),
]


# -- evaluate_cell -------------------------------------------------------------

def test_average_cell():
    land = k0([0.4, 0.6])
    assert S.evaluate_cell([np.array([0]), np.array([1])], land, S.Average(), rng()) == pytest.approx(0.5)


def test_haploid_weighted_cell():
    land = k0([0.4, 0.6])
    cell = [np.array([0], np.uint8), np.array([1], np.uint8)]
    for seed in range(20):
        r = rng(seed)
        drawn = int(copy.deepcopy(r).integers(0, 2))
        got = S.evaluate_cell(cell, land, S.HaploidWeighted(0.5), r)
        # h1 drawn: 0.5 * 0.4 + 0.5 * mean(0.4, 0.6)
        assert got == pytest.approx(0.45 if drawn == 0 else 0.55)


def test_random_dominant_frequency():
    land = k0([0.4, 0.6])
    cell = [np.array([0], np.uint8), np.array([1], np.uint8)]
    r = rng(7)
    draws = 100_000
    hits = sum(S.evaluate_cell(cell, land, S.RandomDominant(), r) == 0.4 for _ in range(draws))
    assert abs(hits - draws / 2) < 5 * np.sqrt(draws / 4)


@pytest.mark.parametrize("dom", [S.Average(), S.RandomDominant(), S.HaploidWeighted(0.3)])
def test_singleton_cell(dom):
    land = generate_landscape(10, 3, 1)
    g = rng().integers(0, 2, 10).astype(np.uint8)
    assert S.evaluate_cell([g], land, dom, rng()) == pytest.approx(fitness(land, g))


def test_empty_cell():
    with pytest.raises(ValueError):
        S.evaluate_cell([], k0([0.1, 0.2]), S.Average(), rng())


def test_haploid_weight_range():
    with pytest.raises(ValueError):
        S.HaploidWeighted(1.5)


# -- baseline -------------------------------------------------------------------

def test_baseline_moves_on_improvement():
    new = S.baseline_step(state("0", stored=0.5), k0([0.5, 0.6]), rng())
    assert genome_str(new.genomes[0]) == "1" and new.stored_fitness == 0.6


def test_baseline_rejects_tie():
    old = state("0", stored=0.5)
    assert S.baseline_step(old, k0([0.5, 0.5]), rng()) is old


@pytest.mark.parametrize("seed", range(10))
def test_baseline_reaches_k0_optimum(seed):
    land = generate_landscape(10, 0, seed)
    r = rng(seed + 100)
    st_ = S.initial_state(S.Baseline(), r.integers(0, 2, 10), land)
    for _ in range(5000):
        st_ = S.baseline_step(st_, land, r)
    assert st_.stored_fitness == pytest.approx(global_optimum(land)[1], abs=1e-12)


# -- baldwin --------------------------------------------------------------------

def test_baldwin_accepts_averaged_score():
    # f(one flip) = 0.45, f(both flipped) = 0.65
    land = k0([0.25, 0.65], [0.25, 0.65])
    new = S.baldwin_step(state("00", stored=0.5), land, 1, 0.5, rng())
    assert new.stored_fitness == pytest.approx(0.55)
    assert hamming(new.genomes[0], np.zeros(2)) == 1


def test_baldwin_rejects_low_score():
    land = k0([0.4, 0.5], [0.4, 0.5])  # f(m)=0.45, f(l)=0.5 -> 0.475
    old = state("00", stored=0.5)
    assert S.baldwin_step(old, land, 1, 0.5, rng()) is old


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 19), st.integers(0, 2**32))
def test_learning_pair_distance(L, seed):
    g = rng(seed).integers(0, 2, 20).astype(np.uint8)
    m, learned = S.learning_pair(g, 20, L, rng(seed))
    assert hamming(g, m) == 1
    assert hamming(m, learned) == L
    assert hamming(g, learned) == L + 1


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(0, 2**32))
def test_baldwin_score_between_parts(w, seed):
    land = generate_landscape(12, 4, seed)
    g = rng(seed).integers(0, 2, 12).astype(np.uint8)
    m, learned = S.learning_pair(g, 12, 3, rng(seed))
    fm, fl = fitness(land, m), fitness(land, learned)
    score = (1 - w) * fm + w * fl
    assert min(fm, fl) - 1e-12 <= score <= max(fm, fl) + 1e-12


def test_baldwin_L_range():
    with pytest.raises(ValueError):
        S.baldwin_step(state("000", stored=0.0), generate_landscape(3, 0, 0), 3, 0.5, rng())


def test_baldwin_moves_to_mutant_not_learned():
    land = generate_landscape(20, 6, 3)
    r = rng(3)
    st_ = S.initial_state(S.Baseline(), r.integers(0, 2, 20), land)
    for _ in range(200):
        replay = copy.deepcopy(r)
        m, learned = S.learning_pair(st_.genomes[0], 20, 5, replay)
        new = S.baldwin_step(st_, land, 5, 0.5, r)
        if new is not st_:
            assert np.array_equal(new.genomes[0], m)
            assert new.stored_fitness == pytest.approx(0.5 * fitness(land, m) + 0.5 * fitness(land, learned))
        st_ = new


# -- endomitosis ----------------------------------------------------------------

@pytest.mark.parametrize("ploidy,distances", [(2, [0, 1]), (4, [0, 1, 1, 2]), (8, [0, 1, 1, 1, 2, 2, 2, 3])])
def test_endomitosis_distances(ploidy, distances):
    for seed in range(50):
        base = rng(seed).integers(0, 2, 20).astype(np.uint8)
        members = S.endomitosis_members(base, 20, ploidy, rng(seed))
        assert len(members) == ploidy
        m = members[0]
        assert hamming(base, m) == 1
        assert sorted(hamming(m, g) for g in members) == distances
        assert all(hamming(base, g) == hamming(m, g) + 1 for g in members)


def test_endomitosis_step_adopts_cell():
    land = generate_landscape(20, 4, 1)
    r = rng(1)
    st_ = S.initial_state(S.Endomitosis(4), r.integers(0, 2, 20), land)
    for _ in range(300):
        replay = copy.deepcopy(r)
        base = st_.genomes[st_.parent]
        members = S.endomitosis_members(base, 20, 4, replay)
        score = sum(fitness(land, g) for g in members) / 4
        new = S.endomitosis_step(st_, land, 4, r)
        if score > st_.stored_fitness:
            assert new.ploidy == 4 and new.stored_fitness == score
            assert all(np.array_equal(a, b) for a, b in zip(new.genomes, members))
            assert 0 <= new.parent < 4
        else:
            assert new is st_
        st_ = new


def test_endomitosis_ploidy2_score_is_pair_mean():
    land = generate_landscape(20, 2, 5)
    base = rng(0).integers(0, 2, 20).astype(np.uint8)
    members = S.endomitosis_members(base, 20, 2, rng(1))
    assert hamming(*members) == 1
    assert S.evaluate_cell(members, land, S.Average(), rng()) == pytest.approx(
        (fitness(land, members[0]) + fitness(land, members[1])) / 2)


def test_endomitosis_bad_ploidy():
    with pytest.raises(ValueError):
        S.endomitosis_step(state("0000", stored=0.0), generate_landscape(4, 0, 0), 3, rng())


# -- syngamy --------------------------------------------------------------------

def _syngamy_candidate(st_, n, r):
    src = [int(r.integers(0, 2)), int(r.integers(0, 2))]
    loci = draw_distinct_loci(n, 2, (), r)
    return src, loci


def test_syngamy_from_identical_parents():
    land = generate_landscape(20, 3, 2)
    p = rng(5).integers(0, 2, 20).astype(np.uint8)
    st_ = S.SpeciesState((p, p.copy()), 0.0)
    for seed in range(30):
        new = S.syngamy_step(st_, land, rng(seed))
        a, b = new.genomes
        assert hamming(a, p) == hamming(b, p) == 1 and hamming(a, b) == 2


@pytest.mark.parametrize("offset,moves", [(-0.02, True), (0.0, False), (0.02, False)])
def test_syngamy_acceptance_rule(offset, moves):
    land = generate_landscape(20, 3, 2)
    r = rng(9)
    g1, g2 = r.integers(0, 2, 20).astype(np.uint8), r.integers(0, 2, 20).astype(np.uint8)
    replay = copy.deepcopy(r)
    src, loci = _syngamy_candidate(None, 20, replay)
    pair = [g.copy() for g in ((g1, g2)[src[0]], (g1, g2)[src[1]])]
    pair[0][loci[0]] ^= 1
    pair[1][loci[1]] ^= 1
    score = (fitness(land, pair[0]) + fitness(land, pair[1])) / 2
    old = S.SpeciesState((g1, g2), score + offset)
    new = S.syngamy_step(old, land, r)
    assert (new is not old) == moves
    for g in new.genomes:
        assert min(hamming(g, g1), hamming(g, g2)) <= 1


def test_syngamy_wrong_ploidy():
    with pytest.raises(S.ConfigurationError):
        S.syngamy_step(state("000", stored=0.0), generate_landscape(3, 0, 0), rng())


# -- meiosis --------------------------------------------------------------------

def test_choose_two_of_four_uniform():
    r = rng(11)
    draws = 100_000
    counts = Counter(frozenset(S.choose_two_of_four(r)) for _ in range(draws))
    assert len(counts) == 6 and all(len(c) == 2 for c in counts)
    p = 1 / 6
    for c in counts.values():
        assert abs(c - draws * p) < 5 * np.sqrt(draws * p * (1 - p))


def test_meiosis_identical_parents_no_crossover():
    land = generate_landscape(20, 3, 4)
    p = rng(1).integers(0, 2, 20).astype(np.uint8)
    st_ = S.SpeciesState((p, p.copy()), 0.0)
    for seed in range(50):
        pool = S.meiosis_gametes(st_, 20, CrossoverKind.NONE, rng(seed))
        assert np.array_equal(pool[0], p) and np.array_equal(pool[1], p)
        assert hamming(pool[2], p) == hamming(pool[3], p) == 1
        new = S.meiosis_two_step(st_, land, CrossoverKind.NONE, S.Average(), rng(seed))
        assert all(hamming(g, p) <= 1 for g in new.genomes)


def test_meiosis_single_point_provenance():
    r = rng(2)
    p1, p2 = r.integers(0, 2, 20).astype(np.uint8), r.integers(0, 2, 20).astype(np.uint8)
    st_ = S.SpeciesState((p1, p2), 0.0)
    for seed in range(50):
        replay = rng(seed)
        loci = draw_distinct_loci(20, 2, (), replay)
        cut = int(replay.integers(1, 20))
        m1, m2 = p1.copy(), p2.copy()
        m1[loci[0]] ^= 1
        m2[loci[1]] ^= 1
        pool = S.meiosis_gametes(st_, 20, CrossoverKind.SINGLE_POINT, rng(seed))
        for i in range(20):
            assert pool[2][i] == (m1[i] if i < cut else m2[i])
            assert pool[3][i] == (m2[i] if i < cut else m1[i])


def test_meiosis_wrong_ploidy():
    with pytest.raises(S.ConfigurationError):
        S.meiosis_two_step(state("000", stored=0.0), generate_landscape(3, 0, 0), CrossoverKind.NONE, S.Average(), rng())


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_random_dominant_acceptance(seed):
    land = generate_landscape(16, 5, seed % 1000)
    r = rng(seed)
    p1, p2 = r.integers(0, 2, 16).astype(np.uint8), r.integers(0, 2, 16).astype(np.uint8)
    stored = float(r.random())
    old = S.SpeciesState((p1, p2), stored)
    replay = copy.deepcopy(r)
    pool = S.meiosis_gametes(old, 16, CrossoverKind.SINGLE_POINT, replay)
    i, j = S.choose_two_of_four(replay)
    fa, fb = fitness(land, pool[i]), fitness(land, pool[j])
    new = S.meiosis_two_step(old, land, CrossoverKind.SINGLE_POINT, S.RandomDominant(), r)
    if fa > stored and fb > stored:
        assert new is not old
    if fa <= stored and fb <= stored:
        assert new is old


# -- asexual diploid ------------------------------------------------------------

@pytest.mark.parametrize("best3", [False, True])
def test_asexual_candidates(best3):
    land = generate_landscape(20, 5, 8)
    r = rng(8)
    g1, g2 = r.integers(0, 2, 20).astype(np.uint8), r.integers(0, 2, 20).astype(np.uint8)
    for _ in range(100):
        old = S.SpeciesState((g1, g2), 0.0)
        replay = copy.deepcopy(r)
        loci = draw_distinct_loci(20, 2, (), replay)
        o1, o2 = g1.copy(), g2.copy()
        o1[loci[0]] ^= 1
        o2[loci[1]] ^= 1
        f1, f2 = fitness(land, o1), fitness(land, o2)
        new = S.asexual_diploid_step(old, land, best3, r)
        assert new.ploidy == 2
        if best3:
            options = {f1: (o1, o1), (f1 + f2) / 2: (o1, o2), f2: (o2, o2)}
            best = max(f1, (f1 + f2) / 2, f2)
            assert new.stored_fitness == best
            assert all(np.array_equal(a, b) for a, b in zip(new.genomes, options[best]))
        else:
            assert new.stored_fitness == (f1 + f2) / 2
            assert hamming(new.genomes[0], g1) == hamming(new.genomes[1], g2) == 1
        g1, g2 = r.integers(0, 2, 20).astype(np.uint8), r.integers(0, 2, 20).astype(np.uint8)


def test_asexual_best_of_three_arithmetic():
    # flipping gene 0 scores (0.8 + 0.6) / 2 = 0.7, flipping gene 1 scores (0.3 + 0.3) / 2 = 0.3
    land = k0([0.3, 0.8], [0.6, 0.3])
    g = np.zeros(2, np.uint8)
    # pick a seed whose two draws are loci 0 then 1
    seed = next(s for s in range(1000) if draw_distinct_loci(2, 2, (), rng(s)) == [0, 1])
    new = S.asexual_diploid_step(S.SpeciesState((g, g.copy()), 0.0), land, True, rng(seed))
    assert new.stored_fitness == pytest.approx(0.7)
    assert genome_str(new.genomes[0]) == genome_str(new.genomes[1]) == "10"
    plain = S.asexual_diploid_step(S.SpeciesState((g, g.copy()), 0.0), land, False, rng(seed))
    assert plain.stored_fitness == pytest.approx(0.5)


# -- scheduling -----------------------------------------------------------------

def test_learning_period_schedule():
    cfg = S.BaldwinLearning(2, 0.5, 2)
    assert [S.is_learning_generation(cfg, g) for g in range(6)] == [True, False] * 3


def test_ratio_schedule():
    cfg = S.TwoStepMeiosis(asexual_ratio=7)
    assert [S.is_sexual_generation(cfg, g) for g in range(16)] == ([False] * 7 + [True]) * 2
    assert all(S.is_sexual_generation(S.TwoStepMeiosis(), g) for g in range(5))


def test_apply_generation_dispatch():
    land = generate_landscape(20, 4, 0)
    cfg = S.TwoStepMeiosis(asexual_ratio=2)
    st_ = S.initial_state(cfg, rng(0).integers(0, 2, 20), land)
    r = rng(1)
    for gen in range(12):
        replay = copy.deepcopy(r)
        if gen % 3 == 2:
            expect = S.meiosis_two_step(st_, land, cfg.crossover, cfg.dominance, replay)
        else:
            expect = S.asexual_diploid_step(st_, land, False, replay)
        st_ = S.apply_generation(st_, cfg, land, gen, r)
        assert st_.stored_fitness == expect.stored_fitness
        assert all(np.array_equal(a, b) for a, b in zip(st_.genomes, expect.genomes))


def test_apply_generation_mismatch():
    land = generate_landscape(10, 2, 0)
    with pytest.raises(S.ConfigurationError):
        S.apply_generation(state("0" * 10, stored=0.0), S.Syngamy(), land, 0, rng())
    with pytest.raises(S.ConfigurationError):
        S.apply_generation(state("0" * 10, "1" * 10, stored=0.0), S.Baseline(), land, 0, rng())


@pytest.mark.parametrize("cfg", ALL_CONFIGS, ids=repr)
def test_constant_landscape_never_accepts(cfg):
    land = NkLandscape(10, 2, generate_landscape(10, 2, 0).neighbors, np.full((10, 8), 0.42))
    st_ = S.initial_state(cfg, rng(0).integers(0, 2, 10), land)
    first = st_
    r = rng(1)
    for gen in range(200):
        st_ = S.apply_generation(st_, cfg, land, gen, r)
    assert st_ is first and st_.stored_fitness == pytest.approx(0.42)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ALL_CONFIGS), st.integers(8, 24), st.integers(0, 7), st.integers(0, 2**32))
def test_stored_fitness_monotone(cfg, n, k, seed):
    land = generate_landscape(n, k, seed)
    r = rng(seed)
    st_ = S.initial_state(cfg, r.integers(0, 2, n), land)
    prev = st_.stored_fitness
    for gen in range(60):
        st_ = S.apply_generation(st_, cfg, land, gen, r)
        assert st_.stored_fitness >= prev
        assert all(g.shape == (n,) and set(np.unique(g)) <= {0, 1} for g in st_.genomes)
        prev = st_.stored_fitness
