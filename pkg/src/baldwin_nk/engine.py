"""Compiled walk kernels.

The kernels replay :mod:`baldwin_nk.strategies` generation by generation,
making the same generator calls in the same order and summing fitness in
the same order.  ``run_walk_compiled`` therefore returns exactly what
folding ``apply_generation`` would, only a few hundred times faster.
"""

from __future__ import annotations

import numba
import numpy as np

from .genetics import CrossoverKind
from .landscape import NkLandscape, as_genome
from .strategies import (
    AsexualDiploid,
    Average,
    BaldwinLearning,
    Baseline,
    Endomitosis,
    HaploidWeighted,
    RandomDominant,
    StrategyConfig,
    Syngamy,
    TwoStepMeiosis,
    genome_count,
    validate,
)

BASELINE, BALDWIN, ENDOMITOSIS, SYNGAMY, MEIOSIS, ASEXUAL = range(6)
_CROSSOVER_CODE = {CrossoverKind.NONE: 0, CrossoverKind.SINGLE_POINT: 1, CrossoverKind.UNIFORM: 2}

# integer parameter slots
_I_L, _I_PERIOD, _I_PLOIDY, _I_CROSS, _I_DOM, _I_RATIO, _I_BEST3 = range(7)
# float parameter slots
_F_WEIGHT, _F_LAM = range(2)


def encode(config: StrategyConfig) -> tuple[int, np.ndarray, np.ndarray]:
    """Flatten a strategy into ``(mode code, int params, float params)``."""
    ip = np.zeros(7, dtype=np.int64)
    fp = np.zeros(2, dtype=np.float64)
    ip[_I_PERIOD] = 1
    if isinstance(config, Baseline):
        return BASELINE, ip, fp
    if isinstance(config, BaldwinLearning):
        ip[_I_L], ip[_I_PERIOD] = config.L, config.period
        fp[_F_WEIGHT] = config.weight
        return BALDWIN, ip, fp
    if isinstance(config, Endomitosis):
        ip[_I_PLOIDY] = config.ploidy
        return ENDOMITOSIS, ip, fp
    if isinstance(config, Syngamy):
        return SYNGAMY, ip, fp
    if isinstance(config, TwoStepMeiosis):
        ip[_I_CROSS] = _CROSSOVER_CODE[config.crossover]
        ip[_I_RATIO] = config.asexual_ratio
        dom = config.dominance
        if isinstance(dom, Average):
            ip[_I_DOM] = 0
        elif isinstance(dom, RandomDominant):
            ip[_I_DOM] = 1
        elif isinstance(dom, HaploidWeighted):
            ip[_I_DOM] = 2
            fp[_F_LAM] = dom.lam
        return MEIOSIS, ip, fp
    if isinstance(config, AsexualDiploid):
        ip[_I_BEST3] = int(config.best_of_three)
        return ASEXUAL, ip, fp
    raise TypeError(f"unknown strategy {config!r}")


@numba.njit(cache=True)
def _fitness(g, nbrs, tables):
    n, k = nbrs.shape
    total = 0.0
    for i in range(n):
        idx = np.int64(g[i])
        for j in range(k):
            idx = (idx << 1) | np.int64(g[nbrs[i, j]])
        total += tables[i, idx]
    return total / n


@numba.njit(cache=True)
def _draw_locus(rng, n, used, nused):
    # rejection against the loci already taken in this event
    while True:
        locus = rng.integers(0, n)
        clash = False
        for u in range(nused):
            if used[u] == locus:
                clash = True
                break
        if not clash:
            used[nused] = locus
            return locus


@numba.njit(cache=True)
def _walk(code, ip, fp, nbrs, tables, init, stored, rng, generations, stride):
    n = init.shape[0]
    genomes = np.zeros((8, n), dtype=np.uint8)
    cand = np.zeros((8, n), dtype=np.uint8)
    pool = np.zeros((4, n), dtype=np.uint8)
    fits = np.zeros(8)
    used = np.zeros(16, dtype=np.int64)
    count = 2 if code >= SYNGAMY else 1
    for c in range(count):
        genomes[c, :] = init
    parent = 0

    nsamp = 0
    if stride > 0:
        nsamp = 1 + generations // stride + (1 if generations % stride else 0)
    traj_gen = np.zeros(nsamp, dtype=np.int64)
    traj_fit = np.zeros(nsamp)
    s = 0
    if stride > 0:
        traj_gen[0] = 0
        traj_fit[0] = stored
        s = 1

    L = ip[_I_L]
    period = ip[_I_PERIOD]
    ploidy = ip[_I_PLOIDY]
    cross = ip[_I_CROSS]
    dom = ip[_I_DOM]
    ratio = ip[_I_RATIO]
    best3 = ip[_I_BEST3]
    weight = fp[_F_WEIGHT]
    lam = fp[_F_LAM]

    for gen in range(generations):
        mode = code
        if code == BALDWIN and gen % period != 0:
            mode = BASELINE
        if code == MEIOSIS and gen % (ratio + 1) != ratio:
            mode = ASEXUAL

        if mode == BASELINE:
            locus = rng.integers(0, n)
            genomes[0, locus] ^= 1
            f = _fitness(genomes[0], nbrs, tables)
            if f > stored:
                stored = f
            else:
                genomes[0, locus] ^= 1

        elif mode == BALDWIN:
            used[0] = rng.integers(0, n)
            for u in range(L):
                _draw_locus(rng, n, used, u + 1)
            cand[0, :] = genomes[0]
            cand[0, used[0]] ^= 1
            cand[1, :] = cand[0]
            for u in range(1, L + 1):
                cand[1, used[u]] ^= 1
            fm = _fitness(cand[0], nbrs, tables)
            fl = _fitness(cand[1], nbrs, tables)
            score = (1.0 - weight) * fm + weight * fl
            if score > stored:
                stored = score
                genomes[0, :] = cand[0]

        elif mode == ENDOMITOSIS:
            used[0] = rng.integers(0, n)
            cand[0, :] = genomes[parent]
            cand[0, used[0]] ^= 1
            m = 1
            while m < ploidy:
                snap = m
                for idx in range(snap):
                    locus = _draw_locus(rng, n, used, m)
                    cand[m, :] = cand[idx]
                    cand[m, locus] ^= 1
                    m += 1
            total = 0.0
            for c in range(ploidy):
                total += _fitness(cand[c], nbrs, tables)
            score = total / ploidy
            if score > stored:
                stored = score
                for c in range(ploidy):
                    genomes[c, :] = cand[c]
                count = ploidy
                parent = rng.integers(0, ploidy)

        elif mode == SYNGAMY:
            s0 = rng.integers(0, 2)
            s1 = rng.integers(0, 2)
            used[0] = rng.integers(0, n)
            _draw_locus(rng, n, used, 1)
            cand[0, :] = genomes[s0]
            cand[0, used[0]] ^= 1
            cand[1, :] = genomes[s1]
            cand[1, used[1]] ^= 1
            score = (_fitness(cand[0], nbrs, tables) + _fitness(cand[1], nbrs, tables)) / 2.0
            if score > stored:
                stored = score
                genomes[0, :] = cand[0]
                genomes[1, :] = cand[1]

        elif mode == MEIOSIS:
            used[0] = rng.integers(0, n)
            _draw_locus(rng, n, used, 1)
            pool[0, :] = genomes[0]
            pool[1, :] = genomes[1]
            pool[2, :] = genomes[0]
            pool[2, used[0]] ^= 1
            pool[3, :] = genomes[1]
            pool[3, used[1]] ^= 1
            if cross == 1:
                cut = rng.integers(1, n)
                for i in range(cut, n):
                    a = pool[2, i]
                    pool[2, i] = pool[3, i]
                    pool[3, i] = a
            elif cross == 2:
                for i in range(n):
                    if rng.random() < 0.5:
                        a = pool[2, i]
                        pool[2, i] = pool[3, i]
                        pool[3, i] = a
            i1 = rng.integers(0, 4)
            i2 = rng.integers(0, 3)
            if i2 >= i1:
                i2 += 1
            fits[0] = _fitness(pool[i1], nbrs, tables)
            fits[1] = _fitness(pool[i2], nbrs, tables)
            mean = (fits[0] + fits[1]) / 2.0
            if dom == 0:
                score = mean
            else:
                pick = fits[rng.integers(0, 2)]
                if dom == 1:
                    score = pick
                else:
                    score = (1.0 - lam) * mean + lam * pick
            if score > stored:
                stored = score
                cand[0, :] = pool[i1]
                cand[1, :] = pool[i2]
                genomes[0, :] = cand[0]
                genomes[1, :] = cand[1]

        else:  # ASEXUAL
            used[0] = rng.integers(0, n)
            _draw_locus(rng, n, used, 1)
            cand[0, :] = genomes[0]
            cand[0, used[0]] ^= 1
            cand[1, :] = genomes[1]
            cand[1, used[1]] ^= 1
            f1 = _fitness(cand[0], nbrs, tables)
            f2 = _fitness(cand[1], nbrs, tables)
            score = (f1 + f2) / 2.0
            first, second = 0, 1
            if best3 == 1 and code == ASEXUAL:
                best = f1
                first, second = 0, 0
                if score > best:
                    best = score
                    first, second = 0, 1
                if f2 > best:
                    best = f2
                    first, second = 1, 1
                score = best
            if score > stored:
                stored = score
                genomes[0, :] = cand[first]
                genomes[1, :] = cand[second]

        if stride > 0 and ((gen + 1) % stride == 0 or gen + 1 == generations):
            traj_gen[s] = gen + 1
            traj_fit[s] = stored
            s += 1

    return stored, genomes[:count].copy(), parent, traj_gen, traj_fit


def run_walk_compiled(
    config: StrategyConfig,
    landscape: NkLandscape,
    genome,
    stored: float,
    rng: np.random.Generator,
    generations: int,
    stride: int = 0,
):
    """Run ``generations`` steps of ``config`` from ``genome``.

    Returns ``(stored_fitness, genomes, parent, trajectory)`` where
    ``trajectory`` is a list of ``(generation, stored_fitness)`` pairs (empty
    when ``stride`` is 0).  ``rng`` is advanced in place.
    """
    validate(config, landscape.n)
    code, ip, fp = encode(config)
    init = as_genome(genome, landscape.n).copy()
    stored, genomes, parent, tg, tf = _walk(
        code, ip, fp, landscape.neighbors, landscape.tables, init, float(stored), rng, int(generations), int(stride)
    )
    assert genomes.shape[0] in (genome_count(config), ip[_I_PLOIDY])
    trajectory = list(zip(tg.tolist(), tf.tolist()))
    return float(stored), tuple(genomes), int(parent), trajectory
