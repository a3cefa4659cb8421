"""Replicated, deterministic experiment execution.

A suite crosses strategies, K values, landscapes and start points.  Seeds are
derived from one master seed so that every strategy in a suite is run on the
same landscapes from the same start genomes (a paired design), and output
order never depends on how the work was scheduled.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .engine import run_walk_compiled
from .genetics import CrossoverKind
from .landscape import NkLandscape, generate_landscape
from .strategies import (
    AsexualDiploid,
    Average,
    BaldwinLearning,
    Baseline,
    ConfigurationError,
    Endomitosis,
    HaploidWeighted,
    RandomDominant,
    StrategyConfig,
    Syngamy,
    TwoStepMeiosis,
    apply_generation,
    initial_state,
    validate,
)

MASK64 = (1 << 64) - 1
DEFAULT_GENERATIONS = 50_000
DEFAULT_K_GRID = (0, 2, 4, 6, 10, 15)
DEFAULT_STRIDE = 500

RESULT_COLUMNS = (
    "strategy_id", "mode", "n", "k", "L", "weight", "period", "ploidy", "crossover",
    "dominance", "lambda", "ratio", "landscape_index", "run_index", "landscape_seed",
    "run_seed", "final_fitness",
)

_LANDSCAPE_TAG = 0x4C414E44534B4150  # "LANDSKAP"
_RUN_TAG = 0x52554E5345454453  # "RUNSEEDS"


# -- seeds --------------------------------------------------------------------

def splitmix64(x: int) -> int:
    """One step of the SplitMix64 generator: a bijective 64-bit mixer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seeds(master_seed: int, landscape_index: int, run_index: int) -> tuple[int, int]:
    """Return ``(landscape_seed, run_seed)`` for one replicate.

    ``landscape_seed`` only depends on the master seed and landscape index, so
    every strategy and K value of a suite shares it.
    """
    if landscape_index < 0 or run_index < 0:
        raise ValueError("indices must be non-negative")
    master = master_seed & MASK64
    landscape_seed = splitmix64((splitmix64(master ^ _LANDSCAPE_TAG) + landscape_index) & MASK64)
    stream = splitmix64((splitmix64(master ^ _RUN_TAG) + landscape_index) & MASK64)
    run_seed = splitmix64((stream + run_index) & MASK64)
    return landscape_seed, run_seed


# -- configuration types ------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    n: int
    k: int
    strategy: StrategyConfig
    generations: int = DEFAULT_GENERATIONS
    landscape_seed: int = 0
    run_seed: int = 0
    trajectory_stride: int = 0
    strategy_id: str = ""
    landscape_index: int = 0
    run_index: int = 0

    def __post_init__(self) -> None:
        if self.generations < 1:
            raise ConfigurationError(f"generations must be >= 1, got {self.generations}")
        if not 0 <= self.k <= self.n - 1:
            raise ConfigurationError(f"k must satisfy 0 <= k <= n-1, got n={self.n} k={self.k}")


@dataclass(frozen=True)
class RunRecord:
    strategy_id: str
    strategy: StrategyConfig | None
    n: int
    k: int
    landscape_index: int
    run_index: int
    landscape_seed: int
    run_seed: int
    final_fitness: float
    trajectory: tuple[tuple[int, float], ...] | None = None
    mode: str = ""


@dataclass(frozen=True)
class SuiteConfig:
    n: int
    k_list: tuple[int, ...]
    strategies: tuple[tuple[str, StrategyConfig], ...]
    landscapes: int = 10
    runs: int = 10
    generations: int = DEFAULT_GENERATIONS
    master_seed: int = 1
    trajectory_stride: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_list", tuple(self.k_list))
        object.__setattr__(self, "strategies", tuple((sid, cfg) for sid, cfg in self.strategies))
        for name in ("landscapes", "runs", "generations"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.k_list or not self.strategies:
            raise ConfigurationError("a suite needs at least one k and one strategy")
        ids = [sid for sid, _ in self.strategies]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"strategy ids must be unique, got {ids}")
        for sid in ids:
            if not sid or any(c in sid for c in ", \t\n\"="):
                raise ConfigurationError(f"invalid strategy id {sid!r}")
        for k in self.k_list:
            if not 0 <= k <= self.n - 1:
                raise ConfigurationError(f"k={k} out of range for n={self.n}")
        for sid, cfg in self.strategies:
            try:
                validate(cfg, self.n)
            except ValueError as exc:
                raise ConfigurationError(f"strategy {sid}: {exc}") from exc

    @property
    def record_count(self) -> int:
        return len(self.strategies) * len(self.k_list) * self.landscapes * self.runs


# -- single runs --------------------------------------------------------------

def _start(config: RunConfig):
    rng = np.random.Generator(np.random.PCG64(config.run_seed))
    genome = rng.integers(0, 2, size=config.n, dtype=np.uint8)
    return rng, genome


def run_walk(config: RunConfig, landscape: NkLandscape | None = None, reference: bool = False) -> RunRecord:
    """Run one adaptive walk.

    The start genome is uniform random from ``run_seed``; the landscape is
    regenerated from ``landscape_seed`` unless passed in.  ``reference=True``
    folds the pure-Python steps instead of the compiled kernel; both give the
    same record.
    """
    validate(config.strategy, config.n)
    if landscape is None:
        landscape = generate_landscape(config.n, config.k, config.landscape_seed)
    rng, genome = _start(config)
    state = initial_state(config.strategy, genome, landscape)
    stride = config.trajectory_stride
    if reference:
        trajectory = [(0, state.stored_fitness)] if stride > 0 else []
        for gen in range(config.generations):
            state = apply_generation(state, config.strategy, landscape, gen, rng)
            if stride > 0 and ((gen + 1) % stride == 0 or gen + 1 == config.generations):
                trajectory.append((gen + 1, state.stored_fitness))
        final = state.stored_fitness
    else:
        final, _, _, trajectory = run_walk_compiled(
            config.strategy, landscape, genome, state.stored_fitness, rng, config.generations, stride
        )
    return RunRecord(
        strategy_id=config.strategy_id,
        strategy=config.strategy,
        n=config.n,
        k=config.k,
        landscape_index=config.landscape_index,
        run_index=config.run_index,
        landscape_seed=config.landscape_seed,
        run_seed=config.run_seed,
        final_fitness=final,
        trajectory=tuple(trajectory) if stride > 0 else None,
        mode=config.strategy.mode,
    )


# -- suites -------------------------------------------------------------------

def _run_cell(args) -> list[RunRecord]:
    suite, k, li = args
    landscape_seed, _ = derive_seeds(suite.master_seed, li, 0)
    landscape = generate_landscape(suite.n, k, landscape_seed)
    out = []
    for sid, cfg in suite.strategies:
        for ri in range(suite.runs):
            _, run_seed = derive_seeds(suite.master_seed, li, ri)
            rc = RunConfig(suite.n, k, cfg, suite.generations, landscape_seed, run_seed,
                           suite.trajectory_stride, sid, li, ri)
            try:
                out.append(run_walk(rc, landscape))
            except Exception as exc:
                raise RuntimeError(f"run failed in cell strategy={sid} k={k} landscape={li} run={ri}: {exc}") from exc
    return out


def suite_cells(suite: SuiteConfig) -> list[tuple[int, int]]:
    """The ``(k, landscape_index)`` work units of a suite in canonical order."""
    return [(k, li) for k in suite.k_list for li in range(suite.landscapes)]


def sort_records(records, suite: SuiteConfig) -> list[RunRecord]:
    order = {sid: i for i, (sid, _) in enumerate(suite.strategies)}
    korder = {k: i for i, k in enumerate(suite.k_list)}
    return sorted(records, key=lambda r: (order[r.strategy_id], korder[r.k], r.landscape_index, r.run_index))


def run_suite(suite: SuiteConfig, parallel: int | None = 1, cells: list[tuple[int, int]] | None = None) -> list[RunRecord]:
    """Execute every strategy x k x landscape x run cell of ``suite``.

    Work is split per ``(k, landscape)`` so each landscape is built once.
    ``parallel`` worker processes are used when greater than one (``None``
    means one per logical CPU).  Records come back sorted by strategy
    position, k position, landscape index and run index.
    """
    if parallel is None:
        parallel = os.cpu_count() or 1
    tasks = [(suite, k, li) for k, li in (cells if cells is not None else suite_cells(suite))]
    records: list[RunRecord] = []
    if parallel > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            for chunk in pool.map(_run_cell, tasks):
                records.extend(chunk)
    else:
        for task in tasks:
            records.extend(_run_cell(task))
    return sort_records(records, suite)


# -- presets ------------------------------------------------------------------

def _meiosis(crossover=CrossoverKind.SINGLE_POINT, dominance=None, ratio=0) -> TwoStepMeiosis:
    return TwoStepMeiosis(crossover, dominance if dominance is not None else Average(), ratio)


PRESET_NAMES = ("fig2", "fig3a", "fig3b", "fig5", "fig6", "fig8", "fig9", "fig10a", "fig10b", "dominance", "control")

# strategy each preset's comparison report is taken against
PRESET_BASELINES = {
    "fig2": "baseline",
    "fig3a": "baseline",
    "fig3b": "baseline",
    "fig5": "baseline",
    "fig6": "syngamy",
    "fig8": "endo-2",
    "fig9": "meiosis-single",
    "fig10a": "meiosis-single",
    "fig10b": "meiosis-single",
    "dominance": "meiosis-single",
    "control": "asexual",
}


def preset_strategies(name: str) -> list[tuple[str, StrategyConfig]]:
    base = [("baseline", Baseline())]
    if name == "fig2":
        return base + [(f"L{L}", BaldwinLearning(L, 0.5, 1)) for L in range(1, 8)]
    if name == "fig3a":
        return base + [(f"L{L}-w0.25", BaldwinLearning(L, 0.25, 1)) for L in range(1, 8)]
    if name == "fig3b":
        return base + [(f"L{L}-p2", BaldwinLearning(L, 0.5, 2)) for L in range(1, 8)]
    if name == "fig5":
        return base + [(f"endo-{p}", Endomitosis(p)) for p in (2, 4, 8)]
    if name == "fig6":
        return [("endo-2", Endomitosis(2)), ("syngamy", Syngamy())]
    if name == "fig8":
        return [("meiosis-single", _meiosis()), ("endo-2", Endomitosis(2)), ("syngamy", Syngamy())]
    if name == "fig9":
        return [("meiosis-single", _meiosis()), ("meiosis-uniform", _meiosis(CrossoverKind.UNIFORM))]
    if name == "fig10a":
        return [("meiosis-single", _meiosis()), ("meiosis-single-haploid50", _meiosis(dominance=HaploidWeighted(0.5)))]
    if name == "fig10b":
        return [("meiosis-single", _meiosis())] + [(f"meiosis-single-R{r}", _meiosis(ratio=r)) for r in (1, 3, 7, 15)]
    if name == "dominance":
        return [("meiosis-single", _meiosis()), ("meiosis-single-random", _meiosis(dominance=RandomDominant()))]
    if name == "control":
        return [("endo-2", Endomitosis(2)), ("syngamy", Syngamy()),
                ("asexual", AsexualDiploid(False)), ("asexual-best3", AsexualDiploid(True))]
    raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")


def figure_preset(name: str, n: int | None = None, master_seed: int = 1) -> SuiteConfig:
    """Suite reproducing one figure's parameterisation (N=100 for fig9, else 20)."""
    strategies = preset_strategies(name)
    if n is None:
        n = 100 if name == "fig9" else 20
    return SuiteConfig(n=n, k_list=DEFAULT_K_GRID, strategies=tuple(strategies), master_seed=master_seed)


# -- suite file format --------------------------------------------------------

_TOP_KEYS = {"n", "k_list", "landscapes", "runs", "generations", "master_seed", "trajectory_stride"}


def _strategy_from_fields(fields: dict[str, tuple[str, int]], start: int) -> tuple[str, StrategyConfig]:
    def get(key, conv, default=None):
        if key not in fields:
            if default is None:
                raise ConfigurationError(f"line {start}: strategy block missing '{key}'")
            return default
        value, lineno = fields[key]
        try:
            return conv(value)
        except (ValueError, KeyError) as exc:
            raise ConfigurationError(f"line {lineno}: bad value for '{key}': {value!r}") from exc

    def boolean(v: str) -> bool:
        return {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}[v.lower()]

    sid = get("id", str)
    mode = get("mode", str)
    allowed = {"id", "mode"}
    try:
        if mode == "baseline":
            cfg = Baseline()
        elif mode == "baldwin":
            allowed |= {"L", "weight", "period"}
            cfg = BaldwinLearning(get("L", int), get("weight", float, 0.5), get("period", int, 1))
        elif mode == "endomitosis":
            allowed |= {"ploidy"}
            cfg = Endomitosis(get("ploidy", int, 2))
        elif mode == "syngamy":
            cfg = Syngamy()
        elif mode == "meiosis":
            allowed |= {"crossover", "dominance", "lambda", "ratio"}
            dom_name = get("dominance", str, "average")
            if dom_name == "average":
                dom = Average()
            elif dom_name == "random":
                dom = RandomDominant()
            elif dom_name == "haploid":
                dom = HaploidWeighted(get("lambda", float, 0.5))
            else:
                raise ConfigurationError(f"line {fields['dominance'][1]}: unknown dominance {dom_name!r}")
            cfg = TwoStepMeiosis(get("crossover", CrossoverKind, "single"), dom, get("ratio", int, 0))
        elif mode == "asexual":
            allowed |= {"best_of_three"}
            cfg = AsexualDiploid(get("best_of_three", boolean, "false"))
        else:
            raise ConfigurationError(f"line {fields['mode'][1]}: unknown mode {mode!r}")
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"line {start}: {exc}") from exc
    for key, (_, lineno) in fields.items():
        if key not in allowed:
            raise ConfigurationError(f"line {lineno}: key '{key}' does not apply to mode {mode!r}")
    return sid, cfg


def parse_suite(text: str) -> SuiteConfig:
    """Parse the key-value suite format (see :func:`format_suite`).

    Errors are :class:`ConfigurationError` messages starting ``line <no>:``.
    """
    top: dict[str, tuple[str, int]] = {}
    blocks: list[tuple[int, dict[str, tuple[str, int]]]] = []
    current: dict[str, tuple[str, int]] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[strategy]":
                raise ConfigurationError(f"line {lineno}: unknown section {line!r}")
            current = {}
            blocks.append((lineno, current))
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        target = top if current is None else current
        if current is None and key not in _TOP_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in target:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        target[key] = (value, lineno)

    def num(key, default=None):
        if key not in top:
            if default is None:
                raise ConfigurationError(f"line 1: missing required key {key!r}")
            return default
        value, lineno = top[key]
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: {key} must be an integer, got {value!r}") from exc

    if "k_list" not in top:
        raise ConfigurationError("line 1: missing required key 'k_list'")
    kval, kline = top["k_list"]
    try:
        k_list = tuple(int(x) for x in kval.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigurationError(f"line {kline}: k_list must be comma-separated integers") from exc
    if not blocks:
        raise ConfigurationError("line 1: no [strategy] blocks")
    strategies = tuple(_strategy_from_fields(fields, start) for start, fields in blocks)
    try:
        return SuiteConfig(
            n=num("n"),
            k_list=k_list,
            strategies=strategies,
            landscapes=num("landscapes", 10),
            runs=num("runs", 10),
            generations=num("generations", DEFAULT_GENERATIONS),
            master_seed=num("master_seed", 1),
            trajectory_stride=num("trajectory_stride", 0),
        )
    except ConfigurationError as exc:
        raise ConfigurationError(f"line 1: {exc}") from exc


def strategy_columns(cfg: StrategyConfig) -> dict[str, str]:
    """The parameter columns of the results CSV (``NA`` where not applicable)."""
    cols = dict.fromkeys(("L", "weight", "period", "ploidy", "crossover", "dominance", "lambda", "ratio"), "NA")
    if isinstance(cfg, BaldwinLearning):
        cols.update(L=str(cfg.L), weight=repr(cfg.weight), period=str(cfg.period))
    elif isinstance(cfg, Endomitosis):
        cols["ploidy"] = str(cfg.ploidy)
    elif isinstance(cfg, TwoStepMeiosis):
        cols["crossover"] = cfg.crossover.value
        cols["ratio"] = str(cfg.asexual_ratio)
        if isinstance(cfg.dominance, Average):
            cols["dominance"] = "average"
        elif isinstance(cfg.dominance, RandomDominant):
            cols["dominance"] = "random"
        else:
            cols["dominance"] = "haploid"
            cols["lambda"] = repr(cfg.dominance.lam)
    return cols


def format_suite(suite: SuiteConfig) -> str:
    lines = [
        f"n = {suite.n}",
        f"k_list = {', '.join(str(k) for k in suite.k_list)}",
        f"landscapes = {suite.landscapes}",
        f"runs = {suite.runs}",
        f"generations = {suite.generations}",
        f"master_seed = {suite.master_seed}",
    ]
    if suite.trajectory_stride:
        lines.append(f"trajectory_stride = {suite.trajectory_stride}")
    for sid, cfg in suite.strategies:
        lines += ["", "[strategy]", f"id = {sid}", f"mode = {cfg.mode}"]
        cols = strategy_columns(cfg)
        for key in ("L", "weight", "period", "ploidy", "crossover", "dominance", "lambda", "ratio"):
            if cols[key] != "NA":
                lines.append(f"{key} = {cols[key]}")
        if isinstance(cfg, AsexualDiploid):
            lines.append(f"best_of_three = {str(cfg.best_of_three).lower()}")
    return "\n".join(lines) + "\n"


# -- results CSV --------------------------------------------------------------

def results_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in records:
        cols = strategy_columns(r.strategy) if r.strategy is not None else {}
        writer.writerow([
            r.strategy_id, r.mode or (r.strategy.mode if r.strategy else "NA"), r.n, r.k,
            *(cols.get(c, "NA") for c in ("L", "weight", "period", "ploidy", "crossover", "dominance", "lambda", "ratio")),
            r.landscape_index, r.run_index, r.landscape_seed, r.run_seed, repr(r.final_fitness),
        ])
    return buf.getvalue()


def trajectory_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("strategy_id", "k", "landscape_index", "run_index", "generation", "stored_fitness"))
    for r in records:
        for gen, fit in r.trajectory or ():
            writer.writerow((r.strategy_id, r.k, r.landscape_index, r.run_index, gen, repr(fit)))
    return buf.getvalue()


def write_results(records, path: str | Path) -> None:
    Path(path).write_text(results_csv(records))


def read_results(path: str | Path) -> list[RunRecord]:
    """Load a results CSV written by :func:`write_results`.

    Raises
    ------
    ValueError
        Naming the first malformed row (header is row 1).
    """
    with open(path, newline="") as fh:
        return parse_results(fh.read())


def parse_results(text: str) -> list[RunRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != RESULT_COLUMNS:
        raise ValueError("row 1: results header does not match the expected columns")
    records = []
    for rowno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(RESULT_COLUMNS):
            raise ValueError(f"row {rowno}: expected {len(RESULT_COLUMNS)} fields, got {len(row)}")
        d = dict(zip(RESULT_COLUMNS, row))
        try:
            fit = float(d["final_fitness"])
            if not 0.0 <= fit <= 1.0:
                raise ValueError
            records.append(RunRecord(
                strategy_id=d["strategy_id"], strategy=None, n=int(d["n"]), k=int(d["k"]),
                landscape_index=int(d["landscape_index"]), run_index=int(d["run_index"]),
                landscape_seed=int(d["landscape_seed"]), run_seed=int(d["run_seed"]),
                final_fitness=fit, mode=d["mode"],
            ))
        except ValueError as exc:
            raise ValueError(f"row {rowno}: malformed values {row}") from exc
    return records


def with_seed(suite: SuiteConfig, master_seed: int) -> SuiteConfig:
    return replace(suite, master_seed=master_seed)
