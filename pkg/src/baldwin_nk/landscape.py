"""NK fitness landscapes: construction, evaluation, exhaustive search and file I/O.

Each gene's contribution is read from its own table of ``2**(k+1)`` values.
The table index packs gene ``i``'s allele as the most significant bit,
followed by the alleles of its ``k`` neighbours in stored order::

    index = a[i] << k | a[nbrs[0]] << (k-1) | ... | a[nbrs[k-1]]

Fitness is the sequential (left-to-right) sum of the ``n`` contributions
divided by ``n``.  The compiled engine sums in the same order, so both
paths produce bit-identical values.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

MAX_EXHAUSTIVE_N = 24

Genome = npt.NDArray[np.uint8]


@dataclass(frozen=True, eq=False)
class NkLandscape:
    """An immutable NK landscape.

    Attributes
    ----------
    n : int
        Number of genes.
    k : int
        Number of epistatic neighbours per gene.
    neighbors : ndarray of shape (n, k), int64
        ``neighbors[i]`` lists the genes whose alleles index gene ``i``'s table.
    tables : ndarray of shape (n, 2**(k+1)), float64
        Per-gene fitness contributions in ``[0, 1)``.
    seed : int or None
        Seed the landscape was generated from (``None`` if built by hand).
    """

    n: int
    k: int
    neighbors: npt.NDArray[np.int64]
    tables: npt.NDArray[np.float64]
    seed: int | None = None

    def __post_init__(self) -> None:
        _check_nk(self.n, self.k)
        nbrs = np.array(self.neighbors, dtype=np.int64).reshape(self.n, self.k)
        tables = np.array(self.tables, dtype=np.float64)
        if tables.shape != (self.n, 1 << (self.k + 1)):
            raise ValueError(
                f"tables must have shape ({self.n}, {1 << (self.k + 1)}), got {tables.shape}"
            )
        for i, row in enumerate(nbrs):
            if len(set(row.tolist())) != self.k or i in row or np.any(row < 0) or np.any(row >= self.n):
                raise ValueError(f"gene {i}: neighbours must be {self.k} distinct other genes, got {row.tolist()}")
        if np.any(tables < 0.0) or np.any(tables > 1.0):
            raise ValueError("table entries must lie in [0, 1]")
        nbrs.setflags(write=False)
        tables.setflags(write=False)
        object.__setattr__(self, "neighbors", nbrs)
        object.__setattr__(self, "tables", tables)
        # bit weights: own allele first (MSB), then neighbours in order
        weights = (1 << np.arange(self.k, -1, -1)).astype(np.int64)
        object.__setattr__(self, "_gather", np.column_stack([np.arange(self.n), nbrs]).astype(np.int64))
        object.__setattr__(self, "_weights", weights)

    def same_as(self, other: NkLandscape) -> bool:
        """Structural equality (neighbour lists and tables bit-identical)."""
        return (
            self.n == other.n
            and self.k == other.k
            and np.array_equal(self.neighbors, other.neighbors)
            and np.array_equal(self.tables.view(np.uint64), other.tables.view(np.uint64))
        )

    def table_indices(self, genome) -> npt.NDArray[np.int64]:
        g = as_genome(genome, self.n)
        return (g[self._gather].astype(np.int64) * self._weights).sum(axis=1)

    def contributions(self, genome) -> npt.NDArray[np.float64]:
        return self.tables[np.arange(self.n), self.table_indices(genome)]


def _check_nk(n: int, k: int) -> None:
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= k <= n - 1:
        raise ValueError(f"k must satisfy 0 <= k <= n-1 = {n - 1}, got {k}")


def as_genome(genome, n: int | None = None) -> Genome:
    """Coerce a sequence, array or ``"0101"`` string into a uint8 allele array."""
    if isinstance(genome, str):
        g = np.frombuffer(genome.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        g = np.asarray(genome)
    if g.ndim != 1:
        raise ValueError("genome must be one-dimensional")
    if np.any((g != 0) & (g != 1)):
        raise ValueError("alleles must be 0 or 1")
    if n is not None and g.shape[0] != n:
        raise ValueError(f"genome length {g.shape[0]} does not match n={n}")
    return g.astype(np.uint8, copy=False)


def genome_str(genome) -> str:
    return "".join("1" if a else "0" for a in np.asarray(genome).tolist())


def generate_landscape(n: int, k: int, seed: int) -> NkLandscape:
    """Draw a random NK landscape.

    Neighbours of each gene are chosen uniformly without replacement from the
    other ``n - 1`` genes; table entries are uniform on ``[0, 1)``.  All draws
    come from a PCG64 generator seeded with ``seed`` so the result is a pure
    function of ``(n, k, seed)``.
    """
    _check_nk(n, k)
    rng = np.random.Generator(np.random.PCG64(seed))
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        picks = rng.choice(n - 1, size=k, replace=False)
        neighbors[i] = picks + (picks >= i)
    tables = rng.random((n, 1 << (k + 1)))
    return NkLandscape(n, k, neighbors, tables, seed)


def gene_contribution(landscape: NkLandscape, genome, i: int) -> float:
    if not 0 <= i < landscape.n:
        raise ValueError(f"gene index {i} out of range [0, {landscape.n})")
    g = as_genome(genome, landscape.n)
    index = int(g[i])
    for j in landscape.neighbors[i]:
        index = (index << 1) | int(g[j])
    return float(landscape.tables[i, index])


def fitness(landscape: NkLandscape, genome) -> float:
    """Mean gene contribution of ``genome``; always within ``[0, 1]``."""
    return sum(landscape.contributions(genome).tolist()) / landscape.n


def global_optimum(landscape: NkLandscape) -> tuple[Genome, float]:
    """Exhaustively find the fittest genome.

    Genomes are enumerated as integers whose most significant bit is gene 0;
    ties go to the smallest such integer.

    Raises
    ------
    OverflowError
        If ``n`` exceeds :data:`MAX_EXHAUSTIVE_N`.
    """
    n = landscape.n
    if n > MAX_EXHAUSTIVE_N:
        raise OverflowError(f"exhaustive search limited to n <= {MAX_EXHAUSTIVE_N}, got n={n}")
    codes = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_code, best_fit = 0, -1.0
    chunk = 1 << 16
    for start in range(0, codes.size, chunk):
        block = ((codes[start:start + chunk, None] >> shifts) & 1).astype(np.int64)
        idx = (block[:, landscape._gather] * landscape._weights).sum(axis=2)
        contrib = landscape.tables[np.arange(n), idx]
        # column-wise accumulation keeps the left-to-right summation order
        total = np.zeros(contrib.shape[0])
        for i in range(n):
            total += contrib[:, i]
        fits = total / n
        j = int(np.argmax(fits))
        if fits[j] > best_fit:
            best_fit, best_code = float(fits[j]), start + j
    genome = ((best_code >> shifts) & 1).astype(np.uint8)
    return genome, best_fit


def dumps(landscape: NkLandscape) -> str:
    """Serialise to the textual landscape format (values round-trip exactly)."""
    seed = "none" if landscape.seed is None else str(landscape.seed)
    lines = [f"NK n={landscape.n} k={landscape.k} seed={seed}"]
    for i in range(landscape.n):
        nbrs = ",".join(str(j) for j in landscape.neighbors[i].tolist())
        table = ",".join(repr(v) for v in landscape.tables[i].tolist())
        lines.append(f"gene {i} nbrs={nbrs} table={table}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> NkLandscape:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty landscape file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "NK":
        raise ValueError(f"line 1: expected 'NK n=<n> k=<k> seed=<seed>', got {lines[0]!r}")
    try:
        fields = dict(tok.split("=", 1) for tok in head[1:])
        n, k = int(fields["n"]), int(fields["k"])
        seed = None if fields["seed"] == "none" else int(fields["seed"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"line 1: malformed header {lines[0]!r}") from exc
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} gene lines, found {len(lines) - 1}")
    neighbors = np.empty((n, k), dtype=np.int64)
    tables = np.empty((n, 1 << (k + 1)))
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        try:
            if len(parts) != 4 or parts[0] != "gene" or int(parts[1]) != lineno - 2:
                raise ValueError
            nb = parts[2].removeprefix("nbrs=")
            tb = parts[3].removeprefix("table=")
            if not parts[2].startswith("nbrs=") or not parts[3].startswith("table="):
                raise ValueError
            nbr_vals = [int(x) for x in nb.split(",")] if nb else []
            tab_vals = [float(x) for x in tb.split(",")]
            if len(nbr_vals) != k or len(tab_vals) != 1 << (k + 1):
                raise ValueError
            neighbors[lineno - 2] = nbr_vals
            tables[lineno - 2] = tab_vals
        except ValueError as exc:
            raise ValueError(f"line {lineno}: malformed gene line {line!r}") from exc
    return NkLandscape(n, k, neighbors, tables, seed)


def save(landscape: NkLandscape, path: str | Path) -> None:
    Path(path).write_text(dumps(landscape))


def load(path: str | Path) -> NkLandscape:
    return loads(Path(path).read_text())
