"""Exact sparse linear algebra over Q.

Ranks are computed twice: modulo a few random 62-bit primes (cheap, can
only under-estimate) and by exact fraction-free integer elimination.  The
reported rank is the exact one; disagreement with the modular ranks is only
possible at primes dividing some pivot and is logged.
"""
from __future__ import annotations

import heapq
import logging
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

from sympy import nextprime

log = logging.getLogger(__name__)

DEFAULT_MAX_NONZEROS = 50_000_000
EXACT_DIMENSION_LIMIT = 20_000


class ConsistencyError(RuntimeError):
    """An identity that must hold exactly (such as d∘d = 0) failed."""


class BudgetError(RuntimeError):
    """A matrix exceeds the configured nonzero budget."""


def _exact_limit() -> int:
    return int(os.environ.get("TROPICAL_EXACT_LIMIT", EXACT_DIMENSION_LIMIT))


def _max_nonzeros() -> int:
    return int(os.environ.get("TROPICAL_MAX_NONZEROS", DEFAULT_MAX_NONZEROS))


def _as_rational(x):
    if isinstance(x, int):
        return x
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


@dataclass(frozen=True)
class SparseRationalMatrix:
    """Column-major sparse matrix; ``cols[j]`` maps row index to a nonzero
    int or ``Fraction``."""

    nrows: int
    ncols: int
    cols: tuple[dict, ...]

    def __post_init__(self):
        if len(self.cols) != self.ncols:
            raise ValueError("column count mismatch")
        for col in self.cols:
            for r, v in col.items():
                if not 0 <= r < self.nrows:
                    raise ValueError(f"row index {r} out of range")
                if v == 0:
                    raise ValueError("stored zero entry")

    @classmethod
    def from_columns(cls, nrows: int, cols) -> SparseRationalMatrix:
        clean = []
        for col in cols:
            clean.append({r: _as_rational(v) for r, v in col.items() if v != 0})
        return cls(nrows, len(clean), tuple(clean))

    @classmethod
    def from_triplets(cls, nrows: int, ncols: int, triplets) -> SparseRationalMatrix:
        cols: list[dict] = [{} for _ in range(ncols)]
        for r, c, v in triplets:
            if r in cols[c]:
                raise ValueError(f"duplicate coordinate ({r}, {c})")
            cols[c][r] = v
        return cls.from_columns(nrows, cols)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> SparseRationalMatrix:
        return cls(nrows, ncols, tuple({} for _ in range(ncols)))

    @classmethod
    def identity(cls, k: int, scale=1) -> SparseRationalMatrix:
        return cls.from_columns(k, [{i: scale} for i in range(k)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def nnz(self) -> int:
        return sum(len(c) for c in self.cols)

    def triplets(self):
        for c, col in enumerate(self.cols):
            for r in sorted(col):
                yield r, c, col[r]

    def to_dense(self) -> list[list]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.triplets():
            out[r][c] = v
        return out

    def transpose(self) -> SparseRationalMatrix:
        cols: list[dict] = [{} for _ in range(self.nrows)]
        for r, c, v in self.triplets():
            cols[r][c] = v
        return SparseRationalMatrix(self.ncols, self.nrows, tuple(cols))

    def permute(self, row_perm=None, col_perm=None) -> SparseRationalMatrix:
        """Move row ``r`` to ``row_perm[r]`` and column ``c`` to ``col_perm[c]``."""
        row_perm = row_perm or range(self.nrows)
        col_perm = col_perm or range(self.ncols)
        cols: list[dict] = [{} for _ in range(self.ncols)]
        for c, col in enumerate(self.cols):
            cols[col_perm[c]] = {row_perm[r]: v for r, v in col.items()}
        return SparseRationalMatrix(self.nrows, self.ncols, tuple(cols))

    def hstack(self, other: SparseRationalMatrix) -> SparseRationalMatrix:
        if other.nrows != self.nrows:
            raise ValueError("row counts differ")
        return SparseRationalMatrix(self.nrows, self.ncols + other.ncols, self.cols + other.cols)

    def __matmul__(self, other: SparseRationalMatrix) -> SparseRationalMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for col in other.cols:
            acc: dict = {}
            for k, b in col.items():
                for r, a in self.cols[k].items():
                    acc[r] = acc.get(r, 0) + a * b
            out.append({r: v for r, v in acc.items() if v != 0})
        return SparseRationalMatrix(self.nrows, len(out), tuple(out))

    def __add__(self, other: SparseRationalMatrix) -> SparseRationalMatrix:
        return self._combine(other, 1)

    def __sub__(self, other: SparseRationalMatrix) -> SparseRationalMatrix:
        return self._combine(other, -1)

    def _combine(self, other, sign) -> SparseRationalMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        out = []
        for a, b in zip(self.cols, other.cols):
            acc = dict(a)
            for r, v in b.items():
                acc[r] = acc.get(r, 0) + sign * v
            out.append({r: v for r, v in acc.items() if v != 0})
        return SparseRationalMatrix(self.nrows, self.ncols, tuple(out))

    def scale(self, k) -> SparseRationalMatrix:
        return SparseRationalMatrix.from_columns(
            self.nrows, [{r: k * v for r, v in col.items()} for col in self.cols]
        )

    def is_zero(self) -> bool:
        return all(not col for col in self.cols)

    def apply(self, vector: dict) -> dict:
        """Multiply by a sparse column vector given as ``{index: value}``."""
        acc: dict = {}
        for k, b in vector.items():
            for r, a in self.cols[k].items():
                acc[r] = acc.get(r, 0) + a * b
        return {r: v for r, v in acc.items() if v != 0}

    def to_text(self) -> str:
        lines = [f"{self.nrows} {self.ncols} {self.nnz}"]
        for r, c, v in self.triplets():
            v = Fraction(v)
            lines.append(f"{r} {c} {v.numerator}/{v.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> SparseRationalMatrix:
        head, *body = text.strip().splitlines()
        nrows, ncols, nnz = map(int, head.split())
        trips = []
        for line in body:
            r, c, v = line.split()
            trips.append((int(r), int(c), Fraction(v)))
        if len(trips) != nnz:
            raise ValueError(f"expected {nnz} entries, found {len(trips)}")
        return cls.from_triplets(nrows, ncols, trips)


# ---------------------------------------------------------------------------
# elimination


def _integer_rows(M: SparseRationalMatrix) -> dict[int, dict[int, int]]:
    """Rows of M, each scaled by the lcm of its denominators."""
    rows: dict[int, dict[int, object]] = {}
    for c, col in enumerate(M.cols):
        for r, v in col.items():
            rows.setdefault(r, {})[c] = v
    out = {}
    for r, row in rows.items():
        den = 1
        for v in row.values():
            if isinstance(v, Fraction):
                den = lcm(den, v.denominator)
        out[r] = {c: int(v * den) for c, v in row.items()}
    return out


class _Markowitz:
    """Pivot order by minimal column count, ties and row choice by
    minimal row count (a cheap approximation to minimal fill-in).

    Column counts live in a lazy heap: entries are pushed when a count
    drops and re-pushed when a popped entry turns out to be stale.
    """

    def __init__(self, rows: dict[int, dict[int, int]]):
        self.rows = rows
        self.colrows: dict[int, set[int]] = {}
        for r, row in rows.items():
            for c in row:
                self.colrows.setdefault(c, set()).add(r)
        self.heap = [(len(rs), c) for c, rs in self.colrows.items()]
        heapq.heapify(self.heap)

    def next_pivot(self):
        heap, colrows = self.heap, self.colrows
        while heap:
            count, c = heapq.heappop(heap)
            rs = colrows.get(c)
            if not rs:
                continue
            if len(rs) != count:
                if len(rs) > count:
                    heapq.heappush(heap, (len(rs), c))
                continue
            rows = self.rows
            r = min(rs, key=lambda x: (len(rows[x]), abs(rows[x][c]) != 1, x))
            return r, c
        return None

    def take_row(self, r: int) -> dict[int, int]:
        row = self.rows.pop(r)
        for c in row:
            rs = self.colrows[c]
            rs.discard(r)
            if rs:
                heapq.heappush(self.heap, (len(rs), c))
        return row

    def drop_entry(self, s: int, k: int) -> None:
        rs = self.colrows[k]
        rs.discard(s)
        if rs:
            heapq.heappush(self.heap, (len(rs), k))

    def add_entry(self, s: int, k: int) -> None:
        self.colrows.setdefault(k, set()).add(s)
        # a larger count is noticed lazily when the stale entry is popped
        if len(self.colrows[k]) == 1:
            heapq.heappush(self.heap, (1, k))


def rank_mod_p(M: SparseRationalMatrix, p: int) -> int:
    rows = {}
    for r, row in _integer_rows(M).items():
        reduced = {c: v % p for c, v in row.items() if v % p}
        if reduced:
            rows[r] = reduced
    state = _Markowitz(rows)
    rank = 0
    while (pivot := state.next_pivot()) is not None:
        r, c = pivot
        prow = state.take_row(r)
        inv = pow(prow[c], -1, p)
        for s in list(state.colrows[c]):
            row = state.rows[s]
            f = row[c] * inv % p
            for k, v in prow.items():
                old = row.get(k)
                if old is None:
                    row[k] = -f * v % p
                    state.add_entry(s, k)
                else:
                    x = (old - f * v) % p
                    if x:
                        row[k] = x
                    else:
                        del row[k]
                        state.drop_entry(s, k)
            if not row:
                del state.rows[s]
        rank += 1
    return rank


def _content(row: dict[int, int]) -> int:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    return g


def rank_exact(M: SparseRationalMatrix) -> int:
    """Exact rank by fraction-free integer elimination with content
    normalization of every updated row."""
    state = _Markowitz(_integer_rows(M))
    rank = 0
    while (pivot := state.next_pivot()) is not None:
        r, c = pivot
        prow = state.take_row(r)
        a = prow[c]
        for s in list(state.colrows[c]):
            row = state.rows[s]
            b = row[c]
            g = gcd(a, b)
            fa, fb = a // g, b // g
            if fa != 1:
                for k in row:
                    row[k] *= fa
            for k, v in prow.items():
                old = row.get(k)
                if old is None:
                    row[k] = -fb * v
                    state.add_entry(s, k)
                else:
                    x = old - fb * v
                    if x:
                        row[k] = x
                    else:
                        del row[k]
                        state.drop_entry(s, k)
            if not row:
                del state.rows[s]
                continue
            cont = _content(row)
            if cont > 1:
                for k in row:
                    row[k] //= cont
        rank += 1
    return rank


@dataclass(frozen=True)
class RankResult:
    rank: int
    modular: tuple[tuple[int, int], ...]
    certified: bool


def random_primes(k: int, rng: random.Random | None = None) -> list[int]:
    rng = rng or random.Random()
    out: set[int] = set()
    while len(out) < k:
        out.add(int(nextprime(rng.randrange(1 << 61, (1 << 62) - (1 << 40)))))
    return sorted(out)


def rank_report(M: SparseRationalMatrix, *, primes: int = 2, rng=None) -> RankResult:
    """Modular ranks at ``primes`` random primes, then an exact pass when
    the matrix is small enough.  Without the exact pass the result is the
    largest modular rank, a lower bound flagged as uncertified."""
    if M.nnz > _max_nonzeros():
        raise BudgetError(f"{M.nnz} nonzeros exceed TROPICAL_MAX_NONZEROS={_max_nonzeros()}")
    if M.nnz == 0:
        return RankResult(0, (), True)
    modular = tuple((p, rank_mod_p(M, p)) for p in random_primes(primes, rng))
    if max(M.shape) > _exact_limit():
        return RankResult(max(r for _, r in modular), modular, False)
    exact = rank_exact(M)
    for p, r in modular:
        if r > exact:
            raise ConsistencyError(f"rank mod {p} = {r} exceeds exact rank {exact}")
        if r < exact:
            log.warning("rank mod %d is %d, exact rank is %d", p, r, exact)
    return RankResult(exact, modular, True)


def escalate(M: SparseRationalMatrix, previous: RankResult, *, primes: int = 4) -> RankResult:
    more = tuple((p, rank_mod_p(M, p)) for p in random_primes(primes))
    modular = previous.modular + more
    return RankResult(max(r for _, r in modular), modular, previous.certified)


def rank(M: SparseRationalMatrix) -> int:
    return rank_report(M).rank


# ---------------------------------------------------------------------------
# homology


@dataclass(frozen=True)
class BettiTable:
    """Reduced Betti numbers by degree; ``values[i]`` is degree ``first + i``."""

    label: str
    first: int
    values: tuple[int, ...]
    empty: bool = False
    certified: bool = True
    ranks: dict = field(default_factory=dict, compare=False)

    def __getitem__(self, degree: int) -> int:
        i = degree - self.first
        return self.values[i] if 0 <= i < len(self.values) else 0

    def vector(self, lo: int, hi: int) -> tuple[int, ...]:
        return tuple(self[d] for d in range(lo, hi + 1))

    @property
    def total(self) -> int:
        return sum(self.values)

    @property
    def acyclic(self) -> bool:
        return not self.empty and self.total == 0

    def euler(self) -> int:
        return sum((-1) ** (self.first + i) * b for i, b in enumerate(self.values))

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "first_degree": self.first,
            "betti": list(self.values),
            "empty": self.empty,
            "certified": self.certified,
        }


def check_square_zero(C) -> None:
    for d in sorted(C.boundary):
        if d - 1 in C.boundary:
            prod = C.boundary[d - 1] @ C.boundary[d]
            if not prod.is_zero():
                raise ConsistencyError(f"{C.label}: d_{d - 1} d_{d} != 0")


def _threads() -> int:
    return max(1, int(os.environ.get("TROPICAL_THREADS", "1")))


def betti(C, *, check: bool = True) -> BettiTable:
    """Reduced Betti numbers of an (optionally augmented) complex."""
    if check:
        check_square_zero(C)
    degrees = list(C.degrees())
    if C.empty:
        return BettiTable(C.label, degrees[0], tuple(0 for _ in degrees), empty=True)
    mats = {d: C.boundary[d] for d in C.boundary}
    reports = _rank_all(mats)
    values = _betti_values(C, degrees, reports)
    certified = all(r.certified for r in reports.values())
    if not certified and sum(1 for b in values if b) > 1:
        log.info("%s: escalating modular ranks", C.label)
        reports = {
            d: r if r.certified else escalate(mats[d], r) for d, r in reports.items()
        }
        values = _betti_values(C, degrees, reports)
    if not certified and sum(1 for b in values if b) <= 1:
        # modular ranks only under-estimate, so every value is an upper
        # bound; with at most one nonzero bound the Euler characteristic
        # forces the exact answer
        certified = True
    table = BettiTable(
        C.label,
        degrees[0],
        tuple(values),
        certified=certified,
        ranks={d: r.rank for d, r in reports.items()},
    )
    cells = euler_from_cells(C)
    if cells != table.euler():
        raise ConsistencyError(f"{C.label}: Euler characteristic {cells} != {table.euler()}")
    return table


def _rank_all(mats: dict) -> dict[int, RankResult]:
    if _threads() > 1 and len(mats) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(_threads()) as pool:
            return dict(zip(mats, pool.map(rank_report, mats.values())))
    return {d: rank_report(M) for d, M in mats.items()}


def _betti_values(C, degrees, reports) -> list[int]:
    values = []
    for d in degrees:
        out_rank = reports[d].rank if d in reports else 0
        in_rank = reports[d + 1].rank if d + 1 in reports else 0
        b = C.dim(d) - out_rank - in_rank
        if b < 0:
            raise ConsistencyError(f"{C.label}: negative Betti number in degree {d}")
        values.append(b)
    return values


def euler_from_cells(C) -> int:
    return sum((-1) ** d * C.dim(d) for d in C.degrees())


def euler_characteristic(C) -> tuple[int, int]:
    """``(from cells, from Betti numbers)``; raises if they differ."""
    table = betti(C)
    return euler_from_cells(C), table.euler()
