"""Chain maps between the unmarked and once-marked moduli spaces.

``t`` marks each vertex ``v`` with coefficient ``χ(v) = 2w(v) - 2 + val(v)``;
``π`` forgets the marking, killing graphs that become unstable.  In degree
-1 the maps are multiplication by ``2g - 2`` and by 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import ChainComplexQ, cellular_complex, reference_sign, canonical_signature
from .enumeration import DomainError
from .graphs import StableGraph
from .linalg import SparseRationalMatrix, betti


@dataclass(frozen=True)
class ChainMap:
    label: str
    source: ChainComplexQ
    target: ChainComplexQ
    matrices: dict[int, SparseRationalMatrix]

    def __getitem__(self, d: int) -> SparseRationalMatrix:
        if d in self.matrices:
            return self.matrices[d]
        return SparseRationalMatrix.zero(self.target.dim(d), self.source.dim(d))

    def degrees(self):
        return sorted(set(self.source.degrees()) | set(self.target.degrees()))

    def commutator(self, d: int) -> SparseRationalMatrix:
        """``∂f - f∂`` on degree ``d`` chains."""
        src, tgt = self.source, self.target
        lhs = _boundary(tgt, d) @ self[d]
        rhs = self[d - 1] @ _boundary(src, d)
        return lhs - rhs

    def is_chain_map(self) -> bool:
        return all(self.commutator(d).is_zero() for d in self.degrees())

    def compose(self, first: ChainMap) -> ChainMap:
        """``self ∘ first``."""
        mats = {d: self[d] @ first[d] for d in first.degrees()}
        return ChainMap(f"{self.label}∘{first.label}", first.source, self.target, mats)


def _boundary(C: ChainComplexQ, d: int) -> SparseRationalMatrix:
    if d in C.boundary:
        return C.boundary[d]
    return SparseRationalMatrix.zero(C.dim(d - 1), C.dim(d))


def _locate(C: ChainComplexQ, d: int, G: StableGraph, cache: dict):
    """``(index, sign)`` with ``[G] = sign * basis[index]``, or ``None``."""
    if d not in cache:
        cache[d] = {
            s: (i, reference_sign(R)) for i, (s, R) in enumerate(zip(C.bases[d], C.reps[d]))
        }
    s = reference_sign(G)
    if s == 0:
        return None
    hit = cache[d].get(canonical_signature(G))
    if hit is None:
        return None
    i, t = hit
    return i, s * t


def _check_genus(g: int) -> None:
    if g < 2:
        raise DomainError("transfer maps need g >= 2")


def transfer_t(g: int, source=None, target=None) -> ChainMap:
    _check_genus(g)
    source = source or cellular_complex(g, 0)
    target = target or cellular_complex(g, 1)
    cache: dict = {}
    mats = {}
    for d in source.degrees():
        if d == -1:
            mats[d] = SparseRationalMatrix.identity(1, 2 * g - 2)
            continue
        cols = []
        for G in source.reps[d]:
            col: dict[int, int] = {}
            for v in range(G.num_vertices):
                Gv = StableGraph(G.weights, G.edges, (v,))
                hit = _locate(target, d, Gv, cache)
                if hit is None:
                    continue
                i, s = hit
                col[i] = col.get(i, 0) + s * G.chi(v)
            cols.append(col)
        mats[d] = SparseRationalMatrix.from_columns(target.dim(d), cols)
    return ChainMap(f"t[{g}]", source, target, mats)


def forgets_to_stable(G: StableGraph) -> bool:
    (v,) = G.marks
    return not (G.weights[v] == 0 and G.valence(v) == 3)


def projection_pi(g: int, source=None, target=None) -> ChainMap:
    _check_genus(g)
    source = source or cellular_complex(g, 1)
    target = target or cellular_complex(g, 0)
    cache: dict = {}
    mats = {}
    for d in source.degrees():
        if d == -1:
            mats[d] = SparseRationalMatrix.identity(1)
            continue
        cols = []
        for G in source.reps[d]:
            col = {}
            if forgets_to_stable(G):
                hit = _locate(target, d, StableGraph(G.weights, G.edges, ()), cache)
                if hit is not None:
                    col[hit[0]] = hit[1]
            cols.append(col)
        mats[d] = SparseRationalMatrix.from_columns(target.dim(d), cols)
    return ChainMap(f"pi[{g}]", source, target, mats)


@dataclass
class TransferReport:
    g: int
    t_chain_map: bool
    pi_chain_map: bool
    identity_holds: bool
    betti_unmarked: tuple[int, ...]
    betti_marked: tuple[int, ...]
    failures: list[str] = field(default_factory=list)

    @property
    def injective_on_homology(self) -> bool:
        return all(a <= b for a, b in zip(self.betti_unmarked, self.betti_marked))

    @property
    def ok(self) -> bool:
        return (
            self.t_chain_map
            and self.pi_chain_map
            and self.identity_holds
            and self.injective_on_homology
        )


def verify_transfer_identity(g: int) -> TransferReport:
    """Check both chain-map conditions and ``π∘t = (2g-2)·id`` exactly."""
    _check_genus(g)
    unmarked = cellular_complex(g, 0)
    marked = cellular_complex(g, 1)
    t = transfer_t(g, unmarked, marked)
    pi = projection_pi(g, marked, unmarked)
    failures = []
    composite = pi.compose(t)
    identity_ok = True
    for d in unmarked.degrees():
        diff = composite[d] - SparseRationalMatrix.identity(unmarked.dim(d), 2 * g - 2)
        for r, c, v in diff.triplets():
            identity_ok = False
            failures.append(
                f"degree {d}: (pi t - {2 * g - 2} id)[{unmarked.bases[d][r]}, "
                f"{unmarked.bases[d][c]}] = {v}"
            )
    for name, f in (("t", t), ("pi", pi)):
        for d in f.degrees():
            if not f.commutator(d).is_zero():
                failures.append(f"{name} does not commute with the boundary in degree {d}")
    top = 3 * g - 4
    b0 = betti(unmarked).vector(0, top)
    b1 = betti(marked).vector(0, top)
    return TransferReport(
        g,
        t.is_chain_map(),
        pi.is_chain_map(),
        identity_ok,
        b0,
        b1,
        failures,
    )
