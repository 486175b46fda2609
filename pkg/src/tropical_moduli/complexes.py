"""Cellular chain complexes of the tropical moduli spaces and the graph
complexes obtained from them as quotients.

A ``p``-cell is a graph with ``p + 1`` edges together with an ordering of
its edges, taken up to the relation ``[G, ω∘σ] = sgn(σ)[G, ω]``.  Each
isomorphism class contributes one basis vector unless some automorphism
permutes its edges oddly.  The reference ordering of a class is the edge
order of its representative graph.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

from .enumeration import DomainError, check_gn, enumerate_all, max_edges
from .graphs import (
    StableGraph,
    contract_edge,
    in_bridge_closure,
    labeling,
    locus_predicates,
    relabel,
    signature_of_key,
)
from .linalg import SparseRationalMatrix

AUGMENTATION = "*"


# ---------------------------------------------------------------------------
# selectors


@dataclass(frozen=True)
class Selector:
    """A set of cells given by a predicate; ``closed`` means the set is a
    subcomplex (closed under edge contraction)."""

    name: str
    predicate: Callable[[StableGraph], bool] = field(compare=False)
    closed: bool = True

    def __call__(self, G: StableGraph) -> bool:
        return self.predicate(G)

    def __or__(self, other: Selector) -> Selector:
        return Selector(
            f"({self.name}|{other.name})",
            lambda G: self(G) or other(G),
            self.closed and other.closed,
        )

    def __and__(self, other: Selector) -> Selector:
        return Selector(
            f"({self.name}&{other.name})",
            lambda G: self(G) and other(G),
            self.closed and other.closed,
        )


FULL = Selector("full", lambda G: True)
W = Selector("w", lambda G: locus_predicates(G).has_positive_weight)
LW = Selector("lw", lambda G: locus_predicates(G).has_loop_or_weight)
REP = Selector("rep", lambda G: locus_predicates(G).has_repeated_marking)
BR = Selector("br", in_bridge_closure)
PURE = Selector("pure", lambda G: locus_predicates(G).is_pure, closed=False)

SELECTORS = {s.name: s for s in (FULL, W, LW, REP, BR, PURE)}


def parse_selector(text: str) -> Selector:
    """Parse ``"w"``, ``"w|rep"``, ``"lw&br"``; ``&`` binds tighter than ``|``."""
    terms = []
    for term in text.lower().split("|"):
        factors = []
        for name in term.split("&"):
            name = name.strip()
            if name not in SELECTORS:
                raise ValueError(f"unknown selector {name!r}; choose from {sorted(SELECTORS)}")
            factors.append(SELECTORS[name])
        sel = factors[0]
        for f in factors[1:]:
            sel = sel & f
        terms.append(sel)
    sel = terms[0]
    for t in terms[1:]:
        sel = sel | t
    return sel


# ---------------------------------------------------------------------------
# faces


@dataclass(frozen=True)
class Face:
    edge: int
    signature: str
    sign: int  # sign of the face relative to the canonical representative


def face_of(G: StableGraph, i: int) -> Face | None:
    """The ``i``-th face of ``[G, edge order of G]``, or ``None`` if it is a
    degenerate generator.  The alternating sign ``(-1)**i`` is not included."""
    H = contract_edge(G, i)
    lab = labeling(H)
    if lab.sign == 0:
        return None
    return Face(i, signature_of_key(lab.key), lab.sign)


def reference_sign(G: StableGraph) -> int:
    """``s`` with ``[G, edge order of G] = s [canonical representative]``."""
    return labeling(G).sign


class CellAtlas:
    """Every cell of one moduli space with its faces, computed once."""

    def __init__(self, g: int, n: int):
        check_gn(g, n)
        self.g, self.n = g, n
        self.top = max_edges(g, n)
        strata = enumerate_all(g, n)
        self.graphs: dict[int, tuple[StableGraph, ...]] = {}
        self.signatures: dict[int, tuple[str, ...]] = {}
        self.nondegenerate: dict[int, tuple[bool, ...]] = {}
        for key, stratum in strata.items():
            self.graphs[key.edges] = stratum.graphs
            self.signatures[key.edges] = stratum.signatures
            self.nondegenerate[key.edges] = tuple(
                labeling(G).sign != 0 for G in stratum.graphs
            )
        self._faces: dict[int, tuple[tuple[Face, ...], ...]] = {}
        self._flags: dict[str, dict[str, bool]] = {}

    def cells(self, edges: int):
        """Non-degenerate ``(signature, representative)`` pairs."""
        for sig, G, ok in zip(
            self.signatures[edges], self.graphs[edges], self.nondegenerate[edges]
        ):
            if ok:
                yield sig, G

    def faces(self, edges: int) -> tuple[tuple[Face, ...], ...]:
        if edges not in self._faces:
            out = []
            for G in self.graphs[edges]:
                if edges == 1:
                    out.append(())
                    continue
                out.append(tuple(f for i in range(edges) if (f := face_of(G, i)) is not None))
            self._faces[edges] = tuple(out)
        return self._faces[edges]

    def selects(self, sel: Selector, sig: str, G: StableGraph) -> bool:
        cache = self._flags.setdefault(sel.name, {})
        if sig not in cache:
            cache[sig] = bool(sel(G))
        return cache[sig]


@lru_cache(maxsize=None)
def atlas(g: int, n: int) -> CellAtlas:
    return CellAtlas(g, n)


# ---------------------------------------------------------------------------
# chain complexes


@dataclass(frozen=True)
class ChainComplexQ:
    """Finite chain complex over Q.

    ``bases[d]`` lists signatures of degree ``d`` generators; ``reps[d]``
    holds the graph whose edge order fixes each generator's orientation.
    ``boundary[d]`` is the matrix of ``C_d -> C_{d-1}`` with columns indexed
    by ``bases[d]``.  An augmented complex has the single generator
    ``AUGMENTATION`` in degree ``-1``.
    """

    label: str
    g: int
    n: int
    offset: int
    lo: int
    hi: int
    bases: dict[int, tuple[str, ...]]
    reps: dict[int, tuple[StableGraph, ...]]
    boundary: dict[int, SparseRationalMatrix]
    augmented: bool
    empty: bool

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def dim(self, d: int) -> int:
        return len(self.bases.get(d, ()))

    def dims(self) -> dict[int, int]:
        return {d: self.dim(d) for d in self.degrees()}

    def degree_of(self, G: StableGraph) -> int:
        return G.num_edges - self.offset

    def index(self, d: int) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.bases.get(d, ()))}

    def vector(self, chain: Iterable[tuple[StableGraph, int]]) -> tuple[int, dict[int, int]]:
        """Coordinates of ``Σ c [G, edge order of G]`` in the basis; graphs
        whose class is degenerate or outside the complex contribute 0."""
        out: dict[int, int] = {}
        degree = None
        for G, c in chain:
            d = self.degree_of(G)
            if degree is None:
                degree = d
            elif d != degree:
                raise ValueError("chain mixes degrees")
            s = reference_sign(G)
            if s == 0:
                continue
            pos = self._positions(d).get(canonical_signature(G))
            if pos is None:
                continue
            i, t = pos
            out[i] = out.get(i, 0) + c * s * t
        if degree is None:
            raise ValueError("empty chain")
        return degree, {i: v for i, v in out.items() if v}

    def _positions(self, d: int) -> dict[str, tuple[int, int]]:
        return {
            s: (i, reference_sign(G))
            for i, (s, G) in enumerate(zip(self.bases.get(d, ()), self.reps.get(d, ())))
        }

    def export(self, d: int) -> tuple[str, str]:
        """JSON header and coordinate-triplet text for ``boundary[d]``."""
        header = {
            "label": self.label,
            "g": self.g,
            "n": self.n,
            "source_degree": d,
            "source_basis": list(self.bases.get(d, ())),
            "target_basis": list(self.bases.get(d - 1, ())),
        }
        return json.dumps(header, indent=1), self.boundary[d].to_text()


def canonical_signature(G: StableGraph) -> str:
    return signature_of_key(labeling(G).key)


def _assemble(
    label: str,
    g: int,
    n: int,
    keep: Callable[[str, StableGraph], bool],
    *,
    offset: int,
    augment: bool,
    seed: int | None = None,
) -> ChainComplexQ:
    at = atlas(g, n)
    rng = random.Random(seed) if seed is not None else None
    bases: dict[int, tuple[str, ...]] = {}
    reps: dict[int, tuple[StableGraph, ...]] = {}
    signs: dict[str, int] = {}
    for e in range(1, at.top + 1):
        chosen = [(s, G) for s, G in at.cells(e) if keep(s, G)]
        if rng is not None:
            rng.shuffle(chosen)
            chosen = [(s, _random_relabel(G, rng)) for s, G in chosen]
        bases[e - offset] = tuple(s for s, _ in chosen)
        reps[e - offset] = tuple(G for _, G in chosen)
        for s, G in chosen:
            signs[s] = reference_sign(G)
    empty = not any(bases.values())
    lo, hi = 1 - offset, at.top - offset
    if augment and not empty:
        bases[lo - 1] = (AUGMENTATION,)
        lo -= 1
    boundary: dict[int, SparseRationalMatrix] = {}
    for e in range(1, at.top + 1):
        d = e - offset
        target = {s: i for i, s in enumerate(bases.get(d - 1, ()))}
        cols = []
        if e == 1:
            if augment and not empty:
                cols = [{0: 1} for _ in bases[d]]
            else:
                cols = [{} for _ in bases[d]]
        elif rng is None:
            index = at.signatures[e]
            lookup = {s: j for j, s in enumerate(index)}
            faces = at.faces(e)
            for s in bases[d]:
                cols.append(_column(faces[lookup[s]], target, signs))
        else:
            for G in reps[d]:
                fs = [f for i in range(e) if (f := face_of(G, i)) is not None]
                cols.append(_column(fs, target, signs))
        if e > 1 or augment:
            boundary[d] = SparseRationalMatrix.from_columns(len(bases.get(d - 1, ())), cols)
    if not augment:
        boundary.pop(lo, None)
    return ChainComplexQ(label, g, n, offset, lo, hi, bases, reps, boundary, augment and not empty, empty)


def _column(faces, target, signs) -> dict[int, int]:
    col: dict[int, int] = {}
    for f in faces:
        r = target.get(f.signature)
        if r is None:
            continue
        # [H] = f.sign [canonical] and [rep] = signs[...] [canonical]
        col[r] = col.get(r, 0) + (-1) ** f.edge * f.sign * signs[f.signature]
    return {r: v for r, v in col.items() if v}


def _random_relabel(G: StableGraph, rng: random.Random) -> StableGraph:
    vp = list(range(G.num_vertices))
    rng.shuffle(vp)
    order = list(range(G.num_edges))
    rng.shuffle(order)
    return relabel(G, vp, order)


def _check_closed(sel: Selector) -> None:
    if not sel.closed:
        raise DomainError(f"selector {sel.name!r} is not a subcomplex")


def cellular_complex(g: int, n: int, sel: Selector | str = FULL, *, seed: int | None = None) -> ChainComplexQ:
    """Augmented cellular chains of the subcomplex picked out by ``sel``.

    With ``seed``, basis order and reference orientations are randomized
    and every face is recomputed from the randomized representatives.
    """
    if isinstance(sel, str):
        sel = parse_selector(sel)
    check_gn(g, n)
    _check_closed(sel)
    at = atlas(g, n)
    return _assemble(
        f"Delta[{g},{n}]:{sel.name}",
        g,
        n,
        lambda s, G: at.selects(sel, s, G),
        offset=1,
        augment=True,
        seed=seed,
    )


def relative_complex(g: int, n: int, ambient: Selector | str, sub: Selector | str) -> ChainComplexQ:
    """Chains of ``ambient`` modulo chains of ``sub`` (no augmentation)."""
    if isinstance(ambient, str):
        ambient = parse_selector(ambient)
    if isinstance(sub, str):
        sub = parse_selector(sub)
    check_gn(g, n)
    _check_closed(ambient)
    _check_closed(sub)
    at = atlas(g, n)
    for e in range(1, at.top + 1):
        for s, G in at.cells(e):
            if at.selects(sub, s, G) and not at.selects(ambient, s, G):
                raise DomainError(f"{sub.name} is not contained in {ambient.name}")
    return _assemble(
        f"Delta[{g},{n}]:{ambient.name}/{sub.name}",
        g,
        n,
        lambda s, G: at.selects(ambient, s, G) and not at.selects(sub, s, G),
        offset=1,
        augment=False,
    )


def marked_graph_complex(g: int, n: int) -> ChainComplexQ:
    """Weight-free graphs in degree ``|E| - 2g``; loop contractions vanish
    because they leave the weight-free locus."""
    if g < 1:
        raise DomainError("the marked graph complex needs g >= 1")
    check_gn(g, n)
    at = atlas(g, n)
    return _assemble(
        f"G[{g},{n}]",
        g,
        n,
        lambda s, G: at.selects(PURE, s, G),
        offset=2 * g,
        augment=False,
    )


def K_complex(g: int, n: int) -> ChainComplexQ:
    """Weight-free graphs with injective marking, degree ``|E| - 2g``."""
    if g < 1 or (g, n) == (1, 1):
        raise DomainError("K complex needs g >= 1 and (g, n) != (1, 1)")
    check_gn(g, n)
    at = atlas(g, n)
    inj = PURE & Selector("inj", lambda G: not locus_predicates(G).has_repeated_marking, False)
    return _assemble(
        f"K[{g},{n}]",
        g,
        n,
        lambda s, G: at.selects(inj, s, G),
        offset=2 * g,
        augment=False,
    )


# ---------------------------------------------------------------------------
# boundaries of explicit chains


def boundary_of(
    chain: Iterable[tuple[StableGraph, int]],
    *,
    augmented: bool = True,
    drop: Selector | None = None,
) -> dict[str, int]:
    """Boundary of ``Σ c [G, edge order of G]`` as ``{signature: coeff}``
    over canonical representatives.

    Faces are computed directly, so no enumeration of the ambient space is
    needed.  Faces in ``drop`` are discarded (boundary in a relative
    complex); one-edge graphs map to the augmentation unless
    ``augmented`` is false.
    """
    out: dict[str, int] = {}
    edges = None
    for G, c in chain:
        if edges is None:
            edges = G.num_edges
        elif G.num_edges != edges:
            raise ValueError("chain mixes degrees")
        s = reference_sign(G)
        if s == 0 or c == 0:
            continue
        if edges == 1:
            if augmented:
                out[AUGMENTATION] = out.get(AUGMENTATION, 0) + c
            continue
        for i in range(edges):
            H = contract_edge(G, i)
            lab = labeling(H)
            if lab.sign == 0:
                continue
            if drop is not None and drop(H):
                continue
            sig = signature_of_key(lab.key)
            out[sig] = out.get(sig, 0) + (-1) ** i * lab.sign * c
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# named graphs


def wheel(g: int, marked_hub: bool = False) -> StableGraph:
    """``g``-cycle plus a hub joined to every rim vertex (hub is vertex 0)."""
    if g < 3:
        raise DomainError("wheels need at least three spokes")
    rim = [(i, i % g + 1) for i in range(1, g + 1)]
    spokes = [(0, i) for i in range(1, g + 1)]
    return StableGraph.build([0] * (g + 1), rim + spokes, (0,) if marked_hub else ())


def theta() -> StableGraph:
    return StableGraph.build([0, 0], [(0, 1)] * 3)


def marked_cycle(order) -> StableGraph:
    """Weight-free cycle whose ``i``-th vertex carries leg ``order[i]``."""
    k = len(order)
    marks = [0] * k
    for v, leg in enumerate(order):
        marks[leg - 1] = v
    if k == 1:
        return StableGraph.build([0], [(0, 0)], marks)
    return StableGraph.build([0] * k, [(i, (i + 1) % k) for i in range(k)], marks)
