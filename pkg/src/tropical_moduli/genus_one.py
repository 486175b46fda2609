"""Top homology of the genus-one moduli spaces as a symmetric group
representation.

The only cells surviving modulo the repeated-marking locus in top degree
are cycles carrying each leg once, one per dihedral class of cyclic orders.
Two independent computations of the character are provided: an induced
character from the dihedral group, and traces of the signed permutation
action on those cycles.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from sympy.utilities.iterables import partitions

from .canonical import perm_sign
from .complexes import marked_cycle
from .enumeration import DomainError
from .graphs import StableGraph, labeling, signature_of_key


def _check_n(n: int) -> None:
    if n < 3:
        raise DomainError("need n >= 3 (smaller genus-one spaces are contractible)")


def top_betti_formula(n: int) -> int:
    _check_n(n)
    return factorial(n - 1) // 2


Partition = tuple[int, ...]


def partitions_of(n: int) -> list[Partition]:
    out = []
    for p in partitions(n):
        out.append(tuple(sorted((k for k, m in p.items() for _ in range(m)), reverse=True)))
    return sorted(out, reverse=True)


def cycle_type(perm) -> Partition:
    seen = [False] * len(perm)
    lengths = []
    for i in range(len(perm)):
        if not seen[i]:
            j, k = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                k += 1
            lengths.append(k)
    return tuple(sorted(lengths, reverse=True))


def class_representative(shape: Partition) -> tuple[int, ...]:
    perm = []
    start = 0
    for k in shape:
        perm += [start + (i + 1) % k for i in range(k)]
        start += k
    return tuple(perm)


def class_size(shape: Partition) -> int:
    n = sum(shape)
    denom = 1
    for k in set(shape):
        m = shape.count(k)
        denom *= k**m * factorial(m)
    return factorial(n) // denom


@dataclass(frozen=True)
class ClassFunction:
    n: int
    values: dict  # partition -> Fraction

    def __getitem__(self, shape: Partition):
        return self.values[tuple(shape)]

    @property
    def degree(self):
        return self.values[(1,) * self.n]

    def inner(self, other: ClassFunction) -> Fraction:
        """``<χ, ψ>``; characters of S_n are real, so no conjugation."""
        total = sum(class_size(p) * Fraction(self[p]) * Fraction(other[p]) for p in self.values)
        return total / factorial(self.n)

    def to_json(self) -> str:
        values = {",".join(map(str, p)): str(v) for p, v in self.values.items()}
        return json.dumps({"n": self.n, "values": values}, indent=1)

    def table(self) -> str:
        width = max(len(" ".join(map(str, p))) for p in self.values)
        return "\n".join(
            f"{' '.join(map(str, p)):>{width}}  {v}" for p, v in self.values.items()
        )


def dihedral_group(n: int) -> list[tuple[int, ...]]:
    """Rotations and reflections of vertices ``0..n-1`` placed in cyclic order."""
    rots = [tuple((i + k) % n for i in range(n)) for k in range(n)]
    refls = [tuple((k - i) % n for i in range(n)) for k in range(n)]
    return rots + refls


def edge_action(d: tuple[int, ...]) -> tuple[int, ...]:
    """Permutation of the edge slots ``{i, i+1}`` induced by a vertex symmetry."""
    n = len(d)
    slot = {frozenset((i, (i + 1) % n)): i for i in range(n)}
    return tuple(slot[frozenset((d[i], d[(i + 1) % n]))] for i in range(n))


def _compose(a, b):
    """``a ∘ b``."""
    return tuple(a[x] for x in b)


def _inverse(a):
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


@lru_cache(maxsize=None)
def induced_character(n: int, twist: str = "edges") -> ClassFunction:
    """Character of the representation of S_n induced from the dihedral
    group, where the dihedral group acts through the sign of its action on
    the cycle's edges (``twist="edges"``) or on its vertices
    (``twist="vertices"``).  Summed over all of S_n."""
    _check_n(n)
    D = dihedral_group(n)
    if twist == "edges":
        chi = {d: perm_sign(edge_action(d)) for d in D}
    elif twist == "vertices":
        chi = {d: perm_sign(d) for d in D}
    else:
        raise ValueError("twist must be 'edges' or 'vertices'")
    values = {}
    group = list(itertools.permutations(range(n)))
    for shape in partitions_of(n):
        pi = class_representative(shape)
        total = 0
        for x in group:
            y = _compose(_inverse(x), _compose(pi, x))
            if y in chi:
                total += chi[y]
        values[shape] = Fraction(total, len(D))
    return ClassFunction(n, values)


def cycle_basis(n: int) -> list[StableGraph]:
    """One marked ``n``-cycle per dihedral class of cyclic leg orders."""
    _check_n(n)
    seen = {}
    for rest in itertools.permutations(range(2, n + 1)):
        G = marked_cycle((1,) + rest)
        sig = signature_of_key(labeling(G).key)
        seen.setdefault(sig, G)
    return [seen[s] for s in sorted(seen)]


def act(perm, G: StableGraph) -> StableGraph:
    """Relabel legs: leg ``i`` (0-based) becomes leg ``perm[i]``; the edge
    order is unchanged."""
    marks = [0] * G.n
    for i, v in enumerate(G.marks):
        marks[perm[i]] = v
    return StableGraph(G.weights, G.edges, tuple(marks))


@lru_cache(maxsize=None)
def cell_action_character(n: int) -> ClassFunction:
    """Traces of the signed permutation action of S_n on the marked cycles."""
    basis = cycle_basis(n)
    ref = {signature_of_key(labeling(G).key): labeling(G).sign for G in basis}
    values = {}
    for shape in partitions_of(n):
        pi = class_representative(shape)
        trace = 0
        for G in basis:
            H = act(pi, G)
            lab = labeling(H)
            sig = signature_of_key(lab.key)
            if sig == signature_of_key(labeling(G).key):
                trace += lab.sign * ref[sig]
        values[shape] = Fraction(trace)
    return ClassFunction(n, values)
