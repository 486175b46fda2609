"""Stable marked weighted graphs: the objects parametrizing cells of the
tropical moduli spaces.

A graph is stored as a vertex-weight tuple, an ordered edge list of vertex
pairs ``(a, b)`` with ``a <= b`` (a loop is ``(a, a)``) and a marking tuple
whose ``i``-th entry is the vertex carrying leg ``i + 1``.  The order of the
edge list is significant: it is the edge labeling used by the chain
complexes.  An equivalent half-edge view is available through
:meth:`StableGraph.half_edges`.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

from .canonical import Labeling, canonical_labeling, perm_sign


class GraphError(ValueError):
    """Structurally invalid graph (bad indices, disconnected, unstable...)."""


@dataclass(frozen=True)
class HalfEdgeStructure:
    """Elements ``0..V-1`` are vertices; ``V+2k`` and ``V+2k+1`` are the two
    halves of edge ``k``.  ``s`` is the involution, ``r`` the incidence."""

    num_vertices: int
    s: tuple[int, ...]
    r: tuple[int, ...]

    def validate(self) -> None:
        size = len(self.s)
        if len(self.r) != size:
            raise GraphError("s and r must have equal length")
        for x in range(size):
            if self.s[self.s[x]] != x:
                raise GraphError("s is not an involution")
            if self.r[self.r[x]] != self.r[x]:
                raise GraphError("r is not idempotent")
            fixed_s = self.s[x] == x
            fixed_r = self.r[x] == x
            if fixed_s != fixed_r or fixed_s != (x < self.num_vertices):
                raise GraphError("fixed points of s and r must be the vertices")

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for h in range(self.num_vertices, len(self.s)):
            if h < self.s[h]:
                a, b = self.r[h], self.r[self.s[h]]
                out.append((a, b) if a <= b else (b, a))
        return out


@dataclass(frozen=True)
class StableGraph:
    weights: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    marks: tuple[int, ...] = ()

    @classmethod
    def build(cls, weights, edges, marks=()) -> StableGraph:
        """Construct from loose iterables, normalizing edge orientation."""
        es = tuple((a, b) if a <= b else (b, a) for a, b in edges)
        return cls(tuple(weights), es, tuple(marks))

    @property
    def num_vertices(self) -> int:
        return len(self.weights)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def n(self) -> int:
        return len(self.marks)

    @property
    def g(self) -> int:
        return genus(self)

    def valence(self, v: int) -> int:
        """Incident half-edges plus markings (a loop counts twice)."""
        val = sum((a == v) + (b == v) for a, b in self.edges)
        return val + sum(1 for m in self.marks if m == v)

    def chi(self, v: int) -> int:
        return 2 * self.weights[v] - 2 + self.valence(v)

    def half_edges(self) -> HalfEdgeStructure:
        nv = self.num_vertices
        s = list(range(nv))
        r = list(range(nv))
        for k, (a, b) in enumerate(self.edges):
            h = nv + 2 * k
            s += [h + 1, h]
            r += [a, b]
        return HalfEdgeStructure(nv, tuple(s), tuple(r))

    @classmethod
    def from_half_edges(cls, hs: HalfEdgeStructure, weights, marks=()) -> StableGraph:
        hs.validate()
        return cls.build(weights, hs.edges(), marks)

    def validate(self, g: int | None = None, n: int | None = None) -> None:
        nv = self.num_vertices
        if nv == 0:
            raise GraphError("graph has no vertices")
        if any(w < 0 for w in self.weights):
            raise GraphError("negative vertex weight")
        for a, b in self.edges:
            if not (0 <= a <= b < nv):
                raise GraphError(f"bad edge {(a, b)}")
        if any(not 0 <= m < nv for m in self.marks):
            raise GraphError("marking refers to a missing vertex")
        if not is_connected(self):
            raise GraphError("graph is disconnected")
        if not is_stable(self):
            raise GraphError("graph is not stable")
        if g is not None and genus(self) != g:
            raise GraphError(f"genus is {genus(self)}, expected {g}")
        if n is not None and self.n != n:
            raise GraphError(f"{self.n} markings, expected {n}")


def is_connected(G: StableGraph) -> bool:
    parent = list(range(G.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in G.edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in range(G.num_vertices)}) == 1


def genus(G: StableGraph) -> int:
    if not is_connected(G):
        raise GraphError("genus of a disconnected graph")
    return G.num_edges - G.num_vertices + 1 + sum(G.weights)


def is_stable(G: StableGraph) -> bool:
    return all(G.chi(v) > 0 for v in range(G.num_vertices))


# ---------------------------------------------------------------------------
# contraction


def contract_edge(G: StableGraph, k: int) -> StableGraph:
    """Contract edge ``k``; the remaining edges keep their relative order."""
    a, b = G.edges[k]
    rest = G.edges[:k] + G.edges[k + 1:]
    weights = list(G.weights)
    if a == b:
        weights[a] += 1
        return StableGraph(tuple(weights), rest, G.marks)
    weights[a] += weights[b]
    del weights[b]

    def f(x):
        if x == b:
            return a
        return x - 1 if x > b else x

    edges = []
    for x, y in rest:
        x, y = f(x), f(y)
        edges.append((x, y) if x <= y else (y, x))
    return StableGraph(tuple(weights), tuple(edges), tuple(f(m) for m in G.marks))


def contract_set(G: StableGraph, edge_set, order=None) -> StableGraph:
    """Contract every edge in ``edge_set`` (indices into ``G.edges``).

    ``order`` optionally fixes the sequence of single contractions; the
    result is the same graph up to isomorphism for every order.
    """
    todo = list(order if order is not None else sorted(edge_set))
    if set(todo) != set(edge_set):
        raise ValueError("order must be a permutation of edge_set")
    ids = list(range(G.num_edges))
    H = G
    for k in todo:
        pos = ids.index(k)
        H = contract_edge(H, pos)
        del ids[pos]
    return H


# ---------------------------------------------------------------------------
# isomorphism classes


def signature_of_key(key) -> str:
    w, m, e = key
    return "w{}|m{}|e{}".format(
        ",".join(map(str, w)),
        ",".join(map(str, m)),
        ",".join(f"{a}-{b}" for a, b in e),
    )


@lru_cache(maxsize=1 << 16)
def _labeling(weights, edges, marks) -> Labeling:
    return canonical_labeling(weights, edges, marks)


def labeling(G: StableGraph) -> Labeling:
    return _labeling(G.weights, G.edges, G.marks)


def canonical_form(G: StableGraph) -> str:
    """Isomorphism-class signature, invariant under any relabeling."""
    return signature_of_key(labeling(G).key)


def canonical_representative(G: StableGraph) -> StableGraph:
    w, m, e = labeling(G).key
    return StableGraph(w, e, m)


def has_odd_automorphism(G: StableGraph) -> bool:
    return labeling(G).sign == 0


@dataclass(frozen=True)
class Automorphism:
    vertex_perm: tuple[int, ...]
    half_edge_perm: tuple[int, ...]
    edge_perm: tuple[int, ...]
    sign: int


def automorphisms(G: StableGraph) -> list[Automorphism]:
    """All automorphisms of the half-edge structure preserving weights and
    markings.  Half-edge ``2k`` of edge ``k`` sits at ``edges[k][0]``."""
    lab = labeling(G)
    c0 = lab.vertex_maps[0]
    inv0 = [0] * len(c0)
    for v, c in enumerate(c0):
        inv0[c] = v
    classes: dict[tuple[int, int], list[int]] = {}
    for k, e in enumerate(G.edges):
        classes.setdefault(e, []).append(k)
    result = []
    for cj in lab.vertex_maps:
        alpha = tuple(inv0[cj[v]] for v in range(len(cj)))
        choices = []
        for (a, b), ks in classes.items():
            x, y = alpha[a], alpha[b]
            target = classes[(x, y) if x <= y else (y, x)]
            options = []
            for image in itertools.permutations(target):
                if a == b:
                    for flips in itertools.product((0, 1), repeat=len(ks)):
                        options.append([(k, t, f) for k, t, f in zip(ks, image, flips)])
                else:
                    options.append(
                        [(k, t, int(G.edges[t][0] != x)) for k, t in zip(ks, image)]
                    )
            choices.append(options)
        for combo in itertools.product(*choices):
            ne = G.num_edges
            eperm = [0] * ne
            hperm = [0] * (2 * ne)
            for part in combo:
                for k, t, flip in part:
                    eperm[k] = t
                    hperm[2 * k] = 2 * t + flip
                    hperm[2 * k + 1] = 2 * t + 1 - flip
            result.append(Automorphism(alpha, tuple(hperm), tuple(eperm), perm_sign(eperm)))
    return result


def relabel(G: StableGraph, vertex_perm, edge_order, flips=None) -> StableGraph:
    """Isomorphic copy: vertex ``v`` becomes ``vertex_perm[v]``, the new edge
    list is ``[edges[k] for k in edge_order]`` with optional endpoint flips."""
    edges = []
    for i, k in enumerate(edge_order):
        a, b = G.edges[k]
        a, b = vertex_perm[a], vertex_perm[b]
        if flips is not None and flips[i]:
            a, b = b, a
        edges.append((a, b))
    weights = [0] * G.num_vertices
    for v, w in enumerate(G.weights):
        weights[vertex_perm[v]] = w
    return StableGraph.build(weights, edges, [vertex_perm[m] for m in G.marks])


# ---------------------------------------------------------------------------
# bridges and blocks


def _components_without(G: StableGraph, skip: int) -> list[int]:
    parent = list(range(G.num_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k, (a, b) in enumerate(G.edges):
        if k != skip:
            parent[find(a)] = find(b)
    return [find(v) for v in range(G.num_vertices)]


def side_type(G: StableGraph, vertices) -> tuple[int, int]:
    """(genus, marking count) of the subgraph induced on ``vertices``."""
    vs = set(vertices)
    inside = sum(1 for a, b in G.edges if a in vs and b in vs)
    g = inside - len(vs) + 1 + sum(G.weights[v] for v in vs)
    return g, sum(1 for m in G.marks if m in vs)


def bridges(G: StableGraph) -> list[tuple[int, tuple[int, int]]]:
    """Bridges with their normalized type (lexicographically smaller side)."""
    g, n = genus(G), G.n
    out = []
    for k, (a, b) in enumerate(G.edges):
        if a == b:
            continue
        comp = _components_without(G, k)
        if comp[a] == comp[b]:
            continue
        side = side_type(G, [v for v in range(G.num_vertices) if comp[v] == comp[a]])
        other = (g - side[0], n - side[1])
        out.append((k, min(side, other)))
    return out


def _blocks(G: StableGraph) -> list[list[int]]:
    """Blocks as lists of edge indices (lowpoint DFS over edge ids)."""
    nv = G.num_vertices
    incident: list[list[tuple[int, int]]] = [[] for _ in range(nv)]
    blocks: list[list[int]] = []
    for k, (a, b) in enumerate(G.edges):
        if a == b:
            blocks.append([k])
        else:
            incident[a].append((b, k))
            incident[b].append((a, k))
    disc = [-1] * nv
    low = [0] * nv
    stack: list[int] = []
    counter = [0]

    def dfs(v, via):
        disc[v] = low[v] = counter[0]
        counter[0] += 1
        for u, k in incident[v]:
            if k == via:
                continue
            if disc[u] == -1:
                stack.append(k)
                dfs(u, k)
                low[v] = min(low[v], low[u])
                if low[u] >= disc[v]:
                    block = []
                    while True:
                        e = stack.pop()
                        block.append(e)
                        if e == k:
                            break
                    blocks.append(sorted(block))
            elif disc[u] < disc[v]:
                stack.append(k)
                low[v] = min(low[v], disc[u])

    for v in range(nv):
        if disc[v] == -1:
            dfs(v, None)
    return sorted(blocks)


@dataclass(frozen=True)
class BlockDecomposition:
    articulation_points: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]
    # block-graph edges: (articulation point, block index, (genus, markings))
    tree_edges: tuple[tuple[int, int, tuple[int, int]], ...]
    node_types: dict

    def is_tree(self) -> bool:
        nodes = len(self.articulation_points) + len(self.blocks)
        if len(self.tree_edges) != nodes - 1:
            return False
        parent = {("a", v): ("a", v) for v in self.articulation_points}
        parent.update({("b", i): ("b", i) for i in range(len(self.blocks))})

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for v, i, _ in self.tree_edges:
            ra, rb = find(("a", v)), find(("b", i))
            if ra == rb:
                return False
            parent[ra] = rb
        return True


def block_decomposition(G: StableGraph) -> BlockDecomposition:
    blocks = _blocks(G)
    block_vertices = [sorted({x for k in b for x in G.edges[k]}) for b in blocks]
    membership: dict[int, list[int]] = {}
    for i, vs in enumerate(block_vertices):
        for v in vs:
            membership.setdefault(v, []).append(i)
    marks_at = [0] * G.num_vertices
    for m in G.marks:
        marks_at[m] += 1
    arts = tuple(
        v
        for v in range(G.num_vertices)
        if len(membership.get(v, ())) >= 2 or G.weights[v] > 0 or marks_at[v] >= 2
    )
    art_set = set(arts)
    node_types: dict = {("a", v): (G.weights[v], marks_at[v]) for v in arts}
    for i, (b, vs) in enumerate(zip(blocks, block_vertices)):
        free = [v for v in vs if v not in art_set]
        b1 = len(b) - len(vs) + 1
        node_types[("b", i)] = (
            b1 + sum(G.weights[v] for v in free),
            sum(marks_at[v] for v in free),
        )
    links = [(v, i) for v in arts for i in membership.get(v, ())]
    adjacency: dict = {node: [] for node in node_types}
    for v, i in links:
        adjacency[("a", v)].append(("b", i))
        adjacency[("b", i)].append(("a", v))
    tree_edges = []
    for v, i in links:
        seen = {("a", v), ("b", i)}
        todo = [("b", i)]
        total_g = total_n = 0
        while todo:
            node = todo.pop()
            total_g += node_types[node][0]
            total_n += node_types[node][1]
            for nxt in adjacency[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        tree_edges.append((v, i, (total_g, total_n)))
    return BlockDecomposition(
        arts, tuple(tuple(b) for b in blocks), tuple(tree_edges), node_types
    )


def _vertex_expands_to_bridge(G: StableGraph, v: int, blocks) -> bool:
    items = []
    for b in blocks:
        half = sum((G.edges[k][0] == v) + (G.edges[k][1] == v) for k in b)
        if half:
            items.append(half)
    items += [1] * sum(1 for m in G.marks if m == v)
    items += [2] * G.weights[v]
    total = sum(items)
    sums = {0}
    for x in items:
        sums |= {s + x for s in sums}
    return any(2 <= s <= total - 2 for s in sums)


def in_bridge_closure(G: StableGraph) -> bool:
    """True iff ``G`` is a face of some graph with a bridge."""
    if bridges(G):
        return True
    blocks = _blocks(G)
    return any(_vertex_expands_to_bridge(G, v, blocks) for v in range(G.num_vertices))


@dataclass(frozen=True)
class LocusFlags:
    has_positive_weight: bool
    has_loop_or_weight: bool
    has_repeated_marking: bool
    is_pure: bool


def locus_predicates(G: StableGraph) -> LocusFlags:
    weighted = any(w > 0 for w in G.weights)
    loops = any(a == b for a, b in G.edges)
    return LocusFlags(
        has_positive_weight=weighted,
        has_loop_or_weight=weighted or loops,
        has_repeated_marking=len(set(G.marks)) < len(G.marks),
        is_pure=not weighted,
    )


# ---------------------------------------------------------------------------
# interchange records


def to_record(G: StableGraph) -> dict:
    return {
        "g": genus(G),
        "n": G.n,
        "V": G.num_vertices,
        "w": list(G.weights),
        "edges": [list(e) for e in G.edges],
        "m": list(G.marks),
    }


def from_record(record: dict) -> StableGraph:
    try:
        G = StableGraph.build(record["w"], [tuple(e) for e in record["edges"]], record["m"])
        declared_v = record["V"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed graph record: {exc}") from exc
    if declared_v != G.num_vertices:
        raise GraphError("vertex count does not match weight array")
    G.validate(record.get("g"), record.get("n"))
    return G


def dumps(G: StableGraph) -> str:
    return json.dumps(to_record(G), separators=(",", ":"))
