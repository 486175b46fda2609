"""Canonical labeling of small vertex-weighted, marked multigraphs.

Individualization-refinement over vertex colorings.  The search tree is
explored completely (the graphs here have at most a dozen vertices), so the
set of leaves realizing the minimal encoding is exactly one orbit of the
vertex automorphism group.
"""
from __future__ import annotations

from dataclasses import dataclass

Edge = tuple[int, int]


@dataclass(frozen=True)
class Labeling:
    """Result of canonicalizing one graph.

    ``key`` is the canonical encoding ``(weights, marks, edges)`` of the
    relabeled graph.  ``vertex_maps`` lists every vertex bijection (as
    ``old -> new`` tuples) realizing ``key``; the first one is the
    canonical map.  ``edge_map`` sends position ``k`` of the input edge
    list to the position of its image in the canonical sorted edge list.
    ``sign`` is the sign of ``edge_map`` as a permutation, or 0 when the
    graph has an automorphism acting oddly on its edges.
    """

    key: tuple
    vertex_maps: tuple[tuple[int, ...], ...]
    edge_map: tuple[int, ...]
    sign: int


def perm_sign(perm) -> int:
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        j = start
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _refine(nv, adj, colors, ncolors):
    while True:
        sigs = [
            (colors[v], tuple(sorted((colors[u], k) for u, k in adj[v].items())))
            for v in range(nv)
        ]
        order = sorted(set(sigs))
        index = {s: i for i, s in enumerate(order)}
        colors = [index[s] for s in sigs]
        if len(order) == ncolors:
            return colors, ncolors
        ncolors = len(order)


def _search(weights, edges, marks):
    nv = len(weights)
    adj: list[dict[int, int]] = [{} for _ in range(nv)]
    loops = [0] * nv
    at = [[] for _ in range(nv)]
    for leg, v in enumerate(marks):
        at[v].append(leg)
    for a, b in edges:
        if a == b:
            loops[a] += 1
        else:
            adj[a][b] = adj[a].get(b, 0) + 1
            adj[b][a] = adj[b].get(a, 0) + 1
    init = [
        (weights[v], loops[v], tuple(at[v]), sum(adj[v].values())) for v in range(nv)
    ]
    order = sorted(set(init))
    index = {s: i for i, s in enumerate(order)}
    start = [index[s] for s in init]

    best = None
    leaves: list[list[int]] = []
    stack = [(start, len(order))]
    while stack:
        colors, ncolors = _refine(nv, adj, *stack.pop())
        if ncolors == nv:
            pairs = sorted(
                (colors[a], colors[b]) if colors[a] <= colors[b] else (colors[b], colors[a])
                for a, b in edges
            )
            w = [0] * nv
            for v in range(nv):
                w[colors[v]] = weights[v]
            key = (tuple(w), tuple(colors[v] for v in marks), tuple(pairs))
            if best is None or key < best:
                best = key
                leaves = [colors]
            elif key == best:
                leaves.append(colors)
            continue
        counts: dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        cell = min(c for c, k in counts.items() if k > 1)
        # push in reverse so vertices are explored in increasing order
        for v in reversed(range(nv)):
            if colors[v] == cell:
                stack.append(
                    ([2 * c if u == v else 2 * c + 1 for u, c in enumerate(colors)], ncolors + 1)
                )
    return best, leaves


def canonical_labeling(weights, edges, marks) -> Labeling:
    """Canonicalize a graph given as weights, an edge list and a marking."""
    key, leaves = _search(weights, edges, marks)
    ne = len(edges)
    canon_maps = tuple(tuple(c) for c in leaves)
    edge_map = None
    sign = None
    for c in leaves:
        pairs = [
            (c[a], c[b]) if c[a] <= c[b] else (c[b], c[a]) for a, b in edges
        ]
        order = sorted(range(ne), key=pairs.__getitem__)
        pos = [0] * ne
        for r, k in enumerate(order):
            pos[k] = r
        s = perm_sign(pos)
        if edge_map is None:
            edge_map = tuple(pos)
            sign = s
            # parallel edges (or repeated loops) can always be swapped
            if len(set(pairs)) < ne:
                sign = 0
                break
        elif s != sign:
            sign = 0
            break
    return Labeling(key, canon_maps, edge_map, sign)
