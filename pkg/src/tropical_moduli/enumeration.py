"""Enumeration of isomorphism classes of stable graphs, one stratum per
edge count.

Maximal cells (weight zero, every vertex trivalent counting legs) are built
by adding legs and gluing pairs of legs, starting from the tripod of type
(0, 3).  Lower strata are then saturated by single-edge contractions.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from .graphs import (
    StableGraph,
    canonical_representative,
    contract_edge,
    dumps,
    from_record,
    labeling,
    signature_of_key,
)

log = logging.getLogger(__name__)

CACHE_VERSION = 1
DEFAULT_CAPACITY = 10**7


class DomainError(ValueError):
    """Arguments outside the range where the object is defined."""


class CapacityError(RuntimeError):
    """A stratum would exceed the configured class-count budget."""


@dataclass(frozen=True, order=True)
class StratumKey:
    g: int
    n: int
    edges: int

    def check(self) -> None:
        check_gn(self.g, self.n)
        if not 1 <= self.edges <= max_edges(self.g, self.n):
            raise DomainError(
                f"edge count {self.edges} outside 1..{max_edges(self.g, self.n)}"
            )


@dataclass(frozen=True)
class Stratum:
    key: StratumKey
    signatures: tuple[str, ...]
    graphs: tuple[StableGraph, ...]

    def __len__(self) -> int:
        return len(self.graphs)

    def index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.signatures)}


def check_gn(g: int, n: int) -> None:
    if g < 0 or n < 0 or 2 * g - 2 + n <= 0:
        raise DomainError(f"(g, n) = ({g}, {n}) is not in the stable range")


def max_edges(g: int, n: int) -> int:
    return 3 * g - 3 + n


def _canon(G: StableGraph) -> tuple[str, StableGraph]:
    key = labeling(G).key
    return signature_of_key(key), canonical_representative(G)


def _dedupe(graphs, capacity: int) -> dict[str, StableGraph]:
    out: dict[str, StableGraph] = {}
    for G in graphs:
        sig, rep = _canon(G)
        if sig not in out:
            out[sig] = rep
            if len(out) > capacity:
                raise CapacityError(f"more than {capacity} classes in one stratum")
    return out


def _add_leg(G: StableGraph):
    nv = G.num_vertices
    w = G.weights + (0,)
    for k, (a, b) in enumerate(G.edges):
        rest = G.edges[:k] + G.edges[k + 1:]
        yield StableGraph(w, rest + ((a, nv), (b, nv)), G.marks + (nv,))
    for leg, v in enumerate(G.marks):
        marks = G.marks[:leg] + (nv,) + G.marks[leg + 1:]
        yield StableGraph(w, G.edges + ((v, nv),), marks + (nv,))


def _glue_last_legs(G: StableGraph) -> StableGraph:
    a, b = sorted(G.marks[-2:])
    return StableGraph(G.weights, G.edges + ((a, b),), G.marks[:-2])


@lru_cache(maxsize=None)
def trivalent_graphs(g: int, n: int, capacity: int = DEFAULT_CAPACITY) -> tuple[StableGraph, ...]:
    """Canonical representatives of all pure trivalent graphs of type (g, n)."""
    check_gn(g, n)
    if (g, n) == (0, 3):
        found = _dedupe([StableGraph((0,), (), (0, 0, 0))], capacity)
    elif n >= 1 and 2 * g - 3 + n > 0:
        found = _dedupe(
            (H for G in trivalent_graphs(g, n - 1, capacity) for H in _add_leg(G)), capacity
        )
    else:
        found = _dedupe((_glue_last_legs(G) for G in trivalent_graphs(g - 1, n + 2, capacity)), capacity)
    return tuple(found[s] for s in sorted(found))


def _cache_dir() -> Path:
    return Path(os.environ.get("TROPICAL_CACHE_DIR", ".tropical-cache"))


def _stratum_path(key: StratumKey, root: Path) -> Path:
    return root / f"g{key.g}_n{key.n}_e{key.edges}.jsonl"


def _content_hash(lines: list[str]) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


def write_stratum(stratum: Stratum, root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    lines = [dumps(G) for G in stratum.graphs]
    header = {
        "version": CACHE_VERSION,
        "g": stratum.key.g,
        "n": stratum.key.n,
        "edges": stratum.key.edges,
        "count": len(lines),
        "sha256": _content_hash(lines),
    }
    path = _stratum_path(stratum.key, root)
    fd, tmp = tempfile.mkstemp(dir=root, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for line in lines:
            fh.write(line + "\n")
    os.replace(tmp, path)
    return path


def read_stratum(key: StratumKey, root: Path) -> Stratum | None:
    """Load a cached stratum; ``None`` if absent, stale or corrupt."""
    path = _stratum_path(key, root)
    try:
        raw = path.read_text().splitlines()
        header = json.loads(raw[0])
        lines = raw[1:]
        if (
            header.get("version") != CACHE_VERSION
            or (header["g"], header["n"], header["edges"]) != (key.g, key.n, key.edges)
            or header["count"] != len(lines)
            or header["sha256"] != _content_hash(lines)
        ):
            log.warning("discarding stale cache entry %s", path)
            return None
        graphs = [from_record(json.loads(line)) for line in lines]
    except FileNotFoundError:
        return None
    except (ValueError, KeyError, IndexError) as exc:
        log.warning("discarding corrupt cache entry %s: %s", path, exc)
        return None
    sigs = []
    for G in graphs:
        sig, rep = _canon(G)
        if rep != G:
            log.warning("discarding non-canonical cache entry %s", path)
            return None
        sigs.append(sig)
    if sigs != sorted(sigs):
        return None
    return Stratum(key, tuple(sigs), tuple(graphs))


def _generate(g: int, n: int, capacity: int) -> dict[int, Stratum]:
    top = max_edges(g, n)
    current = {_canon(G)[0]: G for G in trivalent_graphs(g, n, capacity)}
    strata: dict[int, Stratum] = {}
    for e in range(top, 0, -1):
        sigs = sorted(current)
        strata[e] = Stratum(StratumKey(g, n, e), tuple(sigs), tuple(current[s] for s in sigs))
        if e == 1:
            break
        current = _dedupe(
            (contract_edge(G, k) for G in strata[e].graphs for k in range(e)), capacity
        )
    return strata


_memory: dict[tuple[int, int], dict[int, Stratum]] = {}


def enumerate_all(
    g: int, n: int, *, use_cache: bool = True, capacity: int = DEFAULT_CAPACITY
) -> dict[StratumKey, Stratum]:
    """Every stratum of Δ_{g,n}, keyed by ``StratumKey``."""
    check_gn(g, n)
    if (g, n) in _memory:
        return {s.key: s for s in _memory[(g, n)].values()}
    top = max_edges(g, n)
    root = _cache_dir()
    strata: dict[int, Stratum] | None = None
    if use_cache:
        loaded = {e: read_stratum(StratumKey(g, n, e), root) for e in range(1, top + 1)}
        if all(s is not None for s in loaded.values()):
            strata = loaded  # type: ignore[assignment]
            log.info("loaded Δ_{%d,%d} strata from %s", g, n, root)
    if strata is None:
        strata = _generate(g, n, capacity)
        if use_cache:
            for s in strata.values():
                write_stratum(s, root)
    _memory[(g, n)] = strata
    return {s.key: s for s in strata.values()}


def enumerate_stratum(key: StratumKey, **kwargs) -> Stratum:
    key.check()
    return enumerate_all(key.g, key.n, **kwargs)[key]


def stratum_counts(g: int, n: int, **kwargs) -> list[tuple[int, int, int]]:
    """``(edge count, classes, classes without odd automorphisms)`` per stratum."""
    out = []
    for key, stratum in sorted(enumerate_all(g, n, **kwargs).items()):
        nonzero = sum(1 for G in stratum.graphs if labeling(G).sign != 0)
        out.append((key.edges, len(stratum), nonzero))
    return out


def clear_memory() -> None:
    _memory.clear()
