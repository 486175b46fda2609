import json
import os

import pytest

from oracles import brute_enumeration, brute_key, brute_odd_automorphism, graph_of_key
from tropical_moduli import enumeration
from tropical_moduli.enumeration import (
    CapacityError,
    DomainError,
    StratumKey,
    clear_memory,
    enumerate_all,
    enumerate_stratum,
    read_stratum,
    stratum_counts,
    trivalent_graphs,
)
from tropical_moduli.graphs import canonical_form, contract_edge, from_record, locus_predicates

SMALL = [(g, n) for g in range(4) for n in range(7) if 0 < 2 * g - 2 + n <= 4]


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("TROPICAL_CACHE_DIR", str(tmp_path))
    clear_memory()
    yield tmp_path
    clear_memory()


def test_marked_loop_is_the_only_cell():
    s = enumerate_stratum(StratumKey(1, 1, 1))
    assert len(s) == 1
    assert s.graphs[0].edges == ((0, 0),)


def test_genus_two_single_edge_classes():
    s = enumerate_stratum(StratumKey(2, 0, 1))
    assert sorted(G.edges for G in s.graphs) == [((0, 0),), ((0, 1),)]


def test_marked_triangle_is_the_unique_injective_top_class():
    s = enumerate_stratum(StratumKey(1, 3, 3))
    pure_injective = [
        G for G in s.graphs if locus_predicates(G).is_pure and not locus_predicates(G).has_repeated_marking
    ]
    assert len(pure_injective) == 1
    assert pure_injective[0].num_vertices == 3


@pytest.mark.parametrize("g,n", SMALL)
def test_matches_brute_force(g, n):
    ours = {key.edges: {brute_key(G) for G in s.graphs} for key, s in enumerate_all(g, n).items()}
    assert ours == {e: set(keys) for e, keys in brute_enumeration(g, n).items()}


def test_genus_two_top_stratum_is_theta_and_dumbbell():
    top = enumerate_stratum(StratumKey(2, 0, 3)).graphs
    assert sorted(G.num_vertices for G in top) == [2, 2]
    assert {len(set(G.edges)) for G in top} == {1, 3}


@pytest.mark.parametrize("g,n", SMALL + [(2, 3), (3, 1), (1, 5)])
def test_contraction_closure_and_validity(g, n):
    strata = enumerate_all(g, n)
    sigs = {key.edges: set(s.signatures) for key, s in strata.items()}
    for key, s in strata.items():
        assert len(set(s.signatures)) == len(s) and list(s.signatures) == sorted(s.signatures)
        for G in s.graphs:
            G.validate(g, n)
            if key.edges > 1:
                for k in range(key.edges):
                    assert canonical_form(contract_edge(G, k)) in sigs[key.edges - 1]


def test_counts_of_marked_loop():
    assert stratum_counts(1, 1) == [(1, 1, 1)]


def test_counts_genus_two_unmarked_against_oracle():
    counts = stratum_counts(2, 0)
    expected = []
    for e, keys in sorted(brute_enumeration(2, 0).items()):
        nonzero = sum(1 for k in keys if not brute_odd_automorphism(graph_of_key(k)))
        expected.append((e, len(keys), nonzero))
    assert counts == expected == [(1, 2, 2), (2, 2, 1), (3, 2, 0)]


def test_counts_genus_one_three_marks_against_oracle():
    top = stratum_counts(1, 3)[-1]
    keys = brute_enumeration(1, 3)[3]
    nonzero = sum(1 for k in keys if not brute_odd_automorphism(graph_of_key(k)))
    assert top == (3, len(keys), nonzero) == (3, 7, 4)


def test_trivalent_top_cells():
    # all weights zero and every vertex of valence three
    for G in trivalent_graphs(2, 2):
        assert set(G.weights) == {0}
        assert all(G.valence(v) == 3 for v in range(G.num_vertices))


@pytest.mark.parametrize("key", [StratumKey(1, 1, 2), StratumKey(1, 1, 0), StratumKey(0, 2, 1)])
def test_domain_errors(key):
    with pytest.raises(DomainError):
        enumerate_stratum(key)


def test_unstable_pair_rejected():
    with pytest.raises(DomainError):
        enumerate_all(1, 0)


def test_capacity_error(cache_dir):
    trivalent_graphs.cache_clear()
    try:
        with pytest.raises(CapacityError):
            enumerate_all(2, 3, use_cache=False, capacity=10)
    finally:
        trivalent_graphs.cache_clear()


def test_cache_is_byte_identical(cache_dir):
    enumerate_all(2, 2)
    first = {p.name: p.read_bytes() for p in cache_dir.iterdir()}
    assert len(first) == 5
    clear_memory()
    for p in cache_dir.iterdir():
        p.unlink()
    enumerate_all(2, 2)
    assert {p.name: p.read_bytes() for p in cache_dir.iterdir()} == first


def test_cache_round_trip_records(cache_dir):
    strata = enumerate_all(2, 1)
    for key, s in strata.items():
        path = cache_dir / f"g2_n1_e{key.edges}.jsonl"
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        assert header["count"] == len(s)
        graphs = [from_record(json.loads(line)) for line in lines[1:]]
        assert tuple(graphs) == s.graphs


def test_corrupt_cache_is_regenerated(cache_dir):
    enumerate_all(2, 1)
    clear_memory()
    path = cache_dir / "g2_n1_e2.jsonl"
    lines = path.read_text().splitlines()
    lines[1] = lines[1].replace('"w":[', '"w":[9,')
    path.write_text("\n".join(lines) + "\n")
    assert read_stratum(StratumKey(2, 1, 2), cache_dir) is None
    strata = enumerate_all(2, 1)
    assert len(strata[StratumKey(2, 1, 2)]) == 5
    assert read_stratum(StratumKey(2, 1, 2), cache_dir) is not None


def test_version_mismatch_is_ignored(cache_dir):
    enumerate_all(1, 2)
    path = cache_dir / "g1_n2_e1.jsonl"
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    header["version"] = enumeration.CACHE_VERSION + 1
    path.write_text(json.dumps(header) + "\n" + "\n".join(lines[1:]) + "\n")
    assert read_stratum(StratumKey(1, 2, 1), cache_dir) is None


def test_no_temp_files_left(cache_dir):
    enumerate_all(2, 2)
    assert not [p for p in os.listdir(cache_dir) if p.endswith(".tmp")]
