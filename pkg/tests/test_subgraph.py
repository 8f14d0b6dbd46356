"""Induction, expansion, top-k selection against brute-force oracles."""

from __future__ import annotations

import json
import random
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdeck import (
    NodeSet,
    UnknownFeatureError,
    build_store,
    expand,
    induce,
    save_feature,
    select_top_k,
)
from graphdeck.features import FeatureVector, compute_degree
from graphdeck.store import GraphStore

from conftest import (
    build_from_edges,
    erdos_renyi_edges,
    random_edges,
    ref_induced_edges,
)


def induced_token_pairs(store, sub):
    out = set()
    for u, v in sub.edges:
        a = sub.nodes[int(u)].external_id
        b = sub.nodes[int(v)].external_id
        out.add((min(a, b), max(a, b)))
    return out


# -- NodeSet ------------------------------------------------------------------


def test_nodeset_basics():
    ns = NodeSet([3, 1, 2, 1])
    assert len(ns) == 3
    assert list(ns) == [1, 2, 3]
    assert 2 in ns and 5 not in ns


def test_nodeset_range_validation():
    with pytest.raises(IndexError):
        NodeSet([0, 10], node_count=5)
    with pytest.raises(ValueError):
        NodeSet([-1])


# -- induce -------------------------------------------------------------------


def test_induce_whole_triangle(triangle_store):
    sub = induce(triangle_store, NodeSet([0, 1, 2]))
    assert sub.node_count == 3
    assert sub.edges.tolist() == [[0, 1], [0, 2], [1, 2]]


def test_induce_pair(triangle_store):
    sub = induce(triangle_store, NodeSet([0, 1]))
    assert sub.edges.tolist() == [[0, 1]]


def test_induce_empty_set(triangle_store):
    sub = induce(triangle_store, NodeSet([]))
    assert sub.node_count == 0
    assert sub.edge_count == 0


def test_induce_out_of_range(triangle_store):
    with pytest.raises(IndexError):
        induce(triangle_store, NodeSet([0, 7]))


def test_induce_nodes_ascending_and_edges_lex(tmp_path):
    rng = random.Random(2)
    edges = random_edges(rng, 40, 160)
    s = build_from_edges(tmp_path, edges)
    ids = rng.sample(range(s.node_count), 15)
    sub = induce(s, NodeSet(ids))
    internals = [r.internal for r in sub.nodes]
    assert internals == sorted(internals)
    pairs = [tuple(e) for e in sub.edges.tolist()]
    assert pairs == sorted(pairs)
    assert all(u < v for u, v in pairs)
    assert len(set(pairs)) == len(pairs)


def test_induce_matches_bruteforce_on_er_graphs(tmp_path):
    rng = random.Random(31337)
    edges = erdos_renyi_edges(rng, 200, 0.1)
    s = build_from_edges(tmp_path, edges)
    for trial in range(10):
        picked = rng.sample(range(s.node_count), 50)
        sub = induce(s, NodeSet(picked))
        selected_tokens = [s.record(i).external_id for i in picked]
        expect = ref_induced_edges(edges, selected_tokens)
        assert induced_token_pairs(s, sub) == expect


def test_induce_directed_collapses_arcs(tmp_path):
    s = build_from_edges(tmp_path, [(0, 1), (1, 0), (2, 1)], directed=True)
    sub = induce(s, NodeSet([0, 1, 2]))
    assert sub.edges.tolist() == [[0, 1], [1, 2]]


def test_induce_monotone_under_set_growth(tmp_path):
    rng = random.Random(5150)
    edges = erdos_renyi_edges(rng, 80, 0.08)
    s = build_from_edges(tmp_path, edges)
    small = rng.sample(range(s.node_count), 20)
    big = small + [x for x in rng.sample(range(s.node_count), 40) if x not in small]
    sub_a = induce(s, NodeSet(small))
    sub_b = induce(s, NodeSet(big))
    pairs_a = induced_token_pairs(s, sub_a)
    pairs_b = induced_token_pairs(s, sub_b)
    assert pairs_a <= pairs_b


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 18), st.integers(0, 18)), min_size=1, max_size=60),
    st.sets(st.integers(0, 18)),
    st.booleans(),
)
def test_induce_oracle_property(edges, picked_tokens, directed):
    with tempfile.TemporaryDirectory() as tmp:
        s = build_from_edges(Path(tmp), edges, directed=directed)
        ids = [
            s.lookup_external(str(t))
            for t in picked_tokens
            if s.lookup_external(str(t)) is not None
        ]
        sub = induce(s, NodeSet(ids))
        toks = [s.record(i).external_id for i in ids]
        assert induced_token_pairs(s, sub) == ref_induced_edges(edges, toks)


def test_induce_transient_memory_tracks_selection_not_store(tmp_path):
    """Same embedded subgraph in small vs large store: near-equal peaks."""
    import tracemalloc

    rng = random.Random(9)
    clique = [(f"c{i}", f"c{j}") for i in range(24) for j in range(i + 1, 24)]
    small = clique + random_edges(rng, 400, 2_000)
    large = clique + random_edges(rng, 400, 20_000)
    s_small = build_from_edges(tmp_path, small, name="small")
    s_large = build_from_edges(tmp_path, large, name="large")

    def peak(store):
        ids = NodeSet([store.lookup_external(f"c{i}") for i in range(24)])
        induce(store, ids)  # warm caches
        tracemalloc.start()
        induce(store, ids)
        _, peak_b = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        return peak_b

    p_small, p_large = peak(s_small), peak(s_large)
    assert abs(p_small - p_large) / max(p_small, p_large) < 0.10


# -- expand -------------------------------------------------------------------


def test_expand_zero_hops_identity(triangle_store):
    out = expand(triangle_store, NodeSet([1]), hops=0, cap=10)
    assert list(out) == [1]


def test_expand_path_two_hops(tmp_path):
    s = build_from_edges(tmp_path, [(0, 1), (1, 2), (2, 3)])
    ids = {s.lookup_external(t): t for t in "0123"}
    seed = s.lookup_external("0")
    out = expand(s, NodeSet([seed]), hops=2, cap=10)
    assert sorted(ids[i] for i in out) == ["0", "1", "2"]


def test_expand_star_cap_lowest_ids(star_store):
    s = star_store
    hub = s.lookup_external("hub")
    out = expand(s, NodeSet([hub]), hops=1, cap=5)
    leaves = sorted(s.lookup_external(f"leaf{i}") for i in range(10))
    assert sorted(out) == sorted([hub] + leaves[:4])


def test_expand_cap_below_seed_size_raises(triangle_store):
    with pytest.raises(ValueError):
        expand(triangle_store, NodeSet([0, 1]), hops=1, cap=1)


def test_expand_includes_all_seeds(tmp_path):
    s = build_from_edges(tmp_path, [(0, 1), (2, 3), (4, 5)])
    seeds = NodeSet([0, 2, 4])
    out = expand(s, seeds, hops=3, cap=4)
    assert set(seeds) <= set(out)


def test_expand_deterministic(tmp_path):
    rng = random.Random(12)
    edges = random_edges(rng, 120, 500)
    s = build_from_edges(tmp_path, edges)
    a = list(expand(s, NodeSet([0, 5]), hops=2, cap=40))
    b = list(expand(s, NodeSet([0, 5]), hops=2, cap=40))
    assert a == b


def test_expand_bfs_level_order(tmp_path):
    # 0-1, 1-2: with cap 2 only the 1-hop node is admitted, never node 2.
    s = build_from_edges(tmp_path, [(0, 1), (1, 2)])
    out = expand(s, NodeSet([s.lookup_external("0")]), hops=5, cap=2)
    assert sorted(out) == sorted([s.lookup_external("0"), s.lookup_external("1")])


# -- select_top_k --------------------------------------------------------------


def _with_degree_sidecar(store):
    save_feature(store.path, compute_degree(store))
    return store


def test_top_k_all_nodes(triangle_store):
    _with_degree_sidecar(triangle_store)
    out = select_top_k(triangle_store, "degree", 3)
    assert list(out) == [0, 1, 2]


def test_top_k_star_center(star_store):
    _with_degree_sidecar(star_store)
    out = select_top_k(star_store, "degree", 1)
    assert list(out) == [star_store.lookup_external("hub")]


def test_top_k_matches_full_sort_oracle(tmp_path):
    rng = random.Random(21)
    edges = random_edges(rng, 100, 400)
    s = build_from_edges(tmp_path, edges)
    vals = np.random.default_rng(3).random(s.node_count)
    save_feature(s.path, FeatureVector("pagerank", vals))
    got = list(select_top_k(s, "pagerank", 10))
    oracle = sorted(
        sorted(range(s.node_count), key=lambda i: (-vals[i], i))[:10]
    )
    assert got == oracle


def test_top_k_ties_break_by_ascending_id(tmp_path):
    s = build_from_edges(tmp_path, [(0, 1), (1, 2), (2, 0), (3, 4)])
    vals = np.array([5.0, 5.0, 5.0, 5.0, 1.0])
    save_feature(s.path, FeatureVector("score", vals))
    assert list(select_top_k(s, "score", 2)) == [0, 1]


def test_top_k_validation(triangle_store):
    _with_degree_sidecar(triangle_store)
    with pytest.raises(ValueError):
        select_top_k(triangle_store, "degree", 0)
    with pytest.raises(ValueError):
        select_top_k(triangle_store, "degree", 4)
    with pytest.raises(UnknownFeatureError):
        select_top_k(triangle_store, "nope", 1)


# -- serialization -------------------------------------------------------------


def test_payload_schema(triangle_store):
    sub = induce(triangle_store, NodeSet([0, 1, 2]), selection_desc="ids:0,1,2")
    payload = sub.to_payload(features={"degree": np.array([2.0, 2.0, 2.0])})
    assert [n["id"] for n in payload["nodes"]] == [0, 1, 2]
    node = payload["nodes"][0]
    assert set(node) == {"id", "external_id", "label", "degree", "features"}
    assert node["features"]["degree"] == 2.0
    assert payload["edges"] == [[0, 1], [0, 2], [1, 2]]
    assert payload["origin"]["selection"] == "ids:0,1,2"
    json.dumps(payload)  # must be JSON-clean


def test_csv_roundtrip(tmp_path, triangle_store):
    sub = induce(triangle_store, NodeSet([0, 1, 2]))
    nodes_csv = tmp_path / "nodes.csv"
    edges_csv = tmp_path / "edges.csv"
    sub.write_csv(nodes_csv, edges_csv)
    nlines = nodes_csv.read_text().strip().splitlines()
    elines = edges_csv.read_text().strip().splitlines()
    assert nlines[0] == "local_index,id,external_id,label,degree"
    assert len(nlines) == 4
    assert elines[0] == "u,v"
    assert elines[1:] == ["0,1", "0,2", "1,2"]
