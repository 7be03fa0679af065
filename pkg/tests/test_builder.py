import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satgraph.builder import (
    AttemptsExhausted,
    BuildParams,
    ProductVertex,
    attempt_seed,
    build_extension,
    check_product_lifting,
    lifting_failure_bound,
    minimal_certified_m,
    product_coords,
    product_index,
    sample_product_graph,
    saturation_failure_bound,
)
from satgraph.graphs import FiniteGraph, is_n_saturated, random_graph
from satgraph.morphisms import is_quotient_map

K1 = FiniteGraph.complete(1)
K2 = FiniteGraph.complete(2)


# -- exact bounds: values frozen from independent rational evaluation --------


def test_saturation_bound_frozen_values():
    assert saturation_failure_bound(2, 2, 5) == Fraction(3, 4)
    assert saturation_failure_bound(2, 2, 7) == Fraction(1, 4)
    assert saturation_failure_bound(2, 2, 7) < saturation_failure_bound(2, 2, 5)


def test_saturation_bound_vanishes_for_n1():
    for k in (1, 2, 5):
        for m in (1, 3, 10):
            assert saturation_failure_bound(1, k, m) == 0


def test_lifting_bound_frozen_values():
    assert lifting_failure_bound(1, 3, 4) == 0
    assert lifting_failure_bound(2, 2, 5) == Fraction(3, 4)
    assert lifting_failure_bound(2, 2, 6) == Fraction(28, 64)


def test_minimal_certified_m_frozen_values():
    assert minimal_certified_m(1, 1) == 1
    assert minimal_certified_m(2, 2) == 6
    assert minimal_certified_m(3, 3) == 39
    # combined bound at the threshold straddles 1
    assert saturation_failure_bound(2, 2, 5) + lifting_failure_bound(2, 2, 5) >= 1
    assert saturation_failure_bound(2, 2, 6) + lifting_failure_bound(2, 2, 6) == Fraction(7, 8)


def test_saturation_bound_alone_crosses_one_at_35_for_n3():
    assert saturation_failure_bound(3, 3, 34) >= 1
    assert saturation_failure_bound(3, 3, 35) < 1
    assert 35 <= minimal_certified_m(3, 3) <= 45


def test_bounds_reach_certification_within_200():
    for n, k in [(2, 2), (3, 3), (4, 4)]:
        m = minimal_certified_m(n, k)
        assert m <= 200
        combined = saturation_failure_bound(n, k, m) + lifting_failure_bound(n, k, m)
        assert combined < 1
        # beyond the threshold the combined bound keeps shrinking
        later = saturation_failure_bound(n, k, m + 25) + lifting_failure_bound(n, k, m + 25)
        assert later < combined


def test_bounds_validate_inputs():
    with pytest.raises(ValueError):
        saturation_failure_bound(0, 2, 2)
    with pytest.raises(ValueError):
        lifting_failure_bound(2, 2, 0)
    with pytest.raises(ValueError):
        minimal_certified_m(3, 2)


# -- product vertex encoding ----------------------------------------------------


def test_product_vertex_round_trip():
    m = 4
    seen = set()
    for i in range(3):
        for s in range(m + 1):
            idx = product_index(i, s, m)
            assert product_coords(idx, m) == ProductVertex(i, s)
            seen.add(idx)
    assert seen == set(range(15))
    with pytest.raises(ValueError):
        product_index(0, 5, 4)


# -- sampling: structural conditions hold for every seed --------------------------


def assert_sample_well_formed(g, base, m):
    k = base.vertex_count
    copies = m + 1
    assert g.vertex_count == k * copies
    # copy 0 reproduces the base exactly
    for i in range(k):
        for j in range(k):
            assert g.adjacent(i * copies, j * copies) == base.adjacent(i, j)
    # fibers over non-adjacent base vertices stay fully non-adjacent
    for i in range(k):
        for j in range(k):
            if base.adjacent(i, j):
                continue
            for s in range(copies):
                for t in range(copies):
                    assert not g.adjacent(i * copies + s, j * copies + t)
    # reflexive and symmetric
    for u in range(g.vertex_count):
        assert g.adjacent(u, u)
    for u in range(g.vertex_count):
        for w in range(u + 1, g.vertex_count):
            assert g.adjacent(u, w) == g.adjacent(w, u)


def test_sample_conditions_various_bases_and_seeds():
    bases = [K2, FiniteGraph.cycle(5), FiniteGraph.from_edges(2, []), random_graph(4, seed=3)]
    for seed in range(12):
        base = bases[seed % len(bases)]
        g, p = sample_product_graph(base, 1 + seed % 3, seed=seed)
        assert_sample_well_formed(g, base, 1 + seed % 3)


@st.composite
def small_bases(draw):
    v = draw(st.integers(min_value=1, max_value=5))
    pairs = list(itertools.combinations(range(v), 2))
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return FiniteGraph.from_edges(v, [p for p, b in zip(pairs, bits) if b])


@settings(max_examples=40, deadline=None)
@given(small_bases(), st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=2**32))
def test_sample_structural_conditions_property(base, m, seed):
    g, projection = sample_product_graph(base, m, seed=seed)
    assert_sample_well_formed(g, base, m)
    assert is_quotient_map(projection)


def test_sample_projection_is_quotient_map_over_seeds():
    for seed in range(20):
        g, p = sample_product_graph(K2, 3, seed=seed)
        assert is_quotient_map(p)
        assert list(p.image) == [0, 0, 0, 0, 1, 1, 1, 1]


def test_sample_forced_edge_present():
    g, _ = sample_product_graph(K2, 1, seed=0)
    assert g.adjacent(0, 2)  # (0,0)-(1,0) mirrors the base edge


def test_sample_reproducible_and_substreams_differ():
    a1, _ = sample_product_graph(K2, 6, seed=42)
    a2, _ = sample_product_graph(K2, 6, seed=42)
    assert a1 == a2
    b, _ = sample_product_graph(K2, 6, seed=43)
    assert a1 != b
    s0, _ = sample_product_graph(K2, 6, attempt_seed(42, 0))
    s1, _ = sample_product_graph(K2, 6, attempt_seed(42, 1))
    assert s0 != s1


def test_sample_rejects_m_zero():
    with pytest.raises(ValueError):
        sample_product_graph(K2, 0, seed=1)


# -- fiber lifting check -----------------------------------------------------------


def test_lifting_check_vacuous_for_n1():
    g, _ = sample_product_graph(K2, 2, seed=7)
    assert check_product_lifting(g, K2, 2, 1).holds


def test_lifting_check_single_vertex_base():
    for seed in range(5):
        g, _ = sample_product_graph(K1, 1, seed=seed)
        assert check_product_lifting(g, K1, 1, 2).holds


def test_lifting_check_all_coins_absent_fails_at_far_copy():
    # the sample with every coin drawn absent: only the forced copy-0 edge
    # plus loops; vertex (1,1) has no neighbour in fiber 0
    g = FiniteGraph.from_edges(4, [(0, 2)])
    rep = check_product_lifting(g, K2, 1, 2)
    assert not rep.holds
    assert rep.counterexample == (0, (3,))


def test_lifting_check_size_mismatch():
    g, _ = sample_product_graph(K2, 2, seed=1)
    with pytest.raises(ValueError):
        check_product_lifting(g, K2, 3, 2)


def test_lifting_counterexample_rechecks():
    g = FiniteGraph.from_edges(4, [(0, 2)])
    rep = check_product_lifting(g, K2, 1, 2)
    i, targets = rep.counterexample
    copies = 2
    for l in range(copies):
        assert not all(g.adjacent(i * copies + l, t) for t in targets)


def test_lifting_distinct_bases_is_weaker():
    for seed in range(10):
        base = random_graph(3, seed=seed)
        g, _ = sample_product_graph(base, 2, seed=seed + 50)
        full = check_product_lifting(g, base, 2, 3)
        distinct = check_product_lifting(g, base, 2, 3, distinct_bases=True)
        if full.holds:
            assert distinct.holds


# -- rejection sampling ---------------------------------------------------------------


def test_build_n1_first_attempt():
    g, p, attempts = build_extension(BuildParams(1, K1, seed=0, mode="empirical", m=1))
    assert attempts == 1
    assert g.vertex_count == 2
    assert is_n_saturated(g, 1).holds


def test_build_certified_n2():
    g, p, attempts = build_extension(BuildParams(2, K2, seed=42, max_attempts=1000))
    assert g.vertex_count == 2 * 7  # certified m = 6
    assert is_n_saturated(g, 2).holds
    assert check_product_lifting(g, K2, 6, 2).holds
    assert is_quotient_map(p)


def test_build_is_deterministic():
    r1 = build_extension(BuildParams(2, K2, seed=7))
    r2 = build_extension(BuildParams(2, K2, seed=7))
    assert r1[0] == r2[0]
    assert r1[2] == r2[2]


def test_build_empirical_small_m_verified_if_it_returns():
    try:
        g, p, _ = build_extension(BuildParams(2, K2, seed=3, mode="empirical", m=2, max_attempts=50))
    except AttemptsExhausted:
        return
    assert is_n_saturated(g, 2).holds
    assert check_product_lifting(g, K2, 2, 2).holds


def test_build_requires_weakly_saturated_base():
    lonely = FiniteGraph.from_edges(2, [])
    with pytest.raises(ValueError):
        build_extension(BuildParams(2, lonely, seed=0, mode="empirical", m=2))


def test_build_exhaustion_raises():
    with pytest.raises(AttemptsExhausted) as exc:
        build_extension(BuildParams(3, FiniteGraph.complete(3), seed=0, mode="empirical", m=1, max_attempts=3))
    assert exc.value.attempts == 3


def test_sample_multiword_graphs_fully_wellformed():
    # re-validating through the strict constructor checks symmetry, loops
    # and tail bits of the word-level symmetrization across word boundaries
    import numpy as np
    from satgraph.graphs import FiniteGraph as FG

    for base, m in [(FiniteGraph.cycle(5), 30), (K2, 64), (FiniteGraph.complete(3), 40)]:
        g, p = sample_product_graph(base, m, seed=123)
        assert g.vertex_count == base.vertex_count * (m + 1)
        revalidated = FG(g.vertex_count, g.packed_rows.copy(), validate=True)
        assert revalidated == g
        assert is_quotient_map(p)
