import itertools

import pytest
from hypothesis import given, settings, strategies as st

from dendron import (
    Tree, TreeMorphism, SourceTargetMismatch, NotMonotone,
    VertexConditionFails, NotInnerEdge, MorphismError, validate_morphism,
    identity, compose, contract_edge, split_edge, collapse_unary, hom_set,
    factorize, single_edge, corolla, linear_tree, canonical_form,
    enumerate_all_trees, are_isomorphic,
)

from test_trees import random_trees


def brute_force_homs(src, dst):
    """Independent oracle: try every edge map and keep the valid ones."""
    src_edges = src.sorted_edges()
    found = []
    for images in itertools.product(dst.sorted_edges(), repeat=len(src_edges)):
        mapping = dict(zip(src_edges, images))
        try:
            found.append(validate_morphism(src, dst, mapping))
        except MorphismError:
            pass
    return found


class TestValidate:
    def test_identity(self):
        t = corolla(2)
        assert identity(t).is_identity()

    def test_collapse_to_edge_only_fails(self):
        c2, eta = corolla(2), single_edge("e")
        with pytest.raises((VertexConditionFails, NotMonotone)):
            validate_morphism(c2, eta, {"r": "e", "l0": "e", "l1": "e"})

    def test_degeneracy_is_valid(self):
        lin = linear_tree(1)  # e0 under e1
        eta = single_edge("e")
        f = validate_morphism(lin, eta, {"e0": "e", "e1": "e"})
        assert not f.is_injective()

    def test_not_monotone(self):
        lin = linear_tree(2)
        with pytest.raises(NotMonotone):
            validate_morphism(lin, lin, {"e0": "e0", "e1": "e2", "e2": "e1"})

    def test_partial_map_rejected(self):
        t = corolla(1)
        with pytest.raises(SourceTargetMismatch):
            validate_morphism(t, t, {"r": "r"})

    def test_stray_image_rejected(self):
        t = single_edge("e")
        with pytest.raises(SourceTargetMismatch):
            validate_morphism(t, t, {"e": "nope"})

    def test_stump_needs_leafless_subtree(self):
        stump = corolla(0)
        c2 = corolla(2)
        with pytest.raises(VertexConditionFails):
            validate_morphism(stump, c2, {"r": "r"})
        assert len(hom_set(stump, stump)) == 1


class TestHomSets:
    def test_frozen_counts(self):
        eta, c2 = single_edge(), corolla(2)
        assert len(hom_set(eta, eta)) == 1
        assert len(hom_set(eta, c2)) == 3
        assert len(hom_set(c2, c2)) == 2
        assert len(hom_set(c2, eta)) == 0

    def test_matches_brute_force_small(self):
        shapes = [single_edge(), corolla(0), corolla(1), corolla(2),
                  linear_tree(2),
                  Tree(["r", "a", "b"], "r", [("r", ["a", "b"]), ("a", [])])]
        for src in shapes:
            for dst in shapes:
                fast = hom_set(src, dst)
                slow = brute_force_homs(src, dst)
                assert sorted(f.sort_signature() for f in fast) == \
                    sorted(f.sort_signature() for f in slow), (src, dst)
                assert len(fast) == len(set(fast))

    def test_deterministic_order(self):
        a = [f.mapping for f in hom_set(corolla(2), corolla(3))]
        b = [f.mapping for f in hom_set(corolla(2), corolla(3))]
        assert a == b

    @given(random_trees(max_vertices=3), random_trees(max_vertices=3))
    @settings(max_examples=25, deadline=None)
    def test_all_results_validate(self, src, dst):
        for f in hom_set(src, dst):
            validate_morphism(src, dst, f.mapping)

    @given(random_trees(max_vertices=3))
    @settings(max_examples=25, deadline=None)
    def test_identity_found(self, t):
        assert any(f.is_identity() for f in hom_set(t, t))


class TestGenerators:
    def test_contract_requires_inner(self):
        with pytest.raises(NotInnerEdge):
            contract_edge(corolla(2), "l0")

    def test_contract_top_edge_rejected(self):
        # e1 tops a unary vertex with nothing above, so it is not inner
        with pytest.raises(NotInnerEdge):
            contract_edge(linear_tree(1), "e1")

    def test_contract_into_stump(self):
        t = Tree(["r", "a", "b"], "r", [("r", ["a", "b"]), ("a", [])])
        smaller, face = contract_edge(t, "a")
        assert canonical_form(smaller) == canonical_form(corolla(1))
        assert face.mapping == {"r": "r", "b": "b"}

    def test_contract_merges_vertices(self):
        t = Tree(["r", "m", "x", "y", "z"], "r",
                 [("r", ["m", "z"]), ("m", ["x", "y"])])
        smaller, face = contract_edge(t, "m")
        assert canonical_form(smaller) == canonical_form(corolla(3))
        validate_morphism(face.src, face.dst, face.mapping)

    def test_split_edge_only(self):
        bigger, collapse = split_edge(single_edge("e"), "e")
        assert len(bigger.edges) == 2
        assert bigger.root == "e"
        assert len(bigger.vertices) == 1
        assert set(collapse.mapping.values()) == {"e"}

    def test_split_then_collapse(self):
        t = corolla(2)
        bigger, sigma = split_edge(t, "l0")
        smaller, sigma2 = collapse_unary(bigger, "l0")
        assert smaller == t
        assert sigma == sigma2

    def test_split_inner(self):
        t = Tree(["r", "m", "x"], "r", [("r", ["m"]), ("m", ["x"])])
        bigger, sigma = split_edge(t, "m")
        assert len(bigger.edges) == 4
        validate_morphism(bigger, t, sigma.mapping)


class TestCompose:
    def test_endpoint_mismatch(self):
        f = identity(corolla(2))
        g = identity(corolla(3))
        with pytest.raises(SourceTargetMismatch):
            compose(f, g)

    @given(random_trees(max_vertices=2), random_trees(max_vertices=2),
           st.integers(0, 10**6), st.integers(0, 10**6))
    @settings(max_examples=25, deadline=None)
    def test_composites_validate(self, a, b, i, j):
        fs = hom_set(a, b)
        gs = hom_set(b, b)
        if not fs or not gs:
            return
        f = fs[i % len(fs)]
        g = gs[j % len(gs)]
        h = compose(f, g)
        validate_morphism(h.src, h.dst, h.mapping)


def contract_fixture():
    big = Tree(["r", "a", "b", "c"], "r", [("r", ["a"]), ("a", ["b", "c"])])
    _, face = contract_edge(big, "a")
    return face


class TestFactorize:
    def test_edge_to_corolla_root(self):
        eta, c2 = single_edge("e"), corolla(2)
        f = validate_morphism(eta, c2, {"e": "r"})
        fact = factorize(f)
        assert len(fact.degeneracies) == 0
        assert fact.iso.is_isomorphism()
        assert len(fact.inner_faces) == 0
        assert len(fact.outer_faces) == 1
        assert fact.composite() == f

    def test_edge_to_corolla_leaf(self):
        eta, c2 = single_edge("e"), corolla(2)
        f = validate_morphism(eta, c2, {"e": "l0"})
        fact = factorize(f)
        assert [s.kind for s in fact.outer_faces] == ["outer"]
        assert fact.composite() == f

    def test_pure_degeneracy(self):
        lin = linear_tree(2)
        eta = single_edge("e")
        f = validate_morphism(lin, eta, {"e0": "e", "e1": "e", "e2": "e"})
        fact = factorize(f)
        assert len(fact.degeneracies) == 2
        assert len(fact.inner_faces) == 0
        assert len(fact.outer_faces) == 0
        assert fact.composite() == f

    def test_pure_inner_face(self):
        f = contract_fixture()
        fact = factorize(f)
        assert len(fact.degeneracies) == 0
        assert [s.tag for s in fact.inner_faces] == ["a"]
        assert len(fact.outer_faces) == 0
        assert fact.composite() == f

    def test_factorize_lands_through_stump_completion(self):
        # unary tree into a corolla whose other branch is capped
        src = corolla(1)
        dst = Tree(["r", "a", "b"], "r", [("r", ["a", "b"]), ("a", [])])
        f = validate_morphism(src, dst, {"r": "r", "l0": "b"})
        fact = factorize(f)
        assert len(fact.outer_faces) == 0
        assert [s.tag for s in fact.inner_faces] == ["a"]
        assert fact.composite() == f

    def test_exhaustive_small(self):
        shapes = enumerate_all_trees(3)
        for src in shapes:
            for dst in shapes:
                for f in hom_set(src, dst):
                    fact = factorize(f)
                    assert fact.composite() == f
                    again = factorize(fact.composite())
                    assert [s.tag for s in again.inner_faces] == \
                        [s.tag for s in fact.inner_faces]
                    assert [s.tag for s in again.outer_faces] == \
                        [s.tag for s in fact.outer_faces]
                    assert [s.tag for s in again.degeneracies] == \
                        [s.tag for s in fact.degeneracies]

    def test_stage_trees_chain(self):
        f = contract_fixture()
        fact = factorize(f)
        prev = f.src
        for m in fact.stages():
            assert m.src == prev
            prev = m.dst
        assert prev == f.dst
