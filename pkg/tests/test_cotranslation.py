import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cotrans.cotranslation import (
    Cotranslation,
    check_dihedral_conditions,
    check_relation_preservation,
    descended_presentation,
    free_product_lift,
    from_group_morphism,
    morphism_from_generators,
    presentation_descent,
    scalar_twist,
    verify_cotranslation,
)
from cotrans.difference import MatrixSequence, cotranslation_from_sequence
from cotrans.errors import CommutationError, IncompleteDefinitionError, MorphismError, ParameterError
from cotrans.gallery import NAMES, build_example
from cotrans.groups import Cyclic, Dihedral, FreeGroup, FreeProduct, Integers
from cotrans.transforms import (
    Affine,
    Euclidean,
    Identity,
    Rotation,
    approx_equal,
    as_affine,
    reflection,
    translation,
)

E1, E2 = Euclidean(1), Euclidean(2)

# expected C3 table: (g, h) -> (slope, offset)
C3_TABLE = {
    ("e", "e"): (1, 0),
    ("a", "e"): (1, 0),
    ("a^2", "e"): (1, 0),
    ("e", "a"): (1, 1),
    ("a", "a"): (2, 0),
    ("a^2", "a"): (Fraction(1, 2), -1),
    ("e", "a^2"): (2, 2),
    ("a", "a^2"): (1, -1),
    ("a^2", "a^2"): (Fraction(1, 2), 0),
}


@pytest.mark.parametrize("gh,coef", C3_TABLE.items(), ids=lambda x: str(x))
def test_c3_table(gh, coef):
    Z = build_example("c3_affine")
    T = Z.evaluate(*gh)
    if isinstance(T, Identity):
        assert coef == (1, 0)
        return
    aff = as_affine(T)
    assert aff.exact
    assert aff.coefficients() == tuple(Fraction(c) for c in coef)


def _rot(z):
    return np.array([[math.cos(z), -math.sin(z)], [math.sin(z), math.cos(z)]])


ZETA = [math.pi / 2 ** (n + 1) for n in range(8)]
F = np.array([1.0, 0.0])


def test_dinf_worked_evaluations():
    Z = build_example("dinf_translation_rotation")
    X = E2.sample(64, seed=11)
    cases = {
        ("bab", "ab"): lambda x: x @ _rot(ZETA[2]).T + F,
        ("abab", "ab"): lambda x: x @ _rot(-ZETA[4]).T - 5 * F,
        ("ab", "ababa"): lambda x: (x + F) @ _rot(ZETA[0] - ZETA[1]).T - 2 * F,
    }
    for (g, h), oracle in cases.items():
        assert np.max(np.abs(Z.evaluate(g, h).apply_batch(X) - oracle(X))) <= 1e-10


def test_broken_c3_cocycle_witness():
    P = Cyclic(3)
    shift = Affine.exact_scalar(1, 1)
    Z = Cotranslation(P, E1, [lambda eta: shift])
    rep = verify_cotranslation(Z)
    assert not rep.passed
    assert ["e", "a^2", "a"] in rep["cocycle"].witnesses
    rel = check_relation_preservation(Z)
    w = rel["relator a^3"].witnesses[0]
    assert w["relator"] == "a^3" and w["residual"] > 0


def test_incomplete_table():
    P = Cyclic(3)
    Z = Cotranslation(P, E1, [{"e": Affine.exact_scalar(2, 0)}])
    with pytest.raises(IncompleteDefinitionError):
        Z.evaluate("a", "a")


@pytest.mark.parametrize("name", NAMES)
def test_gallery_relations_and_cocycle(name):
    Z = build_example(name)
    assert check_relation_preservation(Z).passed
    # the trees are covered at radius 3 by the acceptance suite
    radius = 2 if name in ("f2_binary_tree", "fn_tree") else 3
    assert verify_cotranslation(Z, radius=radius).passed


def test_d6_five_conditions():
    Z = build_example("d6_labeled_copies")
    assert check_dihedral_conditions(Z).passed


def test_d6_reversed_table_fails_unless_angles_equal():
    Z = build_example("d6_labeled_copies", {"odd_angles": "reversed"})
    rep = check_dihedral_conditions(Z)
    assert not rep["sr-square at r^i"].passed
    assert not check_relation_preservation(Z).passed
    third = 2 * math.pi / 3
    Z = build_example("d6_labeled_copies", {"angles": [third] * 3, "odd_angles": "reversed"})
    assert check_dihedral_conditions(Z).passed


def test_multirotational_requires_commuting_planes():
    with pytest.raises(ParameterError):
        build_example("cyclic_multirotational", {"planes": [[0, 1], [1, 2]]})
    with pytest.raises(ParameterError):
        build_example("cyclic_multirotational", {"angle_sets": [[0.5, 1.0]]})


def test_symmetry_rotation_angle_range():
    with pytest.raises(ParameterError):
        build_example("dinf_symmetry_rotation", {"zeta": [0.0]})
    with pytest.raises(ParameterError):
        build_example("dinf_symmetry_rotation", {"zeta": [4.0]})


def test_c2c3_perm_constraint():
    with pytest.raises(ParameterError):
        build_example("c2c3_prodiscrete", {"perms": [[1, 0, 2], [0, 1, 2], [0, 1, 2]]})


def test_tree_example_preserves_adjacency():
    Z = build_example("f2_binary_tree")
    space = Z.space
    V = space.all_vertices
    parents = V.copy()
    depth = (V >= 0).sum(axis=1)
    for i, n in enumerate(depth):
        if n:
            parents[i, n - 1] = -1
    for g, h in [("e", "ab"), ("a^-1", "b^2a"), ("ba", "a^-1b^-1")]:
        T = Z.evaluate(g, h)
        img, pimg = T.apply_batch(V), T.apply_batch(parents)
        assert np.array_equal((img >= 0).sum(axis=1), depth)
        for i, n in enumerate(depth):
            if n:
                assert np.array_equal(img[i, : n - 1], pimg[i, : n - 1])


def test_from_group_morphism_examples():
    P = Integers()
    gamma = lambda w: translation([P.to_int(w)])
    Z = from_group_morphism(gamma, P, E1)
    assert approx_equal(Z.evaluate(P.from_int(5), P.from_int(3)), translation([3]), E1.sample(10))
    C4 = Cyclic(4)
    gam = morphism_from_generators(C4, [Rotation(0, 1, math.pi / 2)], E2)
    Z = from_group_morphism(gam, C4, E2)
    assert approx_equal(Z.evaluate("a^2", "a^3"), Rotation(0, 1, 3 * math.pi / 2), E2.sample(20))
    assert verify_cotranslation(Z).passed
    triv = from_group_morphism(lambda w: Identity(E2), C4, E2)
    assert approx_equal(triv.evaluate("a", "a^3"), Identity(E2), E2.sample(5))


def test_from_group_morphism_rejects_non_morphism():
    P = Cyclic(3)
    with pytest.raises(MorphismError) as exc:
        from_group_morphism(lambda w: translation([len(w)]), P, E1)
    assert exc.value.witness is not None


def test_scalar_twist_cancels():
    S = MatrixSequence.constant(np.diag([2.0]))
    Z = cotranslation_from_sequence(S)
    P = Z.P
    gamma = lambda w: Affine([[2.0 ** -P.to_int(w)]], [0.0])
    W = scalar_twist(Z, gamma)
    for g, h in [(0, 3), (-2, 5), (4, -3)]:
        assert approx_equal(W.evaluate(P.from_int(g), P.from_int(h)), Identity(E1), E1.sample(5))
    triv = scalar_twist(Z, lambda w: Identity(E1))
    assert approx_equal(triv.evaluate(P.from_int(1), P.from_int(2)), Affine([[4.0]]), E1.sample(5))


def test_scalar_twist_rejects_noncommuting():
    P = Cyclic(4)
    Z = from_group_morphism(morphism_from_generators(P, [Rotation(0, 1, math.pi / 2)], E2), P, E2)
    refl = morphism_from_generators(P, [reflection(0.0)], E2)
    with pytest.raises((CommutationError, MorphismError)):
        scalar_twist(Z, refl)


def test_free_product_lift():
    C2 = Cyclic(2, "s")
    ZG = Cotranslation(C2, E1, [{"e": Affine([[-1.0]], [1.0]), "s": Affine([[-1.0]], [1.0])}])
    ZH = build_example("c3_affine")
    L = free_product_lift(ZG, ZH)
    assert check_relation_preservation(L, radius=4).passed
    assert verify_cotranslation(L, radius=2).passed
    P = L.P
    w = P.element("a s a^2")
    assert approx_equal(L.evaluate(w, "s"), ZG.generator_value(0, "s"), E1.sample(5))


def test_free_product_lift_trivial():
    Z1 = Cotranslation(Cyclic(2, "s"), E1, [lambda w: Identity(E1)])
    Z2 = Cotranslation(Cyclic(3, "t"), E1, [lambda w: Identity(E1)])
    L = free_product_lift(Z1, Z2)
    assert approx_equal(L.evaluate("s t", "t^2 s"), Identity(E1), E1.sample(5))


def test_presentation_descent_d6():
    Z = build_example("d6_labeled_copies")
    G = Z.P
    assert presentation_descent(Z, list(G.relators)) is Z
    r3, s2 = G.word("r^3"), G.word("s^2")
    H = descended_presentation(G, [r3, s2])
    assert isinstance(H, FreeProduct)
    D = presentation_descent(Z, [r3, s2])
    assert check_relation_preservation(D, radius=4).passed
    F2 = presentation_descent(Z, [])
    assert isinstance(F2.P, FreeGroup)
    X = Z.space.sample(20)
    for w in ["r s r^-1", "s^3 r^4", "r^-2 s"]:
        direct = G.element(w.replace(" ", ""))
        assert approx_equal(F2.evaluate("e", w), Z.evaluate("e", direct), X)


@settings(max_examples=30)
@given(st.lists(st.sampled_from(["r", "s", "r^-1"]), max_size=6), st.lists(st.sampled_from(["r", "s", "r^-1"]), max_size=6))
def test_d6_descent_to_free_group_matches(gw, hw):
    Z = build_example("d6_labeled_copies")
    F2 = presentation_descent(Z, [])
    g, h = " ".join(gw) or "e", " ".join(hw) or "e"
    X = Z.space.sample(10)
    assert approx_equal(F2.evaluate(g, h), Z.evaluate(Z.P.element(g), Z.P.element(h)), X)
