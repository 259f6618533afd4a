import itertools

import numpy as np
import pytest

from cotrans.cotranslation import Cotranslation
from cotrans.difference import MatrixSequence, cotranslation_from_sequence, solution
from cotrans.errors import AdmissibilityError, WindowRangeError
from cotrans.gallery import build_example
from cotrans.groups import Cyclic, Dihedral, Integers
from cotrans.skew import (
    cotranslation_from_hull,
    hull_from_cotranslation,
    single_map_hull,
    stabilizer_coincidences,
    suspension_morphism,
    verify_skew_axiom,
)
from cotrans.transforms import Euclidean, Identity, approx_equal, translation

E1, E2 = Euclidean(1), Euclidean(2)


def test_c3_hull_member():
    H = hull_from_cotranslation(build_example("c3_affine"))
    assert np.allclose(H.hull(H.P.identity, "a^2", np.array([[0.0], [3.0]])), [[2.0], [8.0]])


@pytest.mark.parametrize("name", ["c3_affine", "d6_labeled_copies"])
def test_round_trip_exhaustive(name):
    Z = build_example(name)
    back = cotranslation_from_hull(hull_from_cotranslation(Z))
    els = Z.P.elements()
    X = Z.space.sample(32, seed=2)
    for g, h in itertools.product(els, els):
        assert approx_equal(back.evaluate(g, h), Z.evaluate(g, h), X, tol=1e-12)


@pytest.mark.parametrize("name", ["c3_affine", "d6_labeled_copies", "dinf_translation_rotation"])
def test_hull_of_cotranslation_passes(name):
    rep = verify_skew_axiom(hull_from_cotranslation(build_example(name)), radius=2)
    assert rep.passed, rep.render()
    assert rep["axiom iii"].max_residual <= 1e-10


def test_wrong_side_action_detected_on_d6():
    skew = hull_from_cotranslation(build_example("d6_labeled_copies"))
    P = skew.P
    rep = verify_skew_axiom(skew, sigma=lambda h, g: P.multiply(g, h))
    assert not rep.passed
    assert rep["left action"].witnesses or rep["axiom iii"].witnesses


def test_single_map_hull_of_group_action():
    P = Integers()
    skew = single_map_hull(P, E2, lambda h: translation([float(P.to_int(h)), 0.5 * P.to_int(h)]))
    assert verify_skew_axiom(skew).passed


def test_trivial_hull_gives_trivial_cotranslation():
    P = Dihedral(3)
    Z = cotranslation_from_hull(single_map_hull(P, E1, lambda h: Identity(E1)))
    for g, h in itertools.product(P.elements(), P.elements()):
        assert approx_equal(Z.evaluate(g, h), Identity(E1), E1.sample(4))


def test_non_admissible_hull_rejected():
    P = Cyclic(3)
    skew = single_map_hull(P, E1, lambda h: translation([1.0]))
    with pytest.raises(AdmissibilityError):
        cotranslation_from_hull(skew)
    assert not verify_skew_axiom(skew)["admissibility"].passed


def test_difference_hull_reproduces_forward_iteration():
    S = MatrixSequence.random(2, seed=4)
    skew = hull_from_cotranslation(cotranslation_from_sequence(S))
    P = skew.P
    xi = np.array([0.3, -1.2])
    for m, n in itertools.product(range(-4, 5), range(-4, 5)):
        got = skew.hull(P.from_int(m), P.from_int(n), xi[None])[0]
        assert np.allclose(got, solution(S, n + m, m, xi), rtol=1e-10, atol=1e-12)


def test_stabilizer_coincidences_reported():
    # a cotranslation from the trivial action: every slice coincides
    P = Cyclic(3)
    Z = Cotranslation(P, E1, [lambda w: Identity(E1)])
    pairs = stabilizer_coincidences(hull_from_cotranslation(Z))
    assert len(pairs) == 3
    assert stabilizer_coincidences(hull_from_cotranslation(build_example("c3_affine"))) == []


def test_suspension_c3():
    Z = build_example("c3_affine")
    W = suspension_morphism(Z)
    lab, Y = W.apply("a", np.array([W.label("e")]), np.array([[2.0]]))
    assert W.window[lab[0]] == Z.P.element("a") and Y[0, 0] == 3.0
    lab, Y = W.apply("e", np.array([0, 1, 2]), np.array([[1.0], [2.0], [3.0]]))
    assert list(lab) == [0, 1, 2] and np.array_equal(Y, [[1.0], [2.0], [3.0]])
    rep = W.verify_morphism()
    assert rep.passed and rep.extras["skipped"] == 0
    assert rep["morphism"].samples == 9


def test_suspension_window_overflow():
    P = build_example("dinf_translation_rotation")
    W = suspension_morphism(P, radius=1)
    with pytest.raises(WindowRangeError):
        W.apply("ab", np.array([0]), np.zeros((1, 2)))
    assert W.verify_morphism().passed
