from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cotrans.cotranslation import Cotranslation, verify_cotranslation
from cotrans.difference import (
    MatrixSequence,
    _wrong_order_transition,
    cotranslation_from_sequence,
    generator_from_cotranslation,
    sequence_from_json,
    transition_matrix,
    verify_cocycle,
)
from cotrans.errors import SingularityError, UnsupportedOperationError, WindowRangeError
from cotrans.groups import Integers
from cotrans.transforms import Euclidean, Identity, as_affine, translation

TWO = MatrixSequence.constant(np.diag([2.0]))


def brute(S, n, m):
    """Independent product: forward steps by matmul, backward steps by solving."""
    out = np.eye(S.d)
    if m >= 0:
        for k in range(n, n + m):
            out = S(k) @ out
    else:
        for k in range(n - 1, n + m - 1, -1):
            out = np.linalg.solve(S(k), out)
    return out


def test_worked_products():
    assert np.array_equal(transition_matrix(TWO, 0, 3), [[8.0]])
    assert np.array_equal(transition_matrix(TWO, 0, -2), [[0.25]])
    assert np.array_equal(transition_matrix(TWO, 5, 0), [[1.0]])
    alt = MatrixSequence.periodic([np.diag([2.0]), np.diag([0.5])])
    assert np.array_equal(transition_matrix(alt, 0, 2), [[1.0]])


def test_exact_fractions():
    S = MatrixSequence.periodic([[[Fraction(2), Fraction(1)], [Fraction(0), Fraction(1, 3)]]])
    Z = transition_matrix(S, 0, -3)
    assert Z.dtype == object
    back = transition_matrix(S, -3, 3) @ Z
    assert all(x == (1 if i == j else 0) for (i, j), x in np.ndenumerate(back))
    assert verify_cocycle(S, [(0, 2, -5), (3, -4, 4)]).passed


def test_single_steps_exact():
    S = MatrixSequence.random(3, seed=1)
    for n in range(-5, 5):
        assert np.array_equal(transition_matrix(S, n, 1), S(n))
        assert np.array_equal(transition_matrix(S, n, -1), np.linalg.inv(S(n - 1)))


def test_against_brute_force_products():
    rng = np.random.default_rng(0)
    seqs = {d: MatrixSequence.random(d, seed=d) for d in range(1, 6)}
    for _ in range(200):
        d = int(rng.integers(1, 6))
        n, m = int(rng.integers(-50, 51)), int(rng.integers(-50, 51))
        S = seqs[d]
        want = brute(S, n, m)
        got = transition_matrix(S, n, m)
        assert np.linalg.norm(got - want) <= 1e-8 * max(1.0, np.linalg.norm(want))


def test_random_cocycle_passes():
    S = MatrixSequence.random(4, seed=7)
    rep = verify_cocycle(S, tol=1e-8)
    assert rep.passed, rep.render()
    assert rep["cocycle"].samples == 200


def test_wrong_order_detected():
    S = MatrixSequence.random(3, seed=2)
    rep = verify_cocycle(S, transition=_wrong_order_transition)
    assert not rep.passed
    w = rep["cocycle"].witnesses[0]
    assert set(w) == {"n", "m", "p", "residual"}


def test_singular_step_named():
    S = MatrixSequence(lambda n: np.zeros((2, 2)) if n == 3 else np.eye(2), 2)
    with pytest.raises(SingularityError, match="A\\(3\\)"):
        transition_matrix(S, 0, 5)
    with pytest.raises(SingularityError, match="A\\(3\\)"):
        transition_matrix(S, 6, -4)
    assert np.array_equal(transition_matrix(S, 0, 3), np.eye(2))


def test_horizon():
    with pytest.raises(WindowRangeError):
        transition_matrix(TWO, 0, 10_001)


def test_generator_round_trip():
    S = MatrixSequence.random(2, seed=3)
    back = generator_from_cotranslation(cotranslation_from_sequence(S))
    for n in range(-10, 10):
        assert np.array_equal(back(n), S(n))
    Z = cotranslation_from_sequence(S)
    P = Z.P
    for n, m in [(0, 4), (-3, -5), (7, 2)]:
        assert np.allclose(as_affine(Z.evaluate(P.from_int(n), P.from_int(m))).A, transition_matrix(S, n, m))


def test_generator_of_identity_and_nonlinear():
    P = Integers()
    I = Cotranslation(P, Euclidean(2), [lambda w: Identity(Euclidean(2))])
    assert np.array_equal(generator_from_cotranslation(I)(4), np.eye(2))
    shift = Cotranslation(P, Euclidean(1), [lambda w: translation([1.0])])
    with pytest.raises(UnsupportedOperationError):
        generator_from_cotranslation(shift)(0)


def test_sequence_cotranslation_verifies():
    assert verify_cotranslation(cotranslation_from_sequence(MatrixSequence.random(2, seed=9))).passed


def test_json_sequences():
    S = sequence_from_json({"constant": [["1/2", "0"], ["0", "3"]]})
    assert S.exact and S(5)[0, 0] == Fraction(1, 2)
    S = sequence_from_json({"periodic": [[[2.0]], [[0.5]]]})
    assert S(3)[0, 0] == 0.5
    S = sequence_from_json({"random": {"d": 3, "seed": 4}})
    assert np.array_equal(S(2), MatrixSequence.random(3, seed=4)(2))
    with pytest.raises(ValueError):
        sequence_from_json({"bogus": 1})


def test_complex_entries():
    S = MatrixSequence.constant(np.array([[1j]]))
    assert np.allclose(transition_matrix(S, 0, 4), [[1.0]])
    assert np.allclose(transition_matrix(S, 0, 1), [[1j]])
    back = sequence_from_json(S.params)
    assert back(0)[0, 0] == 1j


def test_invariant_projector_commutes_with_block_diagonal():
    rng = np.random.default_rng(5)
    blocks = {}

    def rule(n):
        if n not in blocks:
            A = np.zeros((4, 4))
            A[:2, :2] = rng.uniform(-1, 1, (2, 2)) + 2 * np.eye(2)
            A[2:, 2:] = rng.uniform(-1, 1, (2, 2)) + 2 * np.eye(2)
            blocks[n] = A
        return blocks[n]

    S = MatrixSequence(rule, 4)
    Pr = np.diag([1.0, 1.0, 0.0, 0.0])
    for n, m in [(0, 5), (-3, -4), (2, -6)]:
        Z = transition_matrix(S, n, m)
        assert np.allclose(Pr @ Z, Z @ Pr)


@given(st.integers(-30, 30), st.integers(-15, 15), st.integers(-15, 15))
def test_cocycle_law_property(n, m, p):
    S = MatrixSequence.random(3, seed=11)
    assert verify_cocycle(S, [(n, m, p)]).passed
