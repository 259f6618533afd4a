import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cotrans.errors import ConfigurationError, SingularityError, SpaceMismatchError, WindowRangeError
from cotrans.transforms import (
    Affine,
    CopyShift,
    Euclidean,
    FiniteAlphabetTree,
    Identity,
    LabeledEuclidean,
    LabelGated,
    PermutationOfSymbols,
    PositionSwap,
    ProdiscreteSequence,
    Rotation,
    TreePortrait,
    apply,
    approx_equal,
    as_affine,
    canonicalize,
    compose,
    compose_all,
    invert,
    max_deviation,
    reflection,
    space_from_json,
    transform_from_json,
    translation,
)

E1, E2 = Euclidean(1), Euclidean(2)
LAB = LabeledEuclidean(2)
TREE = FiniteAlphabetTree(2, 5)
SEQ = ProdiscreteSequence(3, 8)
angles = st.floats(-10, 10, allow_nan=False)


def test_rotation_quarter_turn():
    assert np.allclose(apply(Rotation(0, 1, math.pi / 2), [1.0, 0.0]), [0.0, 1.0], atol=1e-12)


def test_copy_shift():
    assert np.array_equal(apply(CopyShift(LAB, -1), [3, 0.5, -1.0]), [2, 0.5, -1.0])


def test_tree_portrait_first_letter_swap():
    t = TreePortrait(TREE, (1,), (1, 0))
    assert list(apply(t, TREE.vertex([1, 0]))[:2]) == [1, 1]
    # outside the subtree below 1 nothing moves
    assert list(apply(t, TREE.vertex([0, 0]))[:2]) == [0, 0]


def test_compose_identity():
    t = Affine([[2]], [1])
    X = E1.sample(20)
    assert approx_equal(compose(Identity(E1), t), t, X)


@given(angles, angles)
def test_rotations_add(a, b):
    X = E2.sample(20, seed=1)
    assert max_deviation(compose(Rotation(0, 1, a), Rotation(0, 1, b)), Rotation(0, 1, a + b), X) <= 1e-10


def test_affine_compose_exact():
    f = Affine.exact_scalar(1, 1)
    g = Affine.exact_scalar(2, 0)
    h = as_affine(compose(f, g))
    assert h.exact and h.coefficients() == (Fraction(2), Fraction(1))


def test_invert_examples():
    assert isinstance(canonicalize(invert(Identity(E1))), Identity)
    inv = as_affine(invert(Affine.exact_scalar(2, 2)))
    assert inv.coefficients() == (Fraction(1, 2), Fraction(-1))
    swap = PositionSwap(SEQ, 3)
    assert approx_equal(invert(swap), swap, SEQ.sample(30))


def test_approx_equal_examples():
    circle = np.array([[math.cos(t), math.sin(t)] for t in np.linspace(0, 2 * math.pi, 17)])
    assert approx_equal(Rotation(0, 1, 2 * math.pi), Identity(E2), circle)
    assert not approx_equal(Affine([[1]], [1]), Identity(E1), E1.sample(5))
    with pytest.raises(ConfigurationError):
        approx_equal(Identity(E1), Identity(E1), np.zeros((0, 1)))


def test_singular_affine_rejected():
    with pytest.raises(SingularityError):
        Affine([[1, 2], [2, 4]])
    with pytest.raises(SingularityError):
        Affine([[1.0, 0.0], [0.0, 1e-14]])


def test_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        compose(Rotation(0, 1, 1.0), Affine([[1]], [0]))


def test_window_range():
    with pytest.raises(WindowRangeError):
        apply(CopyShift(LabeledEuclidean(2, window=4), 1), [4, 0.0, 0.0])
    with pytest.raises(WindowRangeError):
        PositionSwap(SEQ, 8)


TRANSFORMS = [
    (E2, lambda: Rotation(0, 1, 0.7)),
    (E2, lambda: reflection(0.3)),
    (E2, lambda: translation([1.0, -2.0])),
    (E2, lambda: Affine([[1.0, 2.0], [0.5, 3.0]], [0.1, 0.2])),
    (LAB, lambda: LabelGated(LAB, "odd", Rotation(0, 1, 0.4))),
    (LAB, lambda: CopyShift(LAB, 2)),
    (LAB, lambda: LabelGated(LAB, 3, reflection(1.0))),
    (SEQ, lambda: PermutationOfSymbols(SEQ, (2, 0, 1), 0)),
    (SEQ, lambda: PositionSwap(SEQ, 5)),
    (TREE, lambda: TreePortrait(TREE, (0, 1), (1, 0))),
]


@pytest.mark.parametrize("space,make", TRANSFORMS)
def test_inverse_round_trip(space, make):
    t = make()
    X = space.sample(40, seed=3)
    assert approx_equal(compose(invert(t), t), Identity(space), X)
    assert approx_equal(invert(invert(t)), t, X)


@pytest.mark.parametrize("space,make", TRANSFORMS)
def test_json_round_trip(space, make):
    t = make()
    back = transform_from_json(t.to_json(), space)
    assert approx_equal(back, t, space.sample(40, seed=5))
    assert space_from_json(space.to_json()) == space


@given(st.lists(st.sampled_from(range(len(TRANSFORMS[:4]))), min_size=1, max_size=6), st.integers(0, 2**16))
def test_canonicalize_preserves_semantics(idx, seed):
    parts = [TRANSFORMS[i][1]() for i in idx]
    t = compose_all(parts, E2)
    X = E2.sample(16, seed=seed)
    naive = X
    for p in reversed(parts):
        naive = p.apply_batch(naive)
    assert np.allclose(canonicalize(t).apply_batch(X), naive, atol=1e-9)


@given(st.lists(st.sampled_from([4, 5, 6]), min_size=1, max_size=5), st.integers(0, 2**16))
def test_labeled_fusion(idx, seed):
    parts = [TRANSFORMS[i][1]() for i in idx]
    t = compose_all(parts, LAB)
    X = LabeledEuclidean(2).sample(16, seed=seed)
    naive = X
    for p in reversed(parts):
        naive = p.apply_batch(naive)
    assert np.allclose(canonicalize(t).apply_batch(X), naive)


def test_tree_transform_preserves_adjacency():
    t = canonicalize(compose(TreePortrait(TREE, (), (1, 0)), TreePortrait(TREE, (1,), (1, 0))))
    V = TREE.all_vertices
    img = t.apply_batch(V)
    for v, w in zip(V, img):
        n = int(np.sum(v >= 0))
        assert int(np.sum(w >= 0)) == n
        if n:
            parent = v.copy()
            parent[n - 1] = -1
            assert np.array_equal(t.apply_batch(parent[None])[0][: n - 1], w[: n - 1])
