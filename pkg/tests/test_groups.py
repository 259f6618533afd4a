import itertools

import pytest
from hypothesis import given, strategies as st
from sympy.combinatorics import Permutation

from cotrans.errors import MalformedWordError, UnsupportedOperationError
from cotrans.groups import (
    Cyclic,
    Dihedral,
    FreeGroup,
    FreeProduct,
    InfiniteDihedral,
    Integers,
    Word,
    ball,
    invert_word,
    multiply,
    normal_form,
    presentation_from_json,
    project_free_factor,
    translate_word,
)

FAMILIES = [
    Cyclic(3),
    Cyclic(6),
    Integers(),
    FreeGroup(2),
    FreeGroup(3),
    InfiniteDihedral(),
    Dihedral(3),
    Dihedral(5),
    FreeProduct(Cyclic(2, "a"), Cyclic(3, "b")),
]


def words(P, max_len=8):
    letters = st.tuples(st.integers(0, P.rank - 1), st.sampled_from([1, -1]))
    return st.lists(letters, max_size=max_len).map(lambda ls: Word(tuple(ls)))


def free_reduce(letters):
    out = []
    for x in letters:
        if out and out[-1][0] == x[0] and out[-1][1] == -x[1]:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


# independent models: each group as a permutation group via sympy


def dihedral_perm(P: Dihedral):
    n = P.n
    r = Permutation([(k + 1) % n for k in range(n)])
    s = Permutation([(-k) % n for k in range(n)])
    return [r, s]


def as_perm(w, gens, size):
    # sympy's p * q applies p first, so u o v is v * u
    out = Permutation(list(range(size)))
    for i, s in w.letters:
        g = gens[i] if s > 0 else gens[i] ** -1
        out = g * out
    return out


def test_cyclic_reduction():
    P = Cyclic(3)
    assert P.element("aaaa") == P.element("a")
    assert P.format(P.element("a^-1")) == "a^2"


def test_dihedral_rs():
    P = Dihedral(3)
    assert P.multiply(P.element("r"), P.element("s")) == P.element("s r^2")
    assert P.format(P.multiply(P.element("s"), P.element("r"))) == "sr"
    assert invert_word(P.element("sr"), P) == P.element("sr")


def test_dihedral_cayley_table_matches_permutations():
    for n in (3, 4, 6):
        P = Dihedral(n)
        gens = dihedral_perm(P)
        els = P.elements()
        assert len(els) == 2 * n
        images = {w: as_perm(w, gens, n) for w in els}
        assert len(set(map(lambda p: tuple(p.array_form), images.values()))) == 2 * n
        for u, v in itertools.product(els, els):
            lhs = images[P.multiply(u, v)]
            rhs = images[v] * images[u]
            assert lhs == rhs


def test_infinite_dihedral():
    P = InfiniteDihedral()
    assert P.element("aab") == P.element("b")
    assert set(map(P.format, ball(P, 2))) == {"e", "a", "b", "ab", "ba"}


def test_free_group_multiply_free_reduction_oracle():
    P = FreeGroup(2)
    assert P.format(multiply(P.element("ab"), P.element("ba"), P)) == "ab^2a"
    assert P.format(multiply(P.element("ab"), P.element("b^-1a^-1"), P)) == "e"


def test_ball_examples():
    assert set(map(Cyclic(3).format, ball(Cyclic(3), 5))) == {"e", "a", "a^2"}
    F1 = FreeGroup(1)
    assert set(map(F1.format, ball(F1, 2))) == {"e", "a", "a^-1", "a^2", "a^-2"}


@pytest.mark.parametrize("r", range(5))
def test_free_ball_sizes(r):
    # reduced words of length <= r in rank 2: 1 + 4 (3^r - 1) / 2
    assert len(ball(FreeGroup(2), r)) == 1 + 2 * (3**r - 1)


def test_project_free_factor():
    P = FreeProduct(Cyclic(2, "a"), Cyclic(3, "b"))
    w = P.word("ab^2a")
    assert project_free_factor(w, "left", P).is_identity()
    assert P.right.format(project_free_factor(w, "right", P)) == "b^2"
    assert project_free_factor(P.identity, "left", P).is_identity()
    with pytest.raises(UnsupportedOperationError):
        project_free_factor(w, "left", Cyclic(3))


def test_malformed_word():
    with pytest.raises(MalformedWordError):
        Cyclic(3).element("x")
    with pytest.raises(MalformedWordError):
        normal_form(Word(((5, 1),)), Cyclic(3))


def test_symbol_validation():
    with pytest.raises(ValueError):
        FreeGroup(2, ("a", "a"))
    with pytest.raises(ValueError):
        FreeProduct(Cyclic(2, "a"), Cyclic(3, "a"))


def test_json_round_trip():
    for P in FAMILIES:
        assert presentation_from_json(P.to_json()) == P


def test_translate_word():
    H = FreeGroup(2, ("r", "s"))
    G = Dihedral(3)
    w = translate_word(H.word("r s r s"), H, G)
    assert w.is_identity()


@pytest.mark.parametrize("P", FAMILIES, ids=lambda P: repr(P))
@given(data=st.data())
def test_group_laws(P, data):
    u, v, w = (P.normal_form(data.draw(words(P))) for _ in range(3))
    assert P.multiply(P.multiply(u, v), w) == P.multiply(u, P.multiply(v, w))
    assert P.multiply(u, P.identity) == u == P.multiply(P.identity, u)
    assert P.multiply(u, P.invert(u)).is_identity()
    assert P.normal_form(u) == u


@pytest.mark.parametrize("P", FAMILIES, ids=lambda P: repr(P))
@given(data=st.data())
def test_normal_form_idempotent_and_parse_format(P, data):
    w = P.normal_form(data.draw(words(P)))
    assert P.element(P.format(w)) == w


@given(data=st.data())
def test_free_group_matches_free_reduction(data):
    P = FreeGroup(2)
    w = data.draw(words(P, 12))
    assert P.normal_form(w).letters == free_reduce(w.letters)


@pytest.mark.parametrize("P", [Cyclic(4), Dihedral(4), FreeProduct(Cyclic(2, "a"), Cyclic(3, "b"))], ids=repr)
def test_relators_reduce_to_identity(P):
    for rel in P.relators:
        assert P.normal_form(rel).is_identity()
