"""Ready-made cotranslations of cyclic, dihedral, free-product and free groups.

Every builder validates its parameters and returns a :class:`Cotranslation`
that passes :func:`verify_cotranslation` on its default sample.  Sequence
parameters given as finite lists are repeated cyclically.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

from .cotranslation import Cotranslation
from .errors import ParameterError
from .groups import Cyclic, Dihedral, FreeGroup, FreeProduct, InfiniteDihedral, Word
from .transforms import (
    Affine,
    CopyShift,
    Euclidean,
    FiniteAlphabetTree,
    LabeledEuclidean,
    LabelGated,
    PermutationOfSymbols,
    PositionSwap,
    ProdiscreteSequence,
    Rotation,
    TreePortrait,
    reflection,
    translation,
)

TWO_PI = 2 * math.pi
ANGLE_TOL = 1e-9


def _in_two_pi_z(x: float) -> bool:
    k = round(x / TWO_PI)
    return abs(x - k * TWO_PI) <= ANGLE_TOL


def _cyclic(seq) -> Callable[[int], object]:
    seq = list(seq)
    if not seq:
        raise ParameterError("sequence parameter must be nonempty", witness=seq)
    return lambda n: seq[n % len(seq)]


def _leading(w: Word, i: int) -> tuple[int, int]:
    """Number of leading letters equal to generator ``i`` and the length of the rest."""
    k = 0
    for j, _ in w.letters:
        if j != i:
            break
        k += 1
    return k, len(w) - k


# ---------------------------------------------------------------------------


def c3_affine(f=(1, 1), g=(2, 0)) -> Cotranslation:
    """``C_3`` on the line with ``A(e) = f``, ``A(a) = g``, ``A(a^2) = f^{-1} o g^{-1}``.

    ``f`` and ``g`` are ``(slope, offset)`` pairs and are kept exact.
    """
    P = Cyclic(3)
    F = Affine.exact_scalar(Fraction(f[0]), Fraction(f[1]))
    G = Affine.exact_scalar(Fraction(g[0]), Fraction(g[1]))
    if F.A[0, 0] == 0 or G.A[0, 0] == 0:
        raise ParameterError("slopes must be nonzero", witness={"f": f, "g": g})
    table = {
        P.element("e"): F,
        P.element("a"): G,
        P.element("a^2"): F.inverse().then_after(G.inverse()),
    }
    params = {"f": [str(Fraction(x)) for x in f], "g": [str(Fraction(x)) for x in g]}
    return Cotranslation(P, Euclidean(1), [table], name="c3_affine", params=params)


def cyclic_multirotational(angle_sets=None, planes=None, d: int = 4) -> Cotranslation:
    """``C_n`` on ``R^d``: a bijection from ``C_n`` onto rotations by the given angle sets.

    Set ``i`` rotates in coordinate plane ``planes[i]``; each set's angles sum
    to a multiple of ``2 pi``.  The cyclic products are the identity only when
    the rotations commute, so the planes must coincide or be disjoint.
    """
    if angle_sets is None:
        angle_sets = [[0.5, 1.0, TWO_PI - 1.5], [1.2, TWO_PI - 1.2]]
    if planes is None:
        planes = [[2 * i % d, (2 * i + 1) % d] for i in range(len(angle_sets))]
    if len(planes) != len(angle_sets):
        raise ParameterError("need one plane per angle set", witness={"planes": planes})
    for i, (R, pl) in enumerate(zip(angle_sets, planes)):
        if not R:
            raise ParameterError("angle sets must be nonempty", witness={"set": i})
        if len(set(R)) != len(R):
            raise ParameterError("angles within a set must be distinct", witness={"set": i, "angles": R})
        if not _in_two_pi_z(sum(R)):
            raise ParameterError("angle set does not sum to a multiple of 2 pi", witness={"set": i, "sum": sum(R)})
        a, b = sorted(pl)
        if a == b or not 0 <= a < b < d:
            raise ParameterError("invalid rotation plane", witness={"plane": pl})
    norm = [tuple(sorted(p)) for p in planes]
    for x in range(len(norm)):
        for y in range(x + 1, len(norm)):
            p, q = norm[x], norm[y]
            if p != q and set(p) & set(q):
                raise ParameterError(
                    "rotations in planes sharing one axis do not commute", witness={"planes": [p, q]}
                )
    rots = [Rotation(*norm[i], angle, d) for i, R in enumerate(angle_sets) for angle in R]
    n = len(rots)
    P = Cyclic(n)
    table = {P.power(k): rots[k] for k in range(n)}
    params = {"angle_sets": [list(map(float, R)) for R in angle_sets], "planes": [list(p) for p in norm], "d": d}
    return Cotranslation(P, Euclidean(d), [table], name="cyclic_multirotational", params=params)


def cyclic_disjoint(angles=None) -> Cotranslation:
    """``C_{3n}`` acting on ``n`` labeled copies of the plane (copy ``i`` has label ``i``).

    ``angles[i]`` is a triple summing to a multiple of ``2 pi``; the
    rotations of copy ``i + 1`` are ``A(a^{3i + j}) = rot(angles[i][j])`` and
    they leave every other copy fixed.  Unit circles are invariant, so this
    also acts on ``n`` disjoint circles.
    """
    if angles is None:
        angles = [[1.0, 2.0, TWO_PI - 3.0], [0.3, 0.4, TWO_PI - 0.7]]
    for i, trio in enumerate(angles):
        if len(trio) != 3 or not _in_two_pi_z(sum(trio)):
            raise ParameterError("each copy needs three angles summing to a multiple of 2 pi", witness={"copy": i})
    n = len(angles)
    space = LabeledEuclidean(2)
    if n > space.window:
        raise ParameterError("too many copies for the label window", witness={"copies": n})
    P = Cyclic(3 * n)
    table = {
        P.power(3 * i + j): LabelGated(space, i + 1, Rotation(0, 1, float(angles[i][j])))
        for i in range(n)
        for j in range(3)
    }
    params = {"angles": [list(map(float, t)) for t in angles]}
    return Cotranslation(P, space, [table], name="cyclic_disjoint", params=params)


def d6_labeled_copies(angles=None, odd_angles: str = "shifted") -> Cotranslation:
    """``D_2n`` on copies of the plane labeled by the integers.

    ``A_r(r^j)`` rotates even copies by ``angles[j]``; ``A_r(s r^j)`` rotates
    odd copies by ``-angles[j - 1]``; ``A_s`` is the label shift down by one
    on ``r^j`` and up by one on ``s r^j``.  The angles must sum to a
    multiple of ``2 pi``.

    ``odd_angles="reversed"`` uses ``-angles[n - 1 - j]`` on ``s r^j``
    instead; that table only satisfies the ``(sr)^2`` relation when the
    angles coincide, and is kept to demonstrate the checker.
    """
    if angles is None:
        angles = [0.7, 1.9, TWO_PI - 2.6]
    angles = [float(x) for x in angles]
    n = len(angles)
    if n < 1:
        raise ParameterError("need at least one angle", witness=angles)
    if not _in_two_pi_z(sum(angles)):
        raise ParameterError("angles must sum to a multiple of 2 pi", witness={"sum": sum(angles)})
    if odd_angles not in ("shifted", "reversed"):
        raise ParameterError("odd_angles must be 'shifted' or 'reversed'", witness=odd_angles)
    P = Dihedral(n)
    space = LabeledEuclidean(2)
    down, up = CopyShift(space, -1), CopyShift(space, 1)

    def odd_index(j):
        return (j - 1) % n if odd_angles == "shifted" else (n - 1 - j) % n

    A_r = {}
    A_s = {}
    for j in range(n):
        A_r[P.element_from(0, j)] = LabelGated(space, "even", Rotation(0, 1, angles[j]))
        A_r[P.element_from(1, j)] = LabelGated(space, "odd", Rotation(0, 1, -angles[odd_index(j)]))
        A_s[P.element_from(0, j)] = down
        A_s[P.element_from(1, j)] = up
    params = {"angles": angles, "odd_angles": odd_angles}
    return Cotranslation(P, space, [A_r, A_s], name="d6_labeled_copies", params=params)


def _dinf(g_seq, h_seq, space, name, params) -> Cotranslation:
    """``A_a(au) = g_|u|``, ``A_a(u) = g_|u|^{-1}`` and likewise for ``b`` with ``h``."""
    P = InfiniteDihedral()

    def rule(i, seq):
        def A(w: Word):
            lead, rest = _leading(w, i)
            t = seq(rest)
            return t if lead else t.inverse()

        return A

    return Cotranslation(P, space, [rule(0, g_seq), rule(1, h_seq)], name=name, params=params)


def dinf_translation_rotation(offset=(1.0, 0.0), zeta=None) -> Cotranslation:
    """``g_n = f^n`` with ``f`` the translation by ``offset``; ``h_n`` the rotation by ``zeta_n``.

    ``zeta`` defaults to ``zeta_n = pi / 2^(n+1)``.
    """
    offset = [float(x) for x in offset]
    if len(offset) != 2:
        raise ParameterError("offset must be a plane vector", witness=offset)
    zeta_fn = (lambda n: math.pi / 2 ** (n + 1)) if zeta is None else _cyclic(zeta)
    g = lambda n: translation([n * x for x in offset])
    h = lambda n: Rotation(0, 1, float(zeta_fn(n)))
    params = {"offset": offset, "zeta": "pi/2^(n+1)" if zeta is None else list(map(float, zeta))}
    return _dinf(g, h, Euclidean(2), "dinf_translation_rotation", params)


def dinf_symmetry_rotation(lines=None, zeta=None) -> Cotranslation:
    """``g_n`` the reflection across the line at angle ``lines[n]``; ``h_n`` the rotation by ``zeta[n]``.

    Every ``zeta_n`` must satisfy ``0 < zeta_n <= pi``.
    """
    lines = [0.0, math.pi / 4, math.pi / 3] if lines is None else [float(x) for x in lines]
    zeta = [math.pi, math.pi / 2, math.pi / 3] if zeta is None else [float(x) for x in zeta]
    for k, z in enumerate(zeta):
        if not 0 < z <= math.pi:
            raise ParameterError("rotation angles must lie in (0, pi]", witness={"index": k, "zeta": z})
    L, Zf = _cyclic(lines), _cyclic(zeta)
    g = lambda n: reflection(L(n))
    h = lambda n: Rotation(0, 1, Zf(n))
    params = {"lines": lines, "zeta": zeta}
    return _dinf(g, h, Euclidean(2), "dinf_symmetry_rotation", params)


C3_PERMS = ((1, 0, 2), (0, 2, 1), (1, 2, 0))


def _perm_compose(p, q):
    return tuple(p[q[i]] for i in range(len(q)))


def c2c3_prodiscrete(length: int = 16, perms=C3_PERMS) -> Cotranslation:
    """``C_2 * C_3`` on sequences over ``{0, 1, 2}``.

    ``A_a(au) = A_a(u) = tau_|u|`` swaps positions 0 and ``|u|``;
    ``A_b(b^j v)`` permutes the symbol at position 0 by ``perms[j]``.
    The three permutations must compose to the identity (``perms[2]`` after
    ``perms[1]`` after ``perms[0]``).
    """
    perms = tuple(tuple(int(x) for x in p) for p in perms)
    if len(perms) != 3 or any(sorted(p) != [0, 1, 2] for p in perms):
        raise ParameterError("need three permutations of {0, 1, 2}", witness=perms)
    if _perm_compose(perms[2], _perm_compose(perms[1], perms[0])) != (0, 1, 2):
        raise ParameterError("perms[2] o perms[1] o perms[0] must be the identity", witness=perms)
    space = ProdiscreteSequence(3, length)
    P = FreeProduct(Cyclic(2, "a"), Cyclic(3, "b"))

    def A_a(w: Word):
        _, rest = _leading(w, 0)
        return PositionSwap(space, rest)

    def A_b(w: Word):
        j, _ = _leading(w, 1)
        return PermutationOfSymbols(space, perms[j], 0)

    params = {"length": length, "perms": [list(p) for p in perms]}
    return Cotranslation(P, space, [A_a, A_b], name="c2c3_prodiscrete", params=params)


def f2_binary_tree(depth: int = 6) -> Cotranslation:
    """``F_2`` on the binary tree: ``A_a(w) = A_b(w)`` swaps the children below ``phi(w)``.

    ``phi`` spells ``a^{+-1}`` as 1 and ``b^{+-1}`` as 0.
    """
    space = FiniteAlphabetTree(2, depth)
    P = FreeGroup(2)

    def A(w: Word):
        anchor = tuple(1 if i == 0 else 0 for i, _ in w.letters)
        return TreePortrait(space, anchor, (1, 0))

    return Cotranslation(P, space, [A, A], name="f2_binary_tree", params={"depth": depth})


def fn_tree(rank: int = 2, perms=None, depth: int = 5) -> Cotranslation:
    """``F_n`` on the ``2n``-ary tree whose vertices are words in ``a_i^{+-1}``.

    ``A_i(w)`` permutes the children of the vertex ``w`` by ``perms[i]``.
    Letter ``a_i`` is tree symbol ``2i`` and ``a_i^{-1}`` is ``2i + 1``.
    """
    if rank < 1:
        raise ParameterError("rank must be positive", witness=rank)
    size = 2 * rank
    if perms is None:
        perms = [tuple((k + i + 1) % size for k in range(size)) for i in range(rank)]
    perms = [tuple(int(x) for x in p) for p in perms]
    if len(perms) != rank or any(sorted(p) != list(range(size)) for p in perms):
        raise ParameterError(f"need {rank} permutations of range({size})", witness=perms)
    space = FiniteAlphabetTree(size, depth)
    P = FreeGroup(rank)

    def rule(i):
        def A(w: Word):
            anchor = tuple(2 * j + (0 if s > 0 else 1) for j, s in w.letters)
            return TreePortrait(space, anchor, perms[i])

        return A

    params = {"rank": rank, "perms": [list(p) for p in perms], "depth": depth}
    return Cotranslation(P, space, [rule(i) for i in range(rank)], name="fn_tree", params=params)


BUILDERS = {
    "c3_affine": c3_affine,
    "cyclic_multirotational": cyclic_multirotational,
    "cyclic_disjoint": cyclic_disjoint,
    "d6_labeled_copies": d6_labeled_copies,
    "dinf_translation_rotation": dinf_translation_rotation,
    "dinf_symmetry_rotation": dinf_symmetry_rotation,
    "c2c3_prodiscrete": c2c3_prodiscrete,
    "f2_binary_tree": f2_binary_tree,
    "fn_tree": fn_tree,
}

NAMES = tuple(BUILDERS)


def build_example(name: str, params: dict | None = None) -> Cotranslation:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ParameterError(f"unknown example {name!r}", witness={"known": list(NAMES)}) from None
    try:
        return builder(**(params or {}))
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {name}: {exc}", witness=params) from None
