"""Cotranslations ``Z: G x G -> Aut(X)`` built from generator maps.

A cotranslation is determined by one map per generator,
``A_i(eta) = Z(eta, xi_i)``.  Evaluation spells the second argument as
letters ``l_k ... l_1`` (``l_1`` acts first) and walks the base point:

    eta_0 = g,  eta_m = l_m eta_{m-1}
    T_m = A_i(eta_{m-1})                      if l_m = xi_i
    T_m = A_i(xi_i^{-1} eta_{m-1})^{-1}       if l_m = xi_i^{-1}
    Z(g, h) = T_k o ... o T_1

The inverse-letter rule is the identity ``Z(g, h)^{-1} = Z(hg, h^{-1})``.
"""

from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CommutationError,
    IncompleteDefinitionError,
    MorphismError,
    SpaceMismatchError,
    UnsupportedOperationError,
)
from .groups import (
    Cyclic,
    Dihedral,
    FreeGroup,
    FreeProduct,
    GroupPresentation,
    InfiniteDihedral,
    Integers,
    Word,
    project_free_factor,
    translate_word,
)
from .report import Report
from .transforms import (
    TABULATE_LIMIT,
    FiniteAlphabetTree,
    Identity,
    Space,
    Transform,
    TreePermutation,
    canonicalize,
    compose,
)

EXHAUSTIVE_LIMIT = 64
DEFAULT_RADIUS = 3
DEFAULT_TESTPOINTS = 64

GeneratorMap = Callable[[Word], Transform]


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("COTRANS_THREADS", "1")))
    except ValueError:
        return 1


class Walker:
    """Memoized evaluation of the letter walk for any value type.

    ``gen(i, eta)`` returns the value of generator ``i`` at base ``eta``
    (a letter tuple in normal form), ``inv`` inverts a value, ``combine(a, b)``
    is ``a o b`` and ``unit`` is the identity value.  Results are cached per
    ``(g, suffix)``, so evaluating ``h`` after any of its suffixes costs one
    step.  Cache access is guarded by a lock.
    """

    def __init__(self, P: GroupPresentation, gen, inv, combine, unit, cache: bool = True):
        self.P = P
        self._gen = gen
        self._inv = inv
        self._combine = combine
        self._unit = unit
        self.enabled = cache
        self._values: dict = {}
        self._gens: dict = {}
        self._lock = threading.Lock()

    def clear(self) -> None:
        with self._lock:
            self._values.clear()
            self._gens.clear()

    def _store(self, table, key, value):
        if self.enabled:
            with self._lock:
                table[key] = value
        return value

    def gen_value(self, i: int, sign: int, base: tuple) -> tuple:
        """Value of the letter ``(i, sign)`` at ``base`` and the new base."""
        key = (i, sign, base)
        hit = self._gens.get(key)
        if hit is not None:
            return hit
        new = self.P._reduce(((i, sign),) + base)
        if sign > 0:
            val = self._gen(i, Word(base))
        else:
            fwd = self._gens.get((i, 1, new))
            val = self._inv(fwd[0] if fwd is not None else self._gen(i, Word(new)))
        return self._store(self._gens, key, (val, new))

    def walk(self, g: tuple, letters: tuple):
        n = len(letters)
        values = self._values
        hit = values.get((g, letters))
        if hit is not None:
            return hit
        start, result = n, None
        for j in range(1, n):
            hit = values.get((g, letters[j:]))
            if hit is not None:
                start, result = j, hit
                break
        if result is None:
            start, result = n, self._unit
            if n == 0:
                return result
        base = self.P._reduce(letters[start:] + g)
        for m in range(start - 1, -1, -1):
            i, s = letters[m]
            val, base = self.gen_value(i, s, base)
            result = self._combine(val, result)
            self._store(values, (g, letters[m:]), result)
        return result


class Cotranslation:
    """A cotranslation given by generator maps ``A_i: G -> Aut(X)``.

    ``gens`` holds one entry per generator: a callable ``Word -> Transform``
    or a mapping keyed by normal-form words (finite lookup tables).
    """

    def __init__(
        self,
        presentation: GroupPresentation,
        space: Space,
        gens: Sequence[GeneratorMap | Mapping],
        name: str = "cotranslation",
        params: dict | None = None,
        cache: bool = True,
    ):
        if len(gens) != presentation.rank:
            raise ValueError(f"need {presentation.rank} generator maps, got {len(gens)}")
        self.P = presentation
        self.space = space
        self.name = name
        self.params = dict(params or {})
        self._maps = [self._as_callable(i, m) for i, m in enumerate(gens)]
        self._walker = Walker(
            presentation,
            gen=self._gen_checked,
            inv=lambda t: canonicalize(t.inverse()),
            combine=compose,
            unit=Identity(space),
            cache=cache,
        )

    def _as_callable(self, i: int, m) -> GeneratorMap:
        if callable(m):
            return m
        table = {self.P.normal_form(self.P.word(k)): v for k, v in dict(m).items()}

        def lookup(w: Word, table=table, i=i):
            try:
                return table[w]
            except KeyError:
                raise IncompleteDefinitionError(
                    f"generator {self.P.generators[i]} has no value at {self.P.format(w)}"
                ) from None

        return lookup

    def _gen_checked(self, i: int, eta: Word) -> Transform:
        t = self._maps[i](eta)
        if t is None:
            raise IncompleteDefinitionError(
                f"generator {self.P.generators[i]} undefined at {self.P.format(eta)}"
            )
        if t.space != self.space:
            raise SpaceMismatchError(f"generator value acts on {t.space}, expected {self.space}")
        t = canonicalize(t)
        n = t.normal()
        return t if n is None else n

    # -- evaluation ------------------------------------------------------
    def generator_value(self, i: int | str, eta) -> Transform:
        """``A_i(eta) = Z(eta, xi_i)``."""
        if isinstance(i, str):
            i = self.P.generators.index(i)
        return self._gen_checked(i, self.P.element(eta))

    def evaluate(self, g, h) -> Transform:
        g = self.P.element(g)
        h = self.P.element(h)
        return self._walker.walk(g.letters, h.letters)

    def evaluate_word(self, g, letters) -> Transform:
        """Walk the letters of ``letters`` as written, without reducing them first."""
        g = self.P.element(g)
        w = self.P.word(letters)
        return self._walker.walk(g.letters, w.letters)

    def clear_cache(self) -> None:
        self._walker.clear()

    def __call__(self, g, h) -> Transform:
        return self.evaluate(g, h)

    def __repr__(self):
        return f"Cotranslation({self.name}, {self.P!r}, {self.space!r})"


def evaluate(Z: Cotranslation, g, h) -> Transform:
    return Z.evaluate(g, h)


# ---------------------------------------------------------------------------
# verification


def default_elements(P: GroupPresentation, radius: int = DEFAULT_RADIUS) -> tuple[Word, ...]:
    n = P.order()
    if n is not None and n <= EXHAUSTIVE_LIMIT:
        return P.elements()
    return P.ball(radius)


def _testpoints(space: Space, testpoints, seed: int):
    if testpoints is None:
        return space.sample(DEFAULT_TESTPOINTS, seed)
    return space.check_batch(testpoints)


def _residual(space: Space, A, B) -> float:
    d = space.distance(A, B)
    return float(np.max(d)) if d.size else 0.0


def _ok(space: Space, res: float, tol: float) -> bool:
    return res == 0.0 if space.discrete else res <= tol


class _Probe:
    """Applies transforms to one fixed batch of test points.

    Tree points are tracked as vertex indices so tabulated transforms act
    by a single indexing operation.
    """

    def __init__(self, space: Space, X: np.ndarray):
        self.space = space
        self.tree = isinstance(space, FiniteAlphabetTree) and space.n_vertices <= TABULATE_LIMIT
        self.start = space.encode(X) if self.tree else X

    def apply(self, T: Transform, rep):
        if not self.tree:
            return T.apply_batch(rep)
        if isinstance(T, TreePermutation):
            return T.table[rep]
        if isinstance(T, Identity):
            return rep
        return self.space.encode(T.apply_batch(self.space.decode(rep)))

    def residual(self, A, B) -> float:
        if self.tree:
            return 0.0 if np.array_equal(A, B) else math.inf
        return _residual(self.space, A, B)


def verify_cotranslation(
    Z: Cotranslation,
    sample: Iterable[Word] | None = None,
    testpoints=None,
    tol: float = 1e-9,
    radius: int = DEFAULT_RADIUS,
    seed: int = 0,
    threads: int | None = None,
) -> Report:
    """Check the cocycle, unit and involution laws extensionally.

    The cocycle law ``Z(g, kh) = Z(hg, k) o Z(g, h)`` is tested on all
    triples from ``sample`` (default: the whole group when it has at most
    64 elements, else the ball of the given radius).
    """
    P, space = Z.P, Z.space
    elems = tuple(P.normal_form(w) for w in (default_elements(P, radius) if sample is None else sample))
    elems = tuple(dict.fromkeys(e.letters for e in elems))
    X = _testpoints(space, testpoints, seed)
    probe = _Probe(space, X)
    walk = Z._walker.walk
    mul = {(u, v): P._reduce(u + v) for u in elems for v in elems}
    images: dict = {}

    def img(g, h):
        out = images.get((g, h))
        if out is None:
            out = images[(g, h)] = probe.apply(walk(g, h), probe.start)
        return out

    report = Report(f"cotranslation laws: {Z.name}")
    unit_c = report.check("unit")
    inv_c = report.check("involution")
    co_c = report.check("cocycle")
    fmt = lambda *ws: [P.format(Word(w)) for w in ws]

    for g in elems:
        res = probe.residual(img(g, ()), probe.start)
        ok = _ok(space, res, tol)
        unit_c.record(res, ok, None if ok else fmt(g))

    for g, h in product(elems, elems):
        back = probe.apply(walk(mul[(h, g)], P._reduce(Word(h).formal_inverse().letters)), img(g, h))
        res = probe.residual(back, probe.start)
        ok = _ok(space, res, tol)
        inv_c.record(res, ok, None if ok else fmt(g, h))

    def run(g):
        rows = []
        for h in elems:
            Y = img(g, h)
            hg = mul[(h, g)]
            for k in elems:
                res = probe.residual(img(g, mul[(k, h)]), probe.apply(walk(hg, k), Y))
                rows.append((res, _ok(space, res, tol), h, k))
        return g, rows

    n_threads = threads or thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            chunks = list(pool.map(run, elems))
    else:
        chunks = [run(g) for g in elems]
    for g, rows in chunks:
        for res, ok, h, k in rows:
            co_c.record(res, ok, None if ok else fmt(g, h, k))
    report.extras["elements"] = len(elems)
    report.extras["testpoints"] = int(X.shape[0])
    return report


def check_relation_preservation(
    Z: Cotranslation,
    basepoints: Iterable[Word] | None = None,
    testpoints=None,
    tol: float = 1e-9,
    radius: int = DEFAULT_RADIUS,
    seed: int = 0,
) -> Report:
    """For each relator ``p`` and base ``eta``, the walk of ``p``'s letters from ``eta`` is the identity."""
    P, space = Z.P, Z.space
    bases = default_elements(P, radius) if basepoints is None else [P.normal_form(b) for b in basepoints]
    X = _testpoints(space, testpoints, seed)
    report = Report(f"relation preservation: {Z.name}")
    for rel in P.relators:
        c = report.check(f"relator {P.format(rel)}")
        for eta in bases:
            T = Z._walker.walk(eta.letters, rel.letters)
            res = _residual(space, T.apply_batch(X), X)
            c.record(res, _ok(space, res, tol), {"relator": P.format(rel), "base": P.format(eta), "residual": res})
    if not P.relators:
        report.extras["note"] = "presentation has no relators"
    return report


def check_dihedral_conditions(
    Z: Cotranslation, testpoints=None, tol: float = 1e-9, seed: int = 0
) -> Report:
    """The five conditions on ``A_r``, ``A_s`` that make a ``D_2n`` cotranslation, evaluated literally."""
    P = Z.P
    if not isinstance(P, Dihedral):
        raise UnsupportedOperationError("dihedral conditions need a Dihedral presentation")
    n, space = P.n, Z.space
    X = _testpoints(space, testpoints, seed)
    Ar = lambda e, k: Z.generator_value(0, P.element_from(e, k))
    As = lambda e, k: Z.generator_value(1, P.element_from(e, k))
    report = Report(f"dihedral conditions: {Z.name}")

    def record(name, chain, i):
        # chain is written left to right; the last map acts first
        Y = X
        for t in reversed(chain):
            Y = t.apply_batch(Y)
        res = _residual(space, Y, X)
        report.check(name).record(res, _ok(space, res, tol), {"i": i, "residual": res})

    for i in range(n):
        record("r-cycle at r^i", [Ar(0, i + j) for j in range(n - 1, -1, -1)], i)
        record("r-cycle at sr^i", [Ar(1, i - j) for j in range(n - 1, -1, -1)], i)
        record("s-pair", [As(1, i), As(0, i)], i)
        record("s-pair", [As(0, i), As(1, i)], i)
        record("sr-square at r^i", [As(1, i), Ar(1, i + 1), As(0, i + 1), Ar(0, i)], i)
        record("sr-square at sr^i", [As(0, i), Ar(0, i - 1), As(1, i - 1), Ar(1, i)], i)
    return report


# ---------------------------------------------------------------------------
# constructions


def morphism_from_generators(P: GroupPresentation, images: Sequence[Transform], space: Space):
    """The map ``w -> gamma(w)`` multiplying generator images along the normal form."""
    images = [canonicalize(t) for t in images]
    inverses = [canonicalize(t.inverse()) for t in images]
    cache: dict = {}

    def gamma(w: Word) -> Transform:
        w = P.normal_form(w)
        out = cache.get(w)
        if out is None:
            out = Identity(space)
            for i, s in w.letters:
                out = compose(out, images[i] if s > 0 else inverses[i])
            cache[w] = out
        return out

    return gamma


def _check_morphism(gamma, P, space, sample, X, tol):
    for u, v in product(sample, sample):
        lhs = gamma(P.multiply(u, v)).apply_batch(X)
        rhs = gamma(u).apply_batch(gamma(v).apply_batch(X))
        res = _residual(space, lhs, rhs)
        if not _ok(space, res, tol):
            raise MorphismError(
                f"gamma is not a morphism at ({P.format(u)}, {P.format(v)})",
                witness={"u": P.format(u), "v": P.format(v), "residual": res},
            )


def from_group_morphism(
    gamma: Callable[[Word], Transform],
    P: GroupPresentation,
    space: Space,
    sample: Iterable[Word] | None = None,
    tol: float = 1e-9,
    seed: int = 0,
    name: str = "group morphism",
) -> Cotranslation:
    """``Z(g, h) = gamma(h)``; ``gamma`` is checked to be a morphism on samples."""
    elems = list(default_elements(P, 2) if sample is None else sample)
    X = space.sample(DEFAULT_TESTPOINTS, seed)
    _check_morphism(gamma, P, space, elems, X, tol)
    gens = [(lambda eta, i=i: gamma(P.gen(i))) for i in range(P.rank)]
    return Cotranslation(P, space, gens, name=name)


def scalar_twist(
    Z: Cotranslation,
    gamma: Callable[[Word], Transform],
    sample: Iterable[Word] | None = None,
    tol: float = 1e-9,
    seed: int = 0,
) -> Cotranslation:
    """``W(g, h) = Z(g, h) o gamma(h)`` for a morphism ``gamma`` commuting with ``Z``."""
    P, space = Z.P, Z.space
    elems = list(default_elements(P, 2) if sample is None else sample)
    X = space.sample(DEFAULT_TESTPOINTS, seed)
    _check_morphism(gamma, P, space, elems, X, tol)
    for k, g, h in product(elems, elems, elems):
        zk = Z.evaluate(g, h)
        gk = gamma(k)
        res = _residual(space, gk.apply_batch(zk.apply_batch(X)), zk.apply_batch(gk.apply_batch(X)))
        if not _ok(space, res, tol):
            raise CommutationError(
                "gamma does not commute with Z",
                witness={"k": P.format(k), "g": P.format(g), "h": P.format(h), "residual": res},
            )
    gens = [
        (lambda eta, i=i: compose(Z.generator_value(i, eta), gamma(P.gen(i))))
        for i in range(P.rank)
    ]
    return Cotranslation(P, space, gens, name=f"{Z.name} twisted", params=Z.params)


def free_product_lift(Z_G: Cotranslation, Z_H: Cotranslation) -> Cotranslation:
    """Cotranslation of ``G * H`` with ``A_s(w) = A_s(pi_G(w))`` and ``A_t(w) = A_t(pi_H(w))``."""
    if Z_G.space != Z_H.space:
        raise SpaceMismatchError(f"{Z_G.space} vs {Z_H.space}")
    P = FreeProduct(Z_G.P, Z_H.P)
    gens = []
    for i in range(Z_G.P.rank):
        gens.append(lambda w, i=i: Z_G.generator_value(i, project_free_factor(w, "left", P)))
    for j in range(Z_H.P.rank):
        gens.append(lambda w, j=j: Z_H.generator_value(j, project_free_factor(w, "right", P)))
    return Cotranslation(P, Z_G.space, gens, name=f"{Z_G.name} * {Z_H.name}")


def _cyclic_product(symbols, orders) -> GroupPresentation:
    parts = [Cyclic(n, s) if n else Integers(s) for s, n in zip(symbols, orders)]
    if len(parts) == 1:
        return parts[0]
    if all(n == 0 for n in orders):
        return FreeGroup(len(parts), tuple(symbols))
    P = parts[0]
    for q in parts[1:]:
        P = FreeProduct(P, q)
    return P


def _power_orders(G: GroupPresentation) -> dict:
    """Relator (as letter tuple) -> (generator index, order) for pure power relators."""
    out = {}
    for rel in G.relators:
        idx = {i for i, _ in rel.letters}
        if len(idx) == 1 and all(s == 1 for _, s in rel.letters):
            out[rel.letters] = (idx.pop(), len(rel))
    return out


def descended_presentation(G: GroupPresentation, relators: Iterable) -> GroupPresentation:
    """The presentation ``<S | R0>`` for a subset ``R0`` of ``G``'s relators.

    Supported when ``R0`` is all of ``R`` or consists of power relators
    ``x^n``, so that ``<S | R0>`` is a free product of cyclic groups.
    """
    R = [r.letters for r in G.relators]
    R0 = []
    for r in relators:
        w = G.word(r) if not isinstance(r, Word) else r
        if w.letters not in R:
            raise ValueError(f"{G.format(w)} is not a relator of {G!r}")
        if w.letters not in R0:
            R0.append(w.letters)
    if set(R0) == set(R):
        return G
    powers = _power_orders(G)
    if any(r not in powers for r in R0):
        raise UnsupportedOperationError("only power relators can be kept when descending")
    orders = [0] * G.rank
    for r in R0:
        i, n = powers[r]
        orders[i] = n
    return _cyclic_product(G.generators, orders)


def presentation_descent(Z: Cotranslation, target) -> Cotranslation:
    """Pull ``Z`` back along the canonical map ``pi: <S | R0> -> <S | R>``.

    ``target`` is either the presentation ``<S | R0>`` itself or the list
    ``R0`` of kept relators.  Generator maps become ``A_s o pi``.
    """
    G = Z.P
    H = target if isinstance(target, GroupPresentation) else descended_presentation(G, target)
    if H == G:
        return Z
    if set(H.generators) != set(G.generators):
        raise UnsupportedOperationError("descent needs presentations on the same generator symbols")
    for rel in H.relators:
        if not translate_word(rel, H, G).is_identity():
            raise UnsupportedOperationError(f"relator {H.format(rel)} does not hold in {G!r}")
    gens = []
    for s in H.generators:
        i = G.generators.index(s)
        gens.append(lambda w, i=i: Z.generator_value(i, translate_word(w, H, G)))
    return Cotranslation(H, Z.space, gens, name=f"{Z.name} descended", params=Z.params)
