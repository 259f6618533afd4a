"""Skew-products ``(X, G, Y, sigma)`` and their correspondence with cotranslations.

A hull ``Y`` is a family of maps ``psi: G x X -> X`` indexed by some
hashable keys.  For the hull of a cotranslation the keys are group
elements and ``psi_g(h, x) = Z(g, h)(x)``; the group acts on keys by
``sigma(h, psi_g) = psi_{hg}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .cotranslation import Cotranslation, _ok, _residual, _testpoints, default_elements
from .errors import AdmissibilityError, WindowRangeError
from .groups import GroupPresentation, Word
from .report import Report
from .transforms import Identity, Space, Transform


@dataclass
class Hull:
    """Index-backed family ``psi_i(h, .)``; nothing is materialized."""

    P: GroupPresentation
    space: Space
    member: Callable[[Hashable, Word], Transform]
    indices: Callable[[int], Sequence[Hashable]]

    def psi(self, index, h) -> Transform:
        return self.member(index, self.P.element(h))

    def __call__(self, index, h, x):
        return self.psi(index, h).apply_batch(self.space.check_batch(x))


@dataclass
class SkewProduct:
    hull: Hull
    sigma: Callable[[Word, Hashable], Hashable]
    base_index: Hashable = None

    @property
    def P(self) -> GroupPresentation:
        return self.hull.P

    @property
    def space(self) -> Space:
        return self.hull.space


def left_translation_action(P: GroupPresentation):
    """``sigma(h, psi_g) = psi_{hg}``."""
    return lambda h, g: P.multiply(h, g)


def hull_from_cotranslation(Z: Cotranslation) -> SkewProduct:
    P = Z.P
    hull = Hull(
        P,
        Z.space,
        member=lambda g, h: Z.evaluate(g, h),
        indices=lambda radius: default_elements(P, radius),
    )
    return SkewProduct(hull, left_translation_action(P), base_index=P.identity)


def single_map_hull(P: GroupPresentation, space: Space, action: Callable[[Word], Transform]) -> SkewProduct:
    """A hull with one member ``psi(h, x) = action(h)(x)`` and trivial ``sigma``."""
    hull = Hull(P, space, member=lambda _, h: action(h), indices=lambda radius: (0,))
    return SkewProduct(hull, lambda h, i: i, base_index=0)


def verify_skew_axiom(
    skew: SkewProduct,
    sample: Iterable[Word] | None = None,
    indices: Iterable[Hashable] | None = None,
    testpoints=None,
    tol: float = 1e-9,
    radius: int = 3,
    seed: int = 0,
    sigma: Callable | None = None,
) -> Report:
    """Admissibility, the left-action law for ``sigma`` and ``[sigma(h, psi)](k, psi(h, x)) = psi(kh, x)``.

    Passing ``sigma`` overrides the skew-product's action, which lets tests
    confirm a wrong action is detected.
    """
    P, space, hull = skew.P, skew.space, skew.hull
    sigma = sigma or skew.sigma
    elems = [P.normal_form(w) for w in (default_elements(P, radius) if sample is None else sample)]
    idx = list(hull.indices(radius) if indices is None else indices)
    X = _testpoints(space, testpoints, seed)
    report = Report("skew-product axioms")

    adm = report.check("admissibility")
    for i in idx:
        res = _residual(space, hull.member(i, P.identity).apply_batch(X), X)
        adm.record(res, _ok(space, res, tol), {"index": _fmt_index(P, i)})

    inv = report.check("invertible slices")
    for i, h in product(idx, elems):
        T = hull.member(i, h)
        res = _residual(space, T.inverse().apply_batch(T.apply_batch(X)), X)
        inv.record(res, _ok(space, res, tol), {"index": _fmt_index(P, i), "h": P.format(h)})

    act = report.check("left action")
    for i in idx:
        ok = sigma(P.identity, i) == i
        act.record(0.0 if ok else 1.0, ok, {"index": _fmt_index(P, i), "h": "e"})
        for h, k in product(elems, elems):
            ok = sigma(k, sigma(h, i)) == sigma(P.multiply(k, h), i)
            act.record(0.0 if ok else 1.0, ok, {"index": _fmt_index(P, i), "h": P.format(h), "k": P.format(k)})

    ax = report.check("axiom iii")
    for i, h in product(idx, elems):
        Y = hull.member(i, h).apply_batch(X)
        moved = sigma(h, i)
        for k in elems:
            lhs = hull.member(moved, k).apply_batch(Y)
            rhs = hull.member(i, P.multiply(k, h)).apply_batch(X)
            res = _residual(space, lhs, rhs)
            ok = _ok(space, res, tol)
            ax.record(res, ok, None if ok else {"index": _fmt_index(P, i), "h": P.format(h), "k": P.format(k)})
    return report


def _fmt_index(P, i):
    return P.format(i) if isinstance(i, Word) else i


def cotranslation_from_hull(
    skew: SkewProduct,
    sample: Iterable[Word] | None = None,
    testpoints=None,
    tol: float = 1e-9,
    radius: int = 3,
    seed: int = 0,
) -> Cotranslation:
    """``Z(g, h) = psi_{g.base}(h, .)`` where ``g.base = sigma(g, base_index)``.

    Admissibility is checked on the sampled orbit of the base index.
    """
    P, space, hull = skew.P, skew.space, skew.hull
    base = skew.base_index
    elems = [P.normal_form(w) for w in (default_elements(P, radius) if sample is None else sample)]
    X = _testpoints(space, testpoints, seed)
    for g in elems:
        i = skew.sigma(g, base)
        T = hull.member(i, P.identity)
        res = _residual(space, T.apply_batch(X), X)
        if not _ok(space, res, tol):
            raise AdmissibilityError(f"psi(e, .) is not the identity at index {_fmt_index(P, i)}")
    gens = [
        (lambda eta, j=j: hull.member(skew.sigma(eta, base), P.gen(j)))
        for j in range(P.rank)
    ]
    return Cotranslation(P, space, gens, name="from hull")


def stabilizer_coincidences(
    skew: SkewProduct,
    sample: Iterable[Word] | None = None,
    testpoints=None,
    tol: float = 1e-9,
    radius: int = 2,
    seed: int = 0,
) -> list[tuple[str, str]]:
    """Pairs of orbit elements ``g1 != g2`` whose slices agree on every sampled ``h``.

    These are candidates for elements identified by the stabilizer of the
    base index.  They are reported only; no quotient is taken.
    """
    P, space, hull = skew.P, skew.space, skew.hull
    elems = [P.normal_form(w) for w in (default_elements(P, radius) if sample is None else sample)]
    X = _testpoints(space, testpoints, seed)
    sig = {}
    for g in elems:
        i = skew.sigma(g, skew.base_index)
        sig[g] = [hull.member(i, h).apply_batch(X) for h in elems]
    out = []
    for g1, g2 in combinations(elems, 2):
        if all(_ok(space, _residual(space, a, b), tol) for a, b in zip(sig[g1], sig[g2])):
            out.append((P.format(g1), P.format(g2)))
    return out


class Suspension:
    """The morphism ``W(g)(h, x) = (gh, Z(h, g)(x))`` on ``window x X``.

    ``window`` is a finite list of group elements (default: the whole group
    for small finite groups, else a ball).  Points are pairs of an index
    array into the window and a batch of points of ``X``.
    """

    def __init__(self, Z: Cotranslation, window: Sequence[Word] | None = None, radius: int = 3):
        self.Z = Z
        self.P = Z.P
        self.window = tuple(self.P.normal_form(w) for w in (default_elements(self.P, radius) if window is None else window))
        self._pos = {w: i for i, w in enumerate(self.window)}

    def label(self, w) -> int:
        w = self.P.element(w)
        try:
            return self._pos[w]
        except KeyError:
            raise WindowRangeError(f"{self.P.format(w)} is outside the suspension window") from None

    def apply(self, g, labels: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.P.element(g)
        labels = np.asarray(labels, dtype=np.int64)
        X = self.Z.space.check_batch(X)
        new_labels = np.empty_like(labels)
        Y = X.copy()
        for lab in np.unique(labels):
            h = self.window[lab]
            m = labels == lab
            new_labels[m] = self.label(self.P.multiply(g, h))
            Y[m] = self.Z.evaluate(h, g).apply_batch(X[m])
        return new_labels, Y

    def verify_morphism(self, sample=None, testpoints=None, tol: float = 1e-9, seed: int = 0) -> Report:
        """``W(g2 g1) = W(g2) o W(g1)`` and ``pi_G(W(g)(h, x)) = gh``.

        Pairs whose intermediate products leave the window are counted in
        ``extras['skipped']``.
        """
        P, space = self.P, self.Z.space
        elems = list(self.window if sample is None else [P.normal_form(w) for w in sample])
        X0 = _testpoints(space, testpoints, seed)
        n = X0.shape[0]
        labels = np.arange(n) % len(self.window)
        report = Report("suspension morphism")
        proj = report.check("projection")
        law = report.check("morphism")
        unit = report.check("unit")
        skipped = 0
        ul, uX = self.apply(P.identity, labels, X0)
        res = _residual(space, uX, X0)
        ok = np.array_equal(ul, labels) and _ok(space, res, tol)
        unit.record(res, ok, None if ok else {"g": "e"})
        for g1, g2 in product(elems, elems):
            try:
                l1, Y1 = self.apply(g1, labels, X0)
                l2, Y2 = self.apply(g2, l1, Y1)
                l3, Y3 = self.apply(P.multiply(g2, g1), labels, X0)
            except WindowRangeError:
                skipped += 1
                continue
            want = np.array([self.label(P.multiply(g1, self.window[i])) for i in labels])
            ok = np.array_equal(l1, want)
            proj.record(0.0 if ok else 1.0, ok, None if ok else {"g": P.format(g1)})
            res = _residual(space, Y2, Y3)
            ok = np.array_equal(l2, l3) and _ok(space, res, tol)
            law.record(res, ok, None if ok else {"g1": P.format(g1), "g2": P.format(g2)})
        report.extras["skipped"] = skipped
        return report


def suspension_morphism(Z: Cotranslation, window=None, radius: int = 3) -> Suspension:
    return Suspension(Z, window, radius)
