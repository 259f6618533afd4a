"""The left-translations groupoid on ``G x G``.

An element ``(x, g)`` is an arrow from ``x`` to ``g.x``.  Two elements
``p = (x, g)`` and ``q = (y, h)`` compose when ``x = h.y`` and then
``p . q = (y, gh)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable

import numpy as np

from .errors import ComposabilityError
from .groups import GroupPresentation, Word
from .report import Report

EXHAUSTIVE_LIMIT = 64
DEFAULT_RADIUS = 3
MAX_TRIPLES = 50_000


@dataclass(frozen=True)
class GroupoidElement:
    base: Word
    arrow: Word


def element(P: GroupPresentation, base, arrow) -> GroupoidElement:
    return GroupoidElement(P.element(base), P.element(arrow))


def target_of(p: GroupoidElement, P: GroupPresentation) -> Word:
    return P.multiply(p.arrow, p.base)


def composable(p: GroupoidElement, q: GroupoidElement, P: GroupPresentation) -> bool:
    return P.normal_form(p.base) == P.multiply(q.arrow, q.base)


def compose_pair(p: GroupoidElement, q: GroupoidElement, P: GroupPresentation) -> GroupoidElement:
    if not composable(p, q, P):
        raise ComposabilityError(
            f"({P.format(p.base)}, {P.format(p.arrow)}) and ({P.format(q.base)}, {P.format(q.arrow)})"
            " are not composable"
        )
    return GroupoidElement(P.normal_form(q.base), P.multiply(p.arrow, q.arrow))


def inv_pair(p: GroupoidElement, P: GroupPresentation) -> GroupoidElement:
    return GroupoidElement(P.multiply(p.arrow, p.base), P.invert(p.arrow))


def is_unit(p: GroupoidElement, P: GroupPresentation) -> bool:
    """``p = inv(p) = p . p``, evaluated through the groupoid operations only."""
    if inv_pair(p, P) != _normalized(p, P):
        return False
    if not composable(p, p, P):
        return False
    return compose_pair(p, p, P) == _normalized(p, P)


def _normalized(p: GroupoidElement, P: GroupPresentation) -> GroupoidElement:
    return GroupoidElement(P.normal_form(p.base), P.normal_form(p.arrow))


def default_sample(P: GroupPresentation, radius: int = DEFAULT_RADIUS) -> list[GroupoidElement]:
    """All of ``G x G`` for small finite groups, else ``ball(r) x ball(r)``."""
    n = P.order()
    pts = P.elements() if n is not None and n <= EXHAUSTIVE_LIMIT else P.ball(radius)
    return [GroupoidElement(x, g) for x, g in product(pts, pts)]


def _fmt(p: GroupoidElement, P: GroupPresentation) -> list[str]:
    return [P.format(p.base), P.format(p.arrow)]


class _Memo:
    """Memoized ``normal_form``, ``multiply`` and ``invert`` of a presentation.

    Everything else is forwarded.  Used while checking large samples, where
    the same products recur many times.
    """

    def __init__(self, P: GroupPresentation):
        self._P = P
        self._nf: dict = {}
        self._mul: dict = {}
        self._inv: dict = {}

    def __getattr__(self, name):
        return getattr(self._P, name)

    def normal_form(self, w):
        out = self._nf.get(w)
        if out is None:
            out = self._nf[w] = self._P.normal_form(w)
            self._nf[out] = out
        return out

    def multiply(self, u, v):
        key = (u, v)
        out = self._mul.get(key)
        if out is None:
            out = self._mul[key] = self._P.multiply(u, v)
        return out

    def invert(self, w):
        out = self._inv.get(w)
        if out is None:
            out = self._inv[w] = self._P.invert(w)
        return out


def verify_groupoid_axioms(
    P: GroupPresentation,
    sample: Iterable[GroupoidElement] | None = None,
    compose: Callable | None = None,
    inverse: Callable | None = None,
    max_triples: int = MAX_TRIPLES,
    seed: int = 0,
) -> Report:
    """Check the groupoid axioms over all composable pairs and triples of ``sample``.

    ``compose`` and ``inverse`` default to :func:`compose_pair` and
    :func:`inv_pair`; passing replacements lets tests confirm that a broken
    law is caught.  When the sample has more than ``max_triples`` composable
    triples, associativity is checked on that many triples drawn with
    ``seed``; pairs are always exhaustive.
    """
    compose = compose or compose_pair
    inverse = inverse or inv_pair
    P = _Memo(P)
    sample = list(default_sample(P) if sample is None else sample)
    sample = list(dict.fromkeys(_normalized(p, P) for p in sample))
    report = Report("groupoid axioms")

    by_base: dict[Word, list[GroupoidElement]] = {}
    for q in sample:
        by_base.setdefault(target_of(q, P), []).append(q)

    inv_c = report.check("involution")
    inv_comp = report.check("inverse composable")
    for p in sample:
        ip = inverse(p, P)
        ok = _normalized(inverse(ip, P), P) == p
        inv_c.record(0.0 if ok else 1.0, ok, None if ok else _fmt(p, P))
        ok2 = composable(p, ip, P) and composable(ip, p, P)
        inv_comp.record(0.0 if ok2 else 1.0, ok2, None if ok2 else _fmt(p, P))

    assoc = report.check("associativity")
    ident = report.check("identity")
    pairs = []
    for p in sample:
        for q in by_base.get(p.base, ()):
            pairs.append((p, q))
            pq = compose(p, q, P)
            # inv(p) . (p . q) = q
            ip = inverse(p, P)
            try:
                ok = _normalized(compose(ip, pq, P), P) == q
            except ComposabilityError:
                ok = False
            ident.record(0.0 if ok else 1.0, ok, None if ok else {"left": _fmt(p, P), "right": _fmt(q, P)})
            # (p . q) . inv(q) = p
            try:
                ok = _normalized(compose(pq, inverse(q, P), P), P) == p
            except ComposabilityError:
                ok = False
            ident.record(0.0 if ok else 1.0, ok, None if ok else {"left": _fmt(p, P), "right": _fmt(q, P)})

    total = sum(len(by_base.get(q.base, ())) for _, q in pairs)
    if total <= max_triples:
        triples = ((p, q, r) for p, q in pairs for r in by_base.get(q.base, ()))
    else:
        rng = np.random.default_rng(seed)
        triples = []
        while len(triples) < max_triples:
            p, q = pairs[rng.integers(len(pairs))]
            rs = by_base.get(q.base, ())
            if rs:
                triples.append((p, q, rs[rng.integers(len(rs))]))
    for p, q, r in triples:
        try:
            a = compose(compose(p, q, P), r, P)
            b = compose(p, compose(q, r, P), P)
            ok = _normalized(a, P) == _normalized(b, P)
        except ComposabilityError:
            ok = False
        assoc.record(0.0 if ok else 1.0, ok, None if ok else {"triple": [_fmt(p, P), _fmt(q, P), _fmt(r, P)]})
    report.extras["composable_triples"] = total
    report.extras["associativity_sampled"] = total > max_triples
    return report
