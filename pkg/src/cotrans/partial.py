"""Matrix-valued partial cotranslations.

A partial cotranslation ``W: G x G -> K^{d x d}`` obeys
``W(g, kh) = W(hg, k) W(g, h)`` without requiring invertible values.
Everything here works over a group presentation or over :class:`RealLine`
(for flows); elements are whatever the group's ``element`` returns.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np
from scipy.linalg import null_space, subspace_angles

from .cotranslation import Walker, default_elements
from .errors import (
    ConditioningError,
    InconsistencyError,
    InvarianceError,
    OrthogonalityError,
    SpaceMismatchError,
    UnsupportedOperationError,
)
from .groups import GroupPresentation, Integers, Word
from .report import Report
from .transforms import as_affine

RANK_RTOL = 1e-9
ANGLE_TOL = 1e-7
COND_MAX = 1e12


class RealLine:
    """The additive group of real numbers, for flows."""

    family = "real"
    identity = 0.0

    def element(self, x) -> float:
        return float(x)

    def multiply(self, u, v) -> float:
        return float(u) + float(v)

    def invert(self, u) -> float:
        return -float(u)

    def format(self, x) -> str:
        return repr(float(x))

    def to_json(self) -> dict:
        return {"family": self.family}


def _el(G, x):
    return G.element(x)


def _fmt(G, x):
    return G.format(x)


def _seed_of(G, g, seed: int) -> list[int]:
    return [seed, zlib.crc32(_fmt(G, g).encode())]


def default_sample(G, radius: int = 3) -> list:
    if isinstance(G, RealLine):
        return [float(x) for x in np.linspace(-1.0, 1.0, 5)]
    return list(default_elements(G, radius))


def _random_invertible(rng, d: int, cond_max: float) -> np.ndarray:
    while True:
        M = rng.uniform(-1.0, 1.0, size=(d, d))
        if np.linalg.cond(M) <= cond_max:
            return M


# ---------------------------------------------------------------------------
# invertible matrix cocycles


class MatrixCocycle:
    """An invertible-valued matrix cotranslation ``Z(g, h)``."""

    def __init__(self, G, d: int, rule: Callable, name: str = "cocycle"):
        self.G = G
        self.d = d
        self._rule = rule
        self.name = name

    def __call__(self, g, h) -> np.ndarray:
        return self._rule(_el(self.G, g), _el(self.G, h))

    @classmethod
    def identity(cls, G, d: int) -> "MatrixCocycle":
        I = np.eye(d)
        return cls(G, d, lambda g, h: I, "identity")

    @classmethod
    def from_generators(cls, P: GroupPresentation, d: int, gens: Sequence[Callable]) -> "MatrixCocycle":
        """``gens[i](eta) = Z(eta, xi_i)``; other values by the letter walk."""
        walker = Walker(
            P,
            gen=lambda i, eta: np.asarray(gens[i](eta), dtype=float),
            inv=np.linalg.inv,
            combine=lambda a, b: a @ b,
            unit=np.eye(d),
        )
        return cls(P, d, lambda g, h: walker.walk(g.letters, h.letters), "from generators")

    @classmethod
    def constant_generators(cls, P: GroupPresentation, mats: Sequence) -> "MatrixCocycle":
        """``Z(g, h) = gamma(h)`` for the morphism sending generator ``i`` to ``mats[i]``."""
        arrs = [np.asarray(M, dtype=float) for M in mats]
        return cls.from_generators(P, arrs[0].shape[0], [lambda eta, M=M: M for M in arrs])

    @classmethod
    def from_gauge(cls, G, d: int, S: Callable) -> "MatrixCocycle":
        """``Z(g, h) = S(hg) S(g)^{-1}``."""
        return cls(G, d, lambda g, h: np.linalg.solve(S(g).T, S(G.multiply(h, g)).T).T, "gauge")

    @classmethod
    def from_sequence(cls, S) -> "MatrixCocycle":
        from .difference import transition_matrix

        G = Integers()
        return cls(G, S.d, lambda g, h: np.asarray(transition_matrix(S, G.to_int(g), G.to_int(h)), dtype=float), S.name)

    @classmethod
    def from_cotranslation(cls, Z) -> "MatrixCocycle":
        """Matrix part of a linear :class:`~cotrans.cotranslation.Cotranslation`."""

        def rule(g, h):
            aff = as_affine(Z.evaluate(g, h))
            if not aff.is_linear:
                raise UnsupportedOperationError(f"Z({Z.P.format(g)}, {Z.P.format(h)}) is not linear")
            return np.asarray(aff.A, dtype=float)

        return cls(Z.P, Z.space.d, rule, Z.name)

    @classmethod
    def from_flow(cls, Z) -> "MatrixCocycle":
        """Wrap a :class:`~cotrans.evolution.FlowCotranslation` over the real line."""
        return cls(RealLine(), Z.d, lambda r, t: Z(r, t), Z.name)


# ---------------------------------------------------------------------------
# projectors


class Projector:
    """``g -> P(g)``, idempotent matrices of constant rank.  Values are cached."""

    def __init__(self, G, d: int, rule: Callable, name: str = "projector"):
        self.G = G
        self.d = d
        self._rule = rule
        self.name = name
        self._cache: dict = {}

    def __call__(self, g) -> np.ndarray:
        g = _el(self.G, g)
        M = self._cache.get(g)
        if M is None:
            M = np.asarray(self._rule(g))
            if M.shape != (self.d, self.d):
                raise SpaceMismatchError(f"P({_fmt(self.G, g)}) has shape {M.shape}, expected {(self.d, self.d)}")
            self._cache[g] = M
        return M

    def complement(self) -> "Projector":
        I = np.eye(self.d)
        return Projector(self.G, self.d, lambda g: I - self(g), f"Id - {self.name}")

    @classmethod
    def constant(cls, G, M) -> "Projector":
        M = np.asarray(M, dtype=float)
        return cls(G, M.shape[0], lambda g: M, "constant")

    @classmethod
    def block(cls, G, d: int, n: int) -> "Projector":
        return cls.constant(G, block_matrix(d, n))

    @classmethod
    def gauge(cls, G, d: int, n: int, S: Callable) -> "Projector":
        """``S(g) diag(Id_n, 0) S(g)^{-1}``."""
        B = block_matrix(d, n)
        return cls(G, d, lambda g: S(g) @ np.linalg.solve(S(g).T, B.T).T, f"gauge block {n}")

    @classmethod
    def random(cls, G, d: int, n: int, seed: int = 0, cond_max: float = 50.0) -> "Projector":
        return cls.gauge(G, d, n, random_gauge(G, d, seed, cond_max))


def block_matrix(d: int, n: int, upper: bool = True) -> np.ndarray:
    """``diag(Id_n, 0)``, or ``diag(0, Id_{d-n})`` when ``upper`` is false."""
    if not 0 <= n <= d:
        raise ValueError(f"block size {n} outside [0, {d}]")
    v = np.zeros(d)
    if upper:
        v[:n] = 1.0
    else:
        v[n:] = 1.0
    return np.diag(v)


def random_gauge(G, d: int, seed: int = 0, cond_max: float = 50.0) -> Callable:
    """A seeded map ``g -> S(g)`` of well-conditioned matrices, stable per element."""
    cache: dict = {}

    def S(g):
        M = cache.get(g)
        if M is None:
            M = cache[g] = _random_invertible(np.random.default_rng(_seed_of(G, g, seed)), d, cond_max)
        return M

    return S


# ---------------------------------------------------------------------------
# partial cotranslations


class PartialCotranslation:
    """Base class; subclasses set ``G`` and ``d`` and implement ``_value(g, h)``."""

    def __call__(self, g, h) -> np.ndarray:
        return self._value(_el(self.G, g), _el(self.G, h))

    def _value(self, g, h) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"form": type(self).__name__, "d": self.d, "name": self.name}


def evaluate_partial(W: PartialCotranslation, g, h) -> np.ndarray:
    return W(g, h)


@dataclass(eq=False)
class ProductForm(PartialCotranslation):
    """``W(g, h) = V(g, h) P(g)``."""

    V: MatrixCocycle
    P: Projector
    name: str = "product"

    def __post_init__(self):
        if self.V.d != self.P.d:
            raise SpaceMismatchError(f"cocycle has d={self.V.d}, projector d={self.P.d}")
        self.G, self.d = self.V.G, self.V.d

    def _value(self, g, h):
        return self.V(g, h) @ self.P(g)


@dataclass(eq=False)
class ConstantBlock(PartialCotranslation):
    """``diag(Id_n, 0)`` at every pair."""

    G: object
    d: int
    n: int
    name: str = "constant block"

    def __post_init__(self):
        self._M = block_matrix(self.d, self.n)

    def _value(self, g, h):
        return self._M


@dataclass(eq=False)
class ExplicitRule(PartialCotranslation):
    G: object
    d: int
    rule: Callable
    name: str = "explicit"

    def _value(self, g, h):
        M = np.asarray(self.rule(g, h))
        if M.shape != (self.d, self.d):
            raise SpaceMismatchError(f"value has shape {M.shape}, expected {(self.d, self.d)}")
        return M


@dataclass(eq=False)
class Conjugated(PartialCotranslation):
    """``W_T(g, h) = T(hg)^{-1} W(g, h) T(g)``; ``T_inv`` may supply the inverses."""

    inner: PartialCotranslation
    T: Callable
    T_inv: Callable | None = None
    name: str = "conjugated"

    def __post_init__(self):
        self.G, self.d = self.inner.G, self.inner.d
        self._inv: dict = {}

    def inverse_at(self, g) -> np.ndarray:
        Ti = self._inv.get(g)
        if Ti is None:
            if self.T_inv is not None:
                Ti = np.asarray(self.T_inv(g))
            else:
                M = np.asarray(self.T(g))
                c = np.linalg.cond(M)
                if not c <= COND_MAX:
                    raise ConditioningError(f"T({_fmt(self.G, g)}) has condition {c:.3g}", {"g": _fmt(self.G, g), "cond": float(c)})
                Ti = np.linalg.inv(M)
            self._inv[g] = Ti
        return Ti

    def _value(self, g, h):
        hg = self.G.multiply(h, g)
        return self.inverse_at(hg) @ self.inner(g, h) @ np.asarray(self.T(g))


@dataclass(eq=False)
class Sum(PartialCotranslation):
    W: PartialCotranslation
    V: PartialCotranslation
    name: str = "sum"

    def __post_init__(self):
        if self.W.d != self.V.d:
            raise SpaceMismatchError(f"summands have d={self.W.d} and d={self.V.d}")
        self.G, self.d = self.W.G, self.W.d

    def _value(self, g, h):
        return self.W(g, h) + self.V(g, h)


def as_partial(V: MatrixCocycle) -> ProductForm:
    """A cotranslation viewed as a partial one (``P = Id``)."""
    return ProductForm(V, Projector.constant(V.G, np.eye(V.d)), name=V.name)


def zero_partial(G, d: int) -> ExplicitRule:
    Z = np.zeros((d, d))
    return ExplicitRule(G, d, lambda g, h: Z, "zero")


# ---------------------------------------------------------------------------
# checks


def _sample(G, sample, radius):
    return [_el(G, x) for x in (default_sample(G, radius) if sample is None else sample)]


def _wit(G, **kw):
    return {k: (_fmt(G, v) if k in ("g", "h", "k") else v) for k, v in kw.items()}


def verify_partial_law(W: PartialCotranslation, sample=None, tol: float = 1e-8, radius: int = 3) -> Report:
    """``W(g, kh) = W(hg, k) W(g, h)``, with the residual relative to ``max(1, |W(hg,k)| |W(g,h)|)``."""
    G = W.G
    elems = _sample(G, sample, radius)
    report = Report(f"partial law: {W.name}")
    law = report.check("partial law")
    unit = report.check("idempotent units")
    for g in elems:
        U = W(g, G.identity)
        res = float(np.linalg.norm(U @ U - U))
        unit.record(res, res <= tol, _wit(G, g=g))
    for g, h, k in product(elems, repeat=3):
        a, b = W(G.multiply(h, g), k), W(g, h)
        scale = max(1.0, float(np.linalg.norm(a) * np.linalg.norm(b)))
        res = float(np.linalg.norm(W(g, G.multiply(k, h)) - a @ b)) / scale
        ok = res <= tol
        law.record(res, ok, None if ok else _wit(G, g=g, h=h, k=k, residual=res))
    return report


def units_projector(W: PartialCotranslation, sample=None, tol: float = 1e-9, radius: int = 3) -> Projector:
    """``P(g) = W(g, e)``; idempotency is checked on the sample."""
    G = W.G
    P = Projector(G, W.d, lambda g: W(g, G.identity), f"units of {W.name}")
    for g in _sample(G, sample, radius):
        M = P(g)
        res = float(np.linalg.norm(M @ M - M))
        if res > tol:
            raise InconsistencyError(
                f"W({_fmt(G, g)}, e) is not idempotent (residual {res:.3g})", _wit(G, g=g, residual=res)
            )
    return P


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def rank_of(W: PartialCotranslation, sample=None, radius: int = 2, angle_tol: float = ANGLE_TOL) -> int:
    """The common rank of all sampled ``W(g, h)``.

    Also checks that ``ker W(h, g)`` does not depend on ``g`` by principal
    angles.  Raises :class:`InconsistencyError` otherwise.
    """
    G = W.G
    elems = _sample(G, sample, radius)
    ranks = {}
    for g, h in product(elems, repeat=2):
        ranks[(g, h)] = numerical_rank(W(g, h))
    values = set(ranks.values())
    if len(values) != 1:
        (g1, h1), r1 = min(ranks.items(), key=lambda kv: kv[1])
        (g2, h2), r2 = max(ranks.items(), key=lambda kv: kv[1])
        raise InconsistencyError(
            f"rank varies between {r1} and {r2}",
            {"low": [_fmt(G, g1), _fmt(G, h1), r1], "high": [_fmt(G, g2), _fmt(G, h2), r2]},
        )
    n = values.pop()
    if 0 < n < W.d:
        for h in elems:
            K0 = null_space(W(h, G.identity), rcond=RANK_RTOL)
            for g in elems:
                K = null_space(W(h, g), rcond=RANK_RTOL)
                angle = float(np.max(subspace_angles(K0, K))) if K.shape[1] == K0.shape[1] else np.inf
                if angle > angle_tol:
                    raise InconsistencyError(
                        f"ker W({_fmt(G, h)}, {_fmt(G, g)}) differs from ker W({_fmt(G, h)}, e)",
                        _wit(G, h=h, g=g, angle=angle),
                    )
    return n


def verify_invariant_projector(
    P: Projector,
    V,
    sample=None,
    tol: float = 1e-9,
    radius: int = 3,
    others: Sequence[Projector] = (),
) -> Report:
    """``P(hg) V(g, h) = V(g, h) P(g)`` for ``P`` and ``Id - P``; ``P Q = Q P = 0`` for each of ``others``."""
    G = P.G
    if P.d != V.d:
        raise SpaceMismatchError(f"projector has d={P.d}, cocycle d={V.d}")
    elems = _sample(G, sample, radius)
    report = Report(f"invariant projector: {P.name}")
    idem = report.check("idempotent")
    for g in elems:
        M = P(g)
        res = float(np.linalg.norm(M @ M - M))
        idem.record(res, res <= tol, _wit(G, g=g))
    Q = P.complement()
    for name, proj in (("invariance", P), ("complement invariance", Q)):
        c = report.check(name)
        for g, h in product(elems, repeat=2):
            Vgh = V(g, h)
            scale = max(1.0, float(np.linalg.norm(Vgh)))
            res = float(np.linalg.norm(proj(G.multiply(h, g)) @ Vgh - Vgh @ proj(g))) / scale
            ok = res <= tol
            c.record(res, ok, None if ok else _wit(G, g=g, h=h, residual=res))
    if others:
        c = report.check("orthogonality")
        for other in others:
            for g in elems:
                res = max(float(np.linalg.norm(P(g) @ other(g))), float(np.linalg.norm(other(g) @ P(g))))
                c.record(res, res <= tol, _wit(G, g=g, other=other.name))
    return report


def restrict(V: MatrixCocycle, P: Projector, sample=None, tol: float = 1e-9, radius: int = 3) -> ProductForm:
    """``W(g, h) = V(g, h) P(g)`` after checking that ``P`` is invariant for ``V``."""
    rep = verify_invariant_projector(P, V, sample, tol, radius)
    if not rep.passed:
        bad = rep.failing()[0]
        raise InvarianceError(f"{P.name} is not invariant for {V.name}: {bad.name}", bad.witnesses[0] if bad.witnesses else None)
    return ProductForm(V, P, name=f"{V.name} restricted to {P.name}")


def check_orthogonal(W: PartialCotranslation, V: PartialCotranslation, sample=None, tol: float = 1e-9, radius: int = 3) -> Report:
    """``W(hg, k) V(g, h) = V(hg, k) W(g, h) = 0``."""
    G = W.G
    elems = _sample(G, sample, radius)
    report = Report(f"orthogonality: {W.name} / {V.name}")
    c = report.check("mutual orthogonality")
    for g, h, k in product(elems, repeat=3):
        hg = G.multiply(h, g)
        a, b = W(hg, k), V(g, h)
        scale = max(1.0, float(np.linalg.norm(a) * np.linalg.norm(b)), float(np.linalg.norm(V(hg, k)) * np.linalg.norm(W(g, h))))
        res = max(float(np.linalg.norm(a @ b)), float(np.linalg.norm(V(hg, k) @ W(g, h)))) / scale
        ok = res <= tol
        c.record(res, ok, None if ok else _wit(G, g=g, h=h, k=k, residual=res))
    return report


def orthogonal_sum(W: PartialCotranslation, V: PartialCotranslation, sample=None, tol: float = 1e-9, radius: int = 3) -> Sum:
    rep = check_orthogonal(W, V, sample, tol, radius)
    if not rep.passed:
        c = rep.failing()[0]
        raise OrthogonalityError(f"{W.name} and {V.name} are not mutually orthogonal", c.witnesses[0] if c.witnesses else None)
    return Sum(W, V, name=f"{W.name} + {V.name}")


def conjugate(W: PartialCotranslation, T: Callable, sample=None, radius: int = 3, T_inv: Callable | None = None) -> Conjugated:
    """``W_T(g, h) = T(hg)^{-1} W(g, h) T(g)``; near-singular ``T(g)`` on the sample is rejected."""
    G = W.G
    for g in _sample(G, sample, radius):
        M = np.asarray(T(g))
        c = np.linalg.cond(M)
        if not c <= COND_MAX:
            raise ConditioningError(f"T({_fmt(G, g)}) has condition {c:.3g}", {"g": _fmt(G, g), "cond": float(c)})
    return Conjugated(W, T, T_inv, name=f"{W.name} conjugated")


# ---------------------------------------------------------------------------
# diagonalization, completion, factorization


class Diagonalizer:
    """``T(g) = [basis of im P(g) | basis of ker P(g)]``, both orthonormal.

    Bases are chosen per element from singular value decompositions of
    ``P(g)`` and ``Id - P(g)``; no continuity across elements is attempted.
    The inverse is ``[U_im^* P(g); U_ker^* (Id - P(g))]``.
    """

    def __init__(self, P: Projector, n: int):
        self.P = P
        self.G = P.G
        self.d = P.d
        self.n = n
        self._cache: dict = {}

    def _pair(self, g):
        hit = self._cache.get(g)
        if hit is None:
            M = self.P(g)
            I = np.eye(self.d)
            r = numerical_rank(M) if self.n not in (0, self.d) else self.n
            if r != self.n:
                raise InconsistencyError(f"rank of P({_fmt(self.G, g)}) is {r}, expected {self.n}", {"g": _fmt(self.G, g), "rank": r})
            U_im = np.linalg.svd(M)[0][:, : self.n]
            U_ker = np.linalg.svd(I - M)[0][:, : self.d - self.n]
            T = np.hstack([U_im, U_ker])
            Ti = np.vstack([U_im.conj().T @ M, U_ker.conj().T @ (I - M)])
            hit = self._cache[g] = (T, Ti)
        return hit

    def __call__(self, g) -> np.ndarray:
        return self._pair(_el(self.G, g))[0]

    def inverse(self, g) -> np.ndarray:
        return self._pair(_el(self.G, g))[1]


def _projector_rank(P: Projector, elems) -> int:
    ranks = {numerical_rank(P(g)) if np.linalg.norm(P(g)) > 0 else 0 for g in elems}
    if len(ranks) != 1:
        raise InconsistencyError(f"projector rank varies over the sample: {sorted(ranks)}")
    return ranks.pop()


def _neighbors(G, elems):
    """Adjacent sample pairs: generator steps for presentations, sorted order on the line."""
    if isinstance(G, RealLine):
        s = sorted(elems)
        return list(zip(s, s[1:]))
    present = set(elems)
    out = []
    for g in elems:
        for i in range(G.rank):
            nb = G.multiply(G.gen(i), g)
            if nb in present and nb != g:
                out.append((g, nb))
    return out


def bounded_diagonalizer(P: Projector, sample=None, tol: float = 1e-8, radius: int = 3) -> tuple[Diagonalizer, Report]:
    """The pointwise diagonalizer with its block residual and norm bounds.

    ``M`` is the sample supremum of ``max(|P(g)|, |Id - P(g)|)``; the bounds
    checked are ``|T(g)| <= d`` and ``|T(g)^{-1}| <= d M``.  Jump norms of
    ``T`` between adjacent samples are reported as a diagnostic only.
    """
    G = P.G
    elems = _sample(G, sample, radius)
    n = _projector_rank(P, elems)
    T = Diagonalizer(P, n)
    d = P.d
    I = np.eye(d)
    M = max(max(np.linalg.norm(P(g), 2), np.linalg.norm(I - P(g), 2)) for g in elems)
    B = block_matrix(d, n)
    report = Report(f"diagonalizer: {P.name}")
    blk = report.check("block form")
    inv = report.check("inverse")
    nT = report.check("norm T")
    nTi = report.check("norm T inverse")
    worst_T = worst_Ti = 0.0
    for g in elems:
        Tg, Ti = T(g), T.inverse(g)
        res = float(np.linalg.norm(Ti @ P(g) @ Tg - B))
        blk.record(res, res <= tol, _wit(G, g=g))
        res = float(np.linalg.norm(Ti @ Tg - I))
        inv.record(res, res <= tol, _wit(G, g=g))
        a, b = float(np.linalg.norm(Tg, 2)), float(np.linalg.norm(Ti, 2))
        worst_T, worst_Ti = max(worst_T, a), max(worst_Ti, b)
        nT.record(max(0.0, a - d), a <= d + tol, _wit(G, g=g, norm=a))
        nTi.record(max(0.0, b - d * M), b <= d * M + tol, _wit(G, g=g, norm=b))
    jumps = [float(np.linalg.norm(T(a) - T(b))) for a, b in _neighbors(G, elems)]
    report.extras.update(
        {
            "rank": n,
            "M": float(M),
            "max_norm_T": worst_T,
            "max_norm_T_inverse": worst_Ti,
            "bound_T": float(d),
            "bound_T_inverse": float(d * M),
            "jump_norm_max": max(jumps, default=0.0),
            "jump_norm_mean": float(np.mean(jumps)) if jumps else 0.0,
        }
    )
    return T, report


@dataclass
class Completion:
    V: PartialCotranslation
    total: PartialCotranslation
    T: Diagonalizer
    report: Report


def complete_with_report(W: PartialCotranslation, sample=None, tol: float = 1e-8, radius: int = 3) -> Completion:
    """``V(g, h) = T(hg) diag(0, Id) T(g)^{-1}`` with ``T`` diagonalizing the units projector of ``W``."""
    G, d = W.G, W.d
    P = units_projector(W, sample, tol=max(tol, 1e-9), radius=radius)
    T, report = bounded_diagonalizer(P, sample, tol, radius)
    comp = ExplicitRule(G, d, lambda g, h, C=block_matrix(d, T.n, upper=False): C, "complementary block")
    V = Conjugated(comp, T.inverse, T_inv=T, name=f"completion of {W.name}")
    total = Sum(W, V, name=f"{W.name} completed")
    return Completion(V, total, T, report)


def complete(W: PartialCotranslation, sample=None, tol: float = 1e-8, radius: int = 3) -> tuple[PartialCotranslation, PartialCotranslation]:
    c = complete_with_report(W, sample, tol, radius)
    return c.V, c.total


def factorize(W: PartialCotranslation, sample=None, tol: float = 1e-8, radius: int = 3) -> tuple[PartialCotranslation, Projector]:
    """``W(g, h) = Z(g, h) P(g)`` with ``Z`` the completion and ``P`` the units projector."""
    _, total = complete(W, sample, tol, radius)
    return total, units_projector(W, sample, radius=radius)


def factorization_report(W: PartialCotranslation, Z, P: Projector, sample=None, tol: float = 1e-8, radius: int = 3) -> Report:
    G = W.G
    elems = _sample(G, sample, radius)
    report = Report(f"factorization: {W.name}")
    c = report.check("factorization")
    inv = report.check("invertible total")
    for g, h in product(elems, repeat=2):
        Zgh = Z(g, h)
        res = float(np.linalg.norm(W(g, h) - Zgh @ P(g)))
        c.record(res, res <= tol, _wit(G, g=g, h=h))
        cond = float(np.linalg.cond(Zgh))
        inv.record(0.0 if cond <= COND_MAX else cond, cond <= COND_MAX, _wit(G, g=g, h=h, cond=cond))
    return report


# ---------------------------------------------------------------------------
# random instances


def random_block_cocycle(G, d: int, n: int, seed: int = 0, cond_max: float = 50.0) -> tuple[MatrixCocycle, Projector]:
    """``V(g, h) = S(hg) S(g)^{-1}`` and ``P(g) = S(g) diag(Id_n, 0) S(g)^{-1}`` for a random gauge ``S``.

    ``P`` and ``Id - P`` are invariant for ``V`` by construction.
    """
    S = random_gauge(G, d, seed, cond_max)
    return MatrixCocycle.from_gauge(G, d, S), Projector.gauge(G, d, n, S)


def random_product_partial(G, d: int, n: int, seed: int = 0, cond_max: float = 50.0) -> ProductForm:
    V, P = random_block_cocycle(G, d, n, seed, cond_max)
    return ProductForm(V, P, name=f"random rank {n} in d={d}")


# ---------------------------------------------------------------------------
# JSON


def cocycle_from_json(G, d: int, spec: dict) -> MatrixCocycle:
    if spec == "identity" or "identity" in spec:
        return MatrixCocycle.identity(G, d)
    if "sequence" in spec:
        from .difference import sequence_from_json

        return MatrixCocycle.from_sequence(sequence_from_json(spec["sequence"]))
    if "generators" in spec:
        return MatrixCocycle.constant_generators(G, spec["generators"])
    if "gauge" in spec:
        r = spec["gauge"]
        return MatrixCocycle.from_gauge(G, d, random_gauge(G, d, int(r.get("seed", 0)), float(r.get("cond_max", 50.0))))
    raise ValueError(f"unknown cocycle spec {sorted(spec)}")


def projector_from_json(G, d: int, spec: dict) -> Projector:
    if "block" in spec:
        return Projector.block(G, d, int(spec["block"]))
    if "constant" in spec:
        return Projector.constant(G, spec["constant"])
    if "gauge" in spec:
        r = spec["gauge"]
        S = random_gauge(G, d, int(r.get("seed", 0)), float(r.get("cond_max", 50.0)))
        return Projector.gauge(G, d, int(r["n"]), S)
    raise ValueError(f"unknown projector spec {sorted(spec)}")


def partial_from_json(G, d: int, spec: dict) -> PartialCotranslation:
    """Forms: ``product``, ``constant_block``, ``random_block``, ``sum``, ``conjugated``."""
    if "product" in spec:
        s = spec["product"]
        return ProductForm(cocycle_from_json(G, d, s["cocycle"]), projector_from_json(G, d, s["projector"]))
    if "constant_block" in spec:
        return ConstantBlock(G, d, int(spec["constant_block"]))
    if "random_block" in spec:
        r = spec["random_block"]
        return random_product_partial(G, d, int(r["n"]), int(r.get("seed", 0)), float(r.get("cond_max", 50.0)))
    if "sum" in spec:
        a, b = spec["sum"]
        return Sum(partial_from_json(G, d, a), partial_from_json(G, d, b))
    if "conjugated" in spec:
        s = spec["conjugated"]
        M = np.asarray(s["T"]["constant"], dtype=float)
        return conjugate(partial_from_json(G, d, s["inner"]), lambda g: M)
    raise ValueError(f"unknown partial spec {sorted(spec)}")
