"""Linear difference equations ``x(n+1) = A(n) x(n)`` as cotranslations of the integers.

The transition matrix is

    Z(n, m) = A(n+m-1) ... A(n+1) A(n)            for m > 0
    Z(n, 0) = I
    Z(n, m) = A(n+m)^{-1} ... A(n-1)^{-1}         for m < 0

and satisfies ``Z(n, m + p) = Z(n + m, p) Z(n, m)``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from . import _exact
from .cotranslation import Cotranslation
from .errors import SingularityError, UnsupportedOperationError, WindowRangeError
from .groups import Integers, Word
from .report import Report
from .transforms import Affine, Euclidean, as_affine

DEFAULT_HORIZON = 10_000
DET_TOL = 1e-12


class MatrixSequence:
    """``n -> A(n)``, a d x d matrix for every integer ``n``.

    Values are cached.  Object arrays of Fractions are kept exact.
    """

    def __init__(self, rule: Callable[[int], np.ndarray], d: int, name: str = "sequence", params=None):
        self._rule = rule
        self.d = d
        self.name = name
        self.params = dict(params or {})
        self._cache: dict[int, np.ndarray] = {}
        self._inv: dict[int, np.ndarray] = {}

    def __call__(self, n: int) -> np.ndarray:
        n = int(n)
        M = self._cache.get(n)
        if M is None:
            M = np.asarray(self._rule(n))
            if M.dtype != object:
                M = M.astype(complex if np.iscomplexobj(M) else float)
            if M.shape != (self.d, self.d):
                raise ValueError(f"A({n}) has shape {M.shape}, expected {(self.d, self.d)}")
            self._cache[n] = M
        return M

    def inverse(self, n: int) -> np.ndarray:
        n = int(n)
        Mi = self._inv.get(n)
        if Mi is None:
            M = self(n)
            if M.dtype == object:
                try:
                    Mi = _exact.inverse(M)
                except SingularityError:
                    raise SingularityError(f"A({n}) is singular", ) from None
            else:
                if abs(np.linalg.det(M)) < DET_TOL:
                    raise SingularityError(f"A({n}) is singular (|det| < {DET_TOL})")
                Mi = np.linalg.inv(M)
            self._inv[n] = Mi
        return Mi

    def check_invertible(self, n: int) -> None:
        M = self(n)
        if M.dtype == object:
            if _exact.det(M) == 0:
                raise SingularityError(f"A({n}) is singular")
        elif abs(np.linalg.det(M)) < DET_TOL:
            raise SingularityError(f"A({n}) is singular (|det| < {DET_TOL})")

    @property
    def exact(self) -> bool:
        return self(0).dtype == object

    def identity(self) -> np.ndarray:
        return _exact.identity(self.d) if self.exact else np.eye(self.d, dtype=self(0).dtype)

    # -- constructors ---------------------------------------------------
    @classmethod
    def constant(cls, M) -> "MatrixSequence":
        M = np.array(M, dtype=object if _exact_entries(M) else None)
        return cls(lambda n: M, M.shape[0], "constant", {"constant": _tolist(M)})

    @classmethod
    def periodic(cls, mats: Sequence) -> "MatrixSequence":
        arrs = [np.array(M, dtype=object if _exact_entries(M) else None) for M in mats]
        if not arrs:
            raise ValueError("need at least one matrix")
        return cls(lambda n: arrs[n % len(arrs)], arrs[0].shape[0], "periodic", {"periodic": [_tolist(M) for M in arrs]})

    @classmethod
    def random(cls, d: int, seed: int = 0, cond_max: float = 100.0, scale: float = 1.0) -> "MatrixSequence":
        """Entries uniform in ``[-scale, scale]``, redrawn until ``cond(A(n)) <= cond_max``."""

        def rule(n):
            rng = np.random.default_rng([seed, abs(n), int(n < 0)])
            while True:
                M = rng.uniform(-scale, scale, size=(d, d))
                if np.linalg.cond(M) <= cond_max:
                    return M

        return cls(rule, d, "random", {"random": {"d": d, "seed": seed, "cond_max": cond_max}})


def _exact_entries(M) -> bool:
    from fractions import Fraction

    arr = np.asarray(M, dtype=object)
    return any(isinstance(x, Fraction) for x in arr.flat)


def _tolist(M):
    M = np.asarray(M)
    if M.dtype == object or np.iscomplexobj(M):
        return [[str(x) for x in row] for row in M]
    return [[float(x) for x in row] for row in M]


def transition_matrix(S: MatrixSequence, n: int, m: int, horizon: int = DEFAULT_HORIZON) -> np.ndarray:
    n, m = int(n), int(m)
    if abs(m) > horizon:
        raise WindowRangeError(f"|m| = {abs(m)} exceeds the horizon {horizon}")
    out = S.identity()
    if m > 0:
        for k in range(n, n + m):
            S.check_invertible(k)
            out = S(k) @ out
    elif m < 0:
        # A(n+m)^{-1} A(n+m+1)^{-1} ... A(n-1)^{-1}, multiplied left to right
        for k in range(n + m, n):
            out = out @ S.inverse(k)
    return out


def _wrong_order_transition(S: MatrixSequence, n: int, m: int, horizon: int = DEFAULT_HORIZON) -> np.ndarray:
    """Products taken in the reverse order; only used to exercise :func:`verify_cocycle`."""
    out = S.identity()
    if m > 0:
        for k in range(n, n + m):
            out = out @ S(k)
    elif m < 0:
        for k in range(n + m, n):
            out = S.inverse(k) @ out
    return out


def cotranslation_from_sequence(S: MatrixSequence) -> Cotranslation:
    """The cotranslation of ``Z`` with ``A(n) = Z(n, 1)``."""
    P = Integers()
    space = Euclidean(S.d)

    def gen(eta: Word):
        n = P.to_int(eta)
        M = S(n)
        S.check_invertible(n)
        return Affine(M, None, space, _checked=True) if M.dtype == object else Affine(M, np.zeros(S.d), space, _checked=True)

    return Cotranslation(P, space, [gen], name=f"difference: {S.name}", params=S.params)


def generator_from_cotranslation(Z: Cotranslation) -> MatrixSequence:
    """``A(n) = Z(n, 1)`` for a linear cotranslation of the integers."""
    P = Z.P
    if not isinstance(P, Integers):
        raise UnsupportedOperationError("generator_from_cotranslation needs a cotranslation of the integers")

    def rule(n):
        aff = as_affine(Z.evaluate(P.from_int(n), P.gen(0)))
        if not aff.is_linear:
            raise UnsupportedOperationError(f"Z({n}, 1) is not linear")
        return aff.A

    d = Z.space.d
    return MatrixSequence(rule, d, name=f"generator of {Z.name}")


def solution(S: MatrixSequence, n: int, m: int, xi) -> np.ndarray:
    """``x(n)`` for the solution with ``x(m) = xi``, by forward or backward iteration."""
    x = np.asarray(xi)
    if n >= m:
        for k in range(m, n):
            x = S(k) @ x
    else:
        for k in range(m - 1, n - 1, -1):
            x = S.inverse(k) @ x
    return x


def default_triples(count: int = 200, span: int = 50, reach: int = 20, seed: int = 0):
    rng = np.random.default_rng(seed)
    return [
        (int(rng.integers(-span, span + 1)), int(rng.integers(-reach, reach + 1)), int(rng.integers(-reach, reach + 1)))
        for _ in range(count)
    ]


def verify_cocycle(
    S: MatrixSequence,
    sample: Iterable[tuple[int, int, int]] | None = None,
    tol: float = 1e-8,
    transition: Callable | None = None,
    seed: int = 0,
) -> Report:
    """Relative Frobenius residual of ``Z(n, m+p) = Z(n+m, p) Z(n, m)``.

    The residual is scaled by ``|Z(n+m, p)| |Z(n, m)|``, the size of the
    rounding error of the right-hand product.  Scaling by ``|Z(n, m+p)|``
    alone misreads cancellation (``m`` and ``p`` of opposite sign) as failure.

    ``transition`` replaces :func:`transition_matrix`, so tests can confirm
    a broken product formula is caught.
    """
    transition = transition or transition_matrix
    triples = default_triples(seed=seed) if sample is None else list(sample)
    report = Report(f"difference cocycle: {S.name}")
    c = report.check("cocycle")
    for n, m, p in triples:
        lhs = transition(S, n, m + p)
        a, b = transition(S, n + m, p), transition(S, n, m)
        rhs = a @ b
        if lhs.dtype == object or rhs.dtype == object:
            res = 0.0 if _exact.equal(lhs, rhs) else float(np.linalg.norm(np.asarray(lhs - rhs, dtype=float)))
        else:
            scale = max(np.linalg.norm(a) * np.linalg.norm(b), np.linalg.norm(lhs), 1e-300)
            res = float(np.linalg.norm(lhs - rhs) / scale)
        ok = res <= tol
        c.record(res, ok, None if ok else {"n": n, "m": m, "p": p, "residual": res})
    return report


def sequence_from_json(spec: dict) -> MatrixSequence:
    from fractions import Fraction

    def parse(M):
        if not any(isinstance(x, str) for row in M for x in row):
            return np.array(M, dtype=float)
        try:
            return np.array([[Fraction(x) for x in row] for row in M], dtype=object)
        except ValueError:
            return np.array([[complex(x) for x in row] for row in M], dtype=complex)

    if "constant" in spec:
        return MatrixSequence.constant(parse(spec["constant"]))
    if "periodic" in spec:
        return MatrixSequence.periodic([parse(M) for M in spec["periodic"]])
    if "random" in spec:
        r = spec["random"]
        return MatrixSequence.random(int(r["d"]), int(r.get("seed", 0)), float(r.get("cond_max", 100.0)))
    raise ValueError(f"unknown sequence spec {sorted(spec)}")
