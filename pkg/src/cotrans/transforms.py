"""Invertible transforms of the supported example spaces.

Points are handled in batches.  The array layout depends on the space:

* ``Euclidean(d)``: float array ``(N, d)`` (object arrays of Fractions for
  exact affine arithmetic).
* ``LabeledEuclidean(d)``: float array ``(N, 1 + d)``; column 0 holds the
  integer copy label.
* ``FiniteAlphabetTree(a, depth)``: int array ``(N, depth)``; a vertex of
  length ``n`` is stored in the first ``n`` columns, the rest is ``-1``.
* ``ProdiscreteSequence(a, length)``: int array ``(N, length)``.

Transforms are small expression trees.  :func:`canonicalize` flattens
compositions and fuses adjacent factors into a per-space normal form
(an affine map, a parity-dependent affine map with a label shift, a
position/symbol permutation of sequences, or a tabulated tree
permutation).  Fusion keeps evaluation cheap without changing semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _exact
from .errors import (
    ConfigurationError,
    SingularityError,
    SpaceMismatchError,
    UnsupportedOperationError,
    WindowRangeError,
)

MAX_TREE_DEPTH = 16
TABULATE_LIMIT = 200_000
COND_LIMIT = 1e12


# ---------------------------------------------------------------------------
# spaces


class Space:
    kind = "abstract"
    discrete = False

    def check_batch(self, X) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n: int = 64, seed: int = 0) -> np.ndarray:
        raise NotImplementedError

    def distance(self, X, Y) -> np.ndarray:
        """Per-point distance; ``inf`` where discrete points differ."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Euclidean(Space):
    d: int
    kind = "euclidean"

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")

    def check_batch(self, X):
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.d:
            raise SpaceMismatchError(f"expected points of R^{self.d}, got shape {X.shape}")
        if X.dtype != object:
            X = X.astype(float, copy=False)
        return X

    def sample(self, n=64, seed=0):
        return np.random.default_rng(seed).uniform(-2.0, 2.0, size=(n, self.d))

    def distance(self, X, Y):
        D = np.asarray(X - Y, dtype=float)
        return np.linalg.norm(D, axis=1)

    def to_json(self):
        return {"kind": self.kind, "d": self.d}


@dataclass(frozen=True)
class LabeledEuclidean(Space):
    """Copies of R^d indexed by an integer label, truncated to ``|label| <= window``."""

    d: int
    window: int = 32
    kind = "labeled"

    def __post_init__(self):
        if self.d < 1 or self.window < 1:
            raise ValueError("dimension and window must be positive")

    def check_batch(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.d + 1:
            raise SpaceMismatchError(f"expected (label, R^{self.d}) points, got shape {X.shape}")
        labels = X[:, 0]
        if np.any(labels != np.round(labels)):
            raise SpaceMismatchError("labels must be integers")
        self.check_window(labels)
        return X

    def check_window(self, labels):
        if labels.size and np.max(np.abs(labels)) > self.window:
            bad = labels[np.argmax(np.abs(labels))]
            raise WindowRangeError(f"label {int(bad)} outside window [-{self.window}, {self.window}]")

    def sample(self, n=64, seed=0):
        rng = np.random.default_rng(seed)
        half = max(1, self.window // 4)
        labels = rng.integers(-half, half + 1, size=n).astype(float)
        return np.column_stack([labels, rng.uniform(-2.0, 2.0, size=(n, self.d))])

    def distance(self, X, Y):
        same = X[:, 0] == Y[:, 0]
        dist = np.linalg.norm(X[:, 1:] - Y[:, 1:], axis=1)
        return np.where(same, dist, np.inf)

    @staticmethod
    def point(label: int, v) -> np.ndarray:
        return np.concatenate([[float(label)], np.asarray(v, dtype=float)])

    def to_json(self):
        return {"kind": self.kind, "d": self.d, "window": self.window}


@dataclass(frozen=True)
class FiniteAlphabetTree(Space):
    """Rooted tree of words over ``{0, ..., alphabet-1}`` up to a given depth."""

    alphabet: int
    depth: int = 6
    kind = "tree"
    discrete = True

    def __post_init__(self):
        if self.alphabet < 2:
            raise ValueError("alphabet needs at least two letters")
        if not 1 <= self.depth <= MAX_TREE_DEPTH:
            raise ValueError(f"depth must lie in [1, {MAX_TREE_DEPTH}]")

    @property
    def n_vertices(self) -> int:
        a = self.alphabet
        return (a ** (self.depth + 1) - 1) // (a - 1)

    @cached_property
    def _offsets(self) -> np.ndarray:
        return np.array([(self.alphabet**n - 1) // (self.alphabet - 1) for n in range(self.depth + 2)])

    def check_batch(self, X):
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.depth:
            raise SpaceMismatchError(f"expected padded vertices of width {self.depth}, got {X.shape}")
        X = X.astype(np.int64, copy=False)
        valid = X >= 0
        if np.any(X >= self.alphabet) or np.any(X < -1):
            raise SpaceMismatchError("letter outside the alphabet")
        # padding must be a suffix
        if np.any(valid[:, 1:] & ~valid[:, :-1]):
            raise SpaceMismatchError("padding must follow the letters")
        return X

    def vertex(self, letters: Sequence[int]) -> np.ndarray:
        if len(letters) > self.depth:
            raise WindowRangeError(f"vertex of length {len(letters)} exceeds depth {self.depth}")
        out = np.full(self.depth, -1, dtype=np.int64)
        out[: len(letters)] = letters
        return out

    @staticmethod
    def letters(row) -> tuple[int, ...]:
        return tuple(int(x) for x in row if x >= 0)

    def encode(self, X) -> np.ndarray:
        lengths = np.sum(X >= 0, axis=1)
        digits = np.where(X >= 0, X, 0)
        powers = self.alphabet ** np.arange(self.depth - 1, -1, -1, dtype=np.int64)
        # value of the word read as a base-a number, shifted to its length
        raw = digits @ powers
        value = raw // (self.alphabet ** (self.depth - lengths))
        return self._offsets[lengths] + value

    @cached_property
    def all_vertices(self) -> np.ndarray:
        rows = []
        for n in range(self.depth + 1):
            if n == 0:
                rows.append(np.full((1, self.depth), -1, dtype=np.int64))
                continue
            grid = np.indices((self.alphabet,) * n).reshape(n, -1).T
            block = np.full((grid.shape[0], self.depth), -1, dtype=np.int64)
            block[:, :n] = grid
            rows.append(block)
        return np.concatenate(rows)

    def decode(self, idx) -> np.ndarray:
        return self.all_vertices[idx]

    def sample(self, n=64, seed=0):
        rng = np.random.default_rng(seed)
        if self.n_vertices <= n:
            return self.all_vertices.copy()
        idx = np.sort(rng.choice(self.n_vertices, size=n, replace=False))
        return self.all_vertices[idx]

    def distance(self, X, Y):
        return np.where(np.all(X == Y, axis=1), 0.0, np.inf)

    def to_json(self):
        return {"kind": self.kind, "alphabet": self.alphabet, "depth": self.depth}


@dataclass(frozen=True)
class ProdiscreteSequence(Space):
    """Sequences ``x_0 x_1 ... x_{length-1}`` over ``{0, ..., alphabet-1}``."""

    alphabet: int
    length: int = 16
    kind = "sequence"
    discrete = True

    def __post_init__(self):
        if self.alphabet < 2 or self.length < 1:
            raise ValueError("alphabet >= 2 and length >= 1 required")

    def check_batch(self, X):
        X = np.asarray(X)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.length:
            raise SpaceMismatchError(f"expected sequences of length {self.length}, got {X.shape}")
        X = X.astype(np.int64, copy=False)
        if np.any(X < 0) or np.any(X >= self.alphabet):
            raise SpaceMismatchError("symbol outside the alphabet")
        return X

    def sample(self, n=64, seed=0):
        return np.random.default_rng(seed).integers(0, self.alphabet, size=(n, self.length))

    def distance(self, X, Y):
        return np.where(np.all(X == Y, axis=1), 0.0, np.inf)

    def to_json(self):
        return {"kind": self.kind, "alphabet": self.alphabet, "length": self.length}


def space_from_json(spec: dict) -> Space:
    kind = spec.get("kind")
    if kind == "euclidean":
        return Euclidean(int(spec["d"]))
    if kind == "labeled":
        return LabeledEuclidean(int(spec["d"]), int(spec.get("window", 32)))
    if kind == "tree":
        return FiniteAlphabetTree(int(spec["alphabet"]), int(spec.get("depth", 6)))
    if kind == "sequence":
        return ProdiscreteSequence(int(spec["alphabet"]), int(spec.get("length", 16)))
    raise ValueError(f"unknown space kind {kind!r}")


# ---------------------------------------------------------------------------
# transforms


class Transform:
    space: Space

    def apply_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "Transform":
        raise NotImplementedError

    def normal(self) -> "Transform | None":
        """The space's fused normal form, if this transform has one."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    def __call__(self, x):
        return apply(self, x)

    def __matmul__(self, other: "Transform") -> "Transform":
        return compose(self, other)


@dataclass(frozen=True, eq=False)
class Identity(Transform):
    space: Space

    def apply_batch(self, X):
        return X.copy()

    def inverse(self):
        return self

    def normal(self):
        return self

    def to_json(self):
        return {"identity": {}}


def _frac_json(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return float(x)


def _parse_number(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


class Affine(Transform):
    """``x -> A x + b`` on ``Euclidean(d)``.

    Matrices of ints or Fractions are kept exact (object arrays); anything
    containing floats is converted to float.
    """

    def __init__(self, A, b=None, space: Space | None = None, _checked: bool = False):
        A = np.array(A, dtype=object if _has_fraction(A) else float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("Affine needs a square matrix")
        d = A.shape[0]
        if b is None:
            b = [Fraction(0)] * d if A.dtype == object else np.zeros(d)
        exact = A.dtype == object or _has_fraction(b)
        if exact:
            A = _exact.as_fraction_matrix(A) if A.dtype == object else _to_fraction(A)
            b = np.array([Fraction(x) for x in np.asarray(b, dtype=object).ravel()], dtype=object)
        else:
            b = np.asarray(b, dtype=float).ravel()
        if b.shape != (d,):
            raise ValueError("offset has the wrong length")
        self.A, self.b = A, b
        self.exact = exact
        self.space = space or Euclidean(d)
        if not isinstance(self.space, Euclidean) or self.space.d != d:
            raise SpaceMismatchError("Affine acts on Euclidean space of matching dimension")
        if not _checked:
            if exact:
                if _exact.det(A) == 0:
                    raise SingularityError("affine matrix is singular")
            else:
                if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
                    raise SingularityError("non-finite affine coefficients")
                cond = np.linalg.cond(A)
                if not np.isfinite(cond) or cond > COND_LIMIT:
                    raise SingularityError(f"affine matrix is ill-conditioned (cond={cond:.3g})")

    @classmethod
    def exact_scalar(cls, a, b) -> "Affine":
        return cls([[Fraction(a)]], [Fraction(b)])

    def apply_batch(self, X):
        if self.exact and X.dtype != object:
            X = X.astype(object)
        return X @ self.A.T + self.b

    def inverse(self):
        if self.exact:
            Ai = _exact.inverse(self.A)
            return Affine(Ai, -(Ai @ self.b), self.space, _checked=True)
        Ai = np.linalg.inv(self.A)
        return Affine(Ai, -Ai @ self.b, self.space, _checked=True)

    def normal(self):
        return self

    def then_after(self, other: "Affine") -> "Affine":
        """``self o other``."""
        if self.exact and other.exact:
            return Affine(self.A @ other.A, self.A @ other.b + self.b, self.space, _checked=True)
        A1, b1 = _float(self.A), _float(self.b)
        A2, b2 = _float(other.A), _float(other.b)
        return Affine(A1 @ A2, A1 @ b2 + b1, self.space, _checked=True)

    @property
    def is_linear(self) -> bool:
        return all(x == 0 for x in self.b)

    def coefficients(self):
        """``(a, b)`` for a one-dimensional map ``x -> a x + b``."""
        if self.space.d != 1:
            raise UnsupportedOperationError("coefficients() is for maps of the line")
        return self.A[0, 0], self.b[0]

    def to_json(self):
        return {
            "affine": {
                "A": [[_frac_json(x) for x in row] for row in self.A],
                "b": [_frac_json(x) for x in self.b],
            }
        }

    def __repr__(self):
        if self.space.d == 1:
            a, b = self.coefficients()
            return f"Affine(x -> {a}*x + {b})"
        return f"Affine(A={self.A.tolist()}, b={self.b.tolist()})"


def _has_fraction(M) -> bool:
    arr = np.asarray(M, dtype=object)
    return any(isinstance(x, Fraction) for x in arr.flat) or (
        arr.size > 0 and all(isinstance(x, (int, np.integer, Fraction)) for x in arr.flat)
    )


def _to_fraction(A):
    out = np.empty(A.shape, dtype=object)
    for idx, x in np.ndenumerate(A):
        out[idx] = Fraction(x)
    return out


def _float(M) -> np.ndarray:
    return np.asarray(M, dtype=float)


def rotation_matrix(d: int, i: int, j: int, angle: float) -> np.ndarray:
    R = np.eye(d)
    c, s = math.cos(angle), math.sin(angle)
    R[i, i], R[i, j], R[j, i], R[j, j] = c, -s, s, c
    return R


@dataclass(frozen=True, eq=False)
class Rotation(Transform):
    """Counterclockwise rotation by ``angle`` in the coordinate plane ``(i, j)``."""

    i: int
    j: int
    angle: float
    d: int = 2

    def __post_init__(self):
        if not 0 <= self.i < self.j < self.d:
            raise ValueError("rotation plane needs 0 <= i < j < d")

    @property
    def space(self):
        return Euclidean(self.d)

    @cached_property
    def _affine(self) -> Affine:
        return Affine(rotation_matrix(self.d, self.i, self.j, self.angle), space=self.space, _checked=True)

    def apply_batch(self, X):
        return self._affine.apply_batch(X)

    def inverse(self):
        return Rotation(self.i, self.j, -self.angle, self.d)

    def normal(self):
        return self._affine

    def to_json(self):
        return {"rot": {"i": self.i, "j": self.j, "angle": self.angle, "d": self.d}}


def reflection(angle: float) -> Affine:
    """Reflection of the plane across the line through 0 at the given angle."""
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return Affine([[c, s], [s, -c]], _checked=True)


def translation(b) -> Affine:
    b = list(b)
    exact = all(isinstance(x, (int, Fraction)) for x in b)
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    A = [[one if i == j else zero for j in range(len(b))] for i in range(len(b))]
    return Affine(A, b)


# -- labeled copies ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CopyShift(Transform):
    """``(v, k) -> (v, k + offset)``."""

    space: LabeledEuclidean
    offset: int

    def apply_batch(self, X):
        Y = X.copy()
        Y[:, 0] += self.offset
        self.space.check_window(Y[:, 0])
        return Y

    def inverse(self):
        return CopyShift(self.space, -self.offset)

    def normal(self):
        I = np.eye(self.space.d)
        z = np.zeros(self.space.d)
        return LabelAffine(self.space, self.offset, ((I, z), (I, z)))

    def to_json(self):
        return {"shift": {"offset": self.offset}}


@dataclass(frozen=True, eq=False)
class LabelGated(Transform):
    """Apply ``inner`` to the vector part of points whose label passes ``gate``.

    ``gate`` is ``"even"``, ``"odd"``, ``"all"`` or an integer label.
    """

    space: LabeledEuclidean
    gate: str | int
    inner: Transform

    def __post_init__(self):
        if self.gate not in ("even", "odd", "all") and not isinstance(self.gate, (int, np.integer)):
            raise ValueError(f"unknown gate {self.gate!r}")
        if not isinstance(self.inner.space, Euclidean) or self.inner.space.d != self.space.d:
            raise SpaceMismatchError("gated transform must act on the vector part")

    def _mask(self, labels):
        if self.gate == "all":
            return np.ones(labels.shape, dtype=bool)
        if self.gate == "even":
            return labels % 2 == 0
        if self.gate == "odd":
            return labels % 2 == 1
        return labels == self.gate

    def apply_batch(self, X):
        Y = X.copy()
        m = self._mask(X[:, 0])
        if np.any(m):
            Y[m, 1:] = np.asarray(self.inner.apply_batch(X[m, 1:]), dtype=float)
        return Y

    def inverse(self):
        return LabelGated(self.space, self.gate, self.inner.inverse())

    def normal(self):
        if self.gate not in ("even", "odd", "all"):
            return None
        aff = canonicalize(self.inner).normal()
        if not isinstance(aff, (Affine, Identity)):
            return None
        d = self.space.d
        ident = (np.eye(d), np.zeros(d))
        inner = ident if isinstance(aff, Identity) else (_float(aff.A), _float(aff.b))
        even = inner if self.gate in ("even", "all") else ident
        odd = inner if self.gate in ("odd", "all") else ident
        return LabelAffine(self.space, 0, (even, odd))

    def to_json(self):
        gate = self.gate if isinstance(self.gate, str) else int(self.gate)
        return {"gated": {"gate": gate, "inner": self.inner.to_json()}}


class LabelAffine(Transform):
    """Normal form on labeled copies: ``(v, k) -> (A_{k mod 2} v + b_{k mod 2}, k + shift)``."""

    def __init__(self, space: LabeledEuclidean, shift: int, maps):
        self.space = space
        self.shift = int(shift)
        self.maps = tuple((np.asarray(A, dtype=float), np.asarray(b, dtype=float)) for A, b in maps)

    def apply_batch(self, X):
        Y = np.empty_like(X)
        parity = (X[:, 0] % 2).astype(int)
        for p, (A, b) in enumerate(self.maps):
            m = parity == p
            if np.any(m):
                Y[m, 1:] = X[m, 1:] @ A.T + b
        Y[:, 0] = X[:, 0] + self.shift
        self.space.check_window(Y[:, 0])
        return Y

    def inverse(self):
        # parity of the output label is (p + shift) mod 2
        inv = [None, None]
        for p, (A, b) in enumerate(self.maps):
            Ai = np.linalg.inv(A)
            inv[(p + self.shift) % 2] = (Ai, -Ai @ b)
        return LabelAffine(self.space, -self.shift, inv)

    def normal(self):
        return self

    def then_after(self, other: "LabelAffine") -> "LabelAffine":
        maps = []
        for p, (A2, b2) in enumerate(other.maps):
            A1, b1 = self.maps[(p + other.shift) % 2]
            maps.append((A1 @ A2, A1 @ b2 + b1))
        return LabelAffine(self.space, self.shift + other.shift, maps)

    def to_json(self):
        return {
            "label_affine": {
                "shift": self.shift,
                "even": {"A": self.maps[0][0].tolist(), "b": self.maps[0][1].tolist()},
                "odd": {"A": self.maps[1][0].tolist(), "b": self.maps[1][1].tolist()},
            }
        }


# -- sequences ---------------------------------------------------------------


def _check_perm(perm, n) -> tuple[int, ...]:
    perm = tuple(int(x) for x in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of range({n})")
    return perm


@dataclass(frozen=True, eq=False)
class PermutationOfSymbols(Transform):
    """Permute symbols at one position (or at every position when ``position`` is None)."""

    space: ProdiscreteSequence
    perm: tuple[int, ...]
    position: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "perm", _check_perm(self.perm, self.space.alphabet))
        if self.position is not None and not 0 <= self.position < self.space.length:
            raise WindowRangeError(f"position {self.position} outside the sequence window")

    def apply_batch(self, X):
        return self.normal().apply_batch(X)

    def inverse(self):
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        return PermutationOfSymbols(self.space, tuple(inv), self.position)

    def normal(self):
        L, a = self.space.length, self.space.alphabet
        sym = np.tile(np.arange(a), (L, 1))
        rows = range(L) if self.position is None else [self.position]
        for k in rows:
            sym[k] = self.perm
        return SequenceMap(self.space, np.arange(L), sym)

    def to_json(self):
        return {"symperm": {"perm": list(self.perm), "position": self.position}}


@dataclass(frozen=True, eq=False)
class PositionSwap(Transform):
    """Swap positions ``0`` and ``n`` of the sequence."""

    space: ProdiscreteSequence
    n: int

    def __post_init__(self):
        if not 0 <= self.n < self.space.length:
            raise WindowRangeError(f"position {self.n} outside the sequence window of length {self.space.length}")

    def apply_batch(self, X):
        Y = X.copy()
        Y[:, [0, self.n]] = X[:, [self.n, 0]]
        return Y

    def inverse(self):
        return self

    def normal(self):
        pos = np.arange(self.space.length)
        pos[0], pos[self.n] = self.n, 0
        return SequenceMap(self.space, pos, np.tile(np.arange(self.space.alphabet), (self.space.length, 1)))

    def to_json(self):
        return {"swap": {"n": self.n}}


class SequenceMap(Transform):
    """Normal form on sequences: ``y_k = sym[k][x[pos[k]]]``."""

    def __init__(self, space: ProdiscreteSequence, pos, sym):
        self.space = space
        self.pos = np.asarray(pos, dtype=np.int64)
        self.sym = np.asarray(sym, dtype=np.int64)

    def apply_batch(self, X):
        return self.sym[np.arange(self.space.length)[None, :], X[:, self.pos]]

    def inverse(self):
        L = self.space.length
        pos = np.empty(L, dtype=np.int64)
        pos[self.pos] = np.arange(L)
        sym = np.empty_like(self.sym)
        # x_{pos[k]} = sym[k]^{-1}(y_k), so the inverse reads position k' = pos[k]
        for k in range(L):
            s_inv = np.empty(self.space.alphabet, dtype=np.int64)
            s_inv[self.sym[k]] = np.arange(self.space.alphabet)
            sym[self.pos[k]] = s_inv
        return SequenceMap(self.space, pos, sym)

    def normal(self):
        return self

    def then_after(self, other: "SequenceMap") -> "SequenceMap":
        pos = other.pos[self.pos]
        sym = self.sym[np.arange(self.space.length)[:, None], other.sym[self.pos]]
        return SequenceMap(self.space, pos, sym)

    def to_json(self):
        return {"sequence_map": {"pos": self.pos.tolist(), "sym": self.sym.tolist()}}


# -- trees -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TreePortrait(Transform):
    """``v -> w g(v')`` for ``v = w v'`` and ``v`` unchanged outside the subtree ``wL*``.

    Here ``g`` permutes the first letter of ``v'`` by ``perm`` and keeps the
    rest, which is an automorphism of the tree.
    """

    space: FiniteAlphabetTree
    anchor: tuple[int, ...]
    perm: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "anchor", tuple(int(x) for x in self.anchor))
        object.__setattr__(self, "perm", _check_perm(self.perm, self.space.alphabet))
        if any(not 0 <= x < self.space.alphabet for x in self.anchor):
            raise ValueError("anchor letter outside the alphabet")

    def apply_batch(self, X):
        n = len(self.anchor)
        Y = X.copy()
        if n >= self.space.depth:
            return Y
        if n:
            inside = np.all(X[:, :n] == np.asarray(self.anchor), axis=1)
        else:
            inside = np.ones(X.shape[0], dtype=bool)
        inside &= X[:, n] >= 0
        if np.any(inside):
            Y[inside, n] = np.asarray(self.perm)[X[inside, n]]
        return Y

    def inverse(self):
        inv = [0] * len(self.perm)
        for i, p in enumerate(self.perm):
            inv[p] = i
        return TreePortrait(self.space, self.anchor, tuple(inv))

    def normal(self):
        return self._table

    @cached_property
    def _table(self):
        if self.space.n_vertices > TABULATE_LIMIT:
            return None
        V = self.space.all_vertices
        return TreePermutation(self.space, self.space.encode(self.apply_batch(V)))

    def to_json(self):
        return {"portrait": {"anchor": list(self.anchor), "perm": list(self.perm)}}


class TreePermutation(Transform):
    """Normal form on trees: a permutation table over all vertices."""

    def __init__(self, space: FiniteAlphabetTree, table):
        self.space = space
        self.table = np.asarray(table, dtype=np.int64)

    def apply_batch(self, X):
        return self.space.decode(self.table[self.space.encode(X)])

    def inverse(self):
        inv = np.empty_like(self.table)
        inv[self.table] = np.arange(self.table.size)
        return TreePermutation(self.space, inv)

    def normal(self):
        return self

    def then_after(self, other: "TreePermutation") -> "TreePermutation":
        return TreePermutation(self.space, self.table[other.table])

    def to_json(self):
        return {"tree_table": self.table.tolist()}


# -- composites --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Compose(Transform):
    """``parts[0] o parts[1] o ... o parts[-1]`` (the last part acts first)."""

    parts: tuple[Transform, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("Compose needs at least one part")
        s = self.parts[0].space
        for p in self.parts[1:]:
            if p.space != s:
                raise SpaceMismatchError(f"cannot compose transforms of {s} and {p.space}")

    @property
    def space(self):
        return self.parts[0].space

    def apply_batch(self, X):
        for p in reversed(self.parts):
            X = p.apply_batch(X)
        return X

    def inverse(self):
        return Compose(tuple(p.inverse() for p in reversed(self.parts)))

    def normal(self):
        c = canonicalize(self)
        return c if not isinstance(c, Compose) else None

    def to_json(self):
        return {"compose": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class Inverse(Transform):
    inner: Transform

    @property
    def space(self):
        return self.inner.space

    def apply_batch(self, X):
        return self.inner.inverse().apply_batch(X)

    def inverse(self):
        return self.inner

    def normal(self):
        return self.inner.inverse().normal()

    def to_json(self):
        return {"inverse": self.inner.to_json()}


# ---------------------------------------------------------------------------
# operations


def apply(t: Transform, p) -> np.ndarray:
    """Image of a point (1-D array) or a batch of points (2-D array)."""
    arr = np.asarray(p)
    single = arr.ndim == 1
    X = t.space.check_batch(arr)
    Y = t.apply_batch(X)
    return Y[0] if single else Y


def _fuse(a: Transform, b: Transform) -> Transform | None:
    """``a o b`` as one normal-form transform, when both have one."""
    if isinstance(a, Identity):
        return b
    if isinstance(b, Identity):
        return a
    na, nb = a.normal(), b.normal()
    if na is None or nb is None:
        return None
    if isinstance(na, Identity):
        return nb
    if isinstance(nb, Identity):
        return na
    if type(na) is type(nb) and hasattr(na, "then_after"):
        return na.then_after(nb)
    return None


def canonicalize(t: Transform) -> Transform:
    """Flatten compositions and fuse neighbours into normal forms."""
    if isinstance(t, Inverse):
        return canonicalize(t.inner.inverse())
    if not isinstance(t, Compose):
        return t
    flat: list[Transform] = []
    stack = list(t.parts)
    while stack:
        p = stack.pop(0)
        if isinstance(p, Compose):
            stack = list(p.parts) + stack
        elif isinstance(p, Inverse):
            stack.insert(0, p.inner.inverse())
        else:
            flat.append(p)
    out: list[Transform] = []
    for p in flat:
        if out:
            fused = _fuse(out[-1], p)
            if fused is not None:
                out[-1] = fused
                continue
        out.append(p)
    out = [p for p in out if not isinstance(p, Identity)] or [Identity(t.space)]
    return out[0] if len(out) == 1 else Compose(tuple(out))


def compose(t1: Transform, t2: Transform) -> Transform:
    """``t1 o t2``: apply ``t2`` first."""
    if t1.space != t2.space:
        raise SpaceMismatchError(f"cannot compose transforms of {t1.space} and {t2.space}")
    fused = _fuse(t1, t2)
    if fused is not None:
        return fused
    return Compose((t1, t2))


def compose_all(transforms: Sequence[Transform], space: Space) -> Transform:
    """``T_1 o T_2 o ... o T_k`` for a left-to-right list."""
    out: Transform = Identity(space)
    for t in reversed(transforms):
        out = compose(t, out)
    return out


def invert(t: Transform) -> Transform:
    return t.inverse()


def as_affine(t: Transform) -> Affine:
    n = canonicalize(t).normal()
    if isinstance(n, Identity) and isinstance(t.space, Euclidean):
        d = t.space.d
        return Affine(np.eye(d), np.zeros(d), _checked=True)
    if not isinstance(n, Affine):
        raise UnsupportedOperationError(f"{type(t).__name__} is not affine")
    return n


def sample(space: Space, n: int = 64, seed: int = 0) -> np.ndarray:
    return space.sample(n, seed)


def approx_equal(t1: Transform, t2: Transform, testpoints, tol: float = 1e-9) -> bool:
    return max_deviation(t1, t2, testpoints) <= (0.0 if t1.space.discrete else tol)


def max_deviation(t1: Transform, t2: Transform, testpoints) -> float:
    if t1.space != t2.space:
        raise SpaceMismatchError(f"{t1.space} vs {t2.space}")
    X = np.asarray(testpoints)
    if X.size == 0:
        raise ConfigurationError("approx_equal needs at least one test point")
    X = t1.space.check_batch(X)
    d = t1.space.distance(t1.apply_batch(X), t2.apply_batch(X))
    return float(np.max(d))


def transform_from_json(spec: dict, space: Space) -> Transform:
    if len(spec) != 1:
        raise ValueError(f"transform spec needs exactly one key, got {sorted(spec)}")
    (kind, body), = spec.items()
    if kind == "identity":
        return Identity(space)
    if kind == "affine":
        A = [[_parse_number(x) for x in row] for row in body["A"]]
        b = [_parse_number(x) for x in body.get("b", [0] * len(A))]
        return Affine(A, b)
    if kind == "rot":
        d = int(body.get("d", getattr(space, "d", 2)))
        return Rotation(int(body["i"]), int(body["j"]), float(body["angle"]), d)
    if kind == "reflect":
        return reflection(float(body["angle"]))
    if kind == "shift":
        return CopyShift(space, int(body["offset"]))
    if kind == "gated":
        inner = transform_from_json(body["inner"], Euclidean(space.d))
        return LabelGated(space, body["gate"], inner)
    if kind == "symperm":
        return PermutationOfSymbols(space, tuple(body["perm"]), body.get("position"))
    if kind == "swap":
        return PositionSwap(space, int(body["n"]))
    if kind == "portrait":
        return TreePortrait(space, tuple(body["anchor"]), tuple(body["perm"]))
    if kind == "compose":
        return Compose(tuple(transform_from_json(p, space) for p in body))
    if kind == "inverse":
        return Inverse(transform_from_json(body, space))
    raise ValueError(f"unknown transform kind {kind!r}")
