"""Exact rational linear algebra on small object arrays of Fractions."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import SingularityError


def as_fraction_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=object)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    out = np.empty(A.shape, dtype=object)
    for idx, x in np.ndenumerate(A):
        out[idx] = Fraction(x)
    return out


def is_exact(M) -> bool:
    A = np.asarray(M)
    return A.dtype == object


def identity(d: int) -> np.ndarray:
    I = np.empty((d, d), dtype=object)
    for i in range(d):
        for j in range(d):
            I[i, j] = Fraction(int(i == j))
    return I


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    n, m = A.shape[0], B.shape[1]
    out = np.empty((n, m), dtype=object)
    for i in range(n):
        for j in range(m):
            out[i, j] = sum((A[i, k] * B[k, j] for k in range(A.shape[1])), Fraction(0))
    return out


def inverse(M) -> np.ndarray:
    """Gauss-Jordan inverse over the rationals."""
    A = as_fraction_matrix(M)
    d = A.shape[0]
    aug = np.concatenate([A, identity(d)], axis=1)
    for col in range(d):
        pivot = next((r for r in range(col, d) if aug[r, col] != 0), None)
        if pivot is None:
            raise SingularityError("matrix is singular")
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] = aug[col] / aug[col, col]
        for r in range(d):
            if r != col and aug[r, col] != 0:
                aug[r] = aug[r] - aug[r, col] * aug[col]
    return aug[:, d:]


def det(M) -> Fraction:
    A = as_fraction_matrix(M)
    d = A.shape[0]
    sign = Fraction(1)
    result = Fraction(1)
    A = A.copy()
    for col in range(d):
        pivot = next((r for r in range(col, d) if A[r, col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            A[[col, pivot]] = A[[pivot, col]]
            sign = -sign
        result *= A[col, col]
        for r in range(col + 1, d):
            if A[r, col] != 0:
                A[r] = A[r] - (A[r, col] / A[col, col]) * A[col]
    return sign * result


def equal(A, B) -> bool:
    return A.shape == B.shape and all(a == b for a, b in zip(A.flat, B.flat))
