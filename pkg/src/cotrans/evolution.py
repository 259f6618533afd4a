"""Evolution operators of ``x'(t) = A(t) x(t)`` and the matching cotranslations of (R, +).

``Psi(u, v)`` maps the state at time ``v`` to the state at time ``u``.  The
cotranslation is ``Z(r, t) = Psi(t + r, r)`` and conversely
``Psi(u, v) = Z(v, u - v)``.  Derivatives are central finite differences.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericOverflowError
from .report import Report

DEFAULT_STEP = 1e-3
DEFAULT_H = 1e-4
MAX_STEPS = 10**7


@dataclass
class GeneratorFunction:
    """``t -> A(t)``, a continuous d x d matrix function."""

    rule: Callable[[float], np.ndarray]
    d: int
    name: str = "generator"
    params: dict = field(default_factory=dict)
    smooth: bool = True

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.rule(t), dtype=float)

    @classmethod
    def constant(cls, M) -> "GeneratorFunction":
        M = np.array(M, dtype=float)
        return cls(lambda t: M, M.shape[0], "constant", {"constant": M.tolist()})

    @classmethod
    def polynomial(cls, coeffs) -> "GeneratorFunction":
        """Entry ``(i, j)`` is ``sum_k coeffs[i][j][k] t^k``."""
        C = [[list(map(float, c)) for c in row] for row in coeffs]
        d = len(C)

        def rule(t):
            return np.array([[sum(c * t**k for k, c in enumerate(e)) for e in row] for row in C])

        return cls(rule, d, "polynomial", {"polynomial": C})

    def shifted(self, lam: float) -> "GeneratorFunction":
        """``A(t) - lam I``."""
        I = np.eye(self.d)
        return GeneratorFunction(lambda t: self(t) - lam * I, self.d, f"{self.name} - {lam} I", smooth=self.smooth)

    def is_skew(self, ts: Iterable[float] = (-1.0, 0.0, 0.5, 1.0)) -> bool:
        return all(np.allclose(self(t), -self(t).T) for t in ts)


BUILTINS = {
    "zero": lambda: GeneratorFunction(lambda t: np.zeros((2, 2)), 2, "zero"),
    "rotation": lambda: GeneratorFunction.constant([[0.0, 1.0], [-1.0, 0.0]]),
    "time_rotation": lambda: GeneratorFunction(
        lambda t: np.array([[0.0, t], [-t, 0.0]]), 2, "time_rotation"
    ),
    "sin_cos": lambda: GeneratorFunction(
        lambda t: np.array([[math.sin(t), 1.0], [0.0, math.cos(t)]]), 2, "sin_cos"
    ),
    "diag_t": lambda: GeneratorFunction(lambda t: np.array([[t]]), 1, "diag_t"),
}


def generator_from_json(spec) -> GeneratorFunction:
    if isinstance(spec, str):
        try:
            return BUILTINS[spec]()
        except KeyError:
            raise ValueError(f"unknown generator {spec!r}") from None
    if "constant" in spec:
        return GeneratorFunction.constant(spec["constant"])
    if "polynomial" in spec:
        return GeneratorFunction.polynomial(spec["polynomial"])
    if "builtin" in spec:
        return generator_from_json(spec["builtin"])
    raise ValueError(f"unknown generator spec {sorted(spec)}")


def _rk4_step(A: GeneratorFunction, t: float, Y: np.ndarray, h: float) -> np.ndarray:
    k1 = A(t) @ Y
    Amid = A(t + h / 2)
    k2 = Amid @ (Y + h / 2 * k1)
    k3 = Amid @ (Y + h / 2 * k2)
    k4 = A(t + h) @ (Y + h * k3)
    return Y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _check_finite(Y, where):
    if not np.all(np.isfinite(Y)):
        raise NumericOverflowError(f"integration produced non-finite values at {where}")


def integrate_transition(A: GeneratorFunction, u: float, v: float, step: float = DEFAULT_STEP) -> np.ndarray:
    """``Psi(u, v)`` by fixed-step classical Runge-Kutta from ``v`` to ``u``."""
    if step <= 0:
        raise ValueError("step must be positive")
    span = u - v
    n = math.ceil(abs(span) / step - 1e-9) if span else 0
    if n > MAX_STEPS:
        raise ValueError(f"{n} steps exceed the limit {MAX_STEPS}")
    Y = np.eye(A.d)
    if n == 0:
        return Y
    h = span / n
    t = v
    # overflow surfaces as non-finite entries, reported below
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            Y = _rk4_step(A, t, Y, h)
            t = v + (k + 1) * h
    _check_finite(Y, u)
    return Y


class EvolutionOperator:
    """``Psi(u, v) = Phi(u) Phi(v)^{-1}`` with ``Phi(t) = Psi(t, 0)``.

    ``Phi`` is cached at multiples of ``step``; other times take one partial
    Runge-Kutta step from the nearest cached node.  ``Psi(u, u)`` is exactly
    the identity.
    """

    def __init__(self, A: GeneratorFunction, step: float = DEFAULT_STEP):
        if step <= 0:
            raise ValueError("step must be positive")
        self.A = A
        self.step = step
        self.d = A.d
        self._nodes: dict[int, np.ndarray] = {0: np.eye(A.d)}
        self._lo = 0
        self._hi = 0
        self._lock = threading.Lock()

    def _node(self, j: int) -> np.ndarray:
        M = self._nodes.get(j)
        if M is not None:
            return M
        if abs(j) > MAX_STEPS:
            raise ValueError("time outside the integrable range")
        with self._lock:
            while self._hi < j:
                Y = _rk4_step(self.A, self._hi * self.step, self._nodes[self._hi], self.step)
                _check_finite(Y, (self._hi + 1) * self.step)
                self._hi += 1
                self._nodes[self._hi] = Y
            while self._lo > j:
                Y = _rk4_step(self.A, self._lo * self.step, self._nodes[self._lo], -self.step)
                _check_finite(Y, (self._lo - 1) * self.step)
                self._lo -= 1
                self._nodes[self._lo] = Y
        return self._nodes[j]

    def fundamental(self, t: float) -> np.ndarray:
        """``Phi(t) = Psi(t, 0)``."""
        j = round(t / self.step)
        base = self._node(j)
        tj = j * self.step
        if t == tj:
            return base
        return _rk4_step(self.A, tj, base, t - tj)

    def __call__(self, u: float, v: float) -> np.ndarray:
        if u == v:
            return np.eye(self.d)
        Pu, Pv = self.fundamental(u), self.fundamental(v)
        # Pu @ inv(Pv) without forming the inverse
        return np.linalg.solve(Pv.T, Pu.T).T

    def trajectory(self, v: float, xi, ts: Iterable[float]) -> np.ndarray:
        """``x(t) = Psi(t, v) xi`` for each ``t``."""
        xi = np.asarray(xi, dtype=float)
        return np.array([self(t, v) @ xi for t in ts])


class FlowCotranslation:
    """A cotranslation of (R, +) with matrix values ``Z(r, t)``."""

    def __init__(self, rule: Callable[[float, float], np.ndarray], d: int, name: str = "flow"):
        self._rule = rule
        self.d = d
        self.name = name

    def __call__(self, r: float, t: float) -> np.ndarray:
        return np.asarray(self._rule(r, t), dtype=float)

    def inv(self, r: float, t: float) -> np.ndarray:
        return np.linalg.inv(self(r, t))


class EvolutionView:
    """``Psi(u, v) = Z(v, u - v)`` for a flow cotranslation ``Z``."""

    def __init__(self, Z: FlowCotranslation):
        self.Z = Z
        self.d = Z.d

    def __call__(self, u: float, v: float) -> np.ndarray:
        return self.Z(v, u - v)


def cotranslation_of_evolution(Psi) -> FlowCotranslation:
    """``Z(r, t) = Psi(t + r, r)``."""
    if isinstance(Psi, EvolutionView):
        return Psi.Z
    return FlowCotranslation(lambda r, t: Psi(t + r, r), Psi.d, name="flow of evolution")


def evolution_of_cotranslation(Z: FlowCotranslation):
    return EvolutionView(Z)


def flow_from_generator(A: GeneratorFunction, step: float = DEFAULT_STEP) -> FlowCotranslation:
    return cotranslation_of_evolution(EvolutionOperator(A, step))


def scalar_twist_flow(Z: FlowCotranslation, lam: float) -> FlowCotranslation:
    """``W(r, t) = Z(r, t) e^{-lam t}``; the twist by the morphism ``t -> e^{-lam t} I``."""
    return FlowCotranslation(lambda r, t: Z(r, t) * math.exp(-lam * t), Z.d, name=f"{Z.name} twisted by {lam}")


# ---------------------------------------------------------------------------
# finite differences


def fd_partial1(Z: Callable, r: float, t: float, h: float = DEFAULT_H) -> np.ndarray:
    if h <= 0:
        raise ValueError("h must be positive")
    return (Z(r + h, t) - Z(r - h, t)) / (2 * h)


def fd_partial2(Z: Callable, r: float, t: float, h: float = DEFAULT_H) -> np.ndarray:
    if h <= 0:
        raise ValueError("h must be positive")
    return (Z(r, t + h) - Z(r, t - h)) / (2 * h)


def infinitesimal_generator(Z: Callable, t: float, h: float = DEFAULT_H) -> np.ndarray:
    """``A(t) = d/ds Z(t, s)`` at ``s = 0``."""
    return fd_partial2(Z, t, 0.0, h)


def default_grid(n: int = 5, lo: float = -1.0, hi: float = 1.0) -> list[tuple[float, float]]:
    pts = np.linspace(lo, hi, n)
    return [(float(r), float(t)) for r, t in product(pts, pts)]


IDENTITY_NAMES = (
    "inverse d1",
    "inverse d2",
    "d1 via r = 0",
    "d2 via t = 0",
    "d1 from d2",
)


def derivative_residuals(Z: FlowCotranslation, r: float, t: float, h: float = DEFAULT_H) -> dict[str, float]:
    """Frobenius residuals of the five derivative identities at ``(r, t)``."""
    inv = lambda a, b: np.linalg.inv(Z(a, b))
    Zrt, Zi = Z(r, t), inv(r, t)
    d1 = fd_partial1(Z, r, t, h)
    d2 = fd_partial2(Z, r, t, h)
    out = {}
    out["inverse d1"] = fd_partial1(inv, r, t, h) - (-Zi @ d1 @ Zi)
    out["inverse d2"] = fd_partial2(inv, r, t, h) - (-Zi @ d2 @ Zi)
    back = Z(r, -r)
    out["d1 via r = 0"] = d1 - (fd_partial1(Z, 0.0, t + r, h) @ back - Zrt @ fd_partial1(Z, 0.0, r, h) @ back)
    out["d2 via t = 0"] = d2 - fd_partial2(Z, r + t, 0.0, h) @ Zrt
    out["d1 from d2"] = d1 - (d2 - Zrt @ fd_partial2(Z, r, 0.0, h))
    return {k: float(np.linalg.norm(v)) for k, v in out.items()}


def verify_derivative_identities(
    Z: FlowCotranslation,
    sample: Iterable[tuple[float, float]] | None = None,
    h: float = DEFAULT_H,
    tol: float = 1e-4,
) -> Report:
    sample = default_grid() if sample is None else list(sample)
    report = Report(f"derivative identities: {Z.name}")
    checks = {name: report.check(name) for name in IDENTITY_NAMES}
    for r, t in sample:
        for name, res in derivative_residuals(Z, r, t, h).items():
            ok = res <= tol
            checks[name].record(res, ok, None if ok else {"r": r, "t": t, "residual": res})
    report.extras["h"] = h
    return report


def verify_flow_cocycle(
    Z: FlowCotranslation, sample: Iterable[tuple[float, float, float]], tol: float = 1e-7
) -> Report:
    """``Z(r, t + s) = Z(s + r, t) Z(r, s)``."""
    report = Report(f"flow cocycle: {Z.name}")
    c = report.check("cocycle")
    for r, s, t in sample:
        res = float(np.linalg.norm(Z(r, t + s) - Z(s + r, t) @ Z(r, s)))
        ok = res <= tol
        c.record(res, ok, None if ok else {"r": r, "s": s, "t": t, "residual": res})
    return report


def verify_evolution_properties(
    Psi,
    A: GeneratorFunction,
    sample: Iterable[tuple[float, float, float]] | None = None,
    tol: float = 1e-7,
    h: float = DEFAULT_H,
    fd_tol: float = 1e-6,
    xi=None,
    step: float = DEFAULT_STEP,
) -> Report:
    """Chain law, both derivative laws and the solution property.

    The chain law is checked twice: on ``Psi`` itself and against
    independent direct integrations.  Derivative checks use central
    differences and are compared with ``fd_tol``.  Norm conservation is
    added when ``A`` is skew-symmetric.
    """
    if sample is None:
        pts = np.linspace(-1.0, 1.0, 3)
        sample = [(float(u), float(v), float(w)) for u, v, w in product(pts, pts, pts)]
    sample = list(sample)
    report = Report("evolution properties")
    chain = report.check("chain law")
    direct = report.check("chain law (direct integration)")
    du = report.check("d/du")
    dv = report.check("d/dv")
    unit = report.check("unit")
    for u, v, w in sample:
        res = float(np.linalg.norm(Psi(u, v) @ Psi(v, w) - Psi(u, w)))
        chain.record(res, res <= tol, {"u": u, "v": v, "w": w})
        res = float(
            np.linalg.norm(
                integrate_transition(A, u, v, step) @ integrate_transition(A, v, w, step)
                - integrate_transition(A, u, w, step)
            )
        )
        direct.record(res, res <= tol, {"u": u, "v": v, "w": w})
        d_u = (Psi(u + h, v) - Psi(u - h, v)) / (2 * h)
        res = float(np.linalg.norm(d_u - A(u) @ Psi(u, v)))
        du.record(res, res <= fd_tol, {"u": u, "v": v})
        d_v = (Psi(u, v + h) - Psi(u, v - h)) / (2 * h)
        res = float(np.linalg.norm(d_v + Psi(u, v) @ A(v)))
        dv.record(res, res <= fd_tol, {"u": u, "v": v})
        res = float(np.linalg.norm(Psi(v, v) - np.eye(A.d)))
        unit.record(res, res == 0.0, {"v": v})

    xi = np.eye(A.d)[0] if xi is None else np.asarray(xi, dtype=float)
    sol = report.check("solution")
    start = report.check("initial value")
    norm = report.check("norm conservation") if A.is_skew() else None
    v0 = 0.0
    res = float(np.linalg.norm(Psi(v0, v0) @ xi - xi))
    start.record(res, res == 0.0, {"v": v0})
    for t in np.linspace(-1.0, 1.0, 21):
        t = float(t)
        x = Psi(t, v0) @ xi
        dx = (Psi(t + h, v0) @ xi - Psi(t - h, v0) @ xi) / (2 * h)
        res = float(np.linalg.norm(dx - A(t) @ x))
        sol.record(res, res <= fd_tol, {"t": t})
        if norm is not None:
            res = abs(float(np.linalg.norm(x)) - float(np.linalg.norm(xi)))
            norm.record(res, res <= tol, {"t": t})
    return report
