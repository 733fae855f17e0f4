"""Soft-margin RBF SVM trained by sequential minimal optimization.

Platt-style SMO with a full error cache: examine passes alternate between
all points and the non-bound set, the partner is picked by the max |E1-E2|
heuristic with deterministic rotating fallbacks (no randomness), and the
loop exits only after a full pass finds no KKT violation beyond ``tol``.
External labels are {0,1}; internally the dual works on {-1,+1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, SingleClass

_STEP_EPS = 1e-8


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray  # rows of x with alpha > 0
    dual_coef: np.ndarray  # alpha_i * y_i for the support vectors
    intercept: float
    c: float
    gamma: float  # resolved value
    gamma_rule: str  # "scale" | "auto" | "value"
    kernel: str = "rbf"
    converged: bool = True
    support_indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))
    objective_path: tuple[float, ...] = field(default=(), repr=False)


def resolve_gamma(x: np.ndarray, gamma) -> tuple[float, str]:
    p = x.shape[1]
    if gamma == "scale":
        var = float(x.var())  # population variance over all entries
        return (1.0 / (p * var) if var > 0 else 1.0 / p), "scale"
    if gamma == "auto":
        return 1.0 / p, "auto"
    value = float(gamma)
    if value <= 0:
        raise ValueError("gamma must be positive")
    return value, "value"


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    sq = (a**2).sum(axis=1)[:, None] + (b**2).sum(axis=1)[None, :] - 2.0 * a @ b.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


class _Smo:
    def __init__(self, kmat, y, c, tol, track_objective):
        self.k = kmat
        self.y = y.astype(np.float64)
        self.c = float(c)
        self.tol = float(tol)
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.errors = -self.y.copy()  # f = 0 initially, E = f - y
        self.rotation = 0
        self.track = track_objective
        self.objective_path: list[float] = []

    def dual_objective(self) -> float:
        ay = self.alpha * self.y
        return float(self.alpha.sum() - 0.5 * ay @ self.k @ ay)

    def take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if s > 0:
            lo, hi = max(0.0, a1 + a2 - self.c), min(self.c, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(self.c, self.c + a2 - a1)
        if lo >= hi:
            return False
        k11, k12, k22 = self.k[i1, i1], self.k[i1, i2], self.k[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = a2 + y2 * (e1 - e2) / eta
            a2_new = min(max(a2_new, lo), hi)
        else:
            # Objective at the two clip endpoints (Platt's psi comparison).
            f1 = y1 * (e1 + self.b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (e2 + self.b) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - lo)
            h1 = a1 + s * (a2 - hi)
            lobj = l1 * f1 + lo * f2 + 0.5 * l1**2 * k11 + 0.5 * lo**2 * k22 + s * lo * l1 * k12
            hobj = h1 * f1 + hi * f2 + 0.5 * h1**2 * k11 + 0.5 * hi**2 * k22 + s * hi * h1 * k12
            if lobj < hobj - 1e-12:
                a2_new = lo
            elif lobj > hobj + 1e-12:
                a2_new = hi
            else:
                a2_new = a2
        if abs(a2_new - a2) < _STEP_EPS * (a2_new + a2 + _STEP_EPS):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        # Guard accumulated float error at the box edges.
        a1_new = min(max(a1_new, 0.0), self.c)
        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1_new < self.c:
            b_new = b1
        elif 0.0 < a2_new < self.c:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        self.errors += d1 * self.k[i1] + d2 * self.k[i2] + (b_new - self.b)
        self.alpha[i1] = a1_new
        self.alpha[i2] = a2_new
        self.b = b_new
        if self.track:
            self.objective_path.append(self.dual_objective())
        return True

    def examine(self, i2: int) -> int:
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        e2 = self.errors[i2]
        r2 = e2 * y2
        violates = (r2 < -self.tol and a2 < self.c) or (r2 > self.tol and a2 > 0.0)
        if not violates:
            return 0
        nonbound = np.nonzero((self.alpha > 0.0) & (self.alpha < self.c))[0]
        if len(nonbound) > 1:
            i1 = int(nonbound[np.argmax(np.abs(self.errors[nonbound] - e2))])
            if self.take_step(i1, i2):
                return 1
        self.rotation += 1
        for offset in range(len(nonbound)):
            i1 = int(nonbound[(offset + self.rotation) % len(nonbound)])
            if self.take_step(i1, i2):
                return 1
        for offset in range(self.n):
            i1 = (offset + self.rotation) % self.n
            if self.take_step(i1, i2):
                return 1
        return 0

    def run(self, max_passes: int) -> bool:
        num_changed = 0
        examine_all = True
        passes = 0
        while num_changed > 0 or examine_all:
            if passes >= max_passes:
                return False
            passes += 1
            if examine_all:
                num_changed = sum(self.examine(i) for i in range(self.n))
            else:
                nonbound = np.nonzero((self.alpha > 0.0) & (self.alpha < self.c))[0]
                num_changed = sum(self.examine(int(i)) for i in nonbound)
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True
        return True


def svm_fit(
    x: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    gamma="scale",
    tol: float = 1e-3,
    max_passes: int = 200,
    track_objective: bool = False,
) -> SvmModel:
    """SMO on the soft-margin dual. ``y`` uses the external {0,1} coding.

    On normal exit every point satisfies the KKT conditions within ``tol``.
    Hitting ``max_passes`` first returns the current model flagged
    ``converged=False``. The intercept is recomputed as the average over
    margin support vectors when any exist.
    """
    x = np.asarray(x, dtype=np.float64)
    y01 = np.asarray(y).astype(np.int64)
    if len(np.unique(y01)) < 2:
        raise SingleClass("svm_fit requires samples of both classes")
    if c <= 0:
        raise ValueError("c must be positive")
    yy = np.where(y01 == 1, 1.0, -1.0)
    gamma_value, gamma_rule = resolve_gamma(x, gamma)
    kmat = rbf_kernel(x, x, gamma_value)
    smo = _Smo(kmat, yy, c, tol, track_objective)
    converged = smo.run(max_passes)

    alpha = smo.alpha
    b = smo.b
    margin = np.nonzero((alpha > 1e-8) & (alpha < c - 1e-8))[0]
    if len(margin) > 0:
        g = (alpha * yy) @ kmat  # decision values without intercept
        b = float(np.mean(yy[margin] - g[margin]))
    support = np.nonzero(alpha > 1e-12)[0]
    return SvmModel(
        support_vectors=x[support].copy(),
        dual_coef=(alpha * yy)[support].copy(),
        intercept=float(b),
        c=float(c),
        gamma=gamma_value,
        gamma_rule=gamma_rule,
        converged=converged,
        support_indices=support.copy(),
        objective_path=tuple(smo.objective_path),
    )


def svm_score(m: SvmModel, x: np.ndarray) -> np.ndarray:
    """Signed decision value sum(alpha_i y_i K(x_i, x)) + b."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if m.support_vectors.shape[0] == 0:
        return np.full(x.shape[0], m.intercept)
    if x.shape[1] != m.support_vectors.shape[1]:
        raise DimensionMismatch(
            f"input has {x.shape[1]} features, model expects {m.support_vectors.shape[1]}"
        )
    return rbf_kernel(x, m.support_vectors, m.gamma) @ m.dual_coef + m.intercept


def svm_predict(m: SvmModel, x: np.ndarray) -> np.ndarray:
    """Sign of the decision value, mapped back to {0,1} (0 on the boundary)."""
    return (svm_score(m, x) > 0.0).astype(np.int64)
