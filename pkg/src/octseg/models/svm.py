"""Soft-margin RBF support vector machine trained by sequential minimal optimisation.

The dual ``min 1/2 a'Qa - e'a  s.t.  0 <= a_i <= C, s'a = 0`` (``s`` = labels in
{-1, +1}, ``Q_ij = s_i s_j K_ij``) is solved two coordinates at a time. The first
index is the maximal KKT violator, the second maximises the second-order gain;
each pair step is the closed-form optimum clipped to the feasible box. Training
stops when the maximal violation gap drops below ``tol``.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidHyperparameter, SingleClass, WidthMismatch
from ..rng import SplitMix64

TAU = 1e-12
PREDICT_CHUNK = 1024


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * s_i
    bias: float
    gamma: float
    C: float
    iterations: int = 0
    converged: bool = False
    alpha: np.ndarray | None = None  # full training alphas, kept for diagnostics only
    signed_labels: np.ndarray | None = None

    def to_params(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": float(self.bias),
            "gamma": float(self.gamma),
            "C": float(self.C),
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_params(cls, p: dict) -> "SvmModel":
        sv = np.asarray(p["support_vectors"], dtype=np.float64)
        coef = np.asarray(p["dual_coef"], dtype=np.float64)
        if sv.size == 0:
            sv = sv.reshape(0, 0)
        return cls(sv, coef, float(p["bias"]), float(p["gamma"]), float(p["C"]),
                   int(p.get("iterations", 0)), bool(p.get("converged", False)))


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    """``exp(-gamma * ||a - b||^2)`` for every row pair, by direct differences."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    d2 = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-gamma * d2)


def default_gamma(X) -> float:
    """``1 / (d * mean per-feature variance)``; falls back to ``1/d`` for constant data."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    var = float(X.var(axis=0).mean())
    return 1.0 / (d * var) if var > 0 else 1.0 / d


class _KernelColumns:
    def __init__(self, X: np.ndarray, gamma: float, max_bytes: int = 256 << 20) -> None:
        self.X = X
        self.gamma = gamma
        self.cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self.capacity = max(2, max_bytes // (8 * max(1, X.shape[0])))

    def __call__(self, i: int) -> np.ndarray:
        col = self.cache.get(i)
        if col is not None:
            self.cache.move_to_end(i)
            return col
        d2 = ((self.X - self.X[i]) ** 2).sum(axis=1)
        col = np.exp(-self.gamma * d2)
        self.cache[i] = col
        if len(self.cache) > self.capacity:
            self.cache.popitem(last=False)
        return col


def train_svm(X, y, C: float = 1.0, gamma: float | None = None, tol: float = 1e-3,
              max_passes: int = 10, seed: int = 0) -> SvmModel:
    """Fit on labels in {0, 1}. At most ``max_passes * n`` pair updates are made."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).ravel()
    if X.shape[0] != y.size:
        raise WidthMismatch(f"{X.shape[0]} rows, {y.size} labels")
    if np.unique(y).size < 2:
        raise SingleClass("SVM training needs both classes")
    if gamma is None:
        gamma = default_gamma(X)
    if not C > 0 or not gamma > 0 or tol <= 0 or max_passes < 1:
        raise InvalidHyperparameter(f"C={C}, gamma={gamma}, tol={tol}, max_passes={max_passes}")
    n = y.size
    s = np.where(y == 1, 1.0, -1.0)
    alpha = np.zeros(n)
    G = -np.ones(n)
    kcol = _KernelColumns(X, gamma)
    rng = SplitMix64(seed)
    max_iter = max_passes * n
    it = 0
    converged = False
    while it < max_iter:
        v = -s * G
        up = ((s > 0) & (alpha < C)) | ((s < 0) & (alpha > 0))
        low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(v[up])])
        g_max = v[i]
        g_min = v[low].min()
        if g_max - g_min < tol:
            converged = True
            break
        Ki = kcol(i)
        cand = np.flatnonzero(low & (v < g_max))
        gain = g_max - v[cand]
        quad = 2.0 - 2.0 * Ki[cand]  # K_ii = K_tt = 1 for RBF
        quad = np.where(quad > 0, quad, TAU)
        obj = -(gain * gain) / quad
        best = np.flatnonzero(obj == obj.min())
        j = int(cand[best[rng.below(best.size)] if best.size > 1 else best[0]])
        Kj = kcol(j)
        Qij = s[i] * s[j] * Ki[j]
        ai, aj = alpha[i], alpha[j]
        if s[i] != s[j]:
            q = 2.0 + 2.0 * Qij
            q = q if q > 0 else TAU
            delta = (-G[i] - G[j]) / q
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            q = 2.0 - 2.0 * Qij
            q = q if q > 0 else TAU
            delta = (G[i] - G[j]) / q
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
                if aj > C:
                    aj, ai = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
                if ai < 0:
                    ai, aj = 0.0, total
        d_ai, d_aj = ai - alpha[i], aj - alpha[j]
        alpha[i], alpha[j] = ai, aj
        G += s * (s[i] * d_ai * Ki + s[j] * d_aj * Kj)
        it += 1
    bias = -_rho(alpha, s, G, C)
    sv = alpha > 0
    return SvmModel(X[sv].copy(), alpha[sv] * s[sv], bias, float(gamma), float(C), it, converged,
                    alpha, s)


def _rho(alpha, s, G, C) -> float:
    yG = s * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yG[free].mean())
    at_upper = alpha >= C
    at_lower = alpha <= 0
    # bounds on rho implied by the KKT conditions of bounded variables
    ub_mask = (at_lower & (s > 0)) | (at_upper & (s < 0))
    lb_mask = (at_upper & (s > 0)) | (at_lower & (s < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)


def decision_function(model: SvmModel, X, workers: int = 1) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n_sv = model.dual_coef.size
    if n_sv == 0:
        return np.full(X.shape[0], model.bias)
    if X.shape[1] != model.support_vectors.shape[1]:
        raise WidthMismatch(f"{X.shape[1]} features, model expects {model.support_vectors.shape[1]}")
    sv = model.support_vectors
    sv_sq = (sv * sv).sum(axis=1)

    def chunk(r0: int) -> np.ndarray:
        xb = X[r0:r0 + PREDICT_CHUNK]
        d2 = (xb * xb).sum(axis=1)[:, None] + sv_sq[None, :] - 2.0 * (xb @ sv.T)
        np.maximum(d2, 0.0, out=d2)
        return np.exp(-model.gamma * d2) @ model.dual_coef + model.bias

    starts = range(0, X.shape[0], PREDICT_CHUNK)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(r0) for r0 in starts]
    return np.concatenate(parts) if parts else np.empty(0)


def predict_svm(model: SvmModel, X, workers: int = 1) -> np.ndarray:
    """Labels in {0, 1}; a decision value of exactly 0 maps to 1."""
    return (decision_function(model, X, workers) >= 0).astype(np.int64)
