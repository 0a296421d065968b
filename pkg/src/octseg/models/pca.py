"""Two-component PCA by power iteration with deflation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, WidthMismatch


@dataclass
class PcaModel:
    components: np.ndarray  # (2, d), orthonormal rows
    mean: np.ndarray
    explained_variance: np.ndarray

    def to_params(self) -> dict:
        return {
            "components": self.components.tolist(),
            "mean": self.mean.tolist(),
            "explained_variance": self.explained_variance.tolist(),
        }


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    return -v if nz.size and v[nz[0]] < 0 else v


def power_iteration(A: np.ndarray, start: np.ndarray, tol: float = 1e-10, max_iter: int = 100_000):
    """Dominant eigenpair of a symmetric PSD matrix; ``(value, vector)``.

    Returns ``(0.0, None)`` when ``A`` annihilates the iterate (no variance left).
    """
    scale = max(float(np.abs(A).max()), 1e-300)
    v = start / np.linalg.norm(start)
    lam = 0.0
    for _ in range(max_iter):
        w = A @ v
        norm = np.linalg.norm(w)
        if norm <= 1e-13 * scale:
            return 0.0, None
        w /= norm
        lam = float(w @ A @ w)
        # stop on a small eigen-residual or a vanishing step
        if np.linalg.norm(A @ w - lam * w) <= tol * scale or np.linalg.norm(w - v) <= tol:
            return lam, w
        v = w
    return lam, v


def _orthonormal_fallback(taken: list[np.ndarray], d: int) -> np.ndarray:
    """Unit vector orthogonal to ``taken``, from the standard basis, for zero-variance directions."""
    for k in range(d):
        e = np.zeros(d)
        e[k] = 1.0
        for t in taken:
            e -= (e @ t) * t
        if np.linalg.norm(e) > 1e-6:
            return e / np.linalg.norm(e)
    raise DimensionMismatch("no orthogonal direction left")


def pca_fit(data, n_components: int = 2, tol: float = 1e-10) -> PcaModel:
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < n_components:
        raise DimensionMismatch(f"PCA needs >= 2 rows and >= {n_components} features, got {X.shape}")
    d = X.shape[1]
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / X.shape[0]
    # fixed, generic start vector
    start = 1.0 + np.arange(d) / d
    comps, variances = [], []
    A = cov.copy()
    for _ in range(n_components):
        lam, v = power_iteration(A, start, tol)
        if v is None or lam <= 0:
            lam, v = 0.0, _orthonormal_fallback(comps, d)
        else:
            for t in comps:  # re-orthogonalise against round-off
                v = v - (v @ t) * t
            v /= np.linalg.norm(v)
            lam = float(v @ cov @ v)
        v = _canonical_sign(v)
        comps.append(v)
        variances.append(max(lam, 0.0))
        A = A - lam * np.outer(v, v)
    return PcaModel(np.array(comps), mean, np.array(variances))


def pca_project(model: PcaModel, data) -> np.ndarray:
    X = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if X.shape[1] != model.mean.size:
        raise WidthMismatch(f"{X.shape[1]} features, model expects {model.mean.size}")
    return (X - model.mean) @ model.components.T
