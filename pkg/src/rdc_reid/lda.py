"""Linear discriminant analysis on similarity vectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np
import scipy.linalg

from .errors import DegenerateScatter, DimensionMismatch, EigenFailure, TooFewSamples

GAMMA_SCALE = 1e-6
EIG_RTOL = 1e-10
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class LdaModel:
    """Fitted discriminant map.

    Attributes
    ----------
    projection : ndarray, shape (m, k)
        Columns are the retained generalised eigenvectors, unit length,
        sorted by decreasing eigenvalue.
    projected_training : ndarray, shape (n, k)
        ``vectors @ projection`` for the training vectors.
    labels : tuple
        Training labels, aligned with ``projected_training``.
    scatter_regularizer : float
        The ridge ``gamma`` added to the within-class scatter.
    eigenvalues : ndarray, shape (k,)
    """

    projection: np.ndarray
    projected_training: np.ndarray
    labels: tuple
    scatter_regularizer: float
    eigenvalues: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.projection.shape[0]

    @property
    def k(self) -> int:
        return self.projection.shape[1]


def scatter_matrices(vectors, labels: Sequence[Hashable]) -> tuple[np.ndarray, np.ndarray]:
    """Within-class and between-class scatter ``(S_W, S_B)``."""
    x = np.asarray(vectors, dtype=np.float64)
    labels = list(labels)
    overall = x.mean(axis=0)
    dim = x.shape[1]
    sw = np.zeros((dim, dim))
    sb = np.zeros((dim, dim))
    for c in sorted(set(labels)):
        xc = x[[i for i, y in enumerate(labels) if y == c]]
        mu = xc.mean(axis=0)
        dev = xc - mu
        sw += dev.T @ dev
        diff = (mu - overall)[:, None]
        sb += len(xc) * (diff @ diff.T)
    return sw, sb


def regularizer(sw: np.ndarray) -> float:
    """``1e-6 * trace(S_W) / m``; falls back to ``1e-6`` when ``S_W`` is zero."""
    gamma = GAMMA_SCALE * float(np.trace(sw)) / sw.shape[0]
    return gamma if gamma > 0 else GAMMA_SCALE


def canonical_sign(w: np.ndarray) -> np.ndarray:
    """Flip each column so its first non-negligible entry is positive."""
    w = w.copy()
    for j in range(w.shape[1]):
        col = w[:, j]
        tol = 1e-12 * np.max(np.abs(col))
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size and col[idx[0]] < 0:
            w[:, j] = -col
    return w


def fit_lda(vectors, labels: Sequence[Hashable]) -> LdaModel:
    """Solve ``S_B w = lambda (S_W + gamma I) w`` and keep the informative directions.

    At most ``m - 1`` eigenvectors (``m`` classes) are retained, and only
    those with eigenvalue above ``1e-10`` times the largest.
    """
    x = np.asarray(vectors, dtype=np.float64)
    labels = tuple(labels)
    if x.ndim != 2 or x.shape[0] != len(labels):
        raise DimensionMismatch("vectors must be (n, m) with one label per row")
    classes = sorted(set(labels))
    n, dim = x.shape
    if len(classes) < 2:
        raise TooFewSamples("LDA needs at least two classes")
    if n <= len(classes):
        raise TooFewSamples(f"LDA needs more vectors ({n}) than classes ({len(classes)})")

    sw, sb = scatter_matrices(x, labels)
    total = np.linalg.norm(sw + sb)
    if total == 0 or np.linalg.norm(sb) <= DEGENERATE_RTOL * total:
        raise DegenerateScatter("between-class scatter is numerically zero")
    gamma = regularizer(sw)
    try:
        evals, evecs = scipy.linalg.eigh(sb, sw + gamma * np.eye(dim))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigenFailure(str(exc)) from None
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    if not evals[0] > 0:
        raise DegenerateScatter("no positive discriminant eigenvalue")
    keep = min(len(classes) - 1, int(np.count_nonzero(evals > EIG_RTOL * evals[0])))
    w = evecs[:, :keep]
    w = canonical_sign(w / np.linalg.norm(w, axis=0))
    return LdaModel(
        projection=w,
        # row by row, so project(model, x[i]) reproduces row i bit for bit
        projected_training=np.array([row @ w for row in x]),
        labels=labels,
        scatter_regularizer=gamma,
        eigenvalues=evals[:keep].copy(),
    )


def project(model: LdaModel, s) -> np.ndarray:
    """Map one vector ``(m,)`` or a stack ``(n, m)`` into discriminant space."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] != model.input_dim:
        raise DimensionMismatch(f"expected length {model.input_dim}, got {s.shape[-1]}")
    if s.ndim == 1:
        return s @ model.projection
    return np.array([row @ model.projection for row in s])


def trace_criterion(w: np.ndarray, sw: np.ndarray, sb: np.ndarray) -> float:
    """``trace((W^T S_W W)^-1 (W^T S_B W))`` for a ``(m, k)`` projection."""
    return float(np.trace(np.linalg.solve(w.T @ sw @ w, w.T @ sb @ w)))
