"""Distances and divergences between SPD matrices.

``airm`` is the affine-invariant Riemannian distance, ``bregman_logdet`` the
Bregman divergence generated by ``-log det``, ``js_symmetrized`` its
Jensen-Shannon symmetrisation, and ``stein`` the closed form of the latter.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite
from .spd import SpdMatrix, _eigh, log_det

METRICS = ("stein", "airm", "bregman", "js")


def _check_dims(a: SpdMatrix, b: SpdMatrix) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")


def _chol_log_det(m: np.ndarray) -> np.ndarray:
    """Log-determinants of one or a stack of SPD matrices."""
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("midpoint is not positive definite") from None
    return 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)


def airm(a: SpdMatrix, b: SpdMatrix) -> float:
    """``||log(B^-1/2 A B^-1/2)||_F``.

    The matrix logarithm is only needed through its eigenvalues, so the
    norm is the root sum of squared log-eigenvalues of the congruence.
    """
    _check_dims(a, b)
    w, u = _eigh(b.values)
    b_isqrt = (u * (1.0 / np.sqrt(w))) @ u.T
    m = b_isqrt @ a.values @ b_isqrt
    lam = np.linalg.eigvalsh(0.5 * (m + m.T))
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def bregman_logdet(a: SpdMatrix, b: SpdMatrix) -> float:
    """``tr(B^-1 A) - log det(B^-1 A) - d``. Not symmetric."""
    _check_dims(a, b)
    lb = b.cholesky
    # tr(B^-1 A) = ||L_B^-1 L_A||_F^2
    z = np.linalg.solve(lb, a.cholesky)
    tr = float(np.sum(z * z))
    val = tr - (log_det(a) - log_det(b)) - a.dim
    return max(val, 0.0)


def js_symmetrized(a: SpdMatrix, b: SpdMatrix) -> float:
    """Average Bregman divergence of ``a`` and ``b`` to their midpoint."""
    _check_dims(a, b)
    mid = SpdMatrix(0.5 * (a.values + b.values))
    return 0.5 * bregman_logdet(a, mid) + 0.5 * bregman_logdet(b, mid)


def stein(a: SpdMatrix, b: SpdMatrix) -> float:
    """``log det((A+B)/2) - (log det A + log det B) / 2``."""
    _check_dims(a, b)
    mid = 0.5 * (a.values + b.values)
    val = float(_chol_log_det(mid)) - 0.5 * (log_det(a) + log_det(b))
    return max(val, 0.0)


DIVERGENCES = {
    "stein": stein,
    "airm": airm,
    "bregman": bregman_logdet,
    "js": js_symmetrized,
}


def divergence(metric: str, a: SpdMatrix, b: SpdMatrix) -> float:
    try:
        fn = DIVERGENCES[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}") from None
    return fn(a, b)


# -- batch evaluation ------------------------------------------------------


def _stack(points: Sequence[SpdMatrix]) -> tuple[np.ndarray, np.ndarray]:
    dims = {p.dim for p in points}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed dimensions {sorted(dims)}")
    values = np.stack([p.values for p in points])
    logdets = np.array([log_det(p) for p in points])
    return values, logdets


def stein_to_many(a: SpdMatrix, points: Sequence[SpdMatrix]) -> np.ndarray:
    """``stein(a, p)`` for every ``p`` in ``points``, as one array."""
    if len(points) == 0:
        return np.zeros(0)
    values, logdets = _stack(points)
    if values.shape[-1] != a.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {values.shape[-1]}")
    mids = 0.5 * (a.values[None] + values)
    out = _chol_log_det(mids) - 0.5 * (log_det(a) + logdets)
    return np.maximum(out, 0.0)


def pairwise_stein(points: Sequence[SpdMatrix]) -> np.ndarray:
    """Symmetric ``(n, n)`` Stein divergence matrix with a zero diagonal.

    Each entry is computed from its own pair only, so the result does not
    depend on evaluation order.
    """
    n = len(points)
    out = np.zeros((n, n))
    if n < 2:
        return out
    values, logdets = _stack(points)
    iu, ju = np.triu_indices(n, k=1)
    mids = 0.5 * (values[iu] + values[ju])
    vals = _chol_log_det(mids) - 0.5 * (logdets[iu] + logdets[ju])
    vals = np.maximum(vals, 0.0)
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out
