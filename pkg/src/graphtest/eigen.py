"""Largest-magnitude eigenvalues of a symmetric operator by Lanczos with explicit deflation.

Each Lanczos run works on the operator restricted to the orthogonal
complement of the already locked eigenvectors. A run stops once both of its
extreme Ritz pairs (the top of ``A`` and the top of ``-A``) have residual
below ``tol * scale``; both pairs are then locked. Because every unlocked
eigenvalue lies between the two extremes of the latest run, the search ends
as soon as ``k`` locked values dominate that interval.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, DomainError

_EPS = np.finfo(np.float64).eps


def _extreme_ritz(alphas, betas):
    m = alphas.size
    if m == 1:
        return np.array([alphas[0]]), np.ones((1, 1))
    lo = eigh_tridiagonal(alphas, betas, select="i", select_range=(0, 0))
    hi = eigh_tridiagonal(alphas, betas, select="i", select_range=(m - 1, m - 1))
    return np.array([lo[0][0], hi[0][0]]), np.column_stack([lo[1][:, 0], hi[1][:, 0]])


def _orthogonalize(w, basis):
    if basis.shape[0]:
        w -= basis.T @ (basis @ w)
        w -= basis.T @ (basis @ w)
    return w


def _lanczos_extremes(A, n, locked, rng, tol, scale_hint, budget, check_every=5):
    free_dim = n - locked.shape[0]
    q = _orthogonalize(rng.standard_normal(n), locked)
    norm = np.linalg.norm(q)
    if norm == 0.0:
        return None, 0
    max_steps = min(free_dim, budget)
    Q = np.empty((max_steps + 1, n))
    Q[0] = q / norm
    alphas = np.empty(max_steps)
    betas = np.empty(max_steps)
    residual = np.inf
    norm_est = scale_hint
    for j in range(max_steps):
        w = A @ Q[j]
        alpha = float(Q[j] @ w)
        alphas[j] = alpha
        w = w - alpha * Q[j]
        if j:
            w -= betas[j - 1] * Q[j - 1]
        w = _orthogonalize(w, Q[: j + 1])
        w = _orthogonalize(w, locked)
        beta = float(np.linalg.norm(w))
        betas[j] = beta
        norm_est = max(norm_est, abs(alpha) + beta + (betas[j - 1] if j else 0.0))
        steps = j + 1
        exhausted = steps == free_dim
        breakdown = beta <= 10 * n * _EPS * norm_est
        if steps % check_every == 0 or exhausted or steps == max_steps or breakdown:
            theta, S = _extreme_ritz(alphas[:steps], betas[: steps - 1])
            scale = max(scale_hint, float(np.abs(theta).max()), 1.0e-300)
            res = beta * np.abs(S[-1])
            residual = float(res.max())
            if exhausted or breakdown or residual <= tol * scale:
                vecs = (Q[:steps].T @ S).T
                return (theta, vecs), steps
        Q[j + 1] = w / beta
    raise ConvergenceError(f"Lanczos did not converge within {budget} matrix-vector products", residual)


def top_k_abs_eigenvalues(A, k: int, tol: float = 1e-8, seed: int = 0, max_matvec: int | None = None) -> np.ndarray:
    """Return the ``k`` eigenvalues of symmetric ``A`` with largest ``|lambda|``.

    ``A`` may be a dense array, a scipy sparse matrix, or anything supporting
    ``A @ v`` and ``A.shape``. Values are signed and ordered by nonincreasing
    magnitude. ``max_matvec`` defaults to ``10 * n`` per requested eigenpair.
    """
    n = A.shape[0]
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    budget = max_matvec if max_matvec is not None else 10 * n * k
    rng = np.random.default_rng(seed)
    locked_vecs = np.empty((0, n))
    locked_vals: list[float] = []
    used = 0
    while len(locked_vals) < n:
        scale_hint = max((abs(v) for v in locked_vals), default=0.0)
        out, steps = _lanczos_extremes(A, n, locked_vecs, rng, tol, scale_hint, budget - used)
        used += steps
        if out is None:
            break
        theta, vecs = out
        keep = [0] if theta.size == 1 else [0, 1]
        for idx in keep:
            v = _orthogonalize(vecs[idx].copy(), locked_vecs)
            nv = np.linalg.norm(v)
            if nv < 1e-8:
                continue
            locked_vecs = np.vstack([locked_vecs, v / nv])
            locked_vals.append(float(theta[idx]))
        bound = float(np.abs(theta).max())
        dominant = sum(1 for v in locked_vals if abs(v) >= bound)
        if dominant >= k or len(locked_vals) >= n:
            break
        if used >= budget:
            raise ConvergenceError(f"eigen-deflation exceeded {budget} matrix-vector products", np.inf)
    order = np.argsort(-np.abs(np.asarray(locked_vals)), kind="stable")
    vals = np.asarray(locked_vals)[order]
    if vals.size < k:
        raise ConvergenceError(f"found only {vals.size} of {k} eigenvalues", np.inf)
    return vals[:k]
