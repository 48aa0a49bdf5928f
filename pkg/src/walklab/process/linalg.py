# src/walklab/process/linalg.py
"""Small dense Markov-chain helpers shared by drivers and oracles."""

from __future__ import annotations

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

ROW_SUM_TOL = 1e-12
RESIDUAL_TOL = 1e-9


def check_stochastic(P, tol: float = ROW_SUM_TOL) -> np.ndarray:
    p = np.asarray(P, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError("Transition matrix must be a square 2D array")
    if p.shape[0] < 1:
        raise ValueError("Transition matrix must have at least one state")
    if not np.all(np.isfinite(p)):
        raise ValueError("Transition matrix must contain finite values")
    if np.any(p < 0.0):
        raise ValueError("Transition probabilities must be non-negative")
    if not np.allclose(p.sum(axis=1), 1.0, rtol=0.0, atol=tol):
        raise ValueError("Each transition-matrix row must sum to 1")
    return p


def is_irreducible(P) -> bool:
    p = np.asarray(P, dtype=float)
    n_comp, _ = connected_components(csr_matrix(p > 0.0), directed=True, connection="strong")
    return n_comp == 1


def stationary_distribution(P) -> np.ndarray:
    """
    Stationary law of an irreducible chain, certified by its residual.

    Solves pi (P - I) = 0 with the normalization sum(pi) = 1 replacing one equation.
    """
    p = check_stochastic(P, tol=1e-10)
    n = p.shape[0]
    if n == 1:
        return np.ones(1)
    if not is_irreducible(p):
        raise ValueError("Transition matrix is reducible; no unique stationary law")

    a = p.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = linalg.solve(a, b)

    residual = np.max(np.abs(pi @ p - pi))
    if residual > RESIDUAL_TOL or np.any(pi < -RESIDUAL_TOL):
        raise ValueError(f"Stationary solve not certified (residual {residual:.3e})")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def time_reversal(P, pi) -> np.ndarray:
    """Reversed kernel P_hat[i, j] = pi[j] P[j, i] / pi[i]."""
    p = np.asarray(P, dtype=float)
    pi = np.asarray(pi, dtype=float)
    rev = (p.T * pi[None, :]) / pi[:, None]
    return rev / rev.sum(axis=1, keepdims=True)
