"""
Residual and rank helpers shared by the verification services.
"""

from typing import Iterable, List, Sequence

import numpy as np
from scipy import linalg


def norm(x) -> float:
    """Frobenius norm for matrices, modulus for scalars."""
    return float(np.linalg.norm(np.asarray(x)))


def relative_residual(lhs, rhs) -> float:
    """|L - R| / (1 + |L| + |R|) for scalars or matrices (Frobenius)."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    return norm(lhs - rhs) / (1.0 + norm(lhs) + norm(rhs))


def combination_residual(terms: Iterable) -> float:
    """Residual of a linear combination that should vanish.

    Normalised by the sizes of the individual terms so cancellation
    between large terms is measured on the right scale.
    """
    terms = [np.asarray(t) for t in terms]
    total = sum(terms[1:], terms[0])
    scale = 1.0 + sum(norm(t) for t in terms)
    return norm(total) / scale


def elementwise_max_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Max over entries of |l - r| / (1 + |l| + |r|)."""
    diff = np.abs(lhs - rhs) / (1.0 + np.abs(lhs) + np.abs(rhs))
    return float(diff.max()) if diff.size else 0.0


def numerical_rank(rows: Sequence[np.ndarray], rel_tol: float) -> int:
    """Rank of the vectorised matrices, threshold rel_tol * sigma_max."""
    if len(rows) == 0:
        return 0
    stacked = np.array([np.asarray(r).ravel() for r in rows])
    sigma = linalg.svdvals(stacked)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > rel_tol * sigma[0]))


def cluster_values(values: Sequence[float], gap: float) -> List[List[float]]:
    """Group sorted values into clusters whose consecutive gap is below `gap`."""
    ordered = sorted(values)
    clusters: List[List[float]] = []
    for v in ordered:
        if clusters and v - clusters[-1][-1] < gap:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return clusters


def distance_to_integer(value: complex) -> float:
    """Distance of a complex value from the nearest integer."""
    value = complex(value)
    return float(abs(value.real - round(value.real)) + abs(value.imag))
