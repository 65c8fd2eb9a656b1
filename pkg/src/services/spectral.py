"""
Spectral side of the Bose-Mesner algebra: eigenvalues, primitive
idempotents, eigenmatrices, Krein parameters and Q-polynomial orderings.
"""

import logging
from typing import Dict, List, Optional

import numpy as np
from scipy import linalg

from src.models.algebra import Finding
from src.models.errors import EigCountMismatch, SingularP
from src.models.graph import DRGraph
from src.models.spectral import QPolyOrdering, SelfDualCheck, SpectralData
from src.utils.config import settings
from src.utils.numeric import cluster_values, relative_residual

logger = logging.getLogger(__name__)


def eigendecompose(g: DRGraph, cluster_tol: Optional[float] = None) -> SpectralData:
    """Cluster the spectrum of A and build E_i as Lagrange polynomials in A.

    Base ordering: θ_0 = k, the remaining eigenvalues decreasing.
    """
    cluster_tol = settings.cluster_tol if cluster_tol is None else cluster_tol
    A = g.adjacency.astype(float)
    evals = linalg.eigvalsh(A)
    radius = max(float(np.abs(evals).max()), 1.0)
    clusters = cluster_values(evals, cluster_tol * radius)
    if len(clusters) != g.D + 1:
        raise EigCountMismatch(
            f"[{g.label}] found {len(clusters)} distinct eigenvalues, expected D+1 = {g.D + 1}",
            {"found": len(clusters), "expected": g.D + 1,
             "eigenvalues": [float(np.mean(c)) for c in clusters]},
        )

    clusters = sorted(clusters, key=lambda c: -np.mean(c))
    theta = np.array([float(np.mean(c)) for c in clusters])
    kstar = np.array([len(c) for c in clusters], dtype=np.int64)

    identity = np.eye(g.n)
    E = np.empty((g.D + 1, g.n, g.n))
    for i, th in enumerate(theta):
        Ei = identity.copy()
        for j, other in enumerate(theta):
            if j != i:
                Ei = Ei @ (A - other * identity) / (th - other)
        E[i] = Ei

    logger.info(f"[{g.label}] eigenvalues {np.round(theta, 6).tolist()} "
                f"with multiplicities {kstar.tolist()}")
    return SpectralData(theta=theta, E=E, kstar=kstar, n=g.n,
                        ordering=tuple(range(g.D + 1)))


def krein_and_eigenmatrices(g: DRGraph, s: SpectralData) -> SpectralData:
    """Fill P, Q and the Krein tensor q[h, i, j]."""
    A = g.distance_matrices()
    D = s.D
    traces = np.array([np.trace(s.E[i]) for i in range(D + 1)])

    P = np.empty((D + 1, D + 1))
    for i in range(D + 1):
        for j in range(D + 1):
            P[i, j] = np.sum(A[j] * s.E[i]) / traces[i]

    if np.linalg.cond(P) > 1.0 / settings.rank_tol:
        raise SingularP(f"[{g.label}] first eigenmatrix is numerically singular",
                        {"condition": float(np.linalg.cond(P))})
    Q = g.n * linalg.inv(P)

    krein = np.empty((D + 1, D + 1, D + 1))
    for i in range(D + 1):
        for j in range(i, D + 1):
            hadamard = s.E[i] * s.E[j]
            for h in range(D + 1):
                value = g.n * np.sum(s.E[h] * hadamard) / traces[h]
                krein[h, i, j] = krein[h, j, i] = value

    s.P, s.Q, s.krein = P, Q, krein
    return s


def _krein_nonzero(s: SpectralData, zero_tol: float):
    scale = max(1.0, float(np.abs(s.krein).max()))
    return np.abs(s.krein) > zero_tol * scale


def _has_qpoly_pattern(nonzero: np.ndarray) -> bool:
    size = nonzero.shape[0]
    for h in range(size):
        for i in range(size):
            for j in range(size):
                largest = max(h, i, j)
                rest = h + i + j - largest
                if largest > rest and nonzero[h, i, j]:
                    return False
                if largest == rest and not nonzero[h, i, j]:
                    return False
    return True


def find_qpoly_orderings(s: SpectralData, zero_tol: Optional[float] = None,
                         self_dual_tol: Optional[float] = None) -> List[QPolyOrdering]:
    """All orderings fixing E_0 under which the Krein tensor is Q-polynomial.

    Depth-first over partial orderings; a candidate E at position m must have
    q^m_{1,m-1} != 0 and q^m_{1,l} = 0 for l < m-1. Results come out in
    lexicographic order of the permutation.
    """
    zero_tol = settings.krein_zero_tol if zero_tol is None else zero_tol
    nonzero = _krein_nonzero(s, zero_tol)
    D = s.D
    found: List[tuple] = []

    def extend(perm: List[int]) -> None:
        m = len(perm)
        if m == D + 1:
            idx = np.array(perm)
            if _has_qpoly_pattern(nonzero[np.ix_(idx, idx, idx)]):
                found.append(tuple(perm))
            return
        for cand in range(1, D + 1):
            if cand in perm:
                continue
            if m >= 2:
                first, prev = perm[1], perm[m - 1]
                if not nonzero[cand, first, prev]:
                    continue
                if any(nonzero[cand, first, perm[l]] for l in range(m - 1)):
                    continue
            extend(perm + [cand])

    extend([0])

    orderings = []
    for perm in found:
        check = check_self_dual(s, QPolyOrdering(perm=perm), tol=self_dual_tol)
        orderings.append(QPolyOrdering(perm=perm, is_qpoly=True,
                                       is_formally_self_dual=check.is_self_dual,
                                       self_dual_residual=check.residual))
    if not orderings:
        logger.info("No Q-polynomial ordering found")
    return orderings


def check_self_dual(s: SpectralData, o: QPolyOrdering,
                    tol: Optional[float] = None) -> SelfDualCheck:
    """max|P - Q| and max|θ_i - θ*_i| after reordering `s` by o.perm."""
    tol = settings.tolerance if tol is None else tol
    r = s.reorder(o.perm)
    residual = float(np.abs(r.P - r.Q).max())
    theta_residual = float(np.abs(r.theta - r.theta_star).max())
    scale = max(1.0, float(np.abs(r.P).max()))
    return SelfDualCheck(is_self_dual=residual <= tol * scale,
                         residual=residual, theta_residual=theta_residual)


def spectral_checks(g: DRGraph, s: SpectralData) -> Dict[str, Finding]:
    """Residuals of the idempotent, eigenmatrix and Krein identities."""
    A = g.distance_matrices()
    D = s.D
    n = g.n
    E = s.E
    identity = np.eye(n)
    findings: Dict[str, Finding] = {}

    def add(name: str, residual: float) -> None:
        findings[name] = Finding(name, float(residual))

    worst = 0.0
    for i in range(D + 1):
        for j in range(D + 1):
            target = E[i] if i == j else np.zeros_like(E[i])
            worst = max(worst, relative_residual(E[i] @ E[j], target))
    add("spectral.idempotent", worst)
    add("spectral.idempotent_sum", relative_residual(E.sum(axis=0), identity))
    add("spectral.E0", relative_residual(E[0], np.ones((n, n)) / n))

    # Eigenprojectors from an orthonormal eigenbasis, clustered by the same thetas.
    evals, vecs = linalg.eigh(g.adjacency.astype(float))
    worst = 0.0
    for i, th in enumerate(s.theta):
        cols = vecs[:, np.argsort(np.abs(evals - th))[: int(s.kstar[i])]]
        worst = max(worst, relative_residual(E[i], cols @ cols.T))
    add("spectral.eigenprojector_agreement", worst)

    add("spectral.pq", relative_residual(s.P @ s.Q, n * np.eye(D + 1)))
    worst = 0.0
    for j in range(D + 1):
        worst = max(worst, relative_residual(A[j], np.einsum("i,ixy->xy", s.P[:, j], E)))
        worst = max(worst, relative_residual(
            E[j], sum(s.Q[i, j] * A[i] for i in range(D + 1)) / n))
    add("spectral.eigenmatrix_expansion", worst)

    worst = 0.0
    for i in range(D + 1):
        for j in range(D + 1):
            rhs = np.einsum("h,hxy->xy", s.krein[:, i, j], E) / n
            worst = max(worst, relative_residual(E[i] * E[j], rhs))
    add("spectral.krein_expansion", worst)
    add("spectral.krein_nonnegative", max(0.0, -float(s.krein.min())))

    diag = np.array([s.krein[0, i, i] for i in range(D + 1)])
    add("spectral.kstar_rank", float(np.abs(diag - s.kstar).max()))
    add("spectral.kstar_sum", float(abs(s.kstar.sum() - n)))
    return findings


def dual_array_check(s: SpectralData) -> Finding:
    """k* = c*_i + a*_i + b*_i under the current (Q-polynomial) ordering."""
    dual = s.dual_intersection_numbers()
    kstar = dual["b"][0]
    worst = max(abs(dual["c"][i] + dual["a"][i] + dual["b"][i] - kstar)
                for i in range(s.D + 1))
    return Finding("spectral.dual_array", float(worst) / (1.0 + abs(kstar)))
