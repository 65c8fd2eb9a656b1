"""
Central element Z of the subconstituent algebra, the normalised matrices
𝖠, 𝖡, 𝖢 and the Z_3-symmetric Askey-Wilson relations they satisfy.
"""

import logging
from typing import Dict, List, Optional

import numpy as np

from src.models.algebra import ABCTriple, CentralElement, DualStructure, Finding, ZEigenMatch
from src.models.errors import AssumptionFails
from src.models.graph import DRGraph
from src.models.qracah import QRacahParams, vartheta_values
from src.models.spectral import SpectralData
from src.utils.config import settings
from src.utils.numeric import combination_residual, norm, relative_residual

logger = logging.getLogger(__name__)


def normalized_pair(g: DRGraph, d: DualStructure, p: QRacahParams):
    """𝖠 = (A - εI)/α and 𝖡 = (A* - εI)/α."""
    identity = np.eye(g.n)
    Amat = (g.adjacency.astype(complex) - p.epsilon * identity) / p.alpha
    Bmat = (d.AstarMat.astype(complex) - p.epsilon * identity) / p.alpha
    return Amat, Bmat


def build_Z(g: DRGraph, s: SpectralData, d: DualStructure, p: QRacahParams,
            tol: Optional[float] = None) -> CentralElement:
    """Both projected sums defining Z; their average once they agree."""
    tol = settings.tolerance if tol is None else tol
    r = d.spectral
    E, Estar = r.E, d.Estar
    w = p.weights()
    Amat, Bmat = normalized_pair(g, d, p)

    dual_side = sum(w[i] * (Estar[i] @ Amat @ Estar[i]) for i in range(g.D + 1))
    primal_side = sum(w[i] * (E[i] @ Bmat @ E[i]) for i in range(g.D + 1))
    residual = relative_residual(dual_side, primal_side)
    if residual > tol:
        dominant = "E*-side" if norm(dual_side) >= norm(primal_side) else "E-side"
        raise AssumptionFails(
            f"[{g.label}] central element sides disagree at x={d.x} (residual {residual:.3e})",
            residual=residual, dominant=dominant,
            details={"x": d.x, "E*-side_norm": norm(dual_side), "E-side_norm": norm(primal_side)},
        )

    Z = (dual_side + primal_side) / 2
    scale = max(1.0, norm(Z))
    spanning = [g.adjacency.astype(float), d.AstarMat] + list(E) + list(Estar)
    centrality = max(norm(Z @ S - S @ Z) / (max(norm(S), 1e-300) * scale) for S in spanning)

    z_on_E = [relative_residual(Z @ E[i], w[i] * (E[i] @ Bmat @ E[i])) for i in range(g.D + 1)]
    z_on_Estar = [relative_residual(Z @ Estar[i], w[i] * (Estar[i] @ Amat @ Estar[i]))
                  for i in range(g.D + 1)]
    logger.info(f"[{g.label}] Z gate passed at x={d.x}: residual {residual:.3e}, |Z| = {norm(Z):.3e}")
    return CentralElement(Z=Z, lhs_rhs_residual=residual, centrality_residual=centrality,
                          zOnE=z_on_E, zOnEstar=z_on_Estar)


def build_abc(d: DualStructure, s: SpectralData, p: QRacahParams,
              z: CentralElement) -> ABCTriple:
    """𝖠, 𝖡 from the affine rescaling, checked against their idempotent expansions, and 𝖢."""
    r = d.spectral
    n = r.n
    q = complex(p.q)
    identity = np.eye(n)
    vt = vartheta_values(p.a, p.q, p.D, range(p.D + 1))

    adjacency = np.einsum("i,ixy->xy", r.theta, r.E)
    Amat = (adjacency - p.epsilon * identity) / p.alpha
    Bmat = (d.AstarMat - p.epsilon * identity) / p.alpha
    Cmat = z.Z - (q * Amat @ Bmat - Bmat @ Amat / q) / (q ** 2 - q ** -2)

    residuals = {
        "abc.A_expansion": relative_residual(Amat, np.einsum("i,ixy->xy", vt, r.E)),
        "abc.B_expansion": relative_residual(Bmat, np.einsum("i,ixy->xy", vt, d.Estar)),
    }
    return ABCTriple(Amat=Amat, Bmat=Bmat, Cmat=Cmat, residuals=residuals)


def verify_askey_wilson(t: ABCTriple, Z: np.ndarray, p: QRacahParams) -> Dict[str, Finding]:
    """The three cyclic relations and the two Askey-Wilson relations in 𝖠, 𝖡, Z."""
    q = complex(p.q)
    qq = q ** 2 - q ** -2
    A, B, C = t.Amat, t.Bmat, t.Cmat
    findings: Dict[str, Finding] = {}

    def add(name: str, *terms) -> None:
        findings[name] = Finding(name, combination_residual(terms))

    add("aw.cyclic.A", A, q * B @ C / qq, -(C @ B) / (q * qq), -Z)
    add("aw.cyclic.B", B, q * C @ A / qq, -(A @ C) / (q * qq), -Z)
    add("aw.cyclic.C", C, q * A @ B / qq, -(B @ A) / (q * qq), -Z)
    for name, X, Y in (("aw.relation.A", A, B), ("aw.relation.B", B, A)):
        add(name, X @ X @ Y, -p.beta * (X @ Y @ X), Y @ X @ X, qq ** 2 * Y,
            -(qq ** 2) * Z, (q - 1 / q) * qq * (Z @ X))
    return findings


def z_eigenvalue_formula(p: QRacahParams, r: int, d: int) -> complex:
    """Eigenvalue of Z predicted for an irreducible module with endpoint r and diameter d."""
    a, q, D = complex(p.a), complex(p.q), p.D
    shift = a * q ** (2 * r + d - D) + q ** (D - d - 2 * r) / a
    return (shift * (q ** (d + 1) + q ** (-d - 1)) + shift ** 2) / (q + 1 / q)


def _cluster_complex(values: np.ndarray, tol: float) -> List[List[complex]]:
    clusters: List[List[complex]] = []
    for v in sorted(values, key=lambda c: (round(c.real, 6), round(c.imag, 6))):
        for cluster in clusters:
            if abs(cluster[0] - v) <= tol * max(1.0, abs(cluster[0])):
                cluster.append(v)
                break
        else:
            clusters.append([v])
    return clusters


def z_spectrum_check(Z: np.ndarray, p: QRacahParams,
                     tol: Optional[float] = None) -> List[ZEigenMatch]:
    """Each distinct eigenvalue of Z with the (r, d) pairs whose predicted value it matches.

    Search range: r, d >= 0, r + d <= D, 2r + d >= D.
    """
    tol = settings.match_tol if tol is None else tol
    D = p.D
    candidates = [(r, d) for r in range(D + 1) for d in range(D + 1 - r) if 2 * r + d >= D]
    predicted = {rd: z_eigenvalue_formula(p, *rd) for rd in candidates}

    results = []
    for cluster in _cluster_complex(np.linalg.eigvals(Z), tol):
        zeta = complex(np.mean(cluster))
        scale = max(1.0, abs(zeta))
        matches = [rd for rd, value in predicted.items() if abs(value - zeta) <= tol * scale]
        results.append(ZEigenMatch(eigenvalue=zeta, multiplicity=len(cluster), matches=matches))
        if not matches:
            logger.warning(f"Z eigenvalue {zeta:.6g} (multiplicity {len(cluster)}) matches no (r, d)")
    return results
