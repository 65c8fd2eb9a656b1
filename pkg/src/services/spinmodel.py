"""
Boltzmann pair (W, W*) built from a q-Racah parameter record, and the spin
model checks on W: type II, star-triangle, braid relation, Nomura algebra.
"""

import logging
from typing import Dict, Optional, Sequence

import numpy as np

from src.models.algebra import ABCTriple, BoltzmannPair, DualStructure, Finding
from src.models.errors import EntryZero, ZeroSum
from src.models.graph import DRGraph
from src.models.qracah import QRacahParams
from src.models.report import SpinVerdict
from src.models.spectral import SpectralData
from src.utils.config import settings
from src.utils.numeric import elementwise_max_residual, norm, relative_residual

logger = logging.getLogger(__name__)

F_MODES = ("theorem", "explicit")


def boltzmann_pair(s: SpectralData, d: DualStructure, p: QRacahParams,
                   f_mode: str = "theorem", f: Optional[complex] = None,
                   tau: Optional[Sequence[complex]] = None,
                   tol: Optional[float] = None) -> BoltzmannPair:
    """W = f Σ τ_i E_i and W* = f Σ τ_i E*_i at the base vertex of `d`.

    In theorem mode f is the principal square root of n^{1/2} Σ τ_i^{-1} k_i;
    in explicit mode `f` is used as given (default 1).
    """
    if f_mode not in F_MODES:
        raise ValueError(f"unknown f_mode {f_mode!r}, expected one of {F_MODES}")
    tol = settings.tolerance if tol is None else tol
    tau = np.asarray(p.tau if tau is None else tau, dtype=complex)
    E, Estar = d.spectral.E, d.Estar
    n = E.shape[1]
    k = np.real(np.trace(Estar, axis1=1, axis2=2))

    terms = k / tau
    total = terms.sum()
    if abs(total) <= tol * (1.0 + float(np.abs(terms).sum())):
        raise ZeroSum("sum of tau_i^{-1} k_i vanishes",
                      {"sum": [total.real, total.imag], "tau": [[t.real, t.imag] for t in tau]})

    if f_mode == "theorem":
        f = complex(np.sqrt(np.sqrt(n) * total))
    else:
        f = complex(1.0 if f is None else f)
    if f == 0:
        raise ValueError("f must be nonzero")

    W = f * np.einsum("i,ixy->xy", tau, E)
    Wstar = f * np.einsum("i,ixy->xy", tau, Estar)
    W_inv = np.einsum("i,ixy->xy", 1 / tau, E) / f
    Wstar_inv = np.einsum("i,ixy->xy", 1 / tau, Estar) / f
    return BoltzmannPair(W=W, Wstar=Wstar, W_inv=W_inv, Wstar_inv=Wstar_inv, f=f,
                         tau=tau, params=p, dual=d, f_mode=f_mode)


def scaled_constant(bp: BoltzmannPair) -> complex:
    """f² / Σ τ_i^{-1} k_i, the right-hand constant of the star-triangle identity for any f."""
    return complex(bp.f ** 2 / bp.tau_inv_sum)


def verify_intertwiners(bp: BoltzmannPair, t: ABCTriple) -> Dict[str, Finding]:
    p = bp.params
    findings: Dict[str, Finding] = {}

    def add(name: str, residual: float) -> None:
        findings[name] = Finding(name, float(residual))

    add("spin.intertwiner.W", relative_residual(bp.W_inv @ t.Bmat @ bp.W, t.Cmat))
    add("spin.intertwiner.Wstar", relative_residual(bp.Wstar @ t.Amat @ bp.Wstar_inv, t.Cmat))
    add("spin.commute", max(relative_residual(bp.W @ t.Amat, t.Amat @ bp.W),
                            relative_residual(bp.Wstar @ t.Bmat, t.Bmat @ bp.Wstar)))

    # coefficients of W read back from the matrix, not from τ
    E = bp.dual.spectral.E
    coeffs = np.array([np.trace(bp.W @ E[i]) / np.trace(E[i]) for i in range(p.D + 1)])
    a, q, D = complex(p.a), complex(p.q), p.D
    worst = 0.0
    for i in range(1, D + 1):
        worst = max(worst, relative_residual(coeffs[i] / coeffs[i - 1], -q ** (D - 2 * i + 1) / a))
    add("spin.intertwiner.ratio", worst)
    return findings


def verify_braid_and_rho(bp: BoltzmannPair, t: ABCTriple,
                         s: Optional[SpectralData] = None,
                         d: Optional[DualStructure] = None) -> Dict[str, Finding]:
    """Braid relation and the action of ρ(S) = (W*W)^{-1} S (W*W)."""
    d = bp.dual if d is None else d
    E, Estar = d.spectral.E, d.Estar
    W, Ws, Wi, Wsi = bp.W, bp.Wstar, bp.W_inv, bp.Wstar_inv
    findings: Dict[str, Finding] = {}

    def add(name: str, residual: float) -> None:
        findings[name] = Finding(name, float(residual))

    add("spin.braid", relative_residual(W @ Ws @ W, Ws @ W @ Ws))

    R, R_inv = Ws @ W, Wi @ Wsi

    def rho(S):
        return R_inv @ S @ R

    add("spin.rho.A", relative_residual(rho(t.Amat), t.Bmat))
    add("spin.rho.B", relative_residual(rho(t.Bmat), t.Cmat))
    add("spin.rho.C", relative_residual(rho(t.Cmat), t.Amat))
    add("spin.rho.E", max(relative_residual(rho(E[i]), Estar[i]) for i in range(len(E))))
    add("spin.rho.W", relative_residual(rho(W), Ws))

    worst = 0.0
    for i in range(len(E)):
        worst = max(worst,
                    relative_residual(W @ Estar[i] @ Wi, Wsi @ E[i] @ Ws),
                    relative_residual(Wi @ Estar[i] @ W, Ws @ E[i] @ Wsi))
    add("spin.conjugation", worst)
    return findings


def hadamard_inverse(W: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """W^{(-)} with entries 1 / W_{b,a}."""
    smallest = float(np.abs(W).min())
    if smallest <= tol * max(1.0, float(np.abs(W).max())):
        position = np.unravel_index(int(np.abs(W).argmin()), W.shape)
        raise EntryZero("matrix has a vanishing entry",
                        {"entry": [int(position[0]), int(position[1])], "modulus": smallest})
    return 1.0 / W.T


def type2_residual(W: np.ndarray) -> float:
    """W W^{(-)} against n I."""
    n = W.shape[0]
    return relative_residual(W @ hadamard_inverse(W), n * np.eye(n))


def verify_type2_and_expansions(bp: BoltzmannPair, g: DRGraph) -> Dict[str, Finding]:
    """Type II criteria and the expansions of W^{±1}, (W*)^{±1} in the distance bases."""
    n, D = g.n, g.D
    A = g.distance_matrices()
    Astar = bp.dual.Astar
    tau, f = bp.tau, bp.f
    k = np.asarray(g.k, dtype=float)
    sum_tau = complex(np.sum(tau * k))
    sum_tau_inv = complex(np.sum(k / tau))
    findings: Dict[str, Finding] = {}

    def add(name: str, residual: float) -> None:
        findings[name] = Finding(name, float(residual))

    add("spin.inverse", relative_residual(bp.W @ bp.W_inv, np.eye(n)))
    try:
        add("spin.type2", type2_residual(bp.W))
    except EntryZero as e:
        findings["spin.type2"] = Finding("spin.type2", float("inf"), reason=e.message)
        logger.warning(f"W has a vanishing entry: {e.details}")
    add("spin.hadamard", relative_residual(bp.W.T * bp.W_inv, np.ones((n, n)) / n))
    add("spin.xprod", relative_residual(n, sum_tau * sum_tau_inv))

    def combo(coeffs, basis):
        return sum(c * B for c, B in zip(coeffs, basis))

    add("spin.expansion.W", relative_residual(bp.W, f * combo(1 / tau, A) / sum_tau_inv))
    add("spin.expansion.W_inv", relative_residual(bp.W_inv, combo(tau, A) / (f * sum_tau)))
    add("spin.expansion.Wstar", relative_residual(bp.Wstar, f * combo(1 / tau, Astar) / sum_tau_inv))
    add("spin.expansion.Wstar_inv",
        relative_residual(bp.Wstar_inv, combo(tau, Astar) / (f * sum_tau)))

    x = bp.dual.x
    layer = g.dist[x]
    row = bp.W[x, :]
    diag = np.diag(bp.Wstar)
    add("spin.entries.W", elementwise_max_residual(row, f / tau[layer] / sum_tau_inv))
    add("spin.entries.Wstar", elementwise_max_residual(diag, f * tau[layer]))
    add("spin.entries.product", elementwise_max_residual(row * diag,
                                                         np.full(n, f ** 2 / sum_tau_inv)))
    return findings


def verify_type3_bruteforce(W: np.ndarray, scale: Optional[complex] = None) -> float:
    """Max relative residual of the star-triangle equation over all (a, b, c).

    Σ_e W_{e,b} W_{e,c} / W_{e,a} = scale · W_{b,c} / (W_{a,b} W_{c,a}) with
    scale = n^{1/2} unless given. Cost O(n^4).
    """
    W = np.asarray(W, dtype=complex)
    n = W.shape[0]
    scale = np.sqrt(n) if scale is None else scale
    hadamard_inverse(W)
    lhs = np.einsum("eb,ec,ea->abc", W, W, 1.0 / W)
    rhs = scale * W[None, :, :] / (W[:, :, None] * W.T[:, None, :])
    return elementwise_max_residual(lhs, rhs)


def verify_scaled_star_triangle(bp: BoltzmannPair) -> float:
    """Star-triangle identity with constant f² / Σ τ_i^{-1} k_i; holds for every f."""
    return verify_type3_bruteforce(bp.W, scale=scaled_constant(bp))


def spin_verdict(W: np.ndarray, tol: Optional[float] = None,
                 bruteforce: bool = True) -> SpinVerdict:
    """Symmetry, type II and (optionally) star-triangle residuals of W."""
    tol = settings.tolerance if tol is None else tol
    residuals = {"symmetry": relative_residual(W, W.T)}
    try:
        residuals["typeII"] = type2_residual(W)
        if bruteforce:
            residuals["typeIII_max"] = verify_type3_bruteforce(W)
    except EntryZero:
        residuals["typeII"] = float("inf")
    passed = all(r < tol for r in residuals.values())
    return SpinVerdict(residuals=residuals, is_spin_model=passed)


def verify_wminus(W: np.ndarray, tol: Optional[float] = None,
                  bruteforce: bool = True) -> SpinVerdict:
    """Spin model checks on W^{(-)}."""
    return spin_verdict(hadamard_inverse(W), tol=tol, bruteforce=bruteforce)


def ratio_vectors(W: np.ndarray, c: int) -> np.ndarray:
    """Columns u^(b,c)_y = W_{y,b} / W_{y,c} for every b, at fixed c."""
    W = np.asarray(W, dtype=complex)
    return W / W[:, c][:, None]


def nomura_membership(W: np.ndarray, g: DRGraph) -> Dict[int, float]:
    """Per distance matrix A_i, the worst eigenvector residual over ratio vectors.

    For every ordered pair (b, c) the vector u_y = W_{y,b} / W_{y,c} must be an
    eigenvector of A_i; the residual is ‖A_i u - λu‖ / ‖u‖ with λ the
    Rayleigh quotient. One column c is held in memory at a time.
    """
    W = np.asarray(W, dtype=complex)
    A = [Ai.astype(float) for Ai in g.distance_matrices()]
    residuals: Dict[int, float] = {i: 0.0 for i in range(len(A))}
    for c in range(W.shape[0]):
        U = ratio_vectors(W, c)
        sizes = np.sqrt(np.sum(np.abs(U) ** 2, axis=0))
        for i, Ai in enumerate(A):
            AU = Ai @ U
            lam = np.sum(np.conj(U) * AU, axis=0) / sizes ** 2
            defect = np.sqrt(np.sum(np.abs(AU - lam[None, :] * U) ** 2, axis=0))
            worst = float(np.max(defect / sizes))
            residuals[i] = max(residuals[i], worst if np.isfinite(worst) else float("inf"))
    return residuals


def is_afforded(residuals: Dict[int, float], tol: Optional[float] = None) -> bool:
    tol = settings.tolerance if tol is None else tol
    return all(r < tol for r in residuals.values())
