"""
q-Racah parameter fitting for an eigenvalue sequence θ_0..θ_D.
"""

import cmath
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from src.models.errors import Degenerate, Inadmissible, NotQRacah
from src.models.qracah import QRacahParams
from src.utils.config import settings

logger = logging.getLogger(__name__)


def admissibility_margin(a, q, D: int):
    """Smallest |expr - 1| over the non-vanishing conditions on (a, q).

    Works elementwise on arrays of a and q. The conditions are
    q^{2i} != 1 (1 <= i <= D), a^2 q^{2i} != 1 (1-D <= i <= D-1) and
    a^3 q^{2i-D-1} != 1 (1 <= i <= D).
    """
    a = np.asarray(a, dtype=complex)
    q = np.asarray(q, dtype=complex)
    margins = []
    for i in range(1, D + 1):
        margins.append(np.abs(q ** (2 * i) - 1))
        margins.append(np.abs(a ** 3 * q ** (2 * i - D - 1) - 1))
    for i in range(1 - D, D):
        margins.append(np.abs(a ** 2 * q ** (2 * i) - 1))
    return np.minimum.reduce(margins)


def is_admissible(a, q, D: int, margin: float = 1e-9) -> bool:
    return bool(admissibility_margin(a, q, D) > margin)


def canonicalize(q: complex, a: complex, tol: float = 1e-12) -> Tuple[complex, complex]:
    """Representative of {(a, q), (1/a, 1/q)}.

    Prefer Im(q) > 0; for real q prefer |a| >= 1, ties broken by the
    smaller principal argument of a.
    """
    q, a = complex(q), complex(a)
    alt_q, alt_a = 1 / q, 1 / a
    if abs(q.imag) > tol:
        return (q, a) if q.imag > 0 else (alt_q, alt_a)
    if abs(abs(a) - 1) > tol:
        return (q, a) if abs(a) > 1 else (alt_q, alt_a)
    if abs(cmath.phase(a) - cmath.phase(alt_a)) <= tol:
        return (q, a) if abs(q) >= 1 else (alt_q, alt_a)
    return (q, a) if cmath.phase(a) < cmath.phase(alt_a) else (alt_q, alt_a)


def estimate_beta(theta: Sequence[complex], tol: float) -> complex:
    """β from (θ_{i-2} - θ_{i+1}) / (θ_{i-1} - θ_i) = β + 1, checked for consistency."""
    theta = np.asarray(theta, dtype=complex)
    D = len(theta) - 1
    ratios = np.array([(theta[i - 2] - theta[i + 1]) / (theta[i - 1] - theta[i])
                       for i in range(2, D)])
    mean = ratios.mean()
    spread = float(np.abs(ratios - mean).max()) / (1.0 + abs(mean))
    if spread > tol:
        raise NotQRacah("eigenvalue ratios are not constant",
                        {"ratios": [[r.real, r.imag] for r in ratios], "spread": spread})
    return complex(mean - 1)


def tridiagonal_scalars(theta: Sequence[complex]) -> Dict[str, complex]:
    """β, γ, ϱ read off the eigenvalue sequence, with their spreads."""
    theta = np.asarray(theta, dtype=complex)
    D = len(theta) - 1
    beta = estimate_beta(theta, tol=np.inf)
    gammas = np.array([theta[i - 1] - beta * theta[i] + theta[i + 1] for i in range(1, D)])
    gamma = gammas.mean()
    varrhos = np.array([
        theta[i - 1] ** 2 - beta * theta[i - 1] * theta[i] + theta[i] ** 2
        - gamma * (theta[i - 1] + theta[i])
        for i in range(1, D + 1)
    ])
    varrho = varrhos.mean()
    return {
        "beta": beta,
        "gamma": complex(gamma),
        "varrho": complex(varrho),
        "gamma_spread": float(np.abs(gammas - gamma).max()),
        "varrho_spread": float(np.abs(varrhos - varrho).max()),
    }


def _fit_residual(theta: np.ndarray, q: complex, u: complex, v: complex, eps: complex) -> float:
    D = len(theta) - 1
    i = np.arange(D + 1)
    model = u * q ** (2 * i - D) + v * q ** (D - 2 * i) + eps
    return float(np.max(np.abs(theta - model) / (1.0 + np.abs(theta))))


def fit_qracah(theta: Sequence[complex], tol: Optional[float] = None,
               admissible_margin: float = 1e-9) -> List[QRacahParams]:
    """All admissible q-Racah parameter records reproducing θ.

    Records are canonical under (a, q) -> (1/a, 1/q) and sorted by
    (arg q, arg a).
    """
    tol = settings.match_tol if tol is None else tol
    theta = np.asarray(theta, dtype=complex)
    D = len(theta) - 1
    if D < 3:
        raise NotQRacah(f"diameter {D} < 3", {"D": D})
    gaps = np.abs(theta[:, None] - theta[None, :]) + np.eye(D + 1)
    if gaps.min() < tol:
        raise NotQRacah("eigenvalues are not mutually distinct")

    beta = estimate_beta(theta, tol)
    if abs(beta - 2) < tol or abs(beta + 2) < tol:
        q2 = 1 if abs(beta - 2) < tol else -1
        raise NotQRacah(f"beta = {beta.real:.6g} forces q^2 = {q2}",
                        {"beta": [beta.real, beta.imag], "q2": q2})

    records: Dict[Tuple[float, ...], QRacahParams] = {}
    degenerate = 0
    for q2 in np.roots([1, -beta, 1]):
        root = np.sqrt(complex(q2))
        for q in (root, -root):
            basis = np.array([[q ** (2 * i - D), q ** (D - 2 * i), 1] for i in range(3)])
            u, v, eps = linalg.solve(basis, theta[:3])
            residual = _fit_residual(theta, q, u, v, eps)
            if residual > tol:
                continue
            if abs(u * v) < tol:
                degenerate += 1
                continue
            root_a = np.sqrt(complex(u / v))
            for a in (root_a, -root_a):
                # α = a v is unchanged by (a, q) -> (1/a, 1/q)
                alpha = a * v
                cq, ca = canonicalize(q, a)
                key = (round(cq.real, 9), round(cq.imag, 9), round(ca.real, 9), round(ca.imag, 9))
                if key in records:
                    continue
                records[key] = QRacahParams(
                    D=D, q=cq, a=ca, alpha=complex(alpha), epsilon=complex(eps),
                    admissible=is_admissible(ca, cq, D, admissible_margin),
                    fit_residual=residual,
                )

    if not records:
        if degenerate:
            raise Degenerate("u * v vanishes for every root of q", {"beta": [beta.real, beta.imag]})
        raise NotQRacah("no q reproduces the eigenvalue sequence", {"beta": [beta.real, beta.imag]})

    admissible = [r for r in records.values() if r.admissible]
    if not admissible:
        raise Inadmissible("every fitted parameter record violates admissibility",
                           {"records": [r.as_dict() for r in records.values()]})
    admissible.sort(key=lambda r: (round(cmath.phase(r.q), 9), round(cmath.phase(r.a), 9)))
    logger.info(f"q-Racah fit: {len(admissible)} admissible record(s), beta={beta:.6g}")
    return admissible
