from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.models.qracah import QRacahParams
from src.models.spectral import SpectralData


@dataclass(eq=False)
class DualStructure:
    """Dual idempotents and dual distance matrices with respect to a base vertex x.

    `spectral` is the spectral data under the ordering the structure was
    built for; every downstream construction at this vertex reads from it.
    """
    x: int
    Estar: np.ndarray
    Astar: np.ndarray
    spectral: SpectralData
    construction_residual: float = 0.0
    krein_product_residual: float = 0.0

    @property
    def AstarMat(self) -> np.ndarray:
        return self.Astar[1]

    @property
    def D(self) -> int:
        return len(self.Estar) - 1


@dataclass(eq=False)
class CentralElement:
    Z: np.ndarray
    lhs_rhs_residual: float
    centrality_residual: float
    zOnE: List[float] = field(default_factory=list)
    zOnEstar: List[float] = field(default_factory=list)


@dataclass(eq=False)
class ABCTriple:
    Amat: np.ndarray
    Bmat: np.ndarray
    Cmat: np.ndarray
    residuals: Dict[str, float] = field(default_factory=dict)


@dataclass(eq=False)
class BoltzmannPair:
    """W = f Σ τ_i E_i and W* = f Σ τ_i E*_i with their inverses."""
    W: np.ndarray
    Wstar: np.ndarray
    W_inv: np.ndarray
    Wstar_inv: np.ndarray
    f: complex
    tau: np.ndarray
    params: QRacahParams
    dual: DualStructure
    f_mode: str = "theorem"

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def coefficients(self) -> np.ndarray:
        """Coefficients of W in the basis E_0..E_D."""
        return self.f * self.tau

    @property
    def tau_inv_sum(self) -> complex:
        k = np.real(np.trace(self.dual.Estar, axis1=1, axis2=2))
        return complex(np.sum(k / self.tau))


@dataclass
class ZEigenMatch:
    eigenvalue: complex
    multiplicity: int
    matches: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def matched(self) -> bool:
        return bool(self.matches)


@dataclass
class Finding:
    """One named check outcome from a verification routine."""
    name: str
    residual: Optional[float] = None
    skipped: bool = False
    reason: Optional[str] = None
    value: Optional[float] = None


@dataclass
class CountStats:
    """Counted triple-intersection data at one base vertex.

    `splits` maps "i{i}.l{layer}" to the common value over the distance-2
    configurations (layer i-1 point, layer i point); None where no
    configuration exists.
    """
    x: int
    z: List[Optional[int]] = field(default_factory=list)
    splits: Dict[str, Optional[int]] = field(default_factory=dict)
    xi: List[complex] = field(default_factory=list)
    zeta: List[complex] = field(default_factory=list)
    local_srg: Optional[dict] = None
