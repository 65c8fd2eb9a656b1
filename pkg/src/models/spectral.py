from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np


@dataclass(eq=False)
class SpectralData:
    """Eigenvalues, primitive idempotents, eigenmatrices and Krein parameters.

    Index i of `theta`, `E`, `kstar`, the rows of `P`, the columns of `Q`
    and every axis of `krein` refers to the same idempotent. `ordering`
    records the permutation applied relative to the base ordering
    (θ_0 = k, the rest decreasing).
    """
    theta: np.ndarray
    E: np.ndarray
    kstar: np.ndarray
    n: int
    P: Optional[np.ndarray] = None
    Q: Optional[np.ndarray] = None
    krein: Optional[np.ndarray] = None
    ordering: Tuple[int, ...] = ()

    @property
    def D(self) -> int:
        return len(self.theta) - 1

    @property
    def theta_star(self) -> np.ndarray:
        """θ*_i = Q_{i,1}."""
        return self.Q[:, 1]

    def reorder(self, perm: Tuple[int, ...]) -> "SpectralData":
        """Relabel idempotents so that new index i is old index perm[i]."""
        perm = tuple(int(v) for v in perm)
        idx = np.array(perm)
        base = self.ordering or tuple(range(len(self.theta)))
        return replace(
            self,
            theta=self.theta[idx],
            E=self.E[idx],
            kstar=self.kstar[idx],
            P=None if self.P is None else self.P[idx, :],
            Q=None if self.Q is None else self.Q[:, idx],
            krein=None if self.krein is None else self.krein[np.ix_(idx, idx, idx)],
            ordering=tuple(base[v] for v in perm),
        )

    def dual_intersection_numbers(self) -> dict:
        """b*_i, c*_i, a*_i read from the Krein tensor under the current ordering."""
        D = self.D
        bstar = [float(self.krein[i, 1, i + 1]) if i < D else 0.0 for i in range(D + 1)]
        cstar = [float(self.krein[i, 1, i - 1]) if i > 0 else 0.0 for i in range(D + 1)]
        astar = [float(self.krein[i, 1, i]) for i in range(D + 1)]
        return {"b": bstar, "c": cstar, "a": astar}


@dataclass
class QPolyOrdering:
    perm: Tuple[int, ...]
    is_qpoly: bool = True
    is_formally_self_dual: bool = False
    self_dual_residual: float = float("nan")


@dataclass
class SelfDualCheck:
    is_self_dual: bool
    residual: float
    theta_residual: float
