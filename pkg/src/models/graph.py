from dataclasses import dataclass, field
from typing import List

import numpy as np


@dataclass(eq=False)
class DRGraph:
    """Certified distance-regular graph with its intersection numbers.

    `p[h, i, j]` is |Γ_i(y) ∩ Γ_j(z)| for any pair with dist(y, z) = h.
    """
    n: int
    adjacency: np.ndarray
    dist: np.ndarray
    D: int
    p: np.ndarray
    k: List[int]
    b: List[int]
    c: List[int]
    a: List[int]
    label: str = "graph"
    _distance_matrices: List[np.ndarray] = field(default=None, repr=False, compare=False)

    def distance_matrices(self) -> List[np.ndarray]:
        """A_0..A_D as integer matrices."""
        if self._distance_matrices is None:
            self._distance_matrices = [
                (self.dist == i).astype(np.int64) for i in range(self.D + 1)
            ]
        return self._distance_matrices

    def shell(self, x: int, i: int) -> np.ndarray:
        """Vertices at distance i from x, in increasing order."""
        return np.flatnonzero(self.dist[x] == i)

    def edges(self) -> List[tuple]:
        rows, cols = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(u), int(v)) for u, v in zip(rows, cols)]

    def intersection_array(self) -> dict:
        return {"b": self.b[:-1], "c": self.c[1:]}
