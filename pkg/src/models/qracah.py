from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np


@dataclass
class QRacahParams:
    """Parameters with θ_i = α ϑ_i + ε and ϑ_i = a q^{2i-D} + a^{-1} q^{D-2i}."""
    D: int
    q: complex
    a: complex
    alpha: complex
    epsilon: complex
    admissible: bool = True
    fit_residual: float = 0.0

    @property
    def s1(self) -> complex:
        """q + q^{-1}."""
        return self.q + 1 / self.q

    @property
    def beta(self) -> complex:
        return self.q ** 2 + self.q ** -2

    @property
    def gamma(self) -> complex:
        return -self.epsilon * (self.q - 1 / self.q) ** 2

    @property
    def varrho(self) -> complex:
        q = self.q
        return (q - 1 / q) ** 2 * self.epsilon ** 2 - (q ** 2 - q ** -2) ** 2 * self.alpha ** 2

    @property
    def vartheta(self) -> np.ndarray:
        return vartheta_values(self.a, self.q, self.D, range(self.D + 1))

    @property
    def tau(self) -> np.ndarray:
        i = np.arange(self.D + 1)
        return (-1.0) ** i * complex(self.a) ** (-i) * complex(self.q) ** (i * (self.D - i))

    @property
    def theta(self) -> np.ndarray:
        return self.alpha * self.vartheta + self.epsilon

    def weights(self) -> np.ndarray:
        """1 + ϑ_i / (q + q^{-1})."""
        return 1 + self.vartheta / self.s1

    def as_dict(self) -> Dict[str, list]:
        return {
            "D": self.D,
            "q": [self.q.real, self.q.imag],
            "a": [self.a.real, self.a.imag],
            "alpha": [complex(self.alpha).real, complex(self.alpha).imag],
            "epsilon": [complex(self.epsilon).real, complex(self.epsilon).imag],
        }


def vartheta_values(a, q, D: int, indices) -> np.ndarray:
    i = np.asarray(list(indices))
    a = complex(a)
    q = complex(q)
    return a * q ** (2 * i - D) + q ** (D - 2 * i) / a


@dataclass
class ClosedFormScalars:
    """Closed-form intersection numbers and scalars at a parameter point."""
    D: int
    alpha_cf: complex
    epsilon_cf: complex
    b: List[complex]
    c: List[complex]
    a_seq: List[complex]
    a1: complex
    bipartite: bool = False
    almost_bipartite: bool = False
    flags: List[str] = field(default_factory=list)

    @property
    def k(self) -> complex:
        return self.b[0]

    def valencies(self) -> List[complex]:
        ks = [1 + 0j]
        for i in range(1, self.D + 1):
            ks.append(ks[-1] * self.b[i - 1] / self.c[i])
        return ks
