"""
Closed-form scalars of a q-Racah parameter point (a, q, D).

Every formula is evaluated with numpy complex scalars (or arrays of them,
for grid scans) so that a vanishing denominator yields inf/nan instead of
raising; callers decide what to skip.
"""

import logging
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from src.models.errors import Inadmissible
from src.models.qracah import ClosedFormScalars, QRacahParams
from src.services.qracah import admissibility_margin
from src.utils.config import settings

logger = logging.getLogger(__name__)


class ClosedForms:
    """Intersection numbers and derived scalars at one parameter point.

    `alpha` and `epsilon` default to their closed forms in (a, q); a fitted
    graph passes its own values instead.
    """

    def __init__(self, a, q, D: int, alpha=None, epsilon=None):
        self.a = np.asarray(a, dtype=complex)[()]
        self.q = np.asarray(q, dtype=complex)[()]
        self.D = int(D)
        self._alpha = None if alpha is None else np.complex128(alpha)
        self._epsilon = None if epsilon is None else np.complex128(epsilon)

    @classmethod
    def from_params(cls, p: QRacahParams, fitted: bool = True) -> "ClosedForms":
        if fitted:
            return cls(p.a, p.q, p.D, alpha=p.alpha, epsilon=p.epsilon)
        return cls(p.a, p.q, p.D)

    # basic scalars

    def vt(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        return a * q ** (2 * i - D) + q ** (D - 2 * i) / a

    @cached_property
    def s1(self) -> complex:
        return self.q + 1 / self.q

    @cached_property
    def beta(self) -> complex:
        return self.q ** 2 + self.q ** -2

    @cached_property
    def K(self) -> complex:
        q = self.q
        return (q - 1 / q) * (q ** 2 - q ** -2)

    def weight(self, i: int) -> complex:
        return 1 + self.vt(i) / self.s1

    def tau(self, i: int) -> complex:
        return (-1) ** i * self.a ** (-i) * self.q ** (i * (self.D - i))

    def X(self, i: int, j: int) -> complex:
        """(2ϑ_i - βϑ_j) / ((q - q^{-1})(q^2 - q^{-2}))."""
        return (2 * self.vt(i) - self.beta * self.vt(j)) / self.K

    def theta(self, i: int) -> complex:
        return self.alpha * self.vt(i) + self.epsilon

    # eigenvalue normalisation

    @cached_property
    def alpha_closed(self) -> complex:
        a, q, D = self.a, self.q, self.D
        num = (a * q ** (2 - D) - q ** (D - 2) / a) * (a + q ** (D - 1))
        den = q ** (D - 1) * (1 / q - q) * (a * q - 1 / (a * q)) * (a - q ** (1 - D))
        return num / den

    @cached_property
    def epsilon_closed(self) -> complex:
        a, q, D = self.a, self.q, self.D
        num = q * (a + 1 / a) * (a + q ** (-D - 1)) * (a * q ** (2 - D) - q ** (D - 2) / a)
        den = (q - 1 / q) * (a - q ** (1 - D)) * (a * q - 1 / (a * q))
        return num / den

    @cached_property
    def alpha(self) -> complex:
        return self.alpha_closed if self._alpha is None else self._alpha

    @cached_property
    def epsilon(self) -> complex:
        return self.epsilon_closed if self._epsilon is None else self._epsilon

    # intersection numbers

    def b(self, i: int) -> complex:
        a, q, D, al = self.a, self.q, self.D, self.alpha
        if i == D:
            return np.complex128(0)
        if i == 0:
            return al * (q ** -D - q ** D) * (a ** 3 - q ** (D - 1)) / (a * (a + q ** (D - 1)))
        num = al * (q ** (i - D) - q ** (D - i)) * (a * q ** (i - D) - q ** (D - i) / a) \
            * (a ** 3 - q ** (D - 2 * i - 1))
        den = a * (a * q ** (2 * i - D) - q ** (D - 2 * i) / a) * (a + q ** (D - 2 * i - 1))
        return num / den

    def c(self, i: int) -> complex:
        a, q, D, al = self.a, self.q, self.D, self.alpha
        if i == 0:
            return np.complex128(0)
        if i == D:
            return al * (q ** -D - q ** D) * (a - q ** (D - 1)) / (q ** (D - 1) * (a + q ** (1 - D)))
        num = al * a * (q ** i - q ** -i) * (a * q ** i - q ** -i / a) * (1 / a - q ** (D - 2 * i + 1))
        den = (a * q ** (2 * i - D) - q ** (D - 2 * i) / a) * (a + q ** (D - 2 * i + 1))
        return num / den

    def ai(self, i: int) -> complex:
        a, q, D, al = self.a, self.q, self.D, self.alpha
        if i == 0:
            return np.complex128(0)
        if i == D:
            return al * a * (a ** -2 - a ** 2) * (q ** D - q ** -D) \
                / ((a + q ** (D - 1)) * (a + q ** (1 - D)))
        num = al * a * (a + 1 / a) * (1 + a * q ** (D + 1)) * (q ** i - q ** -i) \
            * (q ** (D - i) / a - a * q ** (i - D))
        den = q ** (2 * i - D + 1) * (a + q ** (D - 1)) * (a + q ** (D - 2 * i - 1)) \
            * (a + q ** (D - 2 * i + 1))
        return num / den

    @cached_property
    def a1(self) -> complex:
        return self.ai(1)

    @cached_property
    def k(self) -> complex:
        return self.b(0)

    @cached_property
    def a1_closed(self) -> complex:
        a, q, D = self.a, self.q, self.D
        num = (a + 1 / a) * (1 - a * q ** (1 - D)) * (1 + a * q ** (D + 1)) \
            * (a * q ** (2 - D) - q ** (D - 2) / a)
        den = (1 + a * q ** (3 - D)) * (1 - a * q ** (D - 1)) * (a * q - 1 / (a * q))
        return num / den

    @cached_property
    def epsilon_via_a1(self) -> complex:
        a, q, D = self.a, self.q, self.D
        return self.a1 * q * (a + q ** (D - 3)) / ((q - 1 / q) * (a - q ** (D - 1)))

    def ai_via_a1(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        num = a * q ** (2 - 2 * i) * (a + q ** (D - 3)) * (q ** i - q ** -i) \
            * (q ** (D - i) / a - a * q ** (i - D))
        den = (1 - a * q ** (1 - D)) * (q - 1 / q) * (a + q ** (D - 2 * i + 1)) \
            * (a + q ** (D - 2 * i - 1))
        return self.a1 * num / den

    def valencies(self):
        ks = [np.complex128(1)]
        for i in range(1, self.D + 1):
            ks.append(ks[-1] * self.b(i - 1) / self.c(i))
        return ks

    # triangle counts z_i

    def shell_denominator(self, i: int) -> complex:
        """2(q + q^{-1}) + ϑ_{i-1} + ϑ_i."""
        return 2 * self.s1 + self.vt(i - 1) + self.vt(i)

    def shell_denominator_factored(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        return q ** (2 * i - D - 1) / a * self.s1 * (a + q ** (D - 2 * i + 1)) ** 2

    def z(self, i: int) -> complex:
        num = self.a1 * (self.s1 + self.vt(i)) + self.epsilon * (self.vt(i - 1) - self.vt(i))
        return num / self.shell_denominator(i)

    def z_factored(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        return self.a1 / (1 - a * q ** (1 - D)) * (1 - q ** (2 - 2 * i)) \
            / (1 + q ** (D - 2 * i + 1) / a)

    def a1_minus_z_factored(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        return self.a1 * q ** (1 - i) / (1 - a * q ** (1 - D)) \
            * (q ** (D - i) / a - a * q ** (i - D)) / (1 + q ** (D - 2 * i + 1) / a)

    # pair counts at distance 2

    def a_sum(self, i: int) -> complex:
        """a_i + a_{i-1} - a_1."""
        return self.ai(i) + self.ai(i - 1) - self.a1

    def a_sum_closed(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        if i == D:
            num = a * (a ** 2 - a ** -2) * q ** (1 - D) * (q ** (D - 1) - q ** (1 - D)) * self.s1 \
                * (a + q ** (D - 1)) * (a * q ** (2 - D) - q ** (D - 2) / a)
            den = (q - 1 / q) * (a + q ** (3 - D)) * (a * q - 1 / (a * q)) \
                * (a - q ** (1 - D)) * (a + q ** (D - 3))
            return num / den
        first = a * (a + 1 / a) * q ** (D - 2 * i + 1) * (q ** (i - 1) - q ** (1 - i)) \
            * (a * q ** (i - D) - q ** (D - i) / a) \
            / ((q - 1 / q) * (a + q ** (D - 2 * i + 3)) * (a + q ** (D - 2 * i - 1)))
        second = self.s1 * (a + q ** (D - 1)) * (a + q ** (-D - 1)) \
            * (a * q ** (2 - D) - q ** (D - 2) / a) \
            / ((a * q - 1 / (a * q)) * (a - q ** (1 - D)) * (a + q ** (D - 3)))
        return first * second

    def p2_prev(self, i: int) -> complex:
        """p^i_{2,i-1} for 2 <= i <= D."""
        return self.c(i) * self.a_sum(i) / self.c(2)

    def p2_same(self, i: int) -> complex:
        """p^i_{2,i} for 2 <= i <= D (b_D = 0 covers the last shell)."""
        num = self.c(i) * (self.b(i - 1) - 1) + self.ai(i) * (self.ai(i) - self.a1 - 1)
        if i < self.D:
            num = num + self.b(i) * (self.c(i + 1) - 1)
        return num / self.c(2)

    @cached_property
    def pD2D_closed(self) -> complex:
        a, q, D = self.a, self.q, self.D
        first = (q ** D - q ** -D) * (q ** (D - 1) - q ** (1 - D)) * (a ** 2 - a ** -2) \
            * (a ** 2 * q - 1 / (a ** 2 * q)) \
            / ((q ** 2 - q ** -2) * (q - 1 / q) * (a * q - 1 / (a * q)) * (a * q ** 2 - 1 / (a * q ** 2)))
        second = (a * q ** (1 - D) - q ** (D - 1) / a) * (a * q ** (4 - D) - q ** (D - 4) / a) \
            / ((a * q ** (D - 1) - q ** (1 - D) / a) * (a * q ** (D - 2) - q ** (2 - D) / a))
        return first * second

    def split_prev(self, i: int) -> Tuple[complex, complex]:
        """Layer i-1 and layer i counts for y in Γ_{i-1}(x), z in Γ_i(x), ∂(y,z) = 2."""
        den = self.shell_denominator(i)
        c2 = self.c(2)
        return c2 * (self.s1 + self.vt(i)) / den, c2 * (self.s1 + self.vt(i - 1)) / den

    def split_prev_via_a(self, i: int) -> Tuple[complex, complex]:
        c2, s = self.c(2), self.a_sum(i)
        z = self.z(i)
        return c2 * (self.ai(i - 1) - z) / s, c2 * (self.ai(i) - self.a1 + z) / s

    def split_prev_factored(self, i: int) -> Tuple[complex, complex]:
        a, q, D = self.a, self.q, self.D
        c2 = self.c(2)
        lower = c2 * q / self.s1 * (a + q ** (D - 2 * i - 1)) / (a + q ** (D - 2 * i + 1))
        upper = c2 / (q * self.s1) * (a + q ** (D - 2 * i + 3)) / (a + q ** (D - 2 * i + 1))
        return lower, upper

    def split_product(self, i: int) -> complex:
        """Left side of (q+q^{-1})^2 · ratio_i · ratio_{i+1} = 1, 2 <= i <= D-1."""
        first = (self.ai(i - 1) - self.z(i)) / self.a_sum(i)
        second = (self.ai(i + 1) - self.a1 + self.z(i + 1)) / self.a_sum(i + 1)
        return self.s1 ** 2 * first * second

    def split_end(self) -> Tuple[complex, complex]:
        """Layer D-1 and layer D counts for y, z in Γ_D(x) at distance 2."""
        D, K = self.D, self.K
        c2 = self.c(2)
        den = K - 2 * self.vt(D) + self.beta * self.vt(D - 1)
        return c2 * K / den, c2 * (self.beta * self.vt(D - 1) - 2 * self.vt(D)) / den

    def split_end_via_counts(self) -> Tuple[complex, complex]:
        D = self.D
        p = self.p2_same(D)
        zD = self.z(D)
        lower = self.c(D) * (self.b(D - 1) - self.a1 - 1 + zD) / p
        upper = (self.c(D) * (self.a1 - zD) + self.ai(D) * (self.ai(D) - self.a1 - 1)) / p
        return lower, upper

    def split_end_factored(self) -> Tuple[complex, complex]:
        a, q, D = self.a, self.q, self.D
        den = (a * q - 1 / (a * q)) * (a * q ** (D - 1) - q ** (1 - D) / a) \
            * (a * q ** (4 - D) - q ** (D - 4) / a) * (a + q ** (D - 3))
        common = (a * q ** 2 - 1 / (a * q ** 2)) * (a * q ** (2 - D) - q ** (D - 2) / a) \
            * (a + q ** (D - 1))
        lower = -(q ** 2 - q ** -2) / q * common / den
        upper = self.s1 / q * (a * q ** (D - 2) - q ** (2 - D) / a) * common / den
        return lower, upper

    def same_layer(self, i: int) -> Tuple[complex, ...]:
        """Counts in layers i-1, i (and i+1 when i < D) for adjacent y, z in Γ_i(x)."""
        down = self.c(i) * (self.a1 - self.z(i)) / self.ai(i)
        if i == self.D:
            return down, self.a1 - down
        up = self.b(i) * self.z(i + 1) / self.ai(i)
        return down, self.a1 - down - up, up

    def same_layer_rhs(self, i: int) -> complex:
        """2ε + α(q + q^{-1} + ϑ_i)."""
        return 2 * self.epsilon + self.alpha * (self.s1 + self.vt(i))

    # coefficients of the distance-2 same-layer relation

    def xi(self, i: int) -> complex:
        return self.X(i, i - 1) - 1

    def xi_factored(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        return q ** (2 * i - D - 2) * (a + q ** (D - 2 * i + 1)) * (a - q ** (D - 2 * i + 3)) \
            / (a * (q - 1 / q))

    def zeta(self, i: int) -> complex:
        return 1 - self.X(i, i + 1)

    def zeta_factored(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        return q ** (2 * i - D + 2) * (a + q ** (D - 2 * i - 1)) * (a - q ** (D - 2 * i - 3)) \
            / (a * (q - 1 / q))

    def zeta_over_xi_factored(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D
        return q ** 4 * (a + q ** (D - 2 * i - 1)) * (a - q ** (D - 2 * i - 3)) \
            / ((a + q ** (D - 2 * i + 1)) * (a - q ** (D - 2 * i + 3)))

    def end_coefficient_factored(self) -> complex:
        a, q, D = self.a, self.q, self.D
        return q ** (D - 2) * (a + q ** (1 - D)) * (a - q ** (3 - D)) / (a * (q - 1 / q))

    def second_shell_defect(self, i: int) -> complex:
        """p^i_{2,i}(c_2 - z_2 - 1) - (b_{i-1} - a_1 - 1 + z_i)(c_{i+1} - z_{i+1} - 1)."""
        return self.p2_same(i) * (self.c(2) - self.z(2) - 1) \
            - (self.b(i - 1) - self.a1 - 1 + self.z(i)) * (self.c(i + 1) - self.z(i + 1) - 1)

    def second_shell_defect_factored(self, i: int) -> complex:
        a, q, D = self.a, self.q, self.D

        def g(m):
            return a * q ** m - q ** (-m) / a

        n1 = (q ** i - q ** -i) * (q ** (i - 1) - q ** (1 - i)) * g(i - D) \
            * (a - q ** (D - 2 * i - 3)) * (a - q ** (D - 2 * i + 3)) * g(i - D + 1)
        d1 = g(2 * i - D - 2) * g(2 * i + 2 - D) * (a + q ** (D - 2 * i + 1)) * (a + q ** (D - 2 * i - 1))
        n2 = q ** (2 - 2 * D) * (a + 1 / a) * (a ** 2 * q - 1 / (a ** 2 * q)) * g(D) * g(2 - D)
        d2 = g(1) ** 2 * (q - 1 / q) ** 2 * self.s1 * g(2)
        n3 = (a + q ** (-D - 1)) * (a - q ** (D + 1)) * (a + q ** (D - 1)) ** 2
        d3 = (a + q ** (D - 3)) * (a - q ** (3 - D)) * (a - q ** (1 - D)) ** 2
        return n1 / d1 * n2 / d2 * n3 / d3

    # local graph

    @cached_property
    def local_srg(self) -> dict:
        """Nontrivial eigenvalues r, s of the local graph with multiplicities."""
        a, q, D = self.a, self.q, self.D
        r = a * (a + 1 / a) * (a * q ** (2 - D) - q ** (D - 2) / a) \
            / (q * (a - q ** (1 - D)) * (a + q ** (D - 3)))
        s = (1 + a * q ** (D + 1)) * (q ** (D - 2) / a - a * q ** (2 - D)) \
            / (q ** 2 * (a * q - 1 / (a * q)) * (a + q ** (D - 3)))
        mult_r = (q ** (D - 1) - q ** (1 - D)) * (1 - a * q ** (1 - D)) * (1 + a * q ** (D + 1)) \
            * (a ** 3 - q ** (D - 1)) \
            / (a * (1 - a ** 3 * q ** (D + 1)) * (q - 1 / q) * (a * q - 1 / (a * q)))
        mult_s = q ** (D + 1) * (a + 1 / a) * (q ** -D - q ** D) * (1 - a * q ** (1 - D)) \
            * (a ** 3 - q ** (D - 3)) / ((q - 1 / q) * (1 - a * q ** (D - 1)) * (1 - a ** 3 * q ** (D + 1)))
        return {"r": r, "s": s, "mult_r": mult_r, "mult_s": mult_s}

    # degenerate cases

    def is_bipartite(self, tol: float = 1e-9) -> bool:
        return bool(abs(self.a ** 2 + 1) < tol)

    def is_almost_bipartite(self, tol: float = 1e-9) -> bool:
        return bool(abs(self.a + self.q ** (-self.D - 1)) < tol)

    def a1_vanishes(self, tol: float = 1e-9) -> bool:
        return bool(abs(self.a1) < tol * (1 + abs(self.k)))

    def a1_skip_reason(self, tol: float = 1e-9) -> Optional[str]:
        if not self.a1_vanishes(tol):
            return None
        if self.is_bipartite(tol):
            return "bipartite: a_1=0"
        if self.is_almost_bipartite(tol):
            return "almost bipartite: a_1=0"
        return "a_1=0"

    def special_conditions(self, tol: float = 1e-9) -> dict:
        """Which of the distinguished parameter relations hold."""
        a, q, D = self.a, self.q, self.D
        return {
            "a=q^(D+1)": bool(abs(a - q ** (D + 1)) < tol),
            "a^2=q^(-2D)": bool(abs(a ** 2 - q ** (-2 * D)) < tol),
            "a^4=q^(-2)": bool(abs(a ** 4 - q ** -2) < tol),
            "a=-q^(-D-1)": bool(abs(a + q ** (-D - 1)) < tol),
            "a=q^(-D-1)": bool(abs(a - q ** (-D - 1)) < tol),
            "a^2=-1": self.is_bipartite(tol),
        }


def scalar_tables(p: QRacahParams, tol: Optional[float] = None) -> ClosedFormScalars:
    """Closed-form α, ε and the intersection arrays at (a, q, D)."""
    tol = settings.tolerance if tol is None else tol
    margin = float(admissibility_margin(p.a, p.q, p.D))
    if margin <= tol:
        raise Inadmissible(f"parameters (a={p.a:.6g}, q={p.q:.6g}) violate admissibility",
                           {"margin": margin, "D": p.D})
    cf = ClosedForms(p.a, p.q, p.D)
    with np.errstate(all="ignore"):
        b = [complex(cf.b(i)) for i in range(p.D + 1)]
        c = [complex(cf.c(i)) for i in range(p.D + 1)]
        a_seq = [complex(cf.ai(i)) for i in range(p.D + 1)]
        scalars = ClosedFormScalars(
            D=p.D, alpha_cf=complex(cf.alpha_closed), epsilon_cf=complex(cf.epsilon_closed),
            b=b, c=c, a_seq=a_seq, a1=complex(cf.a1_closed),
            bipartite=cf.is_bipartite(), almost_bipartite=cf.is_almost_bipartite(),
        )
    if scalars.bipartite:
        scalars.flags.append("bipartite")
    if scalars.almost_bipartite:
        scalars.flags.append("almost bipartite")
    return scalars
