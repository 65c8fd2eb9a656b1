"""
Identity harness: evaluates every parameterised scalar identity of the
closed-form tables at seeded random admissible (a, q).
"""

import logging
from typing import Dict, Optional

import numpy as np

from src.models.algebra import Finding
from src.models.report import HarnessReport
from src.services.closed_forms import ClosedForms
from src.services.qracah import admissibility_margin
from src.utils.config import settings
from src.utils.numeric import combination_residual, relative_residual

logger = logging.getLogger(__name__)

# Identities that divide by a_1-dependent quantities; skipped when a_1 = 0.
A1_DEPENDENT = (
    "z.factored",
    "z.complement_factored",
    "z.product",
    "split.product",
    "split.via_a",
    "same_layer.interior",
    "same_layer.last",
    "local_srg.multiplicity",
    "local_srg.trace",
)


def evaluate_identities(a, q, D: int) -> Dict[str, Finding]:
    """Residual of every identity at one parameter point, max over indices."""
    cf = ClosedForms(a, q, D)
    findings: Dict[str, Finding] = {}

    def record(name: str, residual: float) -> None:
        if not np.isfinite(residual):
            residual = float("inf")
        current = findings.get(name)
        if current is None or residual > current.residual:
            findings[name] = Finding(name, float(residual))

    def rel(name: str, lhs, rhs) -> None:
        record(name, relative_residual(complex(lhs), complex(rhs)))

    def comb(name: str, *terms) -> None:
        record(name, combination_residual([complex(t) for t in terms]))

    skip_reason = cf.a1_skip_reason()

    with np.errstate(all="ignore"):
        for i in range(1, D):
            comb("vartheta.recurrence", cf.vt(i - 1), -cf.beta * cf.vt(i), cf.vt(i + 1))
        for i in range(1, D + 1):
            comb("vartheta.quadratic", cf.vt(i - 1) ** 2, -cf.beta * cf.vt(i - 1) * cf.vt(i),
                 cf.vt(i) ** 2, (q ** 2 - q ** -2) ** 2)
            scale = q ** 2 - q ** -2
            up = (q * cf.vt(i) - cf.vt(i - 1) / q) / scale
            down = (q * cf.vt(i - 1) - cf.vt(i) / q) / scale
            rel("vartheta.ratio", up, a * q ** (2 * i - D - 1))
            rel("vartheta.ratio", down, q ** (D - 2 * i + 1) / a)
            rel("vartheta.ratio_product", up * down, 1)

        theta = [cf.theta(i) for i in range(D + 1)]
        for i in range(1, D):
            gamma = theta[i - 1] - cf.beta * theta[i] + theta[i + 1]
            rel("tridiagonal.gamma", gamma, -cf.epsilon * (q - 1 / q) ** 2)
        gamma = -cf.epsilon * (q - 1 / q) ** 2
        varrho = (q - 1 / q) ** 2 * cf.epsilon ** 2 - (q ** 2 - q ** -2) ** 2 * cf.alpha ** 2
        for i in range(1, D + 1):
            lhs = theta[i - 1] ** 2 - cf.beta * theta[i - 1] * theta[i] + theta[i] ** 2 \
                - gamma * (theta[i - 1] + theta[i])
            rel("tridiagonal.varrho", lhs, varrho)

        for i in range(1, D + 1):
            comb("a.recurrence", cf.ai(i - 1) * cf.weight(i - 1), -cf.ai(i) * cf.weight(i),
                 -(cf.vt(i - 1) - cf.vt(i)) / cf.s1 * cf.epsilon)
        for i in range(D + 1):
            rel("a.weighted_epsilon", cf.ai(i) * cf.weight(i),
                cf.epsilon * (cf.vt(i) - cf.vt(0)) / cf.s1)
            comb("valency.split", cf.c(i), cf.ai(i), cf.b(i), -cf.k)
        rel("epsilon.via_a1", cf.epsilon_via_a1, cf.epsilon)
        rel("a1.closed", cf.a1_closed, cf.a1)
        for i in range(1, D):
            rel("a.via_a1", cf.ai_via_a1(i), cf.ai(i))

        for i in range(1, D + 1):
            rel("shell.denominator", cf.shell_denominator(i), cf.shell_denominator_factored(i))
            comb("z.recurrence", cf.z(i) * cf.weight(i - 1), -(cf.a1 - cf.z(i)) * cf.weight(i),
                 -(cf.vt(i - 1) - cf.vt(i)) / cf.s1 * cf.epsilon)
            if skip_reason is None:
                rel("z.factored", cf.z(i), cf.z_factored(i))
                rel("z.complement_factored", cf.a1 - cf.z(i), cf.a1_minus_z_factored(i))
        if skip_reason is None:
            for i in range(1, D):
                rel("z.product", (cf.a1 - cf.z(i)) * cf.z(i + 1), cf.ai(i) * cf.z(2))

        for i in range(D + 1):
            comb("same_layer.diagonal",
                 cf.c(i) * cf.X(i, i - 1), cf.ai(i), cf.b(i) * cf.X(i, i + 1),
                 cf.epsilon ** 2, cf.alpha * cf.epsilon * (cf.s1 + cf.vt(i)),
                 cf.s1 * cf.alpha ** 2 * cf.vt(i))
        if skip_reason is None:
            for i in range(1, D):
                down, mid, up = cf.same_layer(i)
                rel("same_layer.interior", down * cf.X(i, i - 1) + mid + up * cf.X(i, i + 1),
                    cf.same_layer_rhs(i))
            down, mid = cf.same_layer(D)
            rel("same_layer.last", down * cf.X(D, D - 1) + mid, cf.same_layer_rhs(D))

        for i in range(2, D + 1):
            comb("a_sum.factored", cf.ai(i), cf.ai(i - 1), -cf.a1, -cf.a_sum_closed(i))
            split = cf.split_prev(i)
            factored = cf.split_prev_factored(i)
            rel("split.factored", split[0], factored[0])
            rel("split.factored", split[1], factored[1])
            comb("split.sum", split[0], split[1], -cf.c(2))
            if skip_reason is None:
                via_a = cf.split_prev_via_a(i)
                rel("split.via_a", split[0], via_a[0])
                rel("split.via_a", split[1], via_a[1])
        if skip_reason is None:
            for i in range(2, D):
                rel("split.product", cf.split_product(i), 1)

        for i in range(2, D):
            rel("coefficient.xi", cf.xi(i), cf.xi_factored(i))
            rel("coefficient.zeta", cf.zeta(i), cf.zeta_factored(i))
            rel("coefficient.zeta_over_xi", cf.zeta(i) / cf.xi(i), cf.zeta_over_xi_factored(i))
            rel("second_shell.factored", cf.second_shell_defect(i),
                cf.second_shell_defect_factored(i))
        rel("coefficient.end", cf.X(D, D - 1) - 1, cf.end_coefficient_factored())

        rel("last_shell.pair_count", cf.p2_same(D), cf.pD2D_closed)
        end = cf.split_end()
        end_factored = cf.split_end_factored()
        rel("end_split.factored", end[0], end_factored[0])
        rel("end_split.factored", end[1], end_factored[1])
        if abs(cf.pD2D_closed) > settings.tolerance:
            end_counts = cf.split_end_via_counts()
            rel("end_split.via_counts", end[0], end_counts[0])
            rel("end_split.via_counts", end[1], end_counts[1])
        else:
            findings["end_split.via_counts"] = Finding(
                "end_split.via_counts", skipped=True, reason="p^D_{2,D}=0")

        if skip_reason is None:
            srg = cf.local_srg
            comb("local_srg.multiplicity", 1, srg["mult_r"], srg["mult_s"], -cf.k)
            comb("local_srg.trace", cf.a1, srg["r"] * srg["mult_r"], srg["s"] * srg["mult_s"])

    if skip_reason is not None:
        for name in A1_DEPENDENT:
            findings[name] = Finding(name, skipped=True, reason=skip_reason)
    return findings


def factor_margin(a, q, D: int) -> float:
    """Smallest normalized factor among the denominators of the factored forms.

    Covers the linear factors a ± q^m, a^2 q^{2m} - 1, q^{2m} - 1 and the
    count-level divisors a_i, a_i + a_{i-1} - a_1, b_i, c_i (scaled by 1 + |k|).
    """
    a, q = complex(a), complex(q)
    terms = [abs(1 + q ** m / a) for m in range(-D - 3, D + 4)]
    terms += [abs(1 - q ** m / a) for m in range(-D - 3, D + 4)]
    terms += [abs(a ** 2 * q ** (2 * m) - 1) for m in range(-D - 2, D + 3)]
    terms += [abs(q ** (2 * m) - 1) for m in range(1, D + 3)]
    terms += [abs(a ** 2 + 1), abs(a ** 4 * q ** 2 - 1), abs(a ** 3 * q ** (D + 1) - 1)]
    cf = ClosedForms(a, q, D)
    scale = 1 + abs(cf.k)
    terms += [abs(cf.ai(i)) / scale for i in range(1, D + 1)]
    terms += [abs(cf.a_sum(i)) / scale for i in range(2, D + 1)]
    terms += [abs(cf.b(i)) / scale for i in range(D)]
    terms += [abs(cf.c(i)) / scale for i in range(1, D + 1)]
    value = min(terms)
    return float(value) if np.isfinite(value) else 0.0


def sample_parameters(D: int, seed: int, index: int, margin: float,
                      log_radius: float, factor_floor: Optional[float] = None):
    """Admissible (a, q) for one sample index; the stream depends only on (seed, index).

    Points closer than `factor_floor` to a zero of a factored-form denominator
    are redrawn as well.
    """
    factor_floor = settings.harness_factor_margin if factor_floor is None else factor_floor
    rng = np.random.default_rng([seed, index])
    while True:
        q = np.exp(rng.uniform(-log_radius, log_radius) + 1j * rng.uniform(-np.pi, np.pi))
        a = np.exp(rng.uniform(-log_radius, log_radius) + 1j * rng.uniform(-np.pi, np.pi))
        if admissibility_margin(a, q, D) > margin and factor_margin(a, q, D) > factor_floor:
            return complex(a), complex(q)


def identity_harness(D: int, samples: int, seed: int = 0,
                     tolerance: Optional[float] = None,
                     margin: Optional[float] = None) -> HarnessReport:
    """Max relative residual per identity over `samples` random parameter points."""
    if D < 3:
        raise ValueError(f"diameter must be at least 3, got {D}")
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    tolerance = settings.harness_tolerance if tolerance is None else tolerance
    margin = settings.harness_margin if margin is None else margin

    max_residuals: Dict[str, float] = {}
    skipped: Dict[str, int] = {}
    for index in range(samples):
        a, q = sample_parameters(D, seed, index, margin, settings.harness_log_radius)
        for name, finding in evaluate_identities(a, q, D).items():
            if finding.skipped:
                skipped[name] = skipped.get(name, 0) + 1
                continue
            residual = finding.residual
            if not np.isfinite(residual):
                residual = float("inf")
            max_residuals[name] = max(max_residuals.get(name, 0.0), residual)

    passed = all(r < tolerance for r in max_residuals.values())
    logger.info(f"Identity harness D={D}, samples={samples}, seed={seed}: "
                f"{'pass' if passed else 'fail'} "
                f"(worst {max(max_residuals.values(), default=0.0):.3e})")
    return HarnessReport(D=D, samples=samples, seed=seed, tolerance=tolerance,
                         max_residuals=dict(sorted(max_residuals.items())),
                         skipped=dict(sorted(skipped.items())), passed=passed)
