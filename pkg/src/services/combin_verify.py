"""
Exhaustive triple-intersection counts around a base vertex, compared with
the closed forms implied by the central element Z.

For a base vertex x and y, z at prescribed distances, the counted quantity
is |Γ_l(x) ∩ Γ(y) ∩ Γ(z)|. All counts for a layer l come from a single
matrix product A E*_l A.
"""

import logging
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy import linalg

from src.models.algebra import CountStats, DualStructure, Finding
from src.models.errors import ConstancyViolation
from src.models.graph import DRGraph
from src.models.qracah import QRacahParams
from src.services.closed_forms import ClosedForms
from src.utils.config import settings
from src.utils.numeric import cluster_values, combination_residual, distance_to_integer, relative_residual

logger = logging.getLogger(__name__)

LOCAL_GRAPH_NOTE = (
    "local graph: counted parameters are authoritative; "
    "closed-form eigenvalues are advisory"
)


class TripleCounter:
    """Counts |Γ_l(x) ∩ Γ(y) ∩ Γ(z)| for all (y, z) at once, per layer l."""

    def __init__(self, g: DRGraph, x: int):
        if not 0 <= x < g.n:
            raise ValueError(f"base vertex {x} outside 0..{g.n - 1}")
        self.g = g
        self.x = x
        self._adjacency = g.adjacency.astype(np.int64)
        self.layer = g.dist[x]
        self.count = lru_cache(maxsize=None)(self._count)

    def _count(self, l: int) -> np.ndarray:
        shell = np.flatnonzero(self.layer == l)
        if shell.size == 0:
            return np.zeros((self.g.n, self.g.n), dtype=np.int64)
        return self._adjacency[:, shell] @ self._adjacency[shell, :]

    def pairs(self, i: int, j: int, distance: int) -> Tuple[np.ndarray, np.ndarray]:
        """(y, z) with ∂(x, y) = i, ∂(x, z) = j, ∂(y, z) = distance."""
        rows, cols = self.g.shell(self.x, i), self.g.shell(self.x, j)
        if rows.size == 0 or cols.size == 0:
            empty = np.array([], dtype=np.int64)
            return empty, empty
        r, c = np.nonzero(self.g.dist[np.ix_(rows, cols)] == distance)
        return rows[r], cols[c]

    def common(self, name: str, l: int, ys: np.ndarray, zs: np.ndarray) -> Optional[int]:
        """The count at layer l shared by every (y, z); None when there are no pairs."""
        if ys.size == 0:
            return None
        values = self.count(l)[ys, zs]
        first = int(values[0])
        bad = np.flatnonzero(values != first)
        if bad.size:
            j = int(bad[0])
            raise ConstancyViolation(
                f"[{self.g.label}] {name} is not constant at x={self.x}",
                {"check": name, "x": self.x, "layer": l, "witnesses": [
                    {"y": int(ys[0]), "z": int(zs[0]), "count": first},
                    {"y": int(ys[j]), "z": int(zs[j]), "count": int(values[j])},
                ]},
            )
        return first


def triple_count(g: DRGraph, x: int, y: int, z: int, j: int) -> int:
    """|Γ_j(x) ∩ Γ(y) ∩ Γ(z)| by direct enumeration."""
    if not 0 <= j <= g.D:
        raise ValueError(f"layer {j} outside 0..{g.D}")
    mask = (g.dist[x] == j) & (g.adjacency[y] != 0) & (g.adjacency[z] != 0)
    return int(np.count_nonzero(mask))


def _compare(findings: Dict[str, Finding], name: str, count, formula) -> None:
    formula = complex(formula)
    reason = None
    if np.isfinite(formula) and distance_to_integer(formula) > settings.integrality_flag_tol:
        reason = f"formula value {formula:.6g} is not integral"
    findings[name] = Finding(name, relative_residual(complex(count), formula),
                             reason=reason, value=float(count))


def _skip(findings: Dict[str, Finding], name: str, reason: str) -> None:
    findings[name] = Finding(name, skipped=True, reason=reason)


def a1_skip_reason(g: DRGraph, cf: ClosedForms) -> Optional[str]:
    if g.a[1] != 0:
        return None
    if cf.is_bipartite():
        return "bipartite: a_1=0"
    if cf.is_almost_bipartite():
        return "almost bipartite: a_1=0"
    return "a_1=0"


def counted_z(g: DRGraph, x: int, counter: Optional[TripleCounter] = None) -> List[Optional[int]]:
    """z_1..z_D (index 0 unused) counted over adjacent y in layer i-1, z in layer i."""
    counter = counter or TripleCounter(g, x)
    z: List[Optional[int]] = [None]
    for i in range(1, g.D + 1):
        ys, zs = counter.pairs(i - 1, i, 1)
        z.append(counter.common(f"z_{i}", i - 1, ys, zs))
    return z


def verify_z_counts(g: DRGraph, p: QRacahParams, x: int,
                    counter: Optional[TripleCounter] = None) -> Dict[str, Finding]:
    counter = counter or TripleCounter(g, x)
    cf = ClosedForms.from_params(p)
    a1, eps, s1 = g.a[1], cf.epsilon, cf.s1
    skip = a1_skip_reason(g, cf)
    z = counted_z(g, x, counter)
    findings: Dict[str, Finding] = {}

    for i in range(1, g.D + 1):
        name = f"combin.z_counts.i{i}"
        if z[i] is None:
            _skip(findings, name, "no configuration")
            continue
        raw = (a1 * (s1 + cf.vt(i)) + eps * (cf.vt(i - 1) - cf.vt(i))) / cf.shell_denominator(i)
        _compare(findings, name, z[i], raw)
        findings[f"{name}.recurrence"] = Finding(f"{name}.recurrence", combination_residual([
            z[i] * cf.weight(i - 1), -(a1 - z[i]) * cf.weight(i),
            -(cf.vt(i - 1) - cf.vt(i)) / s1 * eps,
        ]))
        if skip:
            _skip(findings, f"{name}.factored", skip)
            _skip(findings, f"{name}.complement", skip)
            continue
        _compare(findings, f"{name}.factored", z[i], cf.z_factored(i))
        _compare(findings, f"{name}.complement", a1 - z[i], cf.a1_minus_z_factored(i))

    for i in range(1, g.D):
        name = f"combin.z_counts.product.i{i}"
        if skip:
            _skip(findings, name, skip)
        elif z[i] is None or z[i + 1] is None or z[2] is None:
            _skip(findings, name, "no configuration")
        else:
            findings[name] = Finding(name, relative_residual((a1 - z[i]) * z[i + 1], g.a[i] * z[2]))
    return findings


def verify_c2_splits(g: DRGraph, p: QRacahParams, x: int,
                     counter: Optional[TripleCounter] = None) -> Dict[str, Finding]:
    """Layer splits of the c_2 common neighbours of distance-2 pairs across and inside the last shell."""
    counter = counter or TripleCounter(g, x)
    cf = ClosedForms.from_params(p)
    D = g.D
    b, c, a, c2 = g.b, g.c, g.a, g.c[2]
    z = counted_z(g, x, counter)
    findings: Dict[str, Finding] = {}

    for i in range(2, D + 1):
        name = f"combin.splits.i{i}"
        a_sum = a[i] + a[i - 1] - a[1]
        _compare(findings, f"{name}.pair_count", g.p[i, 2, i - 1], c[i] * a_sum / c2)
        if g.p[i, 2, i - 1] == 0:
            _skip(findings, name, f"p^{i}_(2,{i - 1})=0")
            continue
        ys, zs = counter.pairs(i - 1, i, 2)
        lower = counter.common(f"split lower i={i}", i - 1, ys, zs)
        upper = counter.common(f"split upper i={i}", i, ys, zs)
        findings[f"{name}.sum"] = Finding(f"{name}.sum", float(abs(lower + upper - c2)))
        rational = cf.split_prev(i)
        factored = cf.split_prev_factored(i)
        _compare(findings, f"{name}.lower", lower, rational[0])
        _compare(findings, f"{name}.upper", upper, rational[1])
        _compare(findings, f"{name}.lower.factored", lower, factored[0])
        _compare(findings, f"{name}.upper.factored", upper, factored[1])
        _compare(findings, f"{name}.lower.via_a", lower, c2 * (a[i - 1] - z[i]) / a_sum)
        _compare(findings, f"{name}.upper.via_a", upper, c2 * (a[i] - a[1] + z[i]) / a_sum)

    name = "combin.splits.end"
    pD = c[D] * (b[D - 1] - 1) + a[D] * (a[D] - a[1] - 1)
    _compare(findings, "combin.splits.end.pair_count", g.p[D, 2, D], pD / c2)
    _compare(findings, "combin.splits.end.pair_count.closed", g.p[D, 2, D], cf.pD2D_closed)
    if g.p[D, 2, D] == 0:
        reason = "p^D_(2,D)=0"
        if cf.is_bipartite():
            reason += " (a^2=-1)"
        elif abs(cf.a ** 4 - cf.q ** -2) < 1e-9:
            reason += " (a^4=q^-2)"
        _skip(findings, name, reason)
        return findings
    ys, zs = counter.pairs(D, D, 2)
    lower = counter.common("end split lower", D - 1, ys, zs)
    upper = counter.common("end split upper", D, ys, zs)
    findings[f"{name}.sum"] = Finding(f"{name}.sum", float(abs(lower + upper - c2)))
    rational = cf.split_end()
    factored = cf.split_end_factored()
    pDD = int(g.p[D, 2, D])
    _compare(findings, f"{name}.lower", lower, rational[0])
    _compare(findings, f"{name}.upper", upper, rational[1])
    _compare(findings, f"{name}.lower.factored", lower, factored[0])
    _compare(findings, f"{name}.upper.factored", upper, factored[1])
    _compare(findings, f"{name}.lower.via_counts", lower,
             c[D] * (b[D - 1] - a[1] - 1 + z[D]) / pDD)
    _compare(findings, f"{name}.upper.via_counts", upper,
             (c[D] * (a[1] - z[D]) + a[D] * (a[D] - a[1] - 1)) / pDD)
    return findings


def verify_same_layer(g: DRGraph, p: QRacahParams, x: int,
                      counter: Optional[TripleCounter] = None) -> Dict[str, Finding]:
    """Common neighbours of adjacent y, z in the same shell, split by layer."""
    counter = counter or TripleCounter(g, x)
    cf = ClosedForms.from_params(p)
    findings: Dict[str, Finding] = {}
    skip = a1_skip_reason(g, cf)
    D, a1 = g.D, g.a[1]
    if skip:
        for i in range(1, D + 1):
            _skip(findings, f"combin.same_layer.i{i}", skip)
            _skip(findings, f"combin.same_layer.identity.i{i}", skip)
        return findings

    z = counted_z(g, x, counter)
    for i in range(1, D + 1):
        name = f"combin.same_layer.i{i}"
        ys, zs = counter.pairs(i, i, 1)
        if ys.size == 0:
            _skip(findings, name, "no configuration")
            continue
        down_count = counter.common(f"same layer down i={i}", i - 1, ys, zs)
        mid_count = counter.common(f"same layer mid i={i}", i, ys, zs)
        down = g.c[i] * (a1 - z[i]) / g.a[i]
        _compare(findings, f"{name}.down", down_count, down)
        if i < D:
            up_count = counter.common(f"same layer up i={i}", i + 1, ys, zs)
            up = g.b[i] * z[i + 1] / g.a[i]
            _compare(findings, f"{name}.mid", mid_count, a1 - down - up)
            _compare(findings, f"{name}.up", up_count, up)
            lhs = down * cf.X(i, i - 1) + (a1 - down - up) + up * cf.X(i, i + 1)
        else:
            _compare(findings, f"{name}.mid", mid_count, a1 - down)
            lhs = down * cf.X(D, D - 1) + (a1 - down)
        findings[f"combin.same_layer.identity.i{i}"] = Finding(
            f"combin.same_layer.identity.i{i}", relative_residual(lhs, cf.same_layer_rhs(i)))
    return findings


def predicted_equality(cf: ClosedForms, a1_zero: bool, i: int) -> bool:
    """Whether the shell inequality is tight at i for these parameters."""
    conditions = cf.special_conditions()
    if a1_zero or conditions["a=q^(D+1)"] or conditions["a^2=q^(-2D)"] or conditions["a^4=q^(-2)"]:
        return True
    if conditions["a=q^(-D-1)"]:
        return i == cf.D - 1
    return False


def verify_inequality(g: DRGraph, p: QRacahParams, x: int,
                      counter: Optional[TripleCounter] = None) -> Dict[str, Finding]:
    """The second-shell inequality with its per-vertex statistics D(z), U(z)."""
    counter = counter or TripleCounter(g, x)
    cf = ClosedForms.from_params(p)
    D = g.D
    b, c, a, c2 = g.b, g.c, g.a, g.c[2]
    z = counted_z(g, x, counter)
    findings: Dict[str, Finding] = {}

    for i in range(2, D):
        name = f"combin.inequality.i{i}"
        if z[i] is None or z[i + 1] is None or z[2] is None:
            _skip(findings, name, "no configuration")
            continue
        p_same = int(g.p[i, 2, i])
        value = p_same * (c2 - z[2] - 1) - (b[i - 1] - a[1] - 1 + z[i]) * (c[i + 1] - z[i + 1] - 1)
        xi, zeta = cf.xi(i), cf.zeta(i)
        weighted = complex(zeta / xi * value)
        findings[name] = Finding(name, max(0.0, -weighted.real) / (1.0 + abs(weighted)),
                                 value=weighted.real)
        findings[f"{name}.closed_form"] = Finding(
            f"{name}.closed_form", relative_residual(value, cf.second_shell_defect_factored(i)))

        if p_same == 0:
            findings[f"{name}.equality"] = Finding(f"{name}.equality", float(abs(value)))
            continue

        lower, upper = counter.count(i - 1), counter.count(i + 1)
        linear = 0.0
        sums = 0.0
        variance = 0.0
        constant_for = []
        for y in g.shell(x, i):
            zs = g.shell(x, i)[g.dist[y, g.shell(x, i)] == 2]
            down, up = lower[y, zs], upper[y, zs]
            linear = max(linear, float(np.max(np.abs(down * xi - up * zeta + c2))) / (1.0 + abs(c2)))
            sums = max(sums,
                       abs(down.sum() - c[i] * (b[i - 1] - a[1] - 1 + z[i])),
                       abs(up.sum() - b[i] * (c[i + 1] - z[i + 1] - 1)),
                       abs((down * up).sum() - c[i] * b[i] * (c2 - z[2] - 1)))
            spread = float(((down - down.mean()) ** 2).sum())
            variance = max(variance, relative_residual(
                spread, zeta / xi * c[i] * b[i] * value / p_same))
            constant_for.append(bool(np.all(down == down[0])))
        findings[f"{name}.linear"] = Finding(f"{name}.linear", linear)
        findings[f"{name}.sums"] = Finding(f"{name}.sums", float(sums))
        findings[f"{name}.variance"] = Finding(f"{name}.variance", variance)
        tight = value == 0
        consistent = tight == all(constant_for) == any(constant_for)
        findings[f"{name}.characterization"] = Finding(
            f"{name}.characterization", 0.0 if consistent else 1.0)
        expected = predicted_equality(cf, a[1] == 0, i)
        findings[f"{name}.case_analysis"] = Finding(
            f"{name}.case_analysis", 0.0 if expected == tight else 1.0,
            reason=None if expected == tight else f"predicted {'equality' if expected else 'strict'}")
    return findings


def condition_tags(p: QRacahParams, tol: float = 1e-9) -> List[str]:
    """Names of the distinguished parameter relations satisfied by p."""
    cf = ClosedForms(p.a, p.q, p.D)
    return [name for name, holds in cf.special_conditions(tol).items() if holds]


def shell_relation_terms(d: DualStructure, p: QRacahParams, i: int, normalized: bool = True):
    """Coefficients and matrices of the five-term relation at shell i.

    normalized=True uses 𝖠 = (A - εI)/α, otherwise A itself.
    """
    cf = ClosedForms.from_params(p)
    Estar = d.Estar
    D = d.D
    n = Estar.shape[1]
    adjacency = np.einsum("j,jxy->xy", d.spectral.theta, d.spectral.E)
    M = (adjacency - p.epsilon * np.eye(n)) / p.alpha if normalized else adjacency
    Ei = Estar[i]
    zero = np.zeros((n, n))
    prev = Ei @ M @ Estar[i - 1] @ M @ Ei if i > 0 else zero
    nxt = Ei @ M @ Estar[i + 1] @ M @ Ei if i < D else zero
    terms = [prev, Ei @ M @ Ei @ M @ Ei, nxt, Ei @ M @ Ei, Ei]
    vt, s1, K = cf.vt(i), cf.s1, cf.K
    if normalized:
        coeffs = [2 * vt - cf.beta * cf.vt(i - 1), K, 2 * vt - cf.beta * cf.vt(i + 1),
                  -K * (s1 + vt), (cf.q ** 2 - cf.q ** -2) ** 2 * vt]
    else:
        al, eps = cf.alpha, cf.epsilon
        coeffs = [cf.X(i, i - 1), 1.0, cf.X(i, i + 1), -2 * eps - al * (s1 + vt),
                  eps ** 2 + al * eps * (s1 + vt) + s1 * al ** 2 * vt]
    return coeffs, terms


def verify_shell_relation(g: DRGraph, p: QRacahParams, d: DualStructure,
                         x: Optional[int] = None) -> Dict[str, Finding]:
    """The five-term shell relation in both normalisations and its diagonal entries."""
    cf = ClosedForms.from_params(p)
    findings: Dict[str, Finding] = {}
    for i in range(g.D + 1):
        for label, normalized in (("normalized", True), ("adjacency", False)):
            coeffs, terms = shell_relation_terms(d, p, i, normalized)
            name = f"combin.matrix_eq.{label}.i{i}"
            findings[name] = Finding(name, combination_residual(
                [complex(cfc) * t for cfc, t in zip(coeffs, terms)]))
        name = f"combin.matrix_eq.diagonal.i{i}"
        findings[name] = Finding(name, combination_residual([
            g.c[i] * cf.X(i, i - 1), g.a[i], g.b[i] * cf.X(i, i + 1), cf.epsilon ** 2,
            cf.alpha * cf.epsilon * (cf.s1 + cf.vt(i)), cf.s1 * cf.alpha ** 2 * cf.vt(i),
        ]))
    return findings


def count_local_graph(g: DRGraph, x: int, tol: Optional[float] = None) -> dict:
    """Strong-regularity parameters and spectrum of the subgraph induced on Γ(x), by counting."""
    tol = settings.cluster_tol if tol is None else tol
    graph = nx.from_numpy_array(g.adjacency)
    nodes = g.shell(x, 1).tolist()
    local = graph.subgraph(nodes)
    degrees = {deg for _, deg in local.degree()}
    lambdas, mus = set(), set()
    for idx, u in enumerate(nodes):
        for v in nodes[idx + 1:]:
            shared = len(set(local[u]) & set(local[v]))
            (lambdas if local.has_edge(u, v) else mus).add(shared)

    A = nx.to_numpy_array(local, nodelist=nodes)
    evals = linalg.eigvalsh(A) if nodes else np.array([])
    spectrum = [(float(np.mean(cl)), len(cl)) for cl in cluster_values(evals, tol * max(1.0, len(nodes)))]
    spectrum.sort(key=lambda item: -item[0])

    def single(values):
        return next(iter(values)) if len(values) == 1 else None

    return {
        "v": len(nodes),
        "k": single(degrees),
        "lambda": single(lambdas),
        "mu": single(mus),
        "regular": len(degrees) <= 1,
        "strongly_regular": len(degrees) <= 1 and len(lambdas) <= 1 and len(mus) <= 1,
        "connected": bool(nodes) and nx.is_connected(local),
        "spectrum": spectrum,
    }


def local_graph_srg(g: DRGraph, p: QRacahParams, x: int) -> Dict[str, Finding]:
    """Counted local graph against the closed-form eigenvalues and multiplicities."""
    cf = ClosedForms.from_params(p)
    findings: Dict[str, Finding] = {}
    skip = a1_skip_reason(g, cf)
    names = ("combin.local_srg.strongly_regular", "combin.local_srg.eigenvalues",
             "combin.local_srg.multiplicities", "combin.local_srg.parameters")
    if skip:
        for name in names:
            _skip(findings, name, skip)
        return findings

    counted = count_local_graph(g, x)
    findings[names[0]] = Finding(names[0], 0.0 if counted["strongly_regular"] and counted["connected"] else 1.0,
                                 reason=LOCAL_GRAPH_NOTE)
    nontrivial = [(val, mult) for val, mult in counted["spectrum"] if abs(val - g.a[1]) > 1e-6]
    nontrivial += [(val, mult - 1) for val, mult in counted["spectrum"]
                   if abs(val - g.a[1]) <= 1e-6 and mult > 1]
    srg = cf.local_srg
    worst_value = worst_mult = 0.0
    for value, mult in ((srg["r"], srg["mult_r"]), (srg["s"], srg["mult_s"])):
        if not nontrivial:
            worst_value = worst_mult = float("inf")
            break
        nearest = min(nontrivial, key=lambda item: abs(item[0] - complex(value)))
        worst_value = max(worst_value, relative_residual(nearest[0], complex(value)))
        worst_mult = max(worst_mult, relative_residual(nearest[1], complex(mult)))
    findings[names[1]] = Finding(names[1], worst_value, reason=LOCAL_GRAPH_NOTE)
    findings[names[2]] = Finding(names[2], worst_mult, reason=LOCAL_GRAPH_NOTE)

    k, lam, mu = counted["k"], counted["lambda"], counted["mu"]
    if None in (k, lam, mu):
        _skip(findings, names[3], "local graph is complete or not strongly regular")
    else:
        findings[names[3]] = Finding(names[3], float(abs(k * (k - lam - 1) - (counted["v"] - k - 1) * mu)))
    return findings


def count_stats(g: DRGraph, x: int, p: Optional[QRacahParams] = None) -> CountStats:
    """Counted z_i, distance-2 splits and local graph data at x."""
    counter = TripleCounter(g, x)
    stats = CountStats(x=x, z=counted_z(g, x, counter))
    for i in range(2, g.D + 1):
        ys, zs = counter.pairs(i - 1, i, 2)
        for layer in (i - 1, i):
            stats.splits[f"i{i}.l{layer}"] = counter.common(f"split i={i}", layer, ys, zs)
    if p is not None:
        cf = ClosedForms.from_params(p)
        stats.xi = [complex(cf.xi(i)) for i in range(2, g.D)]
        stats.zeta = [complex(cf.zeta(i)) for i in range(2, g.D)]
    if g.a[1] != 0:
        stats.local_srg = count_local_graph(g, x)
    return stats


def combinatorial_checks(g: DRGraph, p: QRacahParams, d: DualStructure) -> Dict[str, Finding]:
    """Every counting check at the base vertex of d."""
    counter = TripleCounter(g, d.x)
    findings: Dict[str, Finding] = {}
    findings.update(verify_z_counts(g, p, d.x, counter))
    findings.update(verify_c2_splits(g, p, d.x, counter))
    findings.update(verify_same_layer(g, p, d.x, counter))
    findings.update(verify_inequality(g, p, d.x, counter))
    findings.update(verify_shell_relation(g, p, d, d.x))
    findings.update(local_graph_srg(g, p, d.x))
    logger.info(f"[{g.label}] counting checks at x={d.x}: {len(findings)} findings")
    return findings
