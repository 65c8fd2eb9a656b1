"""
Graph ingestion, distances and distance-regularity certification.

All arithmetic in this module is exact integer arithmetic.
"""

import logging
from pathlib import Path
from typing import Dict, Union

import networkx as nx
import numpy as np

from src.models.algebra import Finding
from src.models.errors import (
    DiameterTooSmall,
    NotConnected,
    NotDistanceRegular,
    ParseError,
)
from src.models.graph import DRGraph

logger = logging.getLogger(__name__)


def cycle_graph(N: int) -> DRGraph:
    """The N-cycle; N >= 7 so that the diameter is at least 3."""
    if N < 7:
        raise DiameterTooSmall(f"cycle C{N} has diameter {N // 2} < 3", {"N": N})
    return analyze_drg(nx.cycle_graph(N), label=f"C{N}")


def hypercube_graph(d: int) -> DRGraph:
    """The d-cube; vertex labels are the binary words read as integers."""
    if d < 3:
        raise DiameterTooSmall(f"hypercube Q{d} has diameter {d} < 3", {"d": d})
    cube = nx.convert_node_labels_to_integers(nx.hypercube_graph(d), ordering="sorted")
    return analyze_drg(cube, label=f"Q{d}")


def parse_graph_text(text: str) -> nx.Graph:
    """Parse the "n m" header plus "u v" edge-line format."""
    header = None
    edges = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected two integers, got {line!r}",
                             {"line": lineno})
        try:
            first, second = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer token in {line!r}", {"line": lineno})

        if header is None:
            if first <= 0 or second < 0:
                raise ParseError(f"line {lineno}: invalid header {line!r}", {"line": lineno})
            header = (first, second)
            continue

        n = header[0]
        if first == second:
            raise ParseError(f"line {lineno}: self-loop at vertex {first}", {"line": lineno})
        if not (0 <= first < second < n):
            raise ParseError(f"line {lineno}: edge {first} {second} must satisfy 0 <= u < v < {n}",
                             {"line": lineno})
        if (first, second) in seen:
            raise ParseError(f"line {lineno}: duplicate edge {first} {second}", {"line": lineno})
        seen.add((first, second))
        edges.append((first, second))

    if header is None:
        raise ParseError("missing 'n m' header")
    n, m = header
    if len(edges) != m:
        raise ParseError(f"header declares {m} edges, found {len(edges)}",
                         {"declared": m, "found": len(edges)})

    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    return graph


def load_graph(path: Union[str, Path]) -> DRGraph:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot read {path}: {e}", {"path": str(path)})
    logger.info(f"Loading graph from {path}")
    return analyze_drg(parse_graph_text(text), label=path.stem)


def graph_from_text(text: str, label: str = "graph") -> DRGraph:
    return analyze_drg(parse_graph_text(text), label=label)


def format_graph(g: DRGraph) -> str:
    edges = g.edges()
    lines = [f"# {g.label}", f"{g.n} {len(edges)}"]
    lines.extend(f"{u} {v}" for u, v in edges)
    return "\n".join(lines) + "\n"


def write_graph(g: DRGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(format_graph(g), encoding="utf-8")
    return path


def _distance_matrix(graph: nx.Graph, n: int) -> np.ndarray:
    dist = np.zeros((n, n), dtype=np.int64)
    for source, lengths in nx.all_pairs_shortest_path_length(graph):
        for target, length in lengths.items():
            dist[source, target] = length
    return dist


def analyze_drg(graph: Union[nx.Graph, np.ndarray], label: str = "graph") -> DRGraph:
    """Certify distance-regularity by exhaustive counting.

    Raises NotDistanceRegular with the first inconsistent pair found when
    scanning classes (h, i, j) in lexicographic order and pairs (y, z) in
    row-major order.
    """
    if isinstance(graph, np.ndarray):
        graph = nx.from_numpy_array(graph)
    if sorted(graph.nodes()) != list(range(graph.number_of_nodes())):
        graph = nx.convert_node_labels_to_integers(graph, ordering="sorted")

    n = graph.number_of_nodes()
    if n == 0:
        raise NotConnected("graph has no vertices")
    if nx.number_of_selfloops(graph) > 0:
        raise ParseError("graph has self-loops")
    if not nx.is_connected(graph):
        raise NotConnected(f"{label} is not connected",
                           {"components": nx.number_connected_components(graph)})

    adjacency = nx.to_numpy_array(graph, nodelist=range(n), dtype=np.int64)
    dist = _distance_matrix(graph, n)
    D = int(dist.max())
    A = [(dist == i).astype(np.int64) for i in range(D + 1)]
    products = [[A[i] @ A[j] for j in range(D + 1)] for i in range(D + 1)]

    p = np.zeros((D + 1, D + 1, D + 1), dtype=np.int64)
    for h in range(D + 1):
        ys, zs = np.nonzero(dist == h)
        for i in range(D + 1):
            for j in range(D + 1):
                values = products[i][j][ys, zs]
                bad = np.flatnonzero(values != values[0])
                if bad.size:
                    w = int(bad[0])
                    witness = {
                        "h": h, "i": i, "j": j,
                        "y": int(ys[0]), "z": int(zs[0]),
                        "y2": int(ys[w]), "z2": int(zs[w]),
                        "count": int(values[0]), "count2": int(values[w]),
                    }
                    raise NotDistanceRegular(
                        f"{label}: p^{h}_{i},{j} is {values[0]} at ({ys[0]},{zs[0]}) "
                        f"but {values[w]} at ({ys[w]},{zs[w]})",
                        witness,
                    )
                p[h, i, j] = values[0]

    k = [int(p[0, i, i]) for i in range(D + 1)]
    b = [int(p[i, 1, i + 1]) if i < D else 0 for i in range(D + 1)]
    c = [int(p[i, 1, i - 1]) if i > 0 else 0 for i in range(D + 1)]
    a = [int(p[i, 1, i]) for i in range(D + 1)]

    valency = k[1] if D > 0 else 0
    for i in range(D + 1):
        if c[i] + a[i] + b[i] != valency:
            raise NotDistanceRegular(f"{label}: c_{i} + a_{i} + b_{i} != k", {"i": i})
        num = int(np.prod(b[:i], dtype=object)) if i else 1
        den = int(np.prod(c[1:i + 1], dtype=object)) if i else 1
        if k[i] * den != num:
            raise NotDistanceRegular(f"{label}: valency formula fails at i={i}", {"i": i})

    logger.info(f"[{label}] distance-regular: n={n}, D={D}, "
                f"b={b[:-1]}, c={c[1:]}")
    return DRGraph(n=n, adjacency=adjacency, dist=dist, D=D, p=p,
                   k=k, b=b, c=c, a=a, label=label)


def graph_checks(g: DRGraph) -> Dict[str, Finding]:
    """Exact identities of the Bose-Mesner algebra, reported as residuals."""
    A = g.distance_matrices()
    D = g.D
    findings: Dict[str, Finding] = {}

    findings["graph.valency_sum"] = Finding("graph.valency_sum", float(abs(sum(g.k) - g.n)))

    partition = sum(A[1:], A[0])
    findings["graph.distance_partition"] = Finding(
        "graph.distance_partition", float(np.abs(partition - 1).sum()))

    worst = 0
    for i in range(D + 1):
        for j in range(D + 1):
            expected = sum(g.p[h, i, j] * A[h] for h in range(D + 1))
            worst = max(worst, int(np.abs(A[i] @ A[j] - expected).max()))
    findings["graph.bose_mesner_product"] = Finding("graph.bose_mesner_product", float(worst))

    violations = 0
    for h in range(D + 1):
        for i in range(D + 1):
            for j in range(D + 1):
                largest = max(h, i, j)
                rest = h + i + j - largest
                if largest > rest and g.p[h, i, j] != 0:
                    violations += 1
                if largest == rest and g.p[h, i, j] == 0:
                    violations += 1
                if g.p[h, i, j] != g.p[h, j, i]:
                    violations += 1
    findings["graph.triangle_pattern"] = Finding("graph.triangle_pattern", float(violations))
    return findings

