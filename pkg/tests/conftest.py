"""
Shared fixtures: small distance-regular graphs and the algebraic data built on them.
"""

from dataclasses import dataclass

import pytest

from src.models.algebra import ABCTriple, CentralElement, DualStructure
from src.models.errors import AssumptionFails
from src.models.graph import DRGraph
from src.models.qracah import QRacahParams
from src.models.spectral import QPolyOrdering, SpectralData
from src.services.central_z import build_abc, build_Z
from src.services.dual_subconstituent import dual_structure
from src.services.graph_core import cycle_graph, hypercube_graph
from src.services.qracah import fit_qracah
from src.services.spectral import eigendecompose, find_qpoly_orderings, krein_and_eigenmatrices


@dataclass
class Prepared:
    g: DRGraph
    s: SpectralData
    o: QPolyOrdering
    p: QRacahParams
    d: DualStructure
    z: CentralElement
    t: ABCTriple


def prepare(g: DRGraph, x: int = 0) -> Prepared:
    """First self-dual ordering and parameter record that pass the Z gate at x."""
    s = krein_and_eigenmatrices(g, eigendecompose(g))
    for o in find_qpoly_orderings(s):
        if not o.is_formally_self_dual:
            continue
        d = dual_structure(g, s, o, x)
        for p in fit_qracah(s.reorder(o.perm).theta):
            try:
                z = build_Z(g, s, d, p)
            except AssumptionFails:
                continue
            return Prepared(g=g, s=s, o=o, p=p, d=d, z=z, t=build_abc(d, s, p, z))
    raise AssertionError(f"no parameter record passes the gate for {g.label}")


@pytest.fixture(scope="session")
def c7() -> DRGraph:
    return cycle_graph(7)


@pytest.fixture(scope="session")
def c8() -> DRGraph:
    return cycle_graph(8)


@pytest.fixture(scope="session")
def q3() -> DRGraph:
    return hypercube_graph(3)


@pytest.fixture(scope="session")
def c7_setup(c7) -> Prepared:
    return prepare(c7)


@pytest.fixture(scope="session")
def c8_setup(c8) -> Prepared:
    return prepare(c8)
