"""
Tests for the spectral side: idempotents, eigenmatrices, Krein parameters, orderings.
"""

import numpy as np
import pytest

from src.models.spectral import QPolyOrdering
from src.services.graph_core import hypercube_graph
from src.services.spectral import (
    check_self_dual,
    dual_array_check,
    eigendecompose,
    find_qpoly_orderings,
    krein_and_eigenmatrices,
    spectral_checks,
)


def spectral_of(g):
    return krein_and_eigenmatrices(g, eigendecompose(g))


class TestEigendecompose:
    def test_cycle_spectrum(self, c7):
        """Test C7 eigenvalues are 2cos(2πi/7) in the base ordering"""
        s = spectral_of(c7)
        expected = 2 * np.cos(2 * np.pi * np.arange(4) / 7)
        assert np.allclose(s.theta, expected)
        assert s.kstar.tolist() == [1, 2, 2, 2]
        assert s.ordering == (0, 1, 2, 3)

    def test_hypercube_spectrum(self):
        """Test Q4 eigenvalues and binomial multiplicities"""
        s = spectral_of(hypercube_graph(4))
        assert np.allclose(s.theta, [4, 2, 0, -2, -4])
        assert s.kstar.tolist() == [1, 4, 6, 4, 1]

    @pytest.mark.parametrize("fixture", ["c7", "c8", "q3"])
    def test_spectral_identities(self, fixture, request):
        """Test every spectral identity holds to working precision"""
        g = request.getfixturevalue(fixture)
        findings = spectral_checks(g, spectral_of(g))
        assert "spectral.krein_expansion" in findings
        for name, finding in findings.items():
            assert finding.residual < 1e-8, name


class TestOrderings:
    def test_cycle_natural_ordering_self_dual(self, c7):
        """Test the natural ordering of C7 is Q-polynomial and formally self-dual"""
        orderings = find_qpoly_orderings(spectral_of(c7))
        assert orderings[0].perm == (0, 1, 2, 3)
        assert orderings[0].is_formally_self_dual
        assert [o.perm for o in orderings] == sorted(o.perm for o in orderings)

    def test_self_dual_krein_equals_intersection_numbers(self, c7):
        """Test q^h_ij = p^h_ij under a self-dual ordering"""
        s = spectral_of(c7)
        assert np.allclose(s.reorder((0, 1, 2, 3)).krein, c7.p, atol=1e-8)

    def test_swapped_ordering_not_self_dual(self, c7):
        """Test swapping E_1 and E_2 breaks P = Q"""
        check = check_self_dual(spectral_of(c7), QPolyOrdering(perm=(0, 2, 1, 3)))
        assert not check.is_self_dual
        assert check.residual > 0.5

    def test_hypercube_self_dual(self):
        """Test Q4 is formally self-dual under its natural ordering"""
        orderings = find_qpoly_orderings(spectral_of(hypercube_graph(4)))
        natural = [o for o in orderings if o.perm == (0, 1, 2, 3, 4)]
        assert natural and natural[0].is_formally_self_dual

    def test_dual_array(self, c8):
        """Test k* = c*_i + a*_i + b*_i for C8"""
        s = spectral_of(c8)
        assert dual_array_check(s.reorder((0, 1, 2, 3, 4))).residual < 1e-8

    def test_reorder_tracks_base(self, c7):
        """Test reorder composes with the recorded ordering"""
        s = spectral_of(c7)
        twice = s.reorder((0, 2, 3, 1)).reorder((0, 2, 3, 1))
        assert twice.ordering == (0, 3, 1, 2)
        assert np.allclose(twice.theta, s.theta[[0, 3, 1, 2]])
