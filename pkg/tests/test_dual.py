"""
Tests for the dual Bose-Mesner algebra at a base vertex.
"""

import numpy as np
import pytest

from src.services.dual_subconstituent import dual_structure, ordered_spectral, verify_dual_identities


class TestDualStructure:
    def test_dual_idempotents_partition_by_distance(self, c7_setup):
        """Test E*_i is the diagonal indicator of the i-th shell"""
        g, d = c7_setup.g, c7_setup.d
        assert np.allclose(d.Estar.sum(axis=0), np.eye(g.n))
        traces = [int(round(np.trace(E))) for E in d.Estar]
        assert traces == g.k

    def test_construction_residuals(self, c7_setup, c8_setup):
        """Test A*_i agrees with both eigenmatrix expansions"""
        for setup in (c7_setup, c8_setup):
            assert setup.d.construction_residual < 1e-10
            assert setup.d.krein_product_residual < 1e-10

    def test_astar_diagonal_is_dual_eigenvalue(self, c7_setup):
        """Test A* restricted to shell i equals θ*_i = θ_i"""
        g, d = c7_setup.g, c7_setup.d
        diag = np.diag(d.AstarMat)
        theta = d.spectral.theta
        for i in range(g.D + 1):
            assert np.allclose(diag[g.dist[d.x] == i], theta[i])

    def test_other_base_vertex(self, c7_setup):
        """Test the dual structure at x = 3 is a relabelling of x = 0"""
        s = c7_setup.s
        d3 = dual_structure(c7_setup.g, s, c7_setup.o, 3)
        assert d3.x == 3
        assert d3.Estar[0][3, 3] == 1.0

    def test_base_vertex_out_of_range(self, c7_setup):
        """Test x outside the vertex set is rejected"""
        with pytest.raises(ValueError):
            dual_structure(c7_setup.g, c7_setup.s, c7_setup.o, 7)

    def test_ordered_spectral_passthrough(self, c7_setup):
        """Test ordered_spectral leaves already-ordered data untouched"""
        r = c7_setup.d.spectral
        assert ordered_spectral(r, c7_setup.o) is r


class TestDualIdentities:
    @pytest.mark.parametrize("setup_name", ["c7_setup", "c8_setup"])
    def test_all_identities_hold(self, setup_name, request):
        """Test every identity linking M and M*(x)"""
        setup = request.getfixturevalue(setup_name)
        findings = verify_dual_identities(setup.g, setup.s, setup.d, setup.p)
        for name in ("dual.vanishing_pattern.zero", "dual.kill.M", "dual.kill.Mstar",
                     "dual.tridiagonal.A", "dual.tridiagonal.Astar", "dual.generates"):
            assert name in findings
        for name, finding in findings.items():
            assert finding.residual < 1e-8, name

    def test_scalars_from_eigenvalues(self, c7_setup):
        """Test the tridiagonal relations with β, γ, ϱ read off θ"""
        findings = verify_dual_identities(c7_setup.g, c7_setup.s, c7_setup.d)
        assert findings["dual.tridiagonal.A"].residual < 1e-8
        assert findings["dual.tridiagonal.Astar"].residual < 1e-8
