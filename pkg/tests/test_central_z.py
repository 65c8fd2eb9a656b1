"""
Tests for the central element Z and the Askey-Wilson relations.
"""

from dataclasses import replace

import numpy as np
import pytest

from src.models.errors import AssumptionFails
from src.services.central_z import (
    build_Z,
    normalized_pair,
    verify_askey_wilson,
    z_eigenvalue_formula,
    z_spectrum_check,
)


class TestCentralElement:
    def test_cycle_z_vanishes(self, c7_setup):
        """Test Z = 0 for the 7-cycle"""
        z = c7_setup.z
        assert np.linalg.norm(z.Z) < 1e-8
        assert z.lhs_rhs_residual < 1e-8

    @pytest.mark.parametrize("setup_name", ["c7_setup", "c8_setup"])
    def test_z_is_central(self, setup_name, request):
        """Test Z commutes with A, A* and every idempotent"""
        z = request.getfixturevalue(setup_name).z
        assert z.centrality_residual < 1e-8
        assert max(z.zOnE) < 1e-8
        assert max(z.zOnEstar) < 1e-8

    def test_gate_rejects_shifted_epsilon(self, c7_setup):
        """Test a wrong ε makes the two projected sums disagree"""
        s = c7_setup
        wrong = replace(s.p, epsilon=s.p.epsilon + 0.5)
        with pytest.raises(AssumptionFails) as excinfo:
            build_Z(s.g, s.s, s.d, wrong)
        assert excinfo.value.residual > 1e-3
        assert excinfo.value.details["x"] == 0

    def test_normalized_pair_spectra(self, c7_setup):
        """Test 𝖠 has eigenvalues ϑ_i"""
        s = c7_setup
        Amat, _ = normalized_pair(s.g, s.d, s.p)
        evals = np.sort_complex(np.linalg.eigvals(Amat))
        expected = np.sort_complex(np.repeat(s.p.vartheta, [1, 2, 2, 2]))
        assert np.allclose(evals, expected, atol=1e-8)


class TestAskeyWilson:
    @pytest.mark.parametrize("setup_name", ["c7_setup", "c8_setup"])
    def test_relations_hold(self, setup_name, request):
        """Test the cyclic and Askey-Wilson relations"""
        s = request.getfixturevalue(setup_name)
        assert all(r < 1e-8 for r in s.t.residuals.values())
        findings = verify_askey_wilson(s.t, s.z.Z, s.p)
        assert len(findings) == 5
        for name, finding in findings.items():
            assert finding.residual < 1e-8, name


class TestZSpectrum:
    def test_cycle_eigenvalue_matched(self, c7_setup):
        """Test the zero eigenvalue of Z matches an (r, d) pair"""
        matches = z_spectrum_check(c7_setup.z.Z, c7_setup.p)
        assert len(matches) == 1
        assert matches[0].multiplicity == 7
        assert matches[0].matched
        assert abs(z_eigenvalue_formula(c7_setup.p, *matches[0].matches[0])) < 1e-8

    def test_shifted_eigenvalue_unmatched(self, c7_setup):
        """Test Z + I has eigenvalue 1, which no (r, d) predicts"""
        matches = z_spectrum_check(c7_setup.z.Z + np.eye(7), c7_setup.p)
        assert len(matches) == 1
        assert abs(matches[0].eigenvalue - 1) < 1e-8
        assert not matches[0].matched
