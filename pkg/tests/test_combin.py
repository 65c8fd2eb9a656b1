"""
Tests for the triple-intersection counts and their closed forms.
"""

import itertools
from dataclasses import replace

import networkx as nx
import numpy as np
import pytest

from src.models.errors import ConstancyViolation
from src.services.closed_forms import ClosedForms
from src.services.combin_verify import (
    TripleCounter,
    combinatorial_checks,
    count_local_graph,
    count_stats,
    counted_z,
    local_graph_srg,
    shell_relation_terms,
    triple_count,
    verify_c2_splits,
    verify_inequality,
    verify_same_layer,
    verify_shell_relation,
    verify_z_counts,
)
from src.services.graph_core import analyze_drg
from src.utils.numeric import combination_residual


def johnson_graph(v: int, d: int):
    subsets = list(itertools.combinations(range(v), d))
    graph = nx.Graph()
    graph.add_nodes_from(range(len(subsets)))
    for (i, s), (j, t) in itertools.combinations(enumerate(subsets), 2):
        if len(set(s) & set(t)) == d - 1:
            graph.add_edge(i, j)
    return analyze_drg(graph, label=f"J({v},{d})")


class TestTripleCount:
    def test_cycle_counts(self, c7):
        """Test direct enumeration on C7"""
        assert triple_count(c7, 0, 1, 2, 1) == 0
        assert triple_count(c7, 0, 1, 1, 0) == 1
        assert triple_count(c7, 0, 2, 4, 3) == 1

    def test_hypercube_counts(self, q3):
        """Test direct enumeration on Q3"""
        assert triple_count(q3, 0, 4, 2, 1) == 0
        assert triple_count(q3, 0, 1, 2, 0) == 1
        assert triple_count(q3, 0, 1, 2, 2) == 1

    def test_counter_matches_enumeration(self, q3):
        """Test the per-layer matrix products agree with enumeration"""
        counter = TripleCounter(q3, 0)
        for layer in range(4):
            counts = counter.count(layer)
            for y in range(8):
                for z in range(8):
                    assert counts[y, z] == triple_count(q3, 0, y, z, layer)

    def test_layer_out_of_range(self, c7):
        """Test layers beyond D are rejected"""
        with pytest.raises(ValueError):
            triple_count(c7, 0, 1, 2, 4)

    def test_constancy_violation(self, c7):
        """Test differing counts raise ConstancyViolation with both witnesses"""
        counter = TripleCounter(c7, 0)
        with pytest.raises(ConstancyViolation) as excinfo:
            counter.common("mixed", 3, np.array([2, 5]), np.array([4, 4]))
        witnesses = excinfo.value.details["witnesses"]
        assert [w["count"] for w in witnesses] == [1, 0]

    def test_no_pairs(self, c7):
        """Test common() returns None without configurations"""
        counter = TripleCounter(c7, 0)
        ys, zs = counter.pairs(1, 2, 2)
        assert ys.size == 0
        assert counter.common("empty", 1, ys, zs) is None


class TestCountedQuantities:
    def test_cycle_z(self, c7, c8):
        """Test z_i = 0 on triangle-free cycles"""
        assert counted_z(c7, 0) == [None, 0, 0, 0]
        assert counted_z(c8, 0) == [None, 0, 0, 0, 0]

    def test_cycle_stats(self, c7):
        """Test the distance-2 splits recorded for C7"""
        stats = count_stats(c7, 0)
        assert stats.splits["i3.l2"] == 0
        assert stats.splits["i3.l3"] == 1
        assert stats.splits["i2.l1"] is None
        assert stats.local_srg is None

    def test_johnson_local_graph(self):
        """Test J(6,3) has the 3x3 rook graph as local graph"""
        g = johnson_graph(6, 3)
        assert g.D == 3
        local = count_local_graph(g, 0)
        assert (local["v"], local["k"], local["lambda"], local["mu"]) == (9, 4, 1, 2)
        assert local["strongly_regular"] and local["connected"]
        values = [round(value) for value, _ in local["spectrum"]]
        assert values == [4, 1, -2]
        assert [mult for _, mult in local["spectrum"]] == [1, 4, 4]

    def test_johnson_stats_include_local_graph(self):
        """Test count_stats counts the local graph when a_1 > 0"""
        stats = count_stats(johnson_graph(6, 3), 0)
        assert stats.local_srg["v"] == 9
        assert stats.z[1] == 0


class TestClosedFormComparisons:
    def test_cycle_z_counts(self, c7_setup):
        """Test z counts match and a_1-dependent forms are skipped for C7"""
        s = c7_setup
        findings = verify_z_counts(s.g, s.p, 0)
        for i in (1, 2, 3):
            assert findings[f"combin.z_counts.i{i}"].residual < 1e-8
            assert findings[f"combin.z_counts.i{i}.recurrence"].residual < 1e-8
            assert findings[f"combin.z_counts.i{i}.factored"].skipped
        assert findings["combin.z_counts.product.i1"].reason == "almost bipartite: a_1=0"

    def test_shifted_epsilon_mismatch(self, c7_setup):
        """Test a wrong ε makes the closed form disagree with the count"""
        s = c7_setup
        findings = verify_z_counts(s.g, replace(s.p, epsilon=s.p.epsilon + 0.3), 0)
        assert findings["combin.z_counts.i2"].residual > 1e-3

    def test_cycle_splits(self, c7_setup):
        """Test C7 splits: empty at i=2, (0, 1) at i=3, empty end split"""
        s = c7_setup
        findings = verify_c2_splits(s.g, s.p, 0)
        assert findings["combin.splits.i2"].skipped
        assert findings["combin.splits.i2"].reason == "p^2_(2,1)=0"
        for name in ("lower", "upper", "lower.factored", "upper.factored", "sum"):
            assert findings[f"combin.splits.i3.{name}"].residual < 1e-8, name
        assert findings["combin.splits.i3.upper"].value == 1.0
        assert findings["combin.splits.end"].skipped
        assert findings["combin.splits.end"].reason.startswith("p^D_(2,D)=0")
        assert findings["combin.splits.end.pair_count.closed"].residual < 1e-8

    def test_bipartite_end_split_reason(self, c8_setup):
        """Test the C8 end split is skipped as bipartite"""
        s = c8_setup
        findings = verify_c2_splits(s.g, s.p, 0)
        assert findings["combin.splits.end"].reason == "p^D_(2,D)=0 (a^2=-1)"

    def test_same_layer_skipped(self, c7_setup, c8_setup):
        """Test same-layer counts are skipped when a_1 = 0"""
        for setup, reason in ((c7_setup, "almost bipartite: a_1=0"), (c8_setup, "bipartite: a_1=0")):
            findings = verify_same_layer(setup.g, setup.p, 0)
            assert all(f.skipped and f.reason == reason for f in findings.values())

    def test_inequality_equality_branch(self, c7_setup, c8_setup):
        """Test shells with p^i_(2,i) = 0 report the equality branch"""
        findings = verify_inequality(c7_setup.g, c7_setup.p, 0)
        assert findings["combin.inequality.i2.equality"].residual == 0.0
        assert "combin.inequality.i2.linear" not in findings
        findings = verify_inequality(c8_setup.g, c8_setup.p, 0)
        assert int(c8_setup.g.p[2, 2, 2]) == 0
        assert findings["combin.inequality.i2.equality"].residual == 0.0

    def test_inequality_tight_on_c8(self, c8_setup):
        """Test the C8 inequality at i=3 is tight with constant splits"""
        s = c8_setup
        assert int(s.g.p[3, 2, 3]) == 1
        findings = verify_inequality(s.g, s.p, 0)
        assert "combin.inequality.i3.equality" not in findings
        assert findings["combin.inequality.i3"].value == 0.0
        assert findings["combin.inequality.i3.characterization"].residual == 0.0
        assert findings["combin.inequality.i3.case_analysis"].residual == 0.0
        assert findings["combin.inequality.i3.linear"].residual < 1e-8
        assert findings["combin.inequality.i3.sums"].residual == 0.0
        assert findings["combin.inequality.i3.variance"].residual < 1e-8

    @pytest.mark.parametrize("setup_name", ["c7_setup", "c8_setup"])
    def test_five_term_relation(self, setup_name, request):
        """Test the shell relation in both normalisations"""
        s = request.getfixturevalue(setup_name)
        findings = verify_shell_relation(s.g, s.p, s.d)
        assert len(findings) == 3 * (s.g.D + 1)
        for name, finding in findings.items():
            assert finding.residual < 1e-8, name

    def test_five_term_relation_sign_flip(self, c7_setup):
        """Test flipping one coefficient breaks the relation"""
        s = c7_setup
        coeffs, terms = shell_relation_terms(s.d, s.p, 3)
        coeffs[1] = -coeffs[1]
        assert combination_residual([complex(c) * t for c, t in zip(coeffs, terms)]) > 1e-3

    def test_local_graph_skipped(self, c7_setup):
        """Test local-graph checks are skipped for triangle-free graphs"""
        s = c7_setup
        findings = local_graph_srg(s.g, s.p, 0)
        assert len(findings) == 4
        assert all(f.skipped for f in findings.values())

class TestJohnsonBranches:
    """J(6,3) has a_1 = 4, so the a_1-dependent branches run; parameters are supplied."""

    @pytest.fixture(scope="class")
    def johnson(self):
        return johnson_graph(6, 3)

    def test_same_layer_counts(self, johnson, c7_setup):
        """Test same-layer splits of adjacent pairs against the count formulas"""
        findings = verify_same_layer(johnson, c7_setup.p, 0)
        for i in (1, 2):
            for part in ("down", "mid", "up"):
                finding = findings[f"combin.same_layer.i{i}.{part}"]
                assert not finding.skipped
                assert finding.residual < 1e-12, (i, part)
            assert f"combin.same_layer.identity.i{i}" in findings
        assert findings["combin.same_layer.i1.up"].value == 2.0
        assert findings["combin.same_layer.i2.down"].value == 2.0
        assert findings["combin.same_layer.i3"].reason == "no configuration"

    def test_inequality_statistics(self, johnson, c7_setup):
        """Test the per-vertex sums, variance and characterization on J(6,3)"""
        assert int(johnson.p[2, 2, 2]) == 4
        findings = verify_inequality(johnson, c7_setup.p, 0)
        assert "combin.inequality.i2.equality" not in findings
        assert findings["combin.inequality.i2"].value == 0.0
        assert findings["combin.inequality.i2.sums"].residual == 0.0
        assert findings["combin.inequality.i2.variance"].residual == 0.0
        assert findings["combin.inequality.i2.characterization"].residual == 0.0
        assert np.isfinite(findings["combin.inequality.i2.linear"].residual)

    def test_local_graph_comparisons(self, johnson, c7_setup):
        """Test the counted local graph is compared rather than skipped"""
        findings = local_graph_srg(johnson, c7_setup.p, 0)
        assert set(findings) == {"combin.local_srg.strongly_regular", "combin.local_srg.eigenvalues",
                                 "combin.local_srg.multiplicities", "combin.local_srg.parameters"}
        assert not any(f.skipped for f in findings.values())
        assert findings["combin.local_srg.strongly_regular"].residual == 0.0
        assert findings["combin.local_srg.parameters"].residual == 0.0
        assert findings["combin.local_srg.eigenvalues"].reason.startswith("local graph")

    def test_local_graph_eigenvalue_mismatch(self, johnson, c7_setup, monkeypatch):
        """Test closed-form local eigenvalues far from the counted ones give a large residual"""
        monkeypatch.setattr(ClosedForms, "local_srg", {"r": 7.0, "s": -5.0, "mult_r": 1.0, "mult_s": 2.0})
        findings = local_graph_srg(johnson, c7_setup.p, 0)
        assert findings["combin.local_srg.eigenvalues"].residual > 0.1
        assert findings["combin.local_srg.multiplicities"].residual > 0.1

        monkeypatch.setattr(ClosedForms, "local_srg", {"r": 1.0, "s": -2.0, "mult_r": 4.0, "mult_s": 4.0})
        findings = local_graph_srg(johnson, c7_setup.p, 0)
        assert findings["combin.local_srg.eigenvalues"].residual < 1e-6
        assert findings["combin.local_srg.multiplicities"].residual < 1e-12


class TestAllChecks:
    @pytest.mark.parametrize("setup_name", ["c7_setup", "c8_setup"])
    def test_all_checks_pass(self, setup_name, request):
        """Test every non-skipped counting check passes"""
        s = request.getfixturevalue(setup_name)
        for name, finding in combinatorial_checks(s.g, s.p, s.d).items():
            if not finding.skipped:
                assert finding.residual < 1e-8, name
