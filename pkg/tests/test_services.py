"""
Tests for services (job queue, verification pipeline).
"""

import pytest
from src.models.algebra import Finding
from src.models.errors import DiameterTooSmall
from src.services import pipeline
from src.services.feasibility_scan import ScanGrid
from src.services.graph_core import cycle_graph, hypercube_graph
from src.services.job_queue import job_queue, JobState
from src.services.pipeline import (
    VerificationPipeline,
    load_input,
    run_analysis_job,
    run_scan_job,
    select_vertices,
)
from src.utils.config import settings


class TestJobQueue:
    def test_create_job(self):
        """Test job creation"""
        job_id = job_queue.create_job("scan")
        assert job_id is not None
        job = job_queue.get_job(job_id)
        assert job.state == JobState.QUEUED
        assert job.kind == "scan"

    def test_job_lifecycle(self):
        """Test job state transitions"""
        job_id = job_queue.create_job()
        job_queue.set_running(job_id)
        assert job_queue.get_job(job_id).state == JobState.RUNNING

        job_queue.add_error(job_id, "vertex 3: ConstancyViolation")
        job_queue.set_done(job_id, {"verdict": "fail"}, verdict="fail")
        job = job_queue.get_job(job_id)
        assert job.state == JobState.DONE
        assert job.verdict == "fail"
        assert job.result == {"verdict": "fail"}
        assert job.errors == ["vertex 3: ConstancyViolation"]

    def test_job_failure(self):
        """Test job failure handling"""
        job_id = job_queue.create_job()
        job_queue.set_failed(job_id, "boom")
        job = job_queue.get_job(job_id)
        assert job.state == JobState.FAILED
        assert "boom" in job.errors
        assert job.result == {"error": "boom"}

    def test_public_methods_documented(self):
        """Test every public job queue method carries a docstring"""
        for name in ("create_job", "get_job", "set_running", "add_error", "set_done", "set_failed"):
            assert getattr(job_queue, name).__doc__, name

    def test_unknown_job(self):
        """Test updates on unknown jobs report False"""
        assert job_queue.get_job("missing") is None
        assert not job_queue.set_running("missing")
        assert not job_queue.set_done("missing")


class TestLoadInput:
    def test_exactly_one_source(self):
        """Test load_input rejects zero or several sources"""
        with pytest.raises(ValueError):
            load_input()
        with pytest.raises(ValueError):
            load_input(cycle=7, hypercube=3)

    def test_short_diameter_text(self):
        """Test an edge list of diameter 2 is rejected"""
        with pytest.raises(DiameterTooSmall):
            load_input(text="4 4\n0 1\n1 2\n2 3\n0 3\n")

    def test_builtin(self):
        """Test the built-in sources"""
        assert load_input(cycle=7).n == 7
        assert load_input(hypercube=3).n == 8


class TestSelectVertices:
    def test_single(self):
        """Test the default is the base vertex alone"""
        assert select_vertices(7, 2, False) == [2]
        assert select_vertices(7, 2, False, sample_vertices=1, seed=4) == [2]

    def test_all(self):
        """Test every vertex comes after the base vertex"""
        assert select_vertices(5, 3, True) == [3, 0, 1, 2, 4]

    def test_seeded_sample(self):
        """Test the sample is deterministic per seed and excludes duplicates"""
        first = select_vertices(20, 0, False, sample_vertices=5, seed=11)
        assert first == select_vertices(20, 0, False, sample_vertices=5, seed=11)
        assert first[0] == 0 and len(set(first)) == 5
        assert first[1:] == sorted(first[1:])
        assert select_vertices(4, 1, False, sample_vertices=10, seed=0) == [1, 0, 2, 3]


class TestPipeline:
    def test_all_vertices(self):
        """Test per-vertex checks at every vertex of C7"""
        report = VerificationPipeline().run(cycle_graph(7), all_vertices=True)
        assert report.verdict == "pass"
        assert [v.x for v in report.vertices] == list(range(7))
        for v in report.vertices[1:]:
            assert v.checks["spin.base_vertex_independence"].passed
        assert all(v.is_spin_model and v.is_afforded for v in report.vertices)

    def test_base_vertex(self):
        """Test a non-zero base vertex"""
        report = VerificationPipeline().run(cycle_graph(7), base_vertex=3)
        assert report.verdict == "pass"
        assert report.vertices[0].x == 3

    def test_bruteforce_disabled(self):
        """Test the braid relation stands in for type III"""
        report = VerificationPipeline(type3_bruteforce=False).run(cycle_graph(7))
        assert report.checks["spin.typeIII"].skipped
        assert report.checks["spin.verdict"].passed
        assert "spin.oracle" not in report.checks

    def test_explicit_scale_has_no_oracle(self):
        """Test an explicit f is judged by brute force alone"""
        report = VerificationPipeline(f_mode="explicit", f=1).run(cycle_graph(7))
        assert "spin.oracle" not in report.checks
        assert not report.checks["spin.typeIII"].passed
        assert not report.checks["spin.verdict"].passed
        assert report.vertices[0].checks["spin.braid"].passed
        assert report.vertices[0].is_spin_model is False

    def test_explicit_scale_without_bruteforce(self):
        """Test an explicit f leaves the verdict undecided when brute force is off"""
        report = VerificationPipeline(type3_bruteforce=False, f_mode="explicit", f=1).run(cycle_graph(7))
        assert report.checks["spin.verdict"].skipped
        assert "spin.oracle" not in report.checks
        assert report.vertices[0].is_spin_model is None

    def test_oracle_sees_every_vertex(self, monkeypatch):
        """Test a braid failure at a later vertex reaches the oracle"""
        original = pipeline.verify_braid_and_rho

        def broken_at_three(bp, t, *args, **kwargs):
            findings = original(bp, t, *args, **kwargs)
            if bp.dual.x == 3:
                findings["spin.braid"] = Finding("spin.braid", 1.0)
            return findings

        monkeypatch.setattr(pipeline, "verify_braid_and_rho", broken_at_three)
        report = VerificationPipeline().run(cycle_graph(7), all_vertices=True)
        assert report.vertices[0].checks["spin.braid"].passed
        assert not report.vertices[3].checks["spin.braid"].passed
        assert not report.checks["spin.oracle"].passed
        assert report.checks["spin.verdict"].passed

    def test_nomura_limit(self, monkeypatch):
        """Test the Nomura check is skipped above its size limit"""
        monkeypatch.setattr(settings, "nomura_max_n", 5)
        report = VerificationPipeline().run(cycle_graph(7))
        assert report.checks["spin.nomura"].skipped
        assert "5" in report.checks["spin.nomura"].reason
        assert report.vertices[0].is_afforded is None
        assert report.vertices[0].is_spin_model is True
        assert report.verdict == "pass"

    def test_not_qracah(self):
        """Test Q4 stops at the q-Racah stage"""
        report = VerificationPipeline().run(hypercube_graph(4))
        assert report.verdict == "fail"
        assert report.qracah.error.kind == "NotQRacah"
        assert report.vertices == []

    def test_timing(self):
        """Test wall time is recorded on request"""
        report = VerificationPipeline(timing=True).run(cycle_graph(7))
        assert report.wall_time_s is not None


class TestJobs:
    def test_run_analysis_job(self):
        """Test the analysis job stores the report"""
        job_id = job_queue.create_job()
        assert run_analysis_job(job_id, {"cycle": 7}, None, False, None, True)
        job = job_queue.get_job(job_id)
        assert job.state == JobState.DONE
        assert job.verdict == "pass"
        assert job.result["graph"]["n"] == 7

    def test_run_analysis_job_bad_source(self):
        """Test a bad source fails the job"""
        job_id = job_queue.create_job()
        assert not run_analysis_job(job_id, {"cycle": 4}, None, False, None, True)
        job = job_queue.get_job(job_id)
        assert job.state == JobState.FAILED
        assert job.errors[0].startswith("DiameterTooSmall")

    def test_run_scan_job(self):
        """Test the scan job stores candidates"""
        job_id = job_queue.create_job("scan")
        assert run_scan_job(job_id, 3, ScanGrid(unit_circle_max=8, real_q_max=0))
        job = job_queue.get_job(job_id)
        assert job.state == JobState.DONE
        assert job.result["candidates"]
        assert job.verdict.endswith("candidates")
