"""
Tests for API routes.
"""

from fastapi.testclient import TestClient
from src.main import app
from src.services.job_queue import job_queue

client = TestClient(app)


class TestHealth:
    def test_health_check(self):
        """Test /health endpoint returns 200"""
        response = client.get("/health")
        assert response.status_code == 200
        data = response.json()
        assert data["status"] == "healthy"
        assert data["version"]

    def test_root(self):
        """Test /api lists the endpoints"""
        response = client.get("/api")
        assert response.status_code == 200
        assert "/analyze" in response.json()["endpoints"]


class TestAnalyze:
    def test_analyze_cycle(self):
        """Test POST /analyze runs the C7 analysis to a passing report"""
        response = client.post("/analyze", json={"cycle": 7})
        assert response.status_code == 200
        data = response.json()
        assert data["kind"] == "analyze"
        job_id = data["job_id"]

        # background tasks run before TestClient returns
        status = client.get(f"/status/{job_id}").json()
        assert status["state"] == "done"
        assert status["verdict"] == "pass"

        report = client.get(f"/report/{job_id}")
        assert report.status_code == 200
        result = report.json()["result"]
        assert result["verdict"] == "pass"
        assert result["graph"]["D"] == 3

    def test_analyze_edges(self):
        """Test POST /analyze accepts the edge-list format"""
        edges = "7 7\n" + "\n".join(f"{min(i, (i + 1) % 7)} {max(i, (i + 1) % 7)}" for i in range(7)) + "\n"
        job_id = client.post("/analyze", json={"edges": edges}).json()["job_id"]
        assert client.get(f"/status/{job_id}").json()["verdict"] == "pass"

    def test_analyze_hypercube_fails(self):
        """Test Q4 finishes with verdict fail and an error message"""
        job_id = client.post("/analyze", json={"hypercube": 4}).json()["job_id"]
        status = client.get(f"/status/{job_id}").json()
        assert status["state"] == "done"
        assert status["verdict"] == "fail"
        assert any(e.startswith("NotQRacah") for e in status["errors"])

    def test_analyze_bad_edges(self):
        """Test an unparsable edge list marks the job failed"""
        job_id = client.post("/analyze", json={"edges": "3 1\n0 0\n"}).json()["job_id"]
        status = client.get(f"/status/{job_id}").json()
        assert status["state"] == "failed"
        assert status["errors"][0].startswith("ParseError")

    def test_analyze_requires_one_source(self):
        """Test POST /analyze with no source or two sources"""
        assert client.post("/analyze", json={}).status_code == 400
        assert client.post("/analyze", json={"cycle": 7, "hypercube": 3}).status_code == 400

    def test_analyze_small_cycle(self):
        """Test cycle below 7 fails validation"""
        response = client.post("/analyze", json={"cycle": 5})
        assert response.status_code == 422


class TestStatus:
    def test_status_unknown_job(self):
        """Test GET /status with unknown job_id"""
        response = client.get("/status/does-not-exist")
        assert response.status_code == 404

    def test_report_unknown_job(self):
        """Test GET /report with unknown job_id"""
        response = client.get("/report/does-not-exist")
        assert response.status_code == 404

    def test_report_queued_job(self):
        """Test GET /report before the job finishes"""
        job_id = job_queue.create_job()
        response = client.get(f"/report/{job_id}")
        assert response.status_code == 400
        assert "queued" in response.json()["detail"]


class TestIdentities:
    def test_identities(self):
        """Test POST /identities returns a passing harness report"""
        response = client.post("/identities", json={"diameter": 3, "samples": 10, "seed": 7})
        assert response.status_code == 200
        data = response.json()
        assert data["passed"]
        assert data["samples"] == 10

    def test_identities_small_diameter(self):
        """Test diameter below 3 fails validation"""
        response = client.post("/identities", json={"diameter": 2})
        assert response.status_code == 422


class TestScan:
    def test_scan_job(self):
        """Test POST /scan stores the candidate table"""
        response = client.post("/scan", json={"diameter": 3, "unit_circle_max": 8, "real_q_max": 0})
        assert response.status_code == 200
        job_id = response.json()["job_id"]
        status = client.get(f"/status/{job_id}").json()
        assert status["state"] == "done"
        result = client.get(f"/report/{job_id}").json()["result"]
        assert result["D"] == 3
        assert any(abs(c["n_implied"] - 7) < 1e-9 for c in result["candidates"])

    def test_scan_bad_grid(self):
        """Test an invalid real grid is rejected"""
        response = client.post("/scan", json={"diameter": 3, "real_q_max": 0.5})
        assert response.status_code == 400
