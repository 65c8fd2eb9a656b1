from pydantic import BaseModel, Field
from typing import Dict, List, Optional


class AnalyzeRequest(BaseModel):
    """Request body for POST /analyze; give exactly one graph source."""
    cycle: Optional[int] = Field(None, ge=7, description="Analyse the N-cycle")
    hypercube: Optional[int] = Field(None, ge=3, description="Analyse the d-cube")
    edges: Optional[str] = Field(None, description="Graph in the 'n m' + edge-line format")
    base_vertex: Optional[int] = Field(None, ge=0, description="Base vertex x (default 0)")
    all_vertices: bool = Field(default=False, description="Run per-vertex checks at every vertex")
    tolerance: Optional[float] = Field(None, gt=0, description="Pass/fail tolerance")
    type3_bruteforce: bool = Field(default=True, description="Brute-force star-triangle check")


class JobResponse(BaseModel):
    """Response for the job-creating endpoints"""
    job_id: str = Field(..., description="Unique job identifier")
    kind: str = Field(..., description="analyze|scan")


class ScanRequest(BaseModel):
    """Request body for POST /scan"""
    diameter: int = Field(..., ge=3, description="Diameter D")
    unit_circle_max: Optional[int] = Field(None, ge=0, description="Largest denominator N of q = exp(iπm/N)")
    real_q_max: Optional[float] = Field(None, ge=0, description="Largest real q (0 disables the real grid)")
    real_q_step: Optional[float] = Field(None, gt=0)
    real_a_max: Optional[float] = Field(None, ge=0)
    real_a_step: Optional[float] = Field(None, gt=0)
    threshold: Optional[float] = Field(None, ge=0, description="Integrality threshold")


class IdentitiesRequest(BaseModel):
    """Request body for POST /identities"""
    diameter: int = Field(..., ge=3, description="Diameter D")
    samples: int = Field(default=100, ge=1, le=100000, description="Random parameter points")
    seed: int = Field(default=0, description="Seed of the sample stream")


class StatusResponse(BaseModel):
    """Response for GET /status/{job_id}"""
    state: str = Field(..., description="Job state: queued|running|done|failed")
    kind: str = Field(default="analyze")
    verdict: Optional[str] = Field(None, description="pass|fail for analyses, candidate count for scans")
    errors: List[str] = Field(default_factory=list, description="Error messages if any")


class ReportResponse(BaseModel):
    """Response for GET /report/{job_id}"""
    job_id: str
    kind: str
    result: Dict = Field(default_factory=dict)


class HealthResponse(BaseModel):
    """Response for GET /health"""
    status: str = Field(default="healthy", description="Service status")
    version: str = Field(..., description="Tool version")
