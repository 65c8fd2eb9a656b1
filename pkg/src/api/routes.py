import logging
from fastapi import APIRouter, HTTPException, BackgroundTasks
from src.api.schemas import (
    AnalyzeRequest,
    HealthResponse,
    IdentitiesRequest,
    JobResponse,
    ReportResponse,
    ScanRequest,
    StatusResponse,
)
from src.models.report import HarnessReport
from src.services.feasibility_scan import ScanGrid
from src.services.harness import identity_harness
from src.services.job_queue import job_queue, JobState
from src.services.pipeline import TOOL_VERSION, run_analysis_job, run_scan_job

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/analyze", response_model=JobResponse)
async def analyze(request: AnalyzeRequest, background_tasks: BackgroundTasks):
    try:
        sources = {"cycle": request.cycle, "hypercube": request.hypercube, "text": request.edges}
        given = {k: v for k, v in sources.items() if v is not None}
        if len(given) != 1:
            raise HTTPException(status_code=400, detail="give exactly one of cycle, hypercube, edges")

        job_id = job_queue.create_job("analyze")
        background_tasks.add_task(
            run_analysis_job,
            job_id,
            given,
            request.base_vertex,
            request.all_vertices,
            request.tolerance,
            request.type3_bruteforce,
        )
        return JobResponse(job_id=job_id, kind="analyze")

    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Analyze request failed: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/scan", response_model=JobResponse)
async def scan(request: ScanRequest, background_tasks: BackgroundTasks):
    try:
        overrides = request.model_dump(exclude={"diameter"}, exclude_none=True)
        grid = ScanGrid(**overrides)
        try:
            grid.validate()
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e))

        job_id = job_queue.create_job("scan")
        background_tasks.add_task(run_scan_job, job_id, request.diameter, grid)
        return JobResponse(job_id=job_id, kind="scan")

    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Scan request failed: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/identities", response_model=HarnessReport)
async def identities(request: IdentitiesRequest):
    try:
        return identity_harness(request.diameter, request.samples, request.seed)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        logger.error(f"Identity harness failed: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/status/{job_id}", response_model=StatusResponse)
async def status(job_id: str):
    job = job_queue.get_job(job_id)
    if not job:
        raise HTTPException(status_code=404, detail=f"Job {job_id} not found")
    return StatusResponse(state=job.state.value, kind=job.kind, verdict=job.verdict,
                          errors=job.errors[:10])


@router.get("/report/{job_id}", response_model=ReportResponse)
async def report(job_id: str):
    job = job_queue.get_job(job_id)
    if not job:
        raise HTTPException(status_code=404, detail=f"Job {job_id} not found")
    if job.state not in (JobState.DONE, JobState.FAILED):
        raise HTTPException(
            status_code=400,
            detail=f"Job state is {job.state.value}, must be 'done'"
        )
    return ReportResponse(job_id=job_id, kind=job.kind, result=job.result or {})


@router.get("/health", response_model=HealthResponse)
async def health():
    return HealthResponse(status="healthy", version=TOOL_VERSION)
