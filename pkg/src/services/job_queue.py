"""
In-memory job queue for analyses and scans run as background tasks.
"""

import uuid
import logging
from typing import Dict, Optional
from enum import Enum
from dataclasses import dataclass, field
from datetime import datetime

logger = logging.getLogger(__name__)


class JobState(str, Enum):
    """Job lifecycle states."""
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass
class Job:
    """Represents an analysis or scan job."""
    job_id: str
    kind: str = "analyze"
    state: JobState = JobState.QUEUED
    verdict: Optional[str] = None
    errors: list = field(default_factory=list)
    created_at: datetime = field(default_factory=datetime.utcnow)
    updated_at: datetime = field(default_factory=datetime.utcnow)
    result: Optional[Dict] = None  # report or candidate table


class JobQueue:
    """Simple in-memory job queue for tracking analysis and scan tasks."""

    def __init__(self):
        self.jobs: Dict[str, Job] = {}

    def create_job(self, kind: str = "analyze") -> str:
        """Create a new job and return its ID."""
        job_id = str(uuid.uuid4())
        self.jobs[job_id] = Job(job_id=job_id, kind=kind)
        logger.info(f"Created {kind} job {job_id}")
        return job_id

    def get_job(self, job_id: str) -> Optional[Job]:
        """Get job by ID."""
        return self.jobs.get(job_id)

    def _touch(self, job_id: str) -> Optional[Job]:
        job = self.get_job(job_id)
        if job:
            job.updated_at = datetime.utcnow()
        return job

    def set_running(self, job_id: str) -> bool:
        """Mark job as running."""
        job = self._touch(job_id)
        if job:
            job.state = JobState.RUNNING
            logger.info(f"Job {job_id} now running")
        return job is not None

    def add_error(self, job_id: str, error: str) -> bool:
        """Add error to job."""
        job = self._touch(job_id)
        if job:
            job.errors.append(error)
        return job is not None

    def set_done(self, job_id: str, result: Optional[Dict] = None,
                 verdict: Optional[str] = None) -> bool:
        """Mark job as done and store its result."""
        job = self._touch(job_id)
        if job:
            job.state = JobState.DONE
            job.result = result or {}
            job.verdict = verdict
            logger.info(f"Job {job_id} finished: {verdict}")
        return job is not None

    def set_failed(self, job_id: str, error: str) -> bool:
        """Mark job as failed."""
        job = self._touch(job_id)
        if job:
            job.state = JobState.FAILED
            job.errors.append(error)
            job.result = {"error": error}
            job.verdict = "fail"
            logger.error(f"Job {job_id} failed: {error}")
        return job is not None


# Global job queue instance
job_queue = JobQueue()
