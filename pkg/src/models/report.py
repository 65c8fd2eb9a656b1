"""
Serializable report models. Everything written by the CLI or returned by the
HTTP service is one of these pydantic models.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class CheckResult(BaseModel):
    residual: Optional[float] = None
    passed: Optional[bool] = None
    skipped: bool = False
    reason: Optional[str] = None


class ErrorInfo(BaseModel):
    kind: str
    message: str
    details: Dict = Field(default_factory=dict)


class GraphSummary(BaseModel):
    label: str
    n: int
    D: int
    k: List[int]
    b: List[int]
    c: List[int]
    a: List[int]


class SpectralSummary(BaseModel):
    theta: List[float] = Field(default_factory=list)
    multiplicities: List[int] = Field(default_factory=list)
    qpoly_orderings: List[List[int]] = Field(default_factory=list)
    self_dual_orderings: List[List[int]] = Field(default_factory=list)
    chosen_ordering: Optional[List[int]] = None


class ComplexValue(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, value: complex) -> "ComplexValue":
        value = complex(value)
        return cls(re=float(value.real), im=float(value.imag))

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


class ParamRecord(BaseModel):
    ordering: List[int]
    q: ComplexValue
    a: ComplexValue
    alpha: ComplexValue
    epsilon: ComplexValue
    fit_residual: float
    gate_residual: Optional[float] = None


class QRacahSummary(BaseModel):
    fits: List[ParamRecord] = Field(default_factory=list)
    chosen: Optional[ParamRecord] = None
    f: Optional[ComplexValue] = None
    f_convention: str = "principal square root"
    error: Optional[ErrorInfo] = None


class ZEigenSummary(BaseModel):
    eigenvalue: ComplexValue
    multiplicity: int
    matches: List[List[int]] = Field(default_factory=list)


class VertexReport(BaseModel):
    x: int
    checks: Dict[str, CheckResult] = Field(default_factory=dict)
    z_spectrum: List[ZEigenSummary] = Field(default_factory=list)
    is_spin_model: Optional[bool] = None
    is_afforded: Optional[bool] = None
    notes: List[str] = Field(default_factory=list)
    error: Optional[ErrorInfo] = None


class VerificationReport(BaseModel):
    tool_version: str
    tolerance: float
    graph: Optional[GraphSummary] = None
    spectral: SpectralSummary = Field(default_factory=SpectralSummary)
    qracah: QRacahSummary = Field(default_factory=QRacahSummary)
    checks: Dict[str, CheckResult] = Field(default_factory=dict)
    vertices: List[VertexReport] = Field(default_factory=list)
    verdict: str = "fail"
    error: Optional[ErrorInfo] = None
    wall_time_s: Optional[float] = None

    def failing_checks(self) -> List[str]:
        names = [name for name, c in self.checks.items() if c.passed is False]
        for v in self.vertices:
            names.extend(f"x{v.x}.{name}" for name, c in v.checks.items() if c.passed is False)
        return names


class SpinVerdict(BaseModel):
    residuals: Dict[str, float] = Field(default_factory=dict)
    is_spin_model: bool = False
    is_afforded: Optional[bool] = None


class HarnessReport(BaseModel):
    D: int
    samples: int
    seed: int
    tolerance: float
    max_residuals: Dict[str, float] = Field(default_factory=dict)
    skipped: Dict[str, int] = Field(default_factory=dict)
    passed: bool = False


class FeasibilityCandidate(BaseModel):
    D: int
    q: ComplexValue
    a: ComplexValue
    family_tag: str
    b: List[float]
    c: List[float]
    a_seq: List[float]
    k: List[float]
    integrality_residual: float
    n_implied: float
    tags: List[str] = Field(default_factory=list)


class CandidateReport(BaseModel):
    candidate: FeasibilityCandidate
    tags: List[str] = Field(default_factory=list)
    quantities: Dict[str, ComplexValue] = Field(default_factory=dict)
    failed_filters: Dict[str, str] = Field(default_factory=dict)
    skipped: Dict[str, str] = Field(default_factory=dict)
    feasible: bool = False
