import logging
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.models.algebra import Finding
from src.models.errors import AssumptionFails, ConstancyViolation, DiameterTooSmall, NotQRacah, SpinDRGError
from src.models.graph import DRGraph
from src.models.qracah import QRacahParams
from src.models.report import (
    CheckResult,
    ComplexValue,
    ErrorInfo,
    GraphSummary,
    ParamRecord,
    SpectralSummary,
    VertexReport,
    VerificationReport,
    ZEigenSummary,
)
from src.models.spectral import QPolyOrdering, SpectralData
from src.services.central_z import build_abc, build_Z, verify_askey_wilson, z_spectrum_check
from src.services.closed_forms import ClosedForms
from src.services.combin_verify import LOCAL_GRAPH_NOTE, combinatorial_checks, condition_tags
from src.services.dual_subconstituent import dual_structure, verify_dual_identities
from src.services.graph_core import cycle_graph, graph_checks, graph_from_text, hypercube_graph, load_graph
from src.services.job_queue import job_queue
from src.services.qracah import fit_qracah
from src.services.spectral import (
    dual_array_check,
    eigendecompose,
    find_qpoly_orderings,
    krein_and_eigenmatrices,
    spectral_checks,
)
from src.services.spinmodel import (
    boltzmann_pair,
    is_afforded,
    nomura_membership,
    spin_verdict,
    verify_braid_and_rho,
    verify_intertwiners,
    verify_scaled_star_triangle,
    verify_type2_and_expansions,
    verify_wminus,
)
from src.utils.config import settings
from src.utils.numeric import relative_residual

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.3.0"


def load_input(cycle: Optional[int] = None, hypercube: Optional[int] = None,
               path: Optional[str] = None, text: Optional[str] = None) -> DRGraph:
    """Exactly one graph source; raises ValueError otherwise."""
    given = [v is not None for v in (cycle, hypercube, path, text)]
    if sum(given) != 1:
        raise ValueError("exactly one of cycle, hypercube, path or edge text is required")
    if cycle is not None:
        return cycle_graph(cycle)
    if hypercube is not None:
        return hypercube_graph(hypercube)
    g = load_graph(path) if path is not None else graph_from_text(text)
    if g.D < 3:
        raise DiameterTooSmall(f"{g.label} has diameter {g.D} < 3", {"D": g.D})
    return g


def select_vertices(n: int, x0: int, all_vertices: bool = False,
                    sample_vertices: Optional[int] = None, seed: Optional[int] = None) -> List[int]:
    """Base vertex first, then every vertex or a seeded sample of the others."""
    if all_vertices:
        return [x0] + [x for x in range(n) if x != x0]
    if not sample_vertices or sample_vertices <= 1:
        return [x0]
    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    others = np.array([x for x in range(n) if x != x0])
    picked = rng.choice(others, size=min(sample_vertices - 1, others.size), replace=False)
    return [x0] + sorted(int(x) for x in picked)


class VerificationPipeline:
    """Runs graph-core, spectral, q-Racah fitting and the per-vertex checks.

    Hard errors stop the run and are stored in the report; everything else
    becomes a named check.
    """

    def __init__(self, tolerance: Optional[float] = None, type3_bruteforce: bool = True,
                 timing: bool = False, f_mode: str = "theorem", f: Optional[complex] = None):
        self.tolerance = settings.tolerance if tolerance is None else tolerance
        self.type3_bruteforce = type3_bruteforce
        self.timing = timing
        self.f_mode = f_mode
        self.f = f
        self._stage = "graph"

    def _result(self, finding: Finding) -> CheckResult:
        if finding.skipped:
            return CheckResult(skipped=True, reason=finding.reason)
        residual = finding.residual
        if residual is None or not np.isfinite(residual):
            return CheckResult(passed=False, reason=finding.reason or "non-finite residual")
        return CheckResult(residual=float(residual), passed=bool(residual < self.tolerance),
                           reason=finding.reason)

    def _record(self, checks: Dict[str, CheckResult], findings: Dict[str, Finding]) -> None:
        for name, finding in findings.items():
            checks[name] = self._result(finding)

    def _check(self, checks: Dict[str, CheckResult], name: str, residual: float,
               reason: Optional[str] = None) -> None:
        checks[name] = self._result(Finding(name, float(residual), reason=reason))

    def run(self, g: DRGraph, base_vertex: Optional[int] = None, all_vertices: bool = False,
            sample_vertices: Optional[int] = None, seed: Optional[int] = None) -> VerificationReport:
        start = time.perf_counter()
        report = VerificationReport(tool_version=TOOL_VERSION, tolerance=self.tolerance)
        self._stage = "graph"
        try:
            self._analyze(g, report, base_vertex, all_vertices, sample_vertices, seed)
        except SpinDRGError as e:
            logger.error(f"[{g.label}] {e.kind}: {e.message}")
            report.error = ErrorInfo(**e.to_dict())
            if self._stage == "qracah":
                report.qracah.error = report.error
        report.verdict = self._verdict(report)
        if self.timing:
            report.wall_time_s = round(time.perf_counter() - start, 3)
        logger.info(f"[{g.label}] verdict: {report.verdict}")
        return report

    def _verdict(self, report: VerificationReport) -> str:
        if report.error is not None or any(v.error is not None for v in report.vertices):
            return "fail"
        return "fail" if report.failing_checks() else "pass"

    def _analyze(self, g: DRGraph, report: VerificationReport, base_vertex: Optional[int],
                 all_vertices: bool, sample_vertices: Optional[int] = None,
                 seed: Optional[int] = None) -> None:
        report.graph = GraphSummary(label=g.label, n=g.n, D=g.D, k=list(g.k),
                                    b=list(g.b), c=list(g.c), a=list(g.a))
        self._record(report.checks, graph_checks(g))
        self._stage = "spectral"

        s = krein_and_eigenmatrices(g, eigendecompose(g))
        self._record(report.checks, spectral_checks(g, s))
        orderings = find_qpoly_orderings(s)
        self_dual = [o for o in orderings if o.is_formally_self_dual]
        report.spectral = SpectralSummary(
            theta=[float(t) for t in s.theta],
            multiplicities=[int(round(m)) for m in s.kstar],
            qpoly_orderings=[list(o.perm) for o in orderings],
            self_dual_orderings=[list(o.perm) for o in self_dual],
        )
        logger.info(f"[{g.label}] {len(orderings)} Q-polynomial ordering(s), {len(self_dual)} formally self-dual")
        self._stage = "qracah"
        if not self_dual:
            raise NotQRacah("no formally self-dual Q-polynomial ordering",
                            {"qpoly_orderings": report.spectral.qpoly_orderings})

        x0 = 0 if base_vertex is None else base_vertex
        if not 0 <= x0 < g.n:
            raise ValueError(f"base vertex {x0} outside 0..{g.n - 1}")
        o, p = self._choose(g, s, self_dual, x0, report)
        r = s.reorder(o.perm)
        self._stage = "vertex"
        report.spectral.chosen_ordering = list(o.perm)
        report.checks["spectral.dual_array"] = self._result(dual_array_check(r))
        self._qracah_checks(g, p, report)

        vertices = select_vertices(g.n, x0, all_vertices, sample_vertices, seed)
        W0 = None
        for x in vertices:
            vertex, W = self._vertex(g, s, o, p, x)
            report.vertices.append(vertex)
            if W is None:
                continue
            if W0 is None:
                W0 = W
            else:
                vertex.checks["spin.base_vertex_independence"] = self._result(
                    Finding("spin.base_vertex_independence", relative_residual(W, W0)))
        if W0 is not None:
            self._spin_checks(g, W0, report)
        spin_ok = report.checks.get("spin.verdict")
        nomura = report.checks.get("spin.nomura")
        for vertex in report.vertices:
            if vertex.error is None and spin_ok is not None:
                vertex.is_spin_model = spin_ok.passed
                vertex.is_afforded = None if nomura.skipped else nomura.passed

    def _choose(self, g: DRGraph, s: SpectralData, self_dual: List[QPolyOrdering], x: int,
                report: VerificationReport) -> Tuple[QPolyOrdering, QRacahParams]:
        """First (ordering, record) pair whose central-element gate passes at x."""
        first_error: Optional[SpinDRGError] = None
        best: Optional[AssumptionFails] = None
        candidates = []
        for o in self_dual:
            try:
                fits = fit_qracah(s.reorder(o.perm).theta)
            except SpinDRGError as e:
                first_error = first_error or e
                continue
            candidates.extend((o, p) for p in fits)
        if not candidates:
            raise first_error

        for o, p in candidates:
            record = ParamRecord(ordering=list(o.perm), q=ComplexValue.of(p.q), a=ComplexValue.of(p.a),
                                 alpha=ComplexValue.of(p.alpha), epsilon=ComplexValue.of(p.epsilon),
                                 fit_residual=p.fit_residual)
            report.qracah.fits.append(record)
            d = dual_structure(g, s, o, x)
            try:
                z = build_Z(g, s, d, p, tol=self.tolerance)
            except AssumptionFails as e:
                record.gate_residual = e.residual
                if best is None or e.residual < best.residual:
                    best = e
                continue
            record.gate_residual = z.lhs_rhs_residual
            report.qracah.chosen = record
            logger.info(f"[{g.label}] chose ordering {o.perm} with q={p.q:.6g}, a={p.a:.6g}")
            return o, p
        raise AssumptionFails(
            f"[{g.label}] no parameter record passes the central-element gate",
            residual=best.residual, dominant=best.dominant,
            details={"records": len(candidates)},
        )

    def _qracah_checks(self, g: DRGraph, p: QRacahParams, report: VerificationReport) -> None:
        cf = ClosedForms.from_params(p)
        checks = report.checks
        self._check(checks, "qracah.fit", p.fit_residual)
        with np.errstate(all="ignore"):
            self._check(checks, "qracah.alpha_closed", relative_residual(p.alpha, cf.alpha_closed))
            self._check(checks, "qracah.epsilon_closed",
                        relative_residual(p.epsilon, cf.epsilon_closed))
            worst = 0.0
            for i in range(g.D + 1):
                worst = max(worst,
                            relative_residual(g.b[i], cf.b(i)),
                            relative_residual(g.c[i], cf.c(i)),
                            relative_residual(g.a[i], cf.ai(i)))
        self._check(checks, "qracah.arrays", worst)

    def _vertex(self, g: DRGraph, s: SpectralData, o: QPolyOrdering, p: QRacahParams,
                x: int) -> Tuple[VertexReport, Optional[np.ndarray]]:
        vertex = VertexReport(x=x)
        checks = vertex.checks
        W = None
        try:
            d = dual_structure(g, s, o, x)
            self._check(checks, "dual.construction", d.construction_residual)
            self._check(checks, "dual.krein_product", d.krein_product_residual)
            self._record(checks, verify_dual_identities(g, s, d, p))

            z = build_Z(g, s, d, p, tol=self.tolerance)
            self._check(checks, "z.gate", z.lhs_rhs_residual)
            self._check(checks, "z.central", z.centrality_residual)
            self._check(checks, "z.on_E", max(z.zOnE))
            self._check(checks, "z.on_Estar", max(z.zOnEstar))

            t = build_abc(d, s, p, z)
            for name, residual in t.residuals.items():
                self._check(checks, name, residual)
            self._record(checks, verify_askey_wilson(t, z.Z, p))
            for match in z_spectrum_check(z.Z, p):
                vertex.z_spectrum.append(ZEigenSummary(
                    eigenvalue=ComplexValue.of(match.eigenvalue), multiplicity=match.multiplicity,
                    matches=[list(rd) for rd in match.matches]))
                if not match.matched:
                    logger.warning(f"[{g.label}] vertex {x}: Z eigenvalue {match.eigenvalue:.6g} matches no (r, d)")
                    vertex.notes.append(f"Z eigenvalue {match.eigenvalue:.6g} matches no (r, d)")

            bp = boltzmann_pair(s, d, p, f_mode=self.f_mode, f=self.f)
            W = bp.W
            self._record(checks, verify_intertwiners(bp, t))
            self._record(checks, verify_braid_and_rho(bp, t))
            self._record(checks, verify_type2_and_expansions(bp, g))
            if g.n <= settings.type3_max_n:
                self._check(checks, "spin.scaled_star_triangle", verify_scaled_star_triangle(bp))
            else:
                checks["spin.scaled_star_triangle"] = CheckResult(skipped=True, reason="n exceeds the brute-force limit")

            self._record(checks, combinatorial_checks(g, p, d))
            tags = condition_tags(p)
            if tags:
                vertex.notes.append("parameter conditions: " + ", ".join(tags))
            if g.a[1] != 0:
                vertex.notes.append(LOCAL_GRAPH_NOTE)
        except ConstancyViolation as e:
            logger.error(f"[{g.label}] {e.message}: {e.details}")
            vertex.error = ErrorInfo(**e.to_dict())
        except SpinDRGError as e:
            logger.error(f"[{g.label}] vertex {x}: {e.kind}: {e.message}")
            vertex.error = ErrorInfo(**e.to_dict())
        return vertex, W

    def _spin_checks(self, g: DRGraph, W: np.ndarray, report: VerificationReport) -> None:
        """Checks on W alone; W does not depend on the base vertex."""
        checks = report.checks
        bruteforce = self.type3_bruteforce and g.n <= settings.type3_max_n
        if self.type3_bruteforce and not bruteforce:
            checks["spin.typeIII"] = CheckResult(
                skipped=True, reason=f"n = {g.n} exceeds the brute-force limit {settings.type3_max_n}; "
                                     "braid relation substitutes")
        elif not self.type3_bruteforce:
            checks["spin.typeIII"] = CheckResult(skipped=True, reason="brute-force check disabled")

        verdict = spin_verdict(W, tol=self.tolerance, bruteforce=bruteforce)
        self._check(checks, "spin.symmetry", verdict.residuals["symmetry"])
        self._check(checks, "spin.typeII", verdict.residuals["typeII"])
        if bruteforce and "typeIII_max" in verdict.residuals:
            self._check(checks, "spin.typeIII", verdict.residuals["typeIII_max"])

        afforded = None
        if g.n <= settings.nomura_max_n:
            membership = nomura_membership(W, g)
            self._check(checks, "spin.nomura", max(membership.values()))
            afforded = is_afforded(membership, self.tolerance)
        else:
            checks["spin.nomura"] = CheckResult(
                skipped=True, reason=f"n = {g.n} exceeds the Nomura check limit {settings.nomura_max_n}")

        wminus = verify_wminus(W, tol=self.tolerance, bruteforce=bruteforce)
        self._check(checks, "spin.wminus.symmetry", wminus.residuals["symmetry"])
        self._check(checks, "spin.wminus.typeII", wminus.residuals["typeII"])
        if "typeIII_max" in wminus.residuals:
            self._check(checks, "spin.wminus.typeIII", wminus.residuals["typeIII_max"])

        # the braid relation holds for every f, so it decides type III only with the theorem's f
        braid = [v.checks["spin.braid"] for v in report.vertices if "spin.braid" in v.checks]
        braid_ok = bool(braid) and all(c.passed for c in braid)
        structural = verdict.residuals["symmetry"] < self.tolerance and verdict.residuals["typeII"] < self.tolerance
        theorem = self.f_mode == "theorem"
        if bruteforce and theorem:
            oracle = verdict.is_spin_model == (structural and braid_ok)
            self._check(checks, "spin.oracle", 0.0 if oracle else 1.0,
                        reason=None if oracle else "braid-based and brute-force verdicts disagree")
        if bruteforce:
            spin = verdict.is_spin_model
        elif theorem:
            spin = structural and braid_ok
        else:
            checks["spin.verdict"] = CheckResult(
                skipped=True, reason="explicit f: the braid relation does not fix the scale")
            logger.info(f"[{g.label}] spin model: undecided without brute force, afforded: {afforded}")
            return
        checks["spin.verdict"] = CheckResult(residual=0.0 if spin else 1.0, passed=spin)
        logger.info(f"[{g.label}] spin model: {spin}, afforded: {afforded}")


def run_analysis_job(job_id: str, source: dict, base_vertex: Optional[int], all_vertices: bool,
                     tolerance: Optional[float], type3_bruteforce: bool) -> bool:
    """Background task body: build the graph, run the pipeline and store the report."""
    try:
        job_queue.set_running(job_id)
        g = load_input(**source)
        logger.info(f"[Job {job_id}] analysing {g.label} (n={g.n}, D={g.D})")
        runner = VerificationPipeline(tolerance=tolerance, type3_bruteforce=type3_bruteforce)
        report = runner.run(g, base_vertex=base_vertex, all_vertices=all_vertices)
        if report.error is not None:
            job_queue.add_error(job_id, f"{report.error.kind}: {report.error.message}")
        job_queue.set_done(job_id, report.model_dump(mode="json"), verdict=report.verdict)
        return True
    except SpinDRGError as e:
        job_queue.set_failed(job_id, f"{e.kind}: {e.message}")
    except Exception as e:
        logger.error(f"[Job {job_id}] analysis failed: {e}", exc_info=True)
        job_queue.set_failed(job_id, f"Analysis failed: {str(e)}")
    return False


def run_scan_job(job_id: str, D: int, grid) -> bool:
    from src.services.feasibility_scan import scan

    try:
        job_queue.set_running(job_id)
        candidates = scan(D, grid)
        job_queue.set_done(job_id, {"D": D, "candidates": [c.model_dump(mode="json") for c in candidates]},
                           verdict=f"{len(candidates)} candidates")
        return True
    except Exception as e:
        logger.error(f"[Job {job_id}] scan failed: {e}", exc_info=True)
        job_queue.set_failed(job_id, f"Scan failed: {str(e)}")
    return False
