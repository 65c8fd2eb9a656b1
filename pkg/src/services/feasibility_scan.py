"""
Search of the (q, a) plane for parameter points whose closed-form
intersection numbers are nonnegative integers.

The scan reports candidates only; a candidate is not a graph.
"""

import csv
import json
import logging
from dataclasses import dataclass
from math import gcd
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from src.models.errors import Inadmissible
from src.models.qracah import QRacahParams
from src.models.report import CandidateReport, ComplexValue, FeasibilityCandidate
from src.services.closed_forms import ClosedForms, scalar_tables
from src.services.qracah import admissibility_margin, canonicalize
from src.utils.config import settings

logger = logging.getLogger(__name__)

FAMILY_TAGS = ("special-a", "unit-circle-q", "real-q")
CSV_COLUMNS = ["D", "q_re", "q_im", "a_re", "a_im", "family_tag", "residual", "n_implied", "arrays"]


@dataclass
class ScanGrid:
    """Grid description; a bound of 0 switches that part of the grid off."""
    unit_circle_max: int = settings.scan_unit_circle_max
    real_q_max: float = settings.scan_real_q_max
    real_q_step: float = settings.scan_real_q_step
    real_a_max: float = settings.scan_real_a_max
    real_a_step: float = settings.scan_real_a_step
    threshold: float = settings.scan_threshold
    margin: float = settings.tolerance

    def validate(self) -> None:
        if self.unit_circle_max < 0:
            raise ValueError("unit_circle_max must be nonnegative")
        if self.real_q_max and self.real_q_max <= 1:
            raise ValueError("real_q_max must exceed 1")
        if self.real_q_step <= 0 or self.real_a_step <= 0:
            raise ValueError("grid steps must be positive")
        if self.real_a_max < 0 or self.threshold < 0:
            raise ValueError("real_a_max and threshold must be nonnegative")


def integrality_distance(values, positive: bool = False) -> np.ndarray:
    """Elementwise distance from the nearest nonnegative (or positive) integer; nan counts as inf."""
    values = np.asarray(values, dtype=complex)
    floor = 1 if positive else 0
    nearest = np.maximum(np.round(values.real), floor)
    distance = np.abs(values.imag) + np.abs(values.real - nearest)
    return np.nan_to_num(distance, nan=np.inf)


def array_residual(cf: ClosedForms, D: int) -> np.ndarray:
    """Worst integrality distance over b_0..b_{D-1}, c_1..c_D, a_0..a_D and k_0..k_D."""
    parts = [integrality_distance(cf.b(i), positive=True) for i in range(D)]
    parts += [integrality_distance(cf.c(i), positive=True) for i in range(1, D + 1)]
    parts += [integrality_distance(cf.ai(i)) for i in range(D + 1)]
    parts += [integrality_distance(k, positive=True) for k in cf.valencies()]
    return np.maximum.reduce([np.broadcast_to(p, np.shape(parts[0])) for p in parts])


def _survivors(D: int, q: np.ndarray, a: np.ndarray, grid: ScanGrid) -> Iterator[Tuple[complex, complex]]:
    """Points of one grid slice passing admissibility and the integrality threshold."""
    with np.errstate(all="ignore"):
        ok = admissibility_margin(a, q, D) > grid.margin
        q, a = q[ok], a[ok]
        if q.size == 0:
            return
        # valency first: it discards almost every point
        keep = integrality_distance(ClosedForms(a, q, D).k, positive=True) < grid.threshold
        q, a = q[keep], a[keep]
        if q.size == 0:
            return
        keep = array_residual(ClosedForms(a, q, D), D) < grid.threshold
    yield from zip(q[keep].tolist(), a[keep].tolist())


def unit_circle_points(D: int, grid: ScanGrid) -> Iterator[Tuple[complex, complex]]:
    """q = exp(iπm/N), gcd(m, N) = 1, with a = q^j (covering ±q^j) and a = ±i."""
    for N in range(2, grid.unit_circle_max + 1):
        ms = np.array([m for m in range(1, 2 * N) if gcd(m, N) == 1])
        q_row = np.exp(1j * np.pi * ms / N)
        powers = q_row[:, None] ** np.arange(2 * N)[None, :]
        a_grid = np.concatenate([powers, np.full((len(ms), 1), 1j), np.full((len(ms), 1), -1j)], axis=1)
        q_grid = np.broadcast_to(q_row[:, None], a_grid.shape)
        yield from _survivors(D, q_grid.ravel(), a_grid.ravel(), grid)


def real_points(D: int, grid: ScanGrid) -> Iterator[Tuple[complex, complex]]:
    """Real q in (1, real_q_max] against real a in [-real_a_max, real_a_max] without 0."""
    if not grid.real_q_max or not grid.real_a_max:
        return
    q_values = 1.0 + grid.real_q_step * np.arange(1, int(round((grid.real_q_max - 1) / grid.real_q_step)) + 1)
    positive = grid.real_a_step * np.arange(1, int(round(grid.real_a_max / grid.real_a_step)) + 1)
    a_row = np.concatenate([-positive[::-1], positive]).astype(complex)
    for q in q_values:
        yield from _survivors(D, np.full(a_row.shape, q, dtype=complex), a_row, grid)


def family_tag(q: complex, a: complex, D: int, tol: float = 1e-9) -> str:
    if abs(a * a + 1) < tol or min(abs(a - s * q ** (e * (D + 1))) for s in (1, -1) for e in (1, -1)) < tol:
        return "special-a"
    if abs(abs(q) - 1) < tol:
        return "unit-circle-q"
    return "real-q"


def _real_list(values) -> List[float]:
    return [float(np.real(v)) for v in values]


def candidate_at(D: int, q: complex, a: complex, tag: Optional[str] = None) -> FeasibilityCandidate:
    """Full-precision candidate record at one point; raises Inadmissible."""
    params = QRacahParams(q=complex(q), a=complex(a), alpha=1.0, epsilon=0.0, D=D)
    tables = scalar_tables(params)
    k = tables.valencies()
    residual = float(max(
        integrality_distance(tables.b[:D], positive=True).max(),
        integrality_distance(tables.c[1:], positive=True).max(),
        integrality_distance(tables.a_seq).max(),
        integrality_distance(k, positive=True).max(),
    ))
    cf = ClosedForms(a, q, D)
    return FeasibilityCandidate(
        D=D, q=ComplexValue.of(q), a=ComplexValue.of(a),
        family_tag=tag or family_tag(q, a, D),
        b=_real_list(tables.b), c=_real_list(tables.c), a_seq=_real_list(tables.a_seq),
        k=_real_list(k), integrality_residual=residual,
        n_implied=float(np.real(sum(k))),
        tags=[name for name, holds in cf.special_conditions().items() if holds],
    )


def _dedupe_key(q: complex, a: complex) -> Tuple[float, ...]:
    q, a = canonicalize(q, a)
    return tuple(round(v, 9) + 0.0 for v in (q.real, q.imag, a.real, a.imag))


def scan(D: int, grid: Optional[ScanGrid] = None) -> List[FeasibilityCandidate]:
    """Candidates on the unit-circle and real grids, canonical and sorted by residual."""
    if D < 3:
        raise ValueError(f"diameter must be at least 3, got {D}")
    grid = grid or ScanGrid()
    grid.validate()

    found: Dict[Tuple[float, ...], FeasibilityCandidate] = {}
    for source in (unit_circle_points(D, grid), real_points(D, grid)):
        for q, a in source:
            key = _dedupe_key(q, a)
            if key in found:
                continue
            q, a = canonicalize(q, a)
            try:
                candidate = candidate_at(D, q, a)
            except Inadmissible:
                continue
            if candidate.integrality_residual < grid.threshold:
                found[key] = candidate

    candidates = sorted(found.values(), key=lambda c: (
        c.integrality_residual, c.n_implied, c.q.re, c.q.im, c.a.re, c.a.im))
    logger.info(f"Feasibility scan D={D}: {len(candidates)} candidates "
                f"(unit circle N <= {grid.unit_circle_max}, real q <= {grid.real_q_max})")
    return candidates


def _filter(report: CandidateReport, name: str, value, positive: bool = False) -> Optional[complex]:
    """Record `value` and fail the filter unless it is a nonnegative integer."""
    value = complex(value)
    if not np.isfinite(value):
        report.skipped[name] = "not applicable: vanishing denominator"
        return None
    report.quantities[name] = ComplexValue.of(value)
    if float(integrality_distance(value, positive)) > settings.count_tol:
        report.failed_filters[name] = f"{name} = {value.real:.6g}{value.imag:+.3g}i is not a nonnegative integer"
    return value


def evaluate_candidate(c: FeasibilityCandidate, tol: Optional[float] = None) -> CandidateReport:
    """Special-condition tags and the counting-formula filters at a candidate point."""
    tol = settings.count_tol if tol is None else tol
    D, q, a = c.D, c.q.to_complex(), c.a.to_complex()
    fresh = candidate_at(D, q, a, c.family_tag)
    cf = ClosedForms(a, q, D)
    report = CandidateReport(candidate=fresh, tags=list(fresh.tags))
    if fresh.integrality_residual > tol:
        report.failed_filters["arrays"] = f"integrality residual {fresh.integrality_residual:.3e}"

    with np.errstate(all="ignore"):
        for i in range(1, D + 1):
            _filter(report, f"z_{i}", cf.z(i))
        for i in range(2, D + 1):
            pair_count = _filter(report, f"p^{i}_(2,{i - 1})", cf.p2_prev(i))
            if pair_count is not None and abs(pair_count) > tol:
                lower, upper = cf.split_prev(i)
                _filter(report, f"split_{i}.lower", lower)
                _filter(report, f"split_{i}.upper", upper)
        for i in range(2, D):
            _filter(report, f"p^{i}_(2,{i})", cf.p2_same(i))
        end = _filter(report, f"p^{D}_(2,{D})", cf.p2_same(D))
        if end is not None and abs(end) > tol:
            lower, upper = cf.split_end()
            _filter(report, "split_end.lower", lower)
            _filter(report, "split_end.upper", upper)

        if cf.a1_vanishes():
            report.skipped["local_srg"] = cf.a1_skip_reason() or "a_1=0"
        else:
            srg = cf.local_srg
            for name in ("mult_r", "mult_s"):
                _filter(report, f"local_srg.{name}", srg[name])
            for name in ("r", "s"):
                value = complex(srg[name])
                report.quantities[f"local_srg.{name}"] = ComplexValue.of(value)
                if abs(value.imag) > tol:
                    report.failed_filters[f"local_srg.{name}"] = "eigenvalue is not real"

    report.feasible = not report.failed_filters
    logger.info(f"Candidate D={D} q={q:.6g} a={a:.6g}: "
                f"{'feasible' if report.feasible else 'filtered by ' + ', '.join(report.failed_filters)}")
    return report


def write_json(candidates: List[FeasibilityCandidate], path: Path) -> None:
    Path(path).write_text(json.dumps([c.model_dump() for c in candidates], indent=2) + "\n")


def _arrays_cell(c: FeasibilityCandidate) -> str:
    def fmt(values):
        return ",".join(f"{v:.6g}" for v in values)
    return f"b=({fmt(c.b)}) c=({fmt(c.c)}) a=({fmt(c.a_seq)}) k=({fmt(c.k)})"


def write_csv(candidates: List[FeasibilityCandidate], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for c in candidates:
            writer.writerow([c.D, repr(c.q.re), repr(c.q.im), repr(c.a.re), repr(c.a.im),
                             c.family_tag, f"{c.integrality_residual:.3e}", f"{c.n_implied:.6g}",
                             _arrays_cell(c)])
