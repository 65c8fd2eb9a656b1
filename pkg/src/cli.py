"""
Command-line surface: analyze, scan and identities.

Exit codes: 0 pass, 1 verification failure, 2 usage or parse error.
Reports go to stdout (or --output); logs go to stderr.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.models.errors import DiameterTooSmall, ParseError, SpinDRGError
from src.models.report import ErrorInfo, VerificationReport
from src.services.feasibility_scan import ScanGrid, scan, write_csv, write_json
from src.services.harness import identity_harness
from src.services.pipeline import TOOL_VERSION, VerificationPipeline, load_input
from src.services.spinmodel import F_MODES
from src.utils.config import settings

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def format_text(report: VerificationReport) -> str:
    """Human-readable table of the dotted check names."""
    lines = [f"spindrg {report.tool_version}  tolerance={report.tolerance:g}  verdict={report.verdict}"]
    if report.graph:
        g = report.graph
        lines.append(f"graph {g.label}: n={g.n} D={g.D} b={g.b} c={g.c}")
    if report.error:
        lines.append(f"error {report.error.kind}: {report.error.message}")
    if report.qracah.chosen:
        ch = report.qracah.chosen
        lines.append(f"q={ch.q.to_complex():.6g} a={ch.a.to_complex():.6g} "
                     f"alpha={ch.alpha.to_complex():.6g} epsilon={ch.epsilon.to_complex():.6g}")

    def rows(checks, prefix=""):
        for name, c in checks.items():
            if c.skipped:
                status, value = "skip", c.reason or ""
            else:
                status = "ok" if c.passed else "FAIL"
                value = "-" if c.residual is None else f"{c.residual:.3e}"
            lines.append(f"  {prefix + name:<48} {status:<5} {value}")

    rows(report.checks)
    for v in report.vertices:
        lines.append(f"vertex {v.x}: spin model={v.is_spin_model} afforded={v.is_afforded}")
        if v.error:
            lines.append(f"  error {v.error.kind}: {v.error.message}")
        rows(v.checks, prefix=f"x{v.x}.")
        for note in v.notes:
            lines.append(f"  note: {note}")
    return "\n".join(lines) + "\n"


def emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    try:
        g = load_input(cycle=args.cycle, hypercube=args.hypercube, path=args.file)
    except SpinDRGError as e:
        logger.error(f"{e.kind}: {e.message}")
        report = VerificationReport(tool_version=TOOL_VERSION,
                                    tolerance=args.tolerance or settings.tolerance,
                                    error=ErrorInfo(**e.to_dict()))
        emit(render(report, args.format), args.output)
        return EXIT_USAGE if isinstance(e, (ParseError, DiameterTooSmall)) else EXIT_FAIL

    if args.base_vertex is not None and not 0 <= args.base_vertex < g.n:
        logger.error(f"base vertex {args.base_vertex} outside 0..{g.n - 1}")
        return EXIT_USAGE

    runner = VerificationPipeline(tolerance=args.tolerance, type3_bruteforce=not args.no_type3_bruteforce,
                                  timing=args.timing, f_mode=args.f_mode, f=args.f)
    report = runner.run(g, base_vertex=args.base_vertex, all_vertices=args.all_vertices,
                        sample_vertices=args.sample_vertices, seed=args.seed)
    emit(render(report, args.format), args.output)
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


def render(report: VerificationReport, fmt: str) -> str:
    if fmt == "text":
        return format_text(report)
    return report.model_dump_json(indent=2) + "\n"


def cmd_scan(args) -> int:
    grid = ScanGrid(
        unit_circle_max=args.unit_circle_max,
        real_q_max=0.0 if args.no_real else args.real_q_max,
        real_q_step=args.real_q_step,
        real_a_max=args.real_a_max,
        real_a_step=args.real_a_step,
        threshold=args.threshold,
    )
    candidates = scan(args.diameter, grid)
    prefix = Path(args.out_prefix or f"scan_D{args.diameter}")
    write_json(candidates, prefix.with_suffix(".json"))
    write_csv(candidates, prefix.with_suffix(".csv"))

    tags = {}
    for c in candidates:
        tags[c.family_tag] = tags.get(c.family_tag, 0) + 1
    summary = ", ".join(f"{tag}: {count}" for tag, count in sorted(tags.items())) or "none"
    sys.stdout.write(f"D={args.diameter}: {len(candidates)} candidates ({summary}) -> "
                     f"{prefix.with_suffix('.json')}, {prefix.with_suffix('.csv')}\n")
    return EXIT_PASS


def cmd_identities(args) -> int:
    report = identity_harness(args.diameter, args.samples, args.seed)
    sys.stdout.write(json.dumps(report.model_dump(), indent=2, sort_keys=True) + "\n")
    return EXIT_PASS if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spindrg", description="Spin-model toolkit for distance-regular graphs")
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level (stderr)")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Verify a graph end to end")
    source = analyze.add_mutually_exclusive_group(required=True)
    source.add_argument("--cycle", type=int, metavar="N", help="The N-cycle (N >= 7)")
    source.add_argument("--hypercube", type=int, metavar="d", help="The d-cube (d >= 3)")
    source.add_argument("--file", type=str, metavar="PATH", help="Graph file: 'n m' header then 'u v' lines")
    analyze.add_argument("--base-vertex", type=int, default=None, dest="base_vertex")
    analyze.add_argument("--all-vertices", action="store_true", dest="all_vertices",
                         help="Per-vertex checks at every vertex instead of one representative")
    analyze.add_argument("--tolerance", type=float, default=None,
                         help=f"Pass/fail tolerance (default: {settings.tolerance:g})")
    analyze.add_argument("--no-type3-bruteforce", action="store_true", dest="no_type3_bruteforce")
    analyze.add_argument("--format", choices=["json", "text"], default="json")
    analyze.add_argument("--sample-vertices", type=int, default=None, dest="sample_vertices",
                         help="Check the base vertex plus a seeded sample of K-1 others")
    analyze.add_argument("--seed", type=int, default=settings.default_seed,
                         help="Seed for --sample-vertices")
    analyze.add_argument("--timing", action="store_true", help="Record wall time in the report")
    analyze.add_argument("--f-mode", choices=F_MODES, default="theorem", dest="f_mode")
    analyze.add_argument("--f", type=complex, default=None, help="Scale f for --f-mode explicit")
    analyze.add_argument("--output", type=str, default=None, help="Write the report here instead of stdout")
    analyze.set_defaults(handler=cmd_analyze)

    scan_p = sub.add_parser("scan", help="Feasibility scan of the (q, a) plane")
    scan_p.add_argument("--diameter", type=int, required=True)
    scan_p.add_argument("--unit-circle-max", type=int, default=settings.scan_unit_circle_max, dest="unit_circle_max")
    scan_p.add_argument("--real-q-max", type=float, default=settings.scan_real_q_max, dest="real_q_max")
    scan_p.add_argument("--real-q-step", type=float, default=settings.scan_real_q_step, dest="real_q_step")
    scan_p.add_argument("--real-a-max", type=float, default=settings.scan_real_a_max, dest="real_a_max")
    scan_p.add_argument("--real-a-step", type=float, default=settings.scan_real_a_step, dest="real_a_step")
    scan_p.add_argument("--threshold", type=float, default=settings.scan_threshold)
    scan_p.add_argument("--no-real", action="store_true", dest="no_real", help="Skip the real (q, a) grid")
    scan_p.add_argument("--out-prefix", type=str, default=None, dest="out_prefix",
                        help="Output path prefix for the .json and .csv tables")
    scan_p.set_defaults(handler=cmd_scan)

    ident = sub.add_parser("identities", help="Closed-form identity harness")
    ident.add_argument("--diameter", type=int, required=True)
    ident.add_argument("--samples", type=int, default=1000)
    ident.add_argument("--seed", type=int, default=settings.default_seed)
    ident.set_defaults(handler=cmd_identities)
    return parser


def validate(parser: argparse.ArgumentParser, args) -> None:
    """Flag checks argparse cannot express; parser.error exits with status 2."""
    if args.command in ("scan", "identities") and args.diameter < 3:
        parser.error(f"--diameter must be at least 3, got {args.diameter}")
    if args.command == "identities" and args.samples < 1:
        parser.error(f"--samples must be positive, got {args.samples}")
    if args.command == "scan":
        try:
            ScanGrid(unit_circle_max=args.unit_circle_max, real_q_max=0.0 if args.no_real else args.real_q_max,
                     real_q_step=args.real_q_step, real_a_max=args.real_a_max,
                     real_a_step=args.real_a_step, threshold=args.threshold).validate()
        except ValueError as e:
            parser.error(str(e))
    if args.command == "analyze" and args.tolerance is not None and args.tolerance <= 0:
        parser.error("--tolerance must be positive")
    if args.command == "analyze" and args.sample_vertices is not None and args.sample_vertices < 1:
        parser.error(f"--sample-vertices must be positive, got {args.sample_vertices}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    validate(parser, args)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
