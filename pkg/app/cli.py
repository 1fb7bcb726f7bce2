"""Command-line entry point: ``python -m app <subcommand>``.

Exit status is 0 on success, 1 when a check fails (a JSON diagnostic is printed)
and 2 for unreadable input or bad arguments.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from app.core.config import settings
from app.core.errors import (
    USAGE_ERRORS,
    ExperimentError,
    TransductionCounterexample,
    WordProblemError,
)
from app.core.logging import configure_logging
from app.services import csv_proc, experiments, graphs, parikh, schreier
from app.services.oracles import parse_group_spec
from app.services.reports import dump_json, run_record, write_json

logger = logging.getLogger(__name__)


def _emit(doc, out: Optional[str]) -> None:
    if out:
        write_json(out, doc)
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(dump_json(doc))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_eval(args) -> int:
    oracle = parse_group_spec(args.group)
    identity = oracle.decide(oracle.alphabet.word(args.word))
    if args.format == "json":
        _emit({"group": args.group, "word": args.word, "identity": identity}, None)
    else:
        print("identity" if identity else "non-identity")
    return 0


def cmd_slice(args) -> int:
    columns, points, count = parikh.slice_points(args.group, args.regex, args.max_len, args.project.split(","), args.budget)
    if args.out and args.out.endswith(".json"):
        _emit({"columns": columns, "points": [list(p) for p in points], "words": count}, args.out)
    elif args.out:
        csv_proc.write_points_csv(args.out, points, columns)
    else:
        sys.stdout.write(csv_proc.points_to_csv(points, columns))
    return 0


def cmd_graph(args) -> int:
    g = graphs.load_graph(args.input)
    _emit(graphs.graph_report(g, args.mode), args.out)
    return 0


def _experiment_kwargs(args) -> Dict[str, int]:
    return {k: getattr(args, k) for k in experiments.EXPERIMENT_PARAMETERS[args.id] if getattr(args, k) is not None}


def cmd_experiment(args) -> int:
    out = args.out or str(Path(settings.REPORTS_DIR) / f"{args.id.lower()}.json")
    if args.id == "geometries":
        _emit({"geometries": experiments.geometry_verdicts()}, out)
        return 0
    kwargs = _experiment_kwargs(args)
    record = None
    try:
        with run_record(args.id, kwargs, timing=args.timing) as record:
            report = experiments.EXPERIMENTS[args.id](**kwargs)
            record["results"] = report.to_document()
    except (ExperimentError, TransductionCounterexample):
        _emit(record, out)
        sys.stdout.write(dump_json({"status": record["status"], "error": record["error"], "diff": record.get("diff")}))
        return 1
    _emit(record, out)
    if args.csv:
        csv_proc.write_points_csv(args.csv, report.points, report.projection)
    return 0


def cmd_schreier(args) -> int:
    action_doc = json.loads(Path(args.action).read_text(encoding="utf-8"))
    out = args.out or str(Path(settings.REPORTS_DIR) / "schreier.json")
    try:
        record = schreier.schreier_run(args.group, action_doc, args.bound, args.corrupt, args.timing)
    except TransductionCounterexample as e:
        diagnostic = {"status": "failed", "error": str(e), "witness": [e.first, e.second]}
        _emit(diagnostic, out)
        sys.stdout.write(dump_json(diagnostic))
        return 1
    _emit(record, out)
    return 0


def cmd_fit(args) -> int:
    _, points_in = csv_proc.read_points_csv(args.points)
    points_out = []
    if args.box:
        upper = [int(x) for x in args.box.split(",")]
        points_in = [p for p in points_in if all(0 <= x <= u for x, u in zip(p, upper))]
        points_out = sorted(parikh.box_complement(points_in, upper))
    if args.points_out:
        _, points_out = csv_proc.read_points_csv(args.points_out)
    doc = parikh.fit_report(points_in, points_out, args.components, args.generators, args.coord_bound, args.certificate)
    _emit(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wordproblems", description="Word problems of groups as formal languages")
    parser.add_argument("--log-level", default=None, help="override WP_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="decide whether a word is the identity")
    p.add_argument("--group", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("slice", help="Parikh points of the identity words of a regular slice")
    p.add_argument("--group", required=True)
    p.add_argument("--regex", required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--project", required=True, help="comma separated selectors, e.g. t,A or x+y+X+Y")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", default=None, help=".csv or .json; stdout CSV when omitted")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("graph", help="cograph, class G and RAAG verdicts for a graph file")
    p.add_argument("input")
    p.add_argument("--mode", choices=("classify", "cograph", "certificate"), default="classify")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("experiment", help="run one witness pipeline")
    p.add_argument("--id", required=True, choices=sorted(experiments.EXPERIMENTS) + ["geometries"])
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--csv", default=None, help="also write the points as CSV")
    p.add_argument("--timing", action="store_true", help="add timestamps and duration to the report")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("schreier", help="build and verify the Schreier transducer of a coset action")
    p.add_argument("--group", required=True)
    p.add_argument("--action", required=True)
    p.add_argument("--bound", type=int, default=8)
    p.add_argument("--corrupt", action="store_true", help="invert one generator label before verifying")
    p.add_argument("--out", default=None)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_schreier)

    p = sub.add_parser("fit", help="bounded semilinear fit of a point file")
    p.add_argument("points")
    p.add_argument("--points-out", default=None, help="CSV of points the set must avoid")
    p.add_argument("--box", default=None, help="upper corner; points of the box not in the file must be avoided")
    p.add_argument("--components", type=int, required=True)
    p.add_argument("--generators", type=int, required=True)
    p.add_argument("--coord-bound", type=int, required=True)
    p.add_argument("--certificate", default=None, help="vertical-gap | exp:BASE | quad:COEFF")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except WordProblemError as e:
        sys.stdout.write(dump_json({"status": "error", "error": str(e)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
