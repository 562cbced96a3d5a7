"""Command-line surface: headless oracle-driven runs, error injection, and
the labeling service.

Exit codes: 0 success, 2 configuration problem, 3 data problem, 4 internal
failure. Diagnostics go to stderr; reports and logs go where the flags say.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import BadPlan, BudgetExhausted, CellscoutError, DecodeError, IoError, VersionMismatch
from .evaluation import InjectionPlan, inject_errors, oracle_label
from .learner import Session, SessionConfig, Strategy, build_report
from .snapshots import load_session, save_session
from .table import attach_ground_truth, load_csv, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


def report_to_json(report: dict) -> str:
    # Canonical serialization so identical runs produce byte-identical files.
    return json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cellscout", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="oracle-driven error detection run")
    run.add_argument("--data", required=True, help="dirty CSV file")
    run.add_argument("--ground-truth", required=True, help="clean CSV with identical shape")
    run.add_argument("--no-header", action="store_true", help="CSV files have no header row")
    run.add_argument("--budget", type=int, default=300)
    run.add_argument("--strategy", choices=[s.value for s in Strategy], default="mc")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--batch-size", type=int, default=10)
    run.add_argument("--ngram", type=int, default=1)
    run.add_argument("--text-mode", choices=["char", "word"], default="char")
    run.add_argument("--no-text", action="store_true")
    run.add_argument("--no-metadata", action="store_true")
    run.add_argument("--no-embedding", action="store_true")
    run.add_argument("--embedding-dim", type=int, default=50)
    run.add_argument("--no-error-correlation", action="store_true")
    run.add_argument("--vocab-cap", type=int, default=2000)
    run.add_argument("--committee-size", type=int, default=25)
    run.add_argument("--cv-folds", type=int, default=4)
    run.add_argument("--report", help="write the final JSON report here")
    run.add_argument("--run-log", help="append one JSON line per iteration here")
    run.add_argument("--session-out", help="write a session snapshot here at the end")
    run.add_argument("--resume", help="resume from a session snapshot")

    inject = sub.add_parser("inject", help="corrupt a clean CSV per an injection plan")
    inject.add_argument("--clean", required=True)
    inject.add_argument("--plan", required=True, help="JSON injection plan")
    inject.add_argument("--dirty-out", required=True)
    inject.add_argument("--gt-out", required=True)
    inject.add_argument("--no-header", action="store_true")

    serve = sub.add_parser("serve", help="run the labeling HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--snapshot-dir", help="persist a snapshot per session after each batch")
    serve.add_argument("--frontend-dir", help="serve the browser UI from this directory at /ui")

    return parser


def config_from_args(args: argparse.Namespace) -> SessionConfig:
    return SessionConfig(
        batch_size=args.batch_size,
        budget=args.budget,
        strategy=Strategy(args.strategy),
        seed=args.seed,
        ngram_n=args.ngram,
        text_mode=args.text_mode,
        use_text=not args.no_text,
        use_metadata=not args.no_metadata,
        use_embedding=not args.no_embedding,
        embedding_dim=args.embedding_dim,
        use_error_correlation=not args.no_error_correlation,
        vocab_cap=args.vocab_cap,
        committee_size=args.committee_size,
        cv_folds=args.cv_folds,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        dirty = load_csv(args.data, has_header=not args.no_header)
        clean = load_csv(args.ground_truth, has_header=not args.no_header)
        gt = attach_ground_truth(dirty, clean)
    except CellscoutError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    try:
        config = config_from_args(args)
        if args.resume:
            snapshot = load_session(args.resume)
            session = Session.resume(snapshot, dirty, ground_truth=gt)
        else:
            session = Session(dirty, config, ground_truth=gt)
    except (BudgetExhausted, ValueError, VersionMismatch, DecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CellscoutError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA

    try:
        while session.phase != "done" and session.pending is not None:
            labels = [oracle_label(dirty, gt, cell) for cell in session.pending.cells]
            session.submit(labels)
    except BudgetExhausted as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = build_report(session)
    text = report_to_json(report)
    try:
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if args.run_log:
            with open(args.run_log, "w", encoding="utf-8") as fh:
                for record in session.log_records:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")
        if args.session_out:
            save_session(session.snapshot(), args.session_out)
    except (OSError, IoError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _cmd_inject(args: argparse.Namespace) -> int:
    try:
        clean = load_csv(args.clean, has_header=not args.no_header)
    except CellscoutError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        with open(args.plan, "r", encoding="utf-8") as fh:
            plan = InjectionPlan.from_json(fh.read())
        dirty, gt = inject_errors(clean, plan)
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BadPlan as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        write_csv(dirty, args.dirty_out, include_header=not args.no_header)
        write_csv(gt, args.gt_out, include_header=not args.no_header)
    except IoError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(snapshot_dir=args.snapshot_dir, frontend_dir=args.frontend_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches our config-error code.
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "inject":
            return _cmd_inject(args)
        if args.command == "serve":
            return _cmd_serve(args)
        print(f"unknown command {args.command}", file=sys.stderr)
        return EXIT_CONFIG
    except CellscoutError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
