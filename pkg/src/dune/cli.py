"""Command line front end.

Commands: replay (batch a feature file against a base), interactive (drive a
session by hand with suggested questions), validate (diagnostics only), and
serve (HTTP service). Exit code 0 means success; 2 means a usage error or a
knowledge base that failed its diagnostics.
"""

from __future__ import annotations

import argparse
import os
import socket
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from .engine import (
    DemonStatus,
    InvalidFeatureError,
    KnowledgeBase,
    best_question,
    snapshot,
)
from .kb import ParseResult, Severity, load_kb_file, validate_kb
from .session import (
    Session,
    SummaryMatrix,
    attach_log_dir,
    build_summary_matrix,
    event_line,
    new_session,
    read_features_file,
    render_step_table,
    render_summary_matrix,
    render_table,
    replay,
    report_json_line,
    submit_feature,
)

FORMATS = ("paper", "tsv", "jsonl")


@dataclass
class CliConfig:
    command: str
    kb_path: str | None = None
    inputs_path: str | None = None
    format: str = "paper"
    port: int | None = None
    kb_dir: str | None = None
    log_dir: str | None = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dune", description="Parallel-demon diagnosis shell")
    sub = parser.add_subparsers(dest="command", required=True)

    p_replay = sub.add_parser("replay", help="replay a feature file against a knowledge base")
    p_replay.add_argument("--kb", required=True, dest="kb_path")
    p_replay.add_argument("--inputs", required=True, dest="inputs_path")
    p_replay.add_argument("--format", choices=FORMATS, default="paper")
    p_replay.add_argument("--log-dir", dest="log_dir")

    p_int = sub.add_parser("interactive", help="drive a session feature by feature")
    p_int.add_argument("--kb", required=True, dest="kb_path")
    p_int.add_argument("--log-dir", dest="log_dir")

    p_val = sub.add_parser("validate", help="print diagnostics for a knowledge base")
    p_val.add_argument("--kb", required=True, dest="kb_path")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", required=True, type=int)
    p_serve.add_argument("--kb-dir", dest="kb_dir")
    p_serve.add_argument("--log-dir", dest="log_dir")

    return parser


def config_from_args(args: argparse.Namespace) -> CliConfig:
    log_dir = getattr(args, "log_dir", None) or os.environ.get("DUNE_LOG_DIR") or None
    return CliConfig(
        command=args.command,
        kb_path=getattr(args, "kb_path", None),
        inputs_path=getattr(args, "inputs_path", None),
        format=getattr(args, "format", "paper"),
        port=getattr(args, "port", None),
        kb_dir=getattr(args, "kb_dir", None),
        log_dir=log_dir,
    )


def _print_diagnostics(result: ParseResult, extra, err: IO) -> None:
    for diag in list(result.diagnostics) + list(extra):
        print(diag.render(result.origin), file=err)


def _load_kb(kb_path: str, err: IO) -> KnowledgeBase | None:
    """Parse and validate; on any ERROR print everything and give up."""
    try:
        result = load_kb_file(kb_path)
    except OSError as exc:
        print(f"cannot read knowledge base: {exc}", file=err)
        return None
    validation = validate_kb(result.kb) if result.kb is not None else []
    errors = [d for d in list(result.diagnostics) + validation if d.severity is Severity.ERROR]
    if errors:
        _print_diagnostics(result, validation, err)
        return None
    return result.kb


# ------------------------------------------------------------------ replay

def render_replay_paper(session: Session, matrix: SummaryMatrix) -> str:
    blocks: list[str] = []
    for report in session.log:
        lines = [f"input{report.fnum}: {report.feature}", ""]
        lines.append(render_step_table(report).rstrip("\n"))
        for event in report.events:
            lines.append(event_line(event))
        blocks.append("\n".join(lines))
    steps_text = "\n\n".join(blocks) + "\n" if blocks else ""
    return steps_text + "\n" + render_summary_matrix(matrix)


def render_replay_tsv(session: Session, matrix: SummaryMatrix) -> str:
    blocks = [render_step_table(report).rstrip("\n") for report in session.log]
    steps_text = "\n\n".join(blocks) + "\n" if blocks else ""
    return steps_text + "\n" + render_summary_matrix(matrix)


def render_replay_jsonl(session: Session, matrix: SummaryMatrix) -> str:
    import json

    lines = [report_json_line(report) for report in session.log]
    lines.append(
        json.dumps(
            {"summary": {"demons": matrix.demons, "values": matrix.values}},
            separators=(",", ":"),
        )
    )
    return "\n".join(lines) + "\n"


def cmd_replay(cfg: CliConfig, out: IO, err: IO) -> int:
    kb = _load_kb(cfg.kb_path, err)
    if kb is None:
        return 2
    try:
        features = read_features_file(cfg.inputs_path)
    except OSError as exc:
        print(f"cannot read inputs: {exc}", file=err)
        return 2
    try:
        session, matrix = replay(kb, features)
    except InvalidFeatureError as exc:
        print(f"bad input: {exc}", file=err)
        return 2
    renderer = {
        "paper": render_replay_paper,
        "tsv": render_replay_tsv,
        "jsonl": render_replay_jsonl,
    }[cfg.format]
    out.write(renderer(session, matrix))
    if cfg.log_dir:
        from .session import persist_log_file

        persist_log_file(session, Path(cfg.log_dir) / f"{session.session_id}.jsonl")
    return 0


# ------------------------------------------------------------- interactive

def run_interactive(kb: KnowledgeBase, in_: IO, out: IO, log_dir: str | None = None) -> Session:
    session = new_session(kb)
    if log_dir:
        attach_log_dir(session, log_dir)
    while True:
        out.write(render_table(snapshot(session.engine)))
        suggestion = best_question(session.engine)
        if suggestion is not None:
            out.write(f"ask about: {suggestion.feature}?\n")
        else:
            out.write("no further informative questions\n")
        out.write("> ")
        line = in_.readline()
        if not line:
            break
        word = line.strip()
        if not word:
            continue
        if word == "done":
            break
        try:
            report = submit_feature(session, word)
        except InvalidFeatureError as exc:
            out.write(f"{exc}\n")
            continue
        for event in report.events:
            out.write(event_line(event) + "\n")
    out.write(render_summary_matrix(build_summary_matrix(session)))
    for demon in session.engine.kb.demons:
        state = session.engine.demon_states[demon.name]
        if state.accepted_latched:
            out.write(f"output from demon {demon.name}: {demon.output_text}\n")
    return session


def cmd_interactive(cfg: CliConfig, in_: IO, out: IO, err: IO) -> int:
    kb = _load_kb(cfg.kb_path, err)
    if kb is None:
        return 2
    run_interactive(kb, in_, out, cfg.log_dir)
    return 0


# ---------------------------------------------------------------- validate

def cmd_validate(cfg: CliConfig, out: IO, err: IO) -> int:
    try:
        result = load_kb_file(cfg.kb_path)
    except OSError as exc:
        print(f"cannot read knowledge base: {exc}", file=err)
        return 2
    validation = validate_kb(result.kb) if result.kb is not None else []
    for diag in list(result.diagnostics) + validation:
        print(diag.render(result.origin), file=out)
    errors = [d for d in list(result.diagnostics) + validation if d.severity is Severity.ERROR]
    return 2 if errors else 0


# ------------------------------------------------------------------- serve

def cmd_serve(cfg: CliConfig, err: IO) -> int:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind(("127.0.0.1", cfg.port))
    except OSError:
        print(f"port {cfg.port} is not available", file=err)
        return 2
    finally:
        probe.close()

    import uvicorn

    from .service import create_app

    app = create_app(kb_dir=cfg.kb_dir, log_dir=cfg.log_dir)
    uvicorn.run(app, host="127.0.0.1", port=cfg.port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = config_from_args(args)
    if cfg.command == "serve" and not 1 <= (cfg.port or 0) <= 65535:
        print(f"port out of range: {cfg.port}", file=sys.stderr)
        return 2
    if cfg.command == "replay":
        return cmd_replay(cfg, sys.stdout, sys.stderr)
    if cfg.command == "interactive":
        return cmd_interactive(cfg, sys.stdin, sys.stdout, sys.stderr)
    if cfg.command == "validate":
        return cmd_validate(cfg, sys.stdout, sys.stderr)
    return cmd_serve(cfg, sys.stderr)


if __name__ == "__main__":
    raise SystemExit(main())
