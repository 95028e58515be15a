"""Session handling: replay, rendering, and log persistence.

A session wraps one engine plus the append-only list of step reports it has
produced. Logs persist as JSON Lines, one object per step, and loading a log
replays it against a fresh engine while verifying every recorded row.
"""

from __future__ import annotations

import io
import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, IO, Iterable, Mapping

from .engine import (
    Behavior,
    EngineState,
    Event,
    KnowledgeBase,
    StepReport,
    TraceRow,
    apply_step,
    init_engine,
    snapshot,
)

TABLE_HEADER = "DEMON\tSTATE\tCONF\tOLD\tDEATH\tACCP\tREJCT\tFNUM\tREACT\tOR-BNS"

StepHook = Callable[["Session", StepReport], None]


class LogIntegrityError(Exception):
    """A persisted log disagrees with its own replay."""

    def __init__(self, step: int, message: str):
        super().__init__(message)
        self.step = step


@dataclass
class Session:
    session_id: str
    engine: EngineState
    log: list[StepReport] = field(default_factory=list)
    created_at: str = ""
    step_hooks: list[StepHook] = field(default_factory=list)


@dataclass
class SummaryMatrix:
    """Per-demon confidence after each step, -1 once a demon is dead."""

    demons: list[str]
    values: list[list[int]]

    def row(self, demon: str) -> list[int]:
        return self.values[self.demons.index(demon)]


def new_session(kb: KnowledgeBase, behaviors: Mapping[str, Behavior] | None = None) -> Session:
    """Create a session over a fresh engine. Invalid bases are refused with
    diagnostics by engine initialization."""
    return Session(
        session_id=uuid.uuid4().hex,
        engine=init_engine(kb, behaviors),
        created_at=datetime.now(timezone.utc).isoformat(),
    )


def submit_feature(session: Session, feature: str) -> StepReport:
    report = apply_step(session.engine, feature)
    session.log.append(report)
    for hook in session.step_hooks:
        hook(session, report)
    return report


def replay(
    kb: KnowledgeBase,
    features: Iterable[str],
    behaviors: Mapping[str, Behavior] | None = None,
) -> tuple[Session, SummaryMatrix]:
    session = new_session(kb, behaviors)
    for feature in features:
        submit_feature(session, feature)
    return session, build_summary_matrix(session)


def build_summary_matrix(session: Session) -> SummaryMatrix:
    demons = [demon.name for demon in session.engine.kb.demons]
    values: list[list[int]] = [[] for _ in demons]
    for report in session.log:
        for i, row in enumerate(report.rows):
            values[i].append(row.conf)
    return SummaryMatrix(demons=demons, values=values)


# ---------------------------------------------------------------- rendering

def render_table(rows: Iterable[TraceRow]) -> str:
    lines = [TABLE_HEADER]
    for row in rows:
        lines.append(
            f"{row.demon}\t{row.state}\t{row.conf}\t{row.old}\t{row.death}\t{row.accp}"
            f"\t{row.rejct}\t{row.fnum}\t{row.react}\t{row.or_bns}"
        )
    return "\n".join(lines) + "\n"


def render_step_table(report: StepReport) -> str:
    return render_table(report.rows)


def render_summary_matrix(matrix: SummaryMatrix) -> str:
    lines = []
    for demon, confs in zip(matrix.demons, matrix.values):
        lines.append("\t".join([demon] + [str(c) for c in confs]))
    return "\n".join(lines) + "\n" if lines else ""


def event_line(event: Event) -> str:
    if event.type == "ACCEPT":
        return f"output from demon {event.demon}: {event.output_text}"
    if event.type == "DEATH":
        return f"demon {event.demon} removed (confidence below death threshold)"
    if event.type == "REJECT":
        return f"demon {event.demon} rejected"
    return f"unknown feature: {event.feature}"


# -------------------------------------------------------------- persistence

def report_json_line(report: StepReport) -> str:
    return json.dumps(report.to_json(), separators=(",", ":"), ensure_ascii=False)


def persist_log(session: Session, sink: IO) -> None:
    """Write the session log to sink, one JSON object per line, UTF-8, LF."""
    for report in session.log:
        line = report_json_line(report) + "\n"
        if isinstance(sink, (io.TextIOBase, io.StringIO)):
            sink.write(line)
        else:
            sink.write(line.encode("utf-8"))


def load_log(
    source: IO | Iterable[str | bytes],
    kb: KnowledgeBase,
    behaviors: Mapping[str, Behavior] | None = None,
) -> Session:
    """Replay a persisted log against kb, verifying every recorded step.

    The first step whose recorded rows (or events) differ from the replayed
    ones raises LogIntegrityError carrying that step number.
    """
    session = new_session(kb, behaviors)
    step = 0
    for raw in source:
        step += 1
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        text = text.strip()
        if not text:
            continue
        try:
            recorded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LogIntegrityError(step, f"log line {step} is not valid JSON: {exc}") from exc
        feature = recorded.get("feature")
        if not isinstance(feature, str):
            raise LogIntegrityError(step, f"log line {step} has no feature field")
        report = submit_feature(session, feature)
        replayed = report.to_json()
        if replayed != recorded:
            raise LogIntegrityError(step, f"log diverges from replay at step {step}")
    return session


def persist_log_file(session: Session, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        persist_log(session, fh)


def load_log_file(
    path: str | Path, kb: KnowledgeBase, behaviors: Mapping[str, Behavior] | None = None
) -> Session:
    with open(path, "r", encoding="utf-8") as fh:
        return load_log(fh, kb, behaviors)


def attach_log_dir(session: Session, log_dir: str | Path) -> Path:
    """Persist each future step of the session to <log_dir>/<session_id>.jsonl."""
    target = Path(log_dir) / f"{session.session_id}.jsonl"
    target.parent.mkdir(parents=True, exist_ok=True)

    def hook(_session: Session, report: StepReport) -> None:
        with open(target, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(report_json_line(report) + "\n")

    session.step_hooks.append(hook)
    return target


# ------------------------------------------------------------ feature files

def parse_features_text(text: str) -> list[str]:
    """One feature identifier per line; '#' comments and blank lines ignored."""
    features: list[str] = []
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            features.append(stripped)
    return features


def read_features_file(path: str | Path) -> list[str]:
    return parse_features_text(Path(path).read_text(encoding="utf-8"))
