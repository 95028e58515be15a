"""Parallel-demon diagnosis shell.

Public surface: knowledge base parsing and serialization (kb), the demon
engine (engine), session handling with rendering and persistence (session),
a command line front end (cli), and an HTTP service (service).
"""

from .engine import (
    Behavior,
    BonusSchedule,
    CriterionGroup,
    DemonDef,
    DemonStatus,
    EngineConfigError,
    EngineState,
    Environment,
    Event,
    InvalidFeatureError,
    KnowledgeBase,
    QuestionSuggestion,
    Reachability,
    Reaction,
    STANDARD_BEHAVIOR,
    StepReport,
    ThresholdSet,
    TraceRow,
    apply_step,
    best_question,
    init_engine,
    potential_remaining,
    raw_reaction,
    reachability,
    register_behavior,
    snapshot,
)
from .kb import (
    Diagnostic,
    KbError,
    KbSource,
    ParseResult,
    Severity,
    load_kb_file,
    parse_kb,
    serialize_kb,
    validate_kb,
)
from .session import (
    LogIntegrityError,
    Session,
    SummaryMatrix,
    build_summary_matrix,
    load_log,
    new_session,
    persist_log,
    render_step_table,
    render_summary_matrix,
    render_table,
    replay,
    submit_feature,
)

__all__ = [name for name in dir() if not name.startswith("_")]
