"""cellscout: example-driven error detection for relational tables.

Featurizes every cell, trains one tree committee per column, and runs a
two-dimensional active-learning loop (pick a column, then pick cells) until
the label budget runs out.
"""

from .table import (
    CellRef,
    GroundTruth,
    Label,
    LabelSource,
    LabelStore,
    LabelValue,
    Table,
    attach_ground_truth,
    load_csv,
    parse_csv_text,
    table_to_csv_text,
    write_csv,
)
from .learner import (
    BatchRequest,
    Session,
    SessionConfig,
    Strategy,
    build_report,
    run_with_oracle,
)
from .evaluation import (
    ColumnInjection,
    ConvergencePoint,
    DetectionResult,
    InjectionPlan,
    PairInjection,
    inject_errors,
    oracle_label,
    record_convergence,
    score,
)
from .snapshots import SessionSnapshot, load_session, save_session

__all__ = [
    "BatchRequest",
    "CellRef",
    "ColumnInjection",
    "ConvergencePoint",
    "DetectionResult",
    "GroundTruth",
    "InjectionPlan",
    "Label",
    "LabelSource",
    "LabelStore",
    "LabelValue",
    "PairInjection",
    "Session",
    "SessionConfig",
    "SessionSnapshot",
    "Strategy",
    "Table",
    "attach_ground_truth",
    "build_report",
    "inject_errors",
    "load_csv",
    "load_session",
    "oracle_label",
    "parse_csv_text",
    "record_convergence",
    "run_with_oracle",
    "save_session",
    "score",
    "table_to_csv_text",
    "write_csv",
]
