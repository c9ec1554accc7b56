"""Two-agent collaborative plan acquisition simulator and evaluation harness."""

from _planacq import (
    GenOptions,
    JointPlan,
    KnowledgeSplit,
    PredictionTrace,
    SessionLog,
    StagedModel,
    candidate_edges,
    cmd_gen,
    cmd_simulate,
    confidence_change,
    evaluate_over_time,
    generate_plan,
    mind_changes,
    missing_edges,
    move_categories,
    parse_move,
    read_sessions,
    replay,
    run_session,
    split_plan,
    train_staged,
)

__all__ = [
    "GenOptions",
    "JointPlan",
    "KnowledgeSplit",
    "PredictionTrace",
    "SessionLog",
    "StagedModel",
    "candidate_edges",
    "cmd_gen",
    "cmd_simulate",
    "confidence_change",
    "evaluate_over_time",
    "generate_plan",
    "mind_changes",
    "missing_edges",
    "move_categories",
    "parse_move",
    "read_sessions",
    "replay",
    "run_session",
    "split_plan",
    "train_staged",
]
