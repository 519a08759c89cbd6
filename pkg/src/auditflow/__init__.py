"""Stage-gated audit repository tooling.

Stores an algorithmic audit as a repository of typed artifact documents,
enforces the five-stage workflow and its gates, classifies FMEA risks,
maintains the design history trace graph, and compiles a deterministic
summary report with a launch verdict.
"""

from .artifacts import (
    ArtifactDocument,
    ArtifactKind,
    ArtifactMeta,
    ArtifactStatus,
    Principle,
    ProducerRole,
    Stage,
    make_artifact,
    parse_artifact,
    serialize_artifact,
    validate_artifact,
)
from .diagnostics import AuditError, ArtifactParseError, Diagnostic, Severity
from .report import SummaryReport, compile_report, determine_verdict, render_text
from .repository import AuditRepository, Manifest, init_repository
from .risk import (
    FmeaEntry,
    RiskMatrix,
    RiskRegister,
    assess_principle_threats,
    classify_risk,
    prioritize_risks,
    update_fmea_with_tests,
)
from .trace import TraceGraph, build_graph, find_gaps, reconstruct_trail
from .workflow import GateResult, WorkflowState, advance_stage, check_gate, required_artifacts

__version__ = "0.1.0"

__all__ = [
    "ArtifactDocument",
    "ArtifactKind",
    "ArtifactMeta",
    "ArtifactStatus",
    "AuditError",
    "AuditRepository",
    "ArtifactParseError",
    "Diagnostic",
    "FmeaEntry",
    "GateResult",
    "Manifest",
    "Principle",
    "ProducerRole",
    "RiskMatrix",
    "RiskRegister",
    "Severity",
    "Stage",
    "SummaryReport",
    "TraceGraph",
    "WorkflowState",
    "advance_stage",
    "assess_principle_threats",
    "build_graph",
    "check_gate",
    "classify_risk",
    "compile_report",
    "determine_verdict",
    "find_gaps",
    "init_repository",
    "make_artifact",
    "parse_artifact",
    "prioritize_risks",
    "reconstruct_trail",
    "render_text",
    "required_artifacts",
    "serialize_artifact",
    "update_fmea_with_tests",
    "validate_artifact",
]
