from .construct import (
    Caps, Certificate, ConstructionFailure, StagePlan, budget_radius, cauchy_sum, construct, cut_for, k_error,
    l_error, plan_schedule,
)
from .requirement import (
    FIXED, UNIFORM, Requirement, RequirementError, check_requirement, compact_from_json, exhaustion_compact,
    requirement_from_json,
)
from .stage import StageConstraint, StageResult, StageSolver
from .verify import (
    ScanReport, VerificationRefused, VerifyReport, uniform_center_errors, universal_point_scan, verify,
    verify_uniform_center,
)

__all__ = [
    "Caps", "Certificate", "ConstructionFailure", "FIXED", "Requirement", "RequirementError", "ScanReport",
    "StageConstraint", "StagePlan", "StageResult", "StageSolver", "UNIFORM", "VerificationRefused", "VerifyReport",
    "budget_radius", "cauchy_sum", "check_requirement", "compact_from_json", "construct", "cut_for",
    "exhaustion_compact", "k_error", "l_error", "plan_schedule", "requirement_from_json", "uniform_center_errors",
    "universal_point_scan", "verify", "verify_uniform_center",
]
