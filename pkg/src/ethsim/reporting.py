"""Run summaries and cross-run consistency checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .estimators import CostCounters, EthEstimate, ThermalizationVerdict

SCHEMA_VERSION = 1
CONSISTENCY_Z = 3.0


@dataclass(frozen=True)
class RunReport:
    """Everything a finished run reports; oracle_gap is always recomputed
    from estimate and oracle_value, never carried through."""

    name: str
    target: str
    form: str
    seed: int
    estimate: float
    standard_error: float
    normalization: float
    oracle_value: float
    verdict: ThermalizationVerdict
    cost: CostCounters
    wall_time_s: float
    register_residual: float
    config_echo: dict
    series_file: str
    expected: Optional[float] = None
    tolerance: Optional[float] = None

    @property
    def oracle_gap(self) -> float:
        return abs(self.estimate - self.oracle_value)

    def to_summary_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "target": self.target,
            "form": self.form,
            "seed": self.seed,
            "estimate": self.estimate,
            "standard_error": self.standard_error,
            "normalization": self.normalization,
            "oracle_value": self.oracle_value,
            "oracle_gap": self.oracle_gap,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "thermalization": {
                "verdict": self.verdict.verdict,
                "plateau": self.verdict.plateau,
                "drift": self.verdict.drift,
                "standard_error": self.verdict.standard_error,
                "trace_target": self.verdict.trace_target,
                "diagonal_target": self.verdict.diagonal_target,
                "commutator": self.verdict.commutator,
                "tolerance": self.verdict.tolerance,
            },
            "cost": {
                "time_steps": self.cost.time_steps,
                "gate_tally": self.cost.gate_tally,
                "shots": self.cost.shots,
                "wall_time_s": self.wall_time_s,
            },
            "register_residual": self.register_residual,
            "series_file": self.series_file,
            "config": self.config_echo,
        }


def report_from_estimate(
    *,
    name: str,
    target: str,
    form: str,
    seed: int,
    raw: EthEstimate,
    normalization: float,
    oracle_value: float,
    wall_time_s: float,
    config_echo: dict,
    series_file: str,
    expected: Optional[float] = None,
    tolerance: Optional[float] = None,
) -> RunReport:
    return RunReport(
        name=name,
        target=target,
        form=form,
        seed=seed,
        estimate=normalization * raw.estimate,
        standard_error=normalization * raw.standard_error,
        normalization=normalization,
        oracle_value=oracle_value,
        verdict=raw.thermalized,
        cost=raw.cost,
        wall_time_s=wall_time_s,
        register_residual=raw.register_residual,
        config_echo=config_echo,
        series_file=series_file,
        expected=expected,
        tolerance=tolerance,
    )


def compare_summaries(a: dict, b: dict) -> dict:
    """z-score of the estimate difference under combined standard errors.

    Both summaries must estimate the same target quantity. Two exact runs
    with zero spread compare as z = 0 when equal and z = inf otherwise.
    """
    for side, summary in (("a", a), ("b", b)):
        if "estimate" not in summary or "target" not in summary:
            raise DomainError(f"summary {side} has no estimate; cannot compare")
    if a["target"] != b["target"]:
        raise DomainError(f"targets differ: {a['target']!r} vs {b['target']!r}")

    est_a, est_b = float(a["estimate"]), float(b["estimate"])
    se_a, se_b = float(a.get("standard_error", 0.0)), float(b.get("standard_error", 0.0))
    combined = math.hypot(se_a, se_b)
    gap = abs(est_a - est_b)
    if combined == 0.0:
        z = 0.0 if gap <= 1e-12 * (1.0 + abs(est_a)) else math.inf
    else:
        z = gap / combined
    return {
        "target": a["target"],
        "estimate_a": est_a,
        "estimate_b": est_b,
        "standard_error_a": se_a,
        "standard_error_b": se_b,
        "difference": est_a - est_b,
        "combined_se": combined,
        "z_score": z,
        "consistent": bool(z <= CONSISTENCY_Z),
    }
