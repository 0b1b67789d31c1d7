"""Experiment execution: config in, estimator dispatch, files out."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .config import ExperimentConfig, ProblemSpec
from .core import (
    DenseOperator,
    PauliTerm,
    StateVector,
    all_ones_delta,
    derivative_mask,
    from_pauli_terms,
    identity_operator,
    operator_from_matrix,
    projector_from_state,
    uniform_superposition,
)
from .errors import ConfigError, DomainError, SingularityError
from .estimators import (
    inverse_expectation_result,
    logdet_gradient_result,
    run_operator_form,
    run_vector_form,
    running_standard_error,
)
from .fileio import read_matrix_file, write_series, write_summary
from .presets import build_preset, diagonal_pauli_terms, sweep_eigenvalues
from .reporting import SCHEMA_VERSION, RunReport, report_from_estimate
from .spectral import eigendecompose, logdet_gradient_oracle, matrix_function
from .weights import WeightSpec, singularity_window


@dataclass(frozen=True)
class ExecutionResult:
    """A finished run (or sweep): reports plus every file written."""

    summary: dict
    summary_path: Path
    series_paths: tuple
    reports: tuple


def resolve_preset_reference(config: ExperimentConfig) -> ExperimentConfig:
    """Expand a problem that names a preset; only the outputs block of the
    referencing config survives the expansion."""
    if config.problem.kind != "preset":
        return config
    base = build_preset(config.problem.name)
    return replace(base, outputs=config.outputs)


def build_operator(config: ExperimentConfig) -> DenseOperator:
    problem = config.problem
    if problem.kind == "pauli-terms":
        n = len(problem.terms[0][1])
        return from_pauli_terms(n, [PauliTerm(c, a) for c, a in problem.terms])
    if problem.kind == "dense-matrix-file":
        entries = read_matrix_file(Path(config.base_dir) / problem.path)
        op = operator_from_matrix(entries)
        if not op.hermitian:
            raise DomainError(f"matrix file {problem.path} is not Hermitian")
        return op
    raise ConfigError(f"problem kind {problem.kind!r} must be expanded before execution")


def resolve_state(value, n_qubits: int) -> StateVector:
    if value is None:
        raise ConfigError("a state specification is required here")
    if isinstance(value, str):
        if value == "uniform":
            return uniform_superposition(n_qubits)
        raise ConfigError(f"unknown named state {value!r}")
    return StateVector(n_qubits, np.asarray(value, dtype=complex))


def build_delta(config: ExperimentConfig, n_qubits: int) -> DenseOperator:
    spec = config.delta
    if spec.kind == "identity":
        return identity_operator(n_qubits)
    if spec.kind == "all-ones":
        return all_ones_delta(n_qubits, scale=spec.scale)
    if spec.kind == "derivative-mask":
        return derivative_mask(n_qubits, spec.entries)
    return projector_from_state(resolve_state(spec.state, n_qubits))


def _inverse_oracle(a: DenseOperator, phi: StateVector) -> float:
    spec = eigendecompose(a)
    window = singularity_window(spec.spectral_range)
    bad = np.abs(spec.eigenvalues) <= window
    if np.any(bad):
        raise SingularityError(
            f"eigenvalue {spec.eigenvalues[bad][0]!r} inside the singularity window; "
            "the inverse oracle is undefined"
        )
    inverse = matrix_function(spec, WeightSpec(kind="inverse"))
    return float(np.real(np.vdot(phi.amplitudes, inverse.entries @ phi.amplitudes)))


def _series_filename(basename: str, fmt: str) -> str:
    return f"{basename}_series.{fmt}"


def _execute_single(config: ExperimentConfig) -> ExecutionResult:
    a = build_operator(config)
    n_qubits = a.dim.bit_length() - 1
    phi = resolve_state(config.phi, n_qubits) if config.phi is not None else None

    start = time.perf_counter()
    if config.target == "time-average":
        if config.form == "operator":
            delta = build_delta(config, n_qubits)
            raw = run_operator_form(a, delta, config.weight, config.eth, config.qpe)
        else:
            raw = run_vector_form(a, phi, config.eth, config.qpe, policy=config.weight.policy)
        normalization = 1.0
        oracle_value = raw.thermalized.diagonal_target
    elif config.target == "inverse-expectation":
        res = inverse_expectation_result(a, phi, config.eth, config.qpe, form=config.form)
        raw, normalization = res.raw, res.normalization
        oracle_value = _inverse_oracle(a, phi)
    elif config.target == "logdet-gradient":
        delta = build_delta(config, n_qubits)
        res = logdet_gradient_result(a, delta, config.eth, config.qpe)
        raw, normalization = res.raw, res.normalization
        oracle_value = logdet_gradient_oracle(a, delta)
    else:
        raise ConfigError(f"unknown target {config.target!r}")
    wall = time.perf_counter() - start

    out_dir = Path(config.outputs.out_dir)
    basename = config.outputs.basename or config.name
    series_name = _series_filename(basename, config.outputs.format)
    series_path = out_dir / series_name
    write_series(
        series_path,
        config.outputs.format,
        config.eth.dt,
        raw.series,
        raw.running_mean,
        running_standard_error(raw.series),
    )

    report = report_from_estimate(
        name=config.name,
        target=config.target,
        form=config.form,
        seed=config.seed,
        raw=raw,
        normalization=normalization,
        oracle_value=oracle_value,
        wall_time_s=wall,
        config_echo=config.to_dict(),
        series_file=series_name,
        expected=config.expected,
        tolerance=config.tolerance,
    )
    summary = report.to_summary_dict()
    summary_path = write_summary(out_dir / f"{basename}_summary.json", summary)
    return ExecutionResult(
        summary=summary,
        summary_path=summary_path,
        series_paths=(series_path,),
        reports=(report,),
    )


def _execute_sweep(config: ExperimentConfig) -> ExecutionResult:
    sweep = config.sweep
    reports = []
    series_paths = []
    rows = []
    for ratio in sweep.ratios:
        label = f"{config.name}-k{ratio:g}"
        values = sweep_eigenvalues(sweep.seed, sweep.n_qubits, ratio)
        sub = replace(
            config,
            name=label,
            problem=ProblemSpec(kind="pauli-terms", terms=diagonal_pauli_terms(values)),
            sweep=None,
            outputs=replace(config.outputs, basename=label),
        )
        result = _execute_single(sub)
        report = result.reports[0]
        reports.append(report)
        series_paths.extend(result.series_paths)
        rows.append(
            {
                "ratio": ratio,
                "name": label,
                "estimate": report.estimate,
                "oracle_value": report.oracle_value,
                "oracle_gap": report.oracle_gap,
                "standard_error": report.standard_error,
                "cost": {
                    "time_steps": report.cost.time_steps,
                    "gate_tally": report.cost.gate_tally,
                    "shots": report.cost.shots,
                    "wall_time_s": report.wall_time_s,
                },
                "series_file": report.series_file,
            }
        )

    out_dir = Path(config.outputs.out_dir)
    basename = config.outputs.basename or config.name
    summary = {
        "schema_version": SCHEMA_VERSION,
        "name": config.name,
        "target": config.target,
        "form": config.form,
        "seed": config.seed,
        "sweep": {"ratios": list(sweep.ratios), "seed": sweep.seed, "n_qubits": sweep.n_qubits},
        "runs": rows,
        "config": config.to_dict(),
    }
    summary_path = write_summary(out_dir / f"{basename}_summary.json", summary)
    return ExecutionResult(
        summary=summary,
        summary_path=summary_path,
        series_paths=tuple(series_paths),
        reports=tuple(reports),
    )


def execute_experiment(config: ExperimentConfig) -> ExecutionResult:
    """Run one experiment (or a whole sweep) and write its output files."""
    config = resolve_preset_reference(config)
    if config.sweep is not None:
        return _execute_sweep(config)
    return _execute_single(config)
