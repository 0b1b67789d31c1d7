"""Time-average estimators for weighted spectral quantities.

The central maneuver: instead of preparing an equal superposition of
eigenstates, evolve a generic state, bin its energy content on a phase
register, weight the bins, and time-average. The infinite-time limit is the
diagonal ensemble; when eigenstate expectations are structureless the
diagonal ensemble reproduces the trace average, and weighted variants then
deliver inverse expectations and log-det gradients.

Two realizations are provided. The operator form measures the register-
weighted observable directly; the vector form carries the square-root
weight on the state and reads the result from overlap probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    DenseOperator,
    StateVector,
    commutator_norm,
    operator_from_matrix,
    projector_from_state,
    random_state,
    uniform_superposition,
)
from .errors import ConfigError, DomainError, SingularityError
from .phase_estimation import (
    QpeConfig,
    WeightedJointState,
    apply_upsilon,
    energy_table,
    joint_observable_matrix,
    qpe_disentangle,
    qpe_entangle,
    qpe_sandwich_matrix,
    register_indices,
    register_residual,
    reweighted_delta,
    system_slice,
)
from .rng import derive_seed, substream
from .spectral import Spectrum, diagonal_ensemble, eigendecompose
from .weights import WeightSpec

INITIAL_STATE_KINDS = ("uniform", "haar", "phase-product", "explicit")
SAMPLING_MODES = ("exact", "shots")

VERDICT_THERMALIZED = "THERMALIZED"
VERDICT_DIAGONAL = "DIAGONAL-ENSEMBLE-ONLY"
VERDICT_NON_STATIONARY = "NON-STATIONARY"

PLATEAU_TOL_FLOOR = 1e-6
INTEGRABLE_COMMUTATOR_TOL = 1e-10
DEFAULT_BATCHES = 10

_CHUNK = 1 << 15


@dataclass(frozen=True)
class InitialState:
    """Initial-state recipe: uniform, seeded random ensemble, or explicit."""

    kind: str = "uniform"
    seed: Optional[int] = None
    amplitudes: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in INITIAL_STATE_KINDS:
            raise ConfigError(
                f"unknown initial-state kind {self.kind!r}; expected one of {INITIAL_STATE_KINDS}"
            )
        if self.kind == "explicit" and self.amplitudes is None:
            raise ConfigError("explicit initial state requires amplitudes")


@dataclass(frozen=True)
class EthConfig:
    """Sampling grid t_j = j*dt, shot budget, seed and restart policy."""

    dt: float
    num_steps: int
    sampling: str = "exact"
    shots: int = 0
    seed: int = 0
    initial_state: InitialState = field(default_factory=InitialState)
    repetitions: int = 1

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive and finite, got {self.dt!r}")
        if self.num_steps < 1:
            raise ConfigError(f"num_steps must be >= 1, got {self.num_steps}")
        if self.sampling not in SAMPLING_MODES:
            raise ConfigError(f"unknown sampling mode {self.sampling!r}")
        if self.sampling == "shots" and self.shots < 1:
            raise ConfigError("shots sampling requires shots >= 1")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")


@dataclass(frozen=True)
class CostCounters:
    """Resource tallies: evolution steps, gate applications, shots drawn."""

    time_steps: int = 0
    gate_tally: int = 0
    shots: int = 0


@dataclass(frozen=True)
class ThermalizationVerdict:
    """Classification of a time-average series against its exact targets."""

    verdict: str
    plateau: float
    drift: float
    standard_error: float
    trace_target: float
    diagonal_target: float
    commutator: float
    tolerance: float


@dataclass(frozen=True, eq=False)
class EthEstimate:
    """Raw time-average estimate with its uncertainty and bookkeeping.

    estimate is the plain running mean of the sampled series; normalization
    records any pending multiplier (the dimension factor for inverse and
    log-det targets) that consumers apply on top.
    """

    estimate: float
    standard_error: float
    series: np.ndarray
    running_mean: np.ndarray
    normalization: float
    cost: CostCounters
    thermalized: ThermalizationVerdict
    register_residual: float = 0.0

    def __post_init__(self):
        series = np.asarray(self.series, dtype=float)
        rm = np.asarray(self.running_mean, dtype=float)
        series.setflags(write=False)
        rm.setflags(write=False)
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "running_mean", rm)
        if rm.shape != series.shape:
            raise DomainError("running_mean length must match the series")
        if abs(rm[-1] - self.estimate) > 1e-12 * (1.0 + abs(self.estimate)):
            raise DomainError("estimate must equal the final running mean")


def running_mean(series: np.ndarray) -> np.ndarray:
    series = np.asarray(series, dtype=float)
    return np.cumsum(series) / np.arange(1, series.size + 1)


def running_standard_error(series: np.ndarray) -> np.ndarray:
    """Naive running SE of the mean (sample std / sqrt(count)); first entry 0."""
    series = np.asarray(series, dtype=float)
    n = np.arange(1, series.size + 1, dtype=float)
    mean = np.cumsum(series) / n
    mean_sq = np.cumsum(series**2) / n
    var = np.maximum(mean_sq - mean**2, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        unbiased = np.where(n > 1, var * n / (n - 1.0), 0.0)
    return np.sqrt(unbiased / n)


def batch_means_standard_error(series: np.ndarray, n_batches: int = DEFAULT_BATCHES) -> float:
    """SE of the mean from batch means; robust to serial correlation."""
    series = np.asarray(series, dtype=float)
    if series.size < 2:
        return 0.0
    nb = min(n_batches, series.size)
    size = series.size // nb
    means = series[: nb * size].reshape(nb, size).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(nb))


def _resolve_initial_state(eth: EthConfig, n_qubits: int, rep: int) -> StateVector:
    init = eth.initial_state
    if init.kind == "uniform":
        return uniform_superposition(n_qubits)
    if init.kind == "explicit":
        return StateVector(n_qubits, np.asarray(init.amplitudes, dtype=complex))
    base = init.seed if init.seed is not None else eth.seed
    seed = base if rep == 0 else derive_seed(base, "restart", rep)
    return random_state(n_qubits, seed, ensemble=init.kind)


def _decoded_weights(spec: Spectrum, qpe: QpeConfig, w: WeightSpec) -> tuple:
    """(register indices, decoded energies, weights on decoded energies)."""
    kp = register_indices(spec, qpe)
    decoded = energy_table(qpe)[kp]
    values = w.evaluate(decoded, qpe.representable_span)
    return kp, decoded, values


def _sandwich_eigenbasis(spec: Spectrum, delta: DenseOperator, qpe: QpeConfig, w: WeightSpec) -> np.ndarray:
    """Eigenbasis matrix G with <psi(t),0| sandwich |psi(t),0> = c(t)^dag G c(t)."""
    v = spec.eigenvectors
    if qpe.mode == "exact-binning":
        kp, _, values = _decoded_weights(spec, qpe, w)
        if np.iscomplexobj(values):
            raise ConfigError("operator form requires real weights")
        delta_eig = v.conj().T @ delta.entries @ v
        mask = kp[:, None] == kp[None, :]
        return delta_eig * mask * values[None, :]
    comp = qpe_sandwich_matrix(delta, spec, qpe, w)
    return v.conj().T @ comp @ v


def _exact_series(spec: Spectrum, g_eig: np.ndarray, coeffs: np.ndarray, dt: float, num_steps: int) -> np.ndarray:
    """Per-step expectation values c(t_j)^dag G c(t_j), vectorized in chunks."""
    evals = spec.eigenvalues
    out = np.empty(num_steps, dtype=float)
    start = 0
    while start < num_steps:
        stop = min(start + _CHUNK, num_steps)
        t = dt * np.arange(start + 1, stop + 1)
        c = coeffs[:, None] * np.exp(-1.0j * np.outer(evals, t))
        out[start:stop] = np.einsum("qk,qp,pk->k", c.conj(), g_eig, c).real
        start = stop
    return out


def _diagnose(series: np.ndarray, spec: Spectrum, delta_eff: DenseOperator, diag_target: float) -> ThermalizationVerdict:
    rm = running_mean(series)
    plateau = float(rm[-1])
    mid = rm[rm.size // 2 - 1] if rm.size >= 2 else rm[-1]
    drift = abs(plateau - float(mid))
    se = batch_means_standard_error(series)
    tol = max(5.0 * se, PLATEAU_TOL_FLOOR)

    trace_target = float(np.real(np.trace(delta_eff.entries))) / spec.dim
    a_op = operator_from_matrix(spec.operator())
    comm = commutator_norm(a_op, delta_eff)

    trace_gap = abs(plateau - trace_target)
    diag_gap = abs(plateau - diag_target)
    trace_match = trace_gap <= tol
    diag_match = diag_gap <= tol

    if comm <= INTEGRABLE_COMMUTATOR_TOL:
        # conserved observable: a flat series here never counts as thermal
        if diag_match and drift <= max(tol, 0.1 * trace_gap):
            verdict = VERDICT_DIAGONAL
        else:
            verdict = VERDICT_NON_STATIONARY
    elif trace_match and drift <= max(tol, 0.1 * max(abs(trace_target - diag_target), tol)):
        verdict = VERDICT_THERMALIZED
    elif diag_match and drift <= max(tol, 0.1 * trace_gap):
        verdict = VERDICT_DIAGONAL
    else:
        verdict = VERDICT_NON_STATIONARY

    return ThermalizationVerdict(
        verdict=verdict,
        plateau=plateau,
        drift=drift,
        standard_error=se,
        trace_target=trace_target,
        diagonal_target=diag_target,
        commutator=comm,
        tolerance=tol,
    )


def thermalization_diagnostics(series, spec: Spectrum, delta: DenseOperator, r: StateVector) -> ThermalizationVerdict:
    """Classify a sampled series as THERMALIZED, DIAGONAL-ENSEMBLE-ONLY or
    NON-STATIONARY.

    delta is the effective observable the series sampled (weight folded in).
    The plateau is compared against Tr(delta)/N and against the diagonal
    ensemble for the initial state r, with tolerance max(5 SE, 1e-6); a
    vanishing commutator with the evolution generator vetoes THERMALIZED
    because a conserved observable never dephases.
    """
    series = np.asarray(series, dtype=float)
    if series.size < 1:
        raise DomainError("diagnostics need a nonempty series")
    diag_target = diagonal_ensemble(spec, delta, r)
    return _diagnose(series, spec, delta_eff=delta, diag_target=diag_target)


def swap_test_estimate(a: StateVector, b: StateVector, shots: int, seed: int) -> float:
    """Overlap-squared estimate from simulated swap-test outcomes.

    P(ancilla 0) = (1 + |<a|b>|^2) / 2; the estimator 2*frac0 - 1 is clamped
    to [0, 1], which biases only overlaps indistinguishable from zero.
    """
    if shots < 1:
        raise ConfigError(f"shots must be >= 1, got {shots}")
    if a.n_qubits != b.n_qubits:
        raise DomainError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    overlap_sq = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    p_zero = 0.5 * (1.0 + overlap_sq)
    zeros = substream(seed, "swap-test").binomial(shots, min(p_zero, 1.0))
    return float(np.clip(2.0 * zeros / shots - 1.0, 0.0, 1.0))


def _operator_form_shots(spec, delta, w, eth, qpe, r, rep):
    obs = joint_observable_matrix(delta, spec, qpe, w)
    if np.abs(obs - obs.conj().T).max() > 1e-9:
        raise ConfigError("shot sampling requires a Hermitian (real-weight) observable")
    evals_o, u = np.linalg.eigh(0.5 * (obs + obs.conj().T))
    m_dim = qpe.register_size
    # register starts in |0>, so only those joint columns carry amplitude
    basis = u.conj().T[:, ::m_dim]

    v = spec.eigenvectors
    coeffs = v.conj().T @ r.amplitudes
    samples = np.empty(eth.num_steps, dtype=float)
    for j in range(eth.num_steps):
        t = eth.dt * (j + 1)
        psi = v @ (coeffs * np.exp(-1.0j * spec.eigenvalues * t))
        amp = basis @ psi
        probs = np.abs(amp) ** 2
        probs = np.maximum(probs, 0.0)
        probs /= probs.sum()
        rng = substream(eth.seed, "shots", rep, j)
        counts = rng.multinomial(eth.shots, probs)
        samples[j] = float(counts @ evals_o) / eth.shots
    return samples


def run_operator_form(a: DenseOperator, delta: DenseOperator, w: WeightSpec, eth: EthConfig, qpe: QpeConfig) -> EthEstimate:
    """Time-average of the register-weighted observable expectation.

    Per step the sampled quantity is the joint expectation of the entangle/
    weight/disentangle sandwich on |psi(t_j)>|0...0>. In exact-expectation
    mode with uniform eigenbasis populations the average converges to
    (1/N) sum_p <p|delta|p> f(E_p); shots mode measures the observable in
    its eigenbasis with the configured budget per step.
    """
    spec = eigendecompose(a)
    if delta.dim != spec.dim:
        raise DomainError(f"operator dimensions differ: {delta.dim} vs {spec.dim}")

    g_eig = _sandwich_eigenbasis(spec, delta, qpe, w)
    v = spec.eigenvectors

    all_samples = []
    diag_targets = []
    shots_drawn = 0
    for rep in range(eth.repetitions):
        r = _resolve_initial_state(eth, int(np.log2(spec.dim)), rep)
        if r.dim != spec.dim:
            raise DomainError(f"initial state dimension {r.dim} does not match {spec.dim}")
        if eth.sampling == "exact":
            coeffs = v.conj().T @ r.amplitudes
            samples = _exact_series(spec, g_eig, coeffs, eth.dt, eth.num_steps)
        else:
            samples = _operator_form_shots(spec, delta, w, eth, qpe, r, rep)
            shots_drawn += eth.shots * eth.num_steps
        all_samples.append(samples)
        if qpe.mode == "exact-binning":
            _, decoded, _ = _decoded_weights(spec, qpe, w)
            eff = reweighted_delta(delta, spec, w, energies=decoded)
        else:
            eff = reweighted_delta(delta, spec, w)
        diag_targets.append(diagonal_ensemble(spec, eff, r))

    series = np.concatenate(all_samples)
    rm = running_mean(series)
    verdict = _diagnose(series, spec, delta_eff=eff, diag_target=float(np.mean(diag_targets)))
    steps = eth.repetitions * eth.num_steps
    cost = CostCounters(time_steps=steps, gate_tally=3 * steps, shots=shots_drawn)
    return EthEstimate(
        estimate=float(rm[-1]),
        standard_error=batch_means_standard_error(series),
        series=series,
        running_mean=rm,
        normalization=1.0,
        cost=cost,
        thermalized=verdict,
    )


def _vector_form_pipeline_step(spec, phi, eth, qpe, policy, state, rep, j):
    """One explicit entangle/weight/disentangle step; returns the sample and
    the register residual left after disentangling."""
    w = WeightSpec(kind="inverse", policy=policy)
    joint = qpe_entangle(spec, state, qpe)
    weighted = apply_upsilon(joint, qpe, w, power="half")
    returned = qpe_disentangle(weighted, spec, qpe)
    residual = register_residual(returned, qpe)
    slice_amp = system_slice(returned, qpe)
    slice_norm = float(np.linalg.norm(slice_amp))
    if eth.sampling == "exact":
        overlap_sq = abs(np.vdot(phi.amplitudes, slice_amp)) ** 2
        sample = weighted.norm_factor**2 * overlap_sq
    else:
        b = StateVector(phi.n_qubits, slice_amp / slice_norm)
        est = swap_test_estimate(phi, b, eth.shots, derive_seed(eth.seed, "shots", rep, j))
        sample = (weighted.norm_factor * slice_norm) ** 2 * est
    return sample, residual


def run_vector_form(a: DenseOperator, phi: StateVector, eth: EthConfig, qpe: QpeConfig, policy: str = "reject") -> EthEstimate:
    """Time-average of weighted overlap probabilities against |phi>.

    The evolved state is entangled with the register, carries the square
    root of the inverse-energy weight, is disentangled, and its overlap with
    phi is squared: the per-step sample norm_factor^2 |<phi|psi_w(t)>|^2
    time-averages to sum_p |c_p|^2 |<phi|p>|^2 / E_p. Shots mode reads the
    overlap from a simulated swap test instead of exact arithmetic.
    """
    spec = eigendecompose(a)
    if phi.dim != spec.dim:
        raise DomainError(f"phi dimension {phi.dim} does not match {spec.dim}")
    w = WeightSpec(kind="inverse", policy=policy)
    v = spec.eigenvectors

    fast = qpe.mode == "exact-binning"
    if fast:
        kp, decoded, values = _decoded_weights(spec, qpe, w)
        negative = np.real(values) < 0
        if np.any(negative):
            if w.policy == "reject":
                raise SingularityError(
                    f"negative weight at decoded energy {decoded[negative][0]} "
                    "under half power; regularize to allow complex weights"
                )
            values = values.astype(complex)
        g = np.sqrt(values)
        b = v.conj().T @ phi.amplitudes
        u = b.conj() * g

    all_samples = []
    diag_targets = []
    residual_total = 0.0
    shots_drawn = 0
    n_qubits = int(np.log2(spec.dim))
    for rep in range(eth.repetitions):
        r = _resolve_initial_state(eth, n_qubits, rep)
        coeffs = v.conj().T @ r.amplitudes
        if fast and eth.sampling == "exact":
            samples = np.empty(eth.num_steps, dtype=float)
            start = 0
            while start < eth.num_steps:
                stop = min(start + _CHUNK, eth.num_steps)
                t = eth.dt * np.arange(start + 1, stop + 1)
                c = coeffs[:, None] * np.exp(-1.0j * np.outer(spec.eigenvalues, t))
                samples[start:stop] = np.abs(u @ c) ** 2
                start = stop
        else:
            samples = np.empty(eth.num_steps, dtype=float)
            for j in range(eth.num_steps):
                t = eth.dt * (j + 1)
                state = StateVector(n_qubits, v @ (coeffs * np.exp(-1.0j * spec.eigenvalues * t)))
                samples[j], residual = _vector_form_pipeline_step(
                    spec, phi, eth, qpe, policy, state, rep, j
                )
                residual_total += residual
            if eth.sampling == "shots":
                shots_drawn += eth.shots * eth.num_steps
        all_samples.append(samples)
        energies = energy_table(qpe)[register_indices(spec, qpe)] if fast else None
        eff = reweighted_delta(projector_from_state(phi), spec, w, energies=energies)
        diag_targets.append(diagonal_ensemble(spec, eff, r))

    series = np.concatenate(all_samples)
    rm = running_mean(series)
    verdict = _diagnose(series, spec, delta_eff=eff, diag_target=float(np.mean(diag_targets)))
    steps = eth.repetitions * eth.num_steps
    cost = CostCounters(time_steps=steps, gate_tally=3 * steps, shots=shots_drawn)
    mean_residual = residual_total / steps if not (fast and eth.sampling == "exact") else 0.0
    return EthEstimate(
        estimate=float(rm[-1]),
        standard_error=batch_means_standard_error(series),
        series=series,
        running_mean=rm,
        normalization=1.0,
        cost=cost,
        thermalized=verdict,
        register_residual=mean_residual,
    )


@dataclass(frozen=True)
class NormalizedEstimate:
    """Dimension-normalized target value together with the raw run."""

    value: float
    standard_error: float
    normalization: float
    raw: EthEstimate


def inverse_expectation_result(a: DenseOperator, phi: StateVector, eth: EthConfig, qpe: QpeConfig, form: str = "operator") -> NormalizedEstimate:
    if form == "operator":
        raw = run_operator_form(a, projector_from_state(phi), WeightSpec(kind="inverse"), eth, qpe)
    elif form == "vector":
        raw = run_vector_form(a, phi, eth, qpe)
    else:
        raise ConfigError(f"form must be 'operator' or 'vector', got {form!r}")
    n = float(a.dim)
    return NormalizedEstimate(
        value=n * raw.estimate,
        standard_error=n * raw.standard_error,
        normalization=n,
        raw=raw,
    )


def estimate_inverse_expectation(a: DenseOperator, phi: StateVector, eth: EthConfig, qpe: QpeConfig, form: str = "operator") -> float:
    """N times the raw time average, recovering <phi|A^{-1}|phi>.

    Exact for uniform eigenbasis populations; generic initial states carry
    their diagonal-ensemble bias, which the thermalization verdict flags.
    """
    return inverse_expectation_result(a, phi, eth, qpe, form).value


def logdet_gradient_result(a: DenseOperator, delta_mask: DenseOperator, eth: EthConfig, qpe: QpeConfig) -> NormalizedEstimate:
    raw = run_operator_form(a, delta_mask, WeightSpec(kind="inverse"), eth, qpe)
    n = float(a.dim)
    return NormalizedEstimate(
        value=n * raw.estimate,
        standard_error=n * raw.standard_error,
        normalization=n,
        raw=raw,
    )


def estimate_logdet_gradient(a: DenseOperator, delta_mask: DenseOperator, eth: EthConfig, qpe: QpeConfig) -> float:
    """N times the inverse-weighted mask average, estimating Tr(A^{-1} mask),
    the sensitivity of ln |det A| along the mask direction."""
    return logdet_gradient_result(a, delta_mask, eth, qpe).value
