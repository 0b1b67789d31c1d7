"""Time evolution: exact spectral propagation and Trotter product formulas.

Exact evolution is the workhorse; the Trotter modes exist to expose the gate
cost of circuit-style propagation and to measure product-formula convergence
orders against the exact reference.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .core import StateVector
from .errors import ConfigError, DomainError
from .spectral import Spectrum

EVOLUTION_METHODS = ("exact", "trotter1", "trotter2")


@dataclass(frozen=True)
class EvolutionConfig:
    """Propagation settings plus a gate-application tally.

    The tally travels by value: functions that spend gates return an updated
    copy rather than mutating shared state.
    """

    method: str = "exact"
    dt: float = 0.1
    steps_per_dt: int = 1
    cost_counter: int = 0

    def __post_init__(self):
        if self.method not in EVOLUTION_METHODS:
            raise ConfigError(f"unknown evolution method {self.method!r}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive and finite, got {self.dt!r}")
        if self.steps_per_dt < 1:
            raise ConfigError(f"steps_per_dt must be >= 1, got {self.steps_per_dt}")

    def add_cost(self, gates: int) -> "EvolutionConfig":
        return dataclasses.replace(self, cost_counter=self.cost_counter + gates)


def evolve_exact(spec: Spectrum, state: StateVector, t: float) -> StateVector:
    """exp(-i A t)|state> through the eigenbasis; exact for any t."""
    if state.dim != spec.dim:
        raise DomainError(f"state dimension {state.dim} does not match spectrum {spec.dim}")
    if not np.isfinite(t):
        raise DomainError(f"time must be finite, got {t!r}")
    v = spec.eigenvectors
    coeffs = v.conj().T @ state.amplitudes
    coeffs = coeffs * np.exp(-1.0j * spec.eigenvalues * t)
    return StateVector(state.n_qubits, v @ coeffs)


def _term_angles_and_matrices(terms):
    mats = [term.matrix() for term in terms]
    angles = np.array([term.coefficient for term in terms], dtype=float)
    return angles, mats


def _apply_string_exponential(vec: np.ndarray, mat: np.ndarray, angle: float) -> np.ndarray:
    # Pauli strings square to identity, so exp(-i a P) = cos(a) I - i sin(a) P
    return np.cos(angle) * vec - 1.0j * np.sin(angle) * (mat @ vec)


def evolve_trotter(terms, state: StateVector, t: float, config: EvolutionConfig):
    """Product-formula propagation of a Pauli-term Hamiltonian.

    The duration splits into ceil(t/dt) chunks of at most dt, each resolved
    with config.steps_per_dt substeps. trotter1 applies one exponential per
    term per substep; trotter2 uses the symmetric splitting at twice the
    gate count. Returns (state, config) with the gate tally advanced by
    (exponentials per substep) * (total substeps).
    """
    if t < 0 or not np.isfinite(t):
        raise DomainError(f"evolution time must be >= 0 and finite, got {t!r}")
    if config.method not in ("trotter1", "trotter2"):
        raise ConfigError(f"evolve_trotter called with method {config.method!r}")
    terms = list(terms)
    if not terms:
        raise DomainError("trotter evolution needs at least one term")
    if t == 0:
        return state, config

    angles, mats = _term_angles_and_matrices(terms)
    if mats[0].shape[0] != state.dim:
        raise DomainError(
            f"term dimension {mats[0].shape[0]} does not match state dimension {state.dim}"
        )

    chunks = max(1, int(np.ceil(t / config.dt - 1e-12)))
    substeps = chunks * config.steps_per_dt
    delta = t / substeps

    vec = state.amplitudes.copy()
    if config.method == "trotter1":
        for _ in range(substeps):
            for mat, coeff in zip(mats, angles):
                vec = _apply_string_exponential(vec, mat, coeff * delta)
        gates = len(terms) * substeps
    else:
        for _ in range(substeps):
            for mat, coeff in zip(mats, angles):
                vec = _apply_string_exponential(vec, mat, coeff * delta / 2.0)
            for mat, coeff in zip(reversed(mats), reversed(angles)):
                vec = _apply_string_exponential(vec, mat, coeff * delta / 2.0)
        gates = 2 * len(terms) * substeps

    vec /= np.linalg.norm(vec)  # scrub accumulated rounding, unitarity is exact in theory
    return StateVector(state.n_qubits, vec), config.add_cost(gates)


def evolution_series(source, r: StateVector, dt: float, num_steps: int, config: EvolutionConfig):
    """States at t_j = j*dt for j = 1..num_steps, all evolved from the same r.

    source is a Spectrum for the exact method or an iterable of PauliTerm
    for the Trotter methods. Exact mode advances incrementally in the
    eigenbasis, which is algebraically identical to independent evolutions;
    Trotter mode composes one dt-chunk per step, which coincides with the
    product formula applied to the full duration. Returns (states, config)
    with one gate per step tallied in exact mode and the product-formula
    tally otherwise.
    """
    if not (np.isfinite(dt) and dt > 0):
        raise ConfigError(f"dt must be positive and finite, got {dt!r}")
    if num_steps < 1:
        raise ConfigError(f"num_steps must be >= 1, got {num_steps}")

    states = []
    if config.method == "exact":
        spec = source
        if not isinstance(spec, Spectrum):
            raise DomainError("exact evolution_series needs a Spectrum source")
        v = spec.eigenvectors
        coeffs = v.conj().T @ r.amplitudes
        step_phase = np.exp(-1.0j * spec.eigenvalues * dt)
        for _ in range(num_steps):
            coeffs = coeffs * step_phase
            states.append(StateVector(r.n_qubits, v @ coeffs))
        return states, config.add_cost(num_steps)

    step_config = dataclasses.replace(config, dt=dt)
    state = r
    for _ in range(num_steps):
        state, step_config = evolve_trotter(source, state, dt, step_config)
        states.append(state)
    return states, dataclasses.replace(config, cost_counter=step_config.cost_counter)
