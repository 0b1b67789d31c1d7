"""Built-in experiment recipes.

Each preset is a complete ExperimentConfig: the acceptance suite runs these
exact configurations, and `preset <name> --emit-config` writes them out for
editing. Tolerances attached here are the documented oracle-gap bounds for
exact-expectation runs; the condition sweep carries none because its whole
point is the error it accumulates.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .config import (
    DeltaSpec,
    ExperimentConfig,
    OutputSpec,
    ProblemSpec,
    SweepSpec,
)
from .errors import ConfigError
from .estimators import EthConfig, InitialState
from .phase_estimation import QpeConfig
from .rng import substream
from .weights import WeightSpec

PRESET_NAMES = (
    "paper-example",
    "integrable-counterexample",
    "trace-counterexample",
    "inverse-2q",
    "logdet-2q",
    "condition-sweep",
)

# shared 2-qubit operator with spectrum (1, 0.75, 0.5, 0.25): positive,
# nondegenerate, every eigenvalue landing exactly on a register bin
_DYADIC_2Q_TERMS = ((0.625, "II"), (0.25, "ZI"), (0.125, "IZ"))
_DYADIC_2Q_QPE = dict(m=3, shift=0.0, scale=0.5)
# eigenvalue gaps are multiples of 0.25, so 256 steps of pi/32 close every
# oscillation period exactly
_DYADIC_2Q_DT = math.pi / 32


def _eth(dt, num_steps, seed, initial=None, **kwargs) -> EthConfig:
    return EthConfig(
        dt=dt,
        num_steps=num_steps,
        seed=seed,
        initial_state=initial if initial is not None else InitialState(),
        **kwargs,
    )


def _single_qubit_observable_config(name, axes, initial, expected, seed) -> ExperimentConfig:
    # unit weight ignores the register contents, so both levels share one
    # bin on purpose: the sandwich then reduces to the bare observable and
    # the per-step series keeps its oscillation instead of being dephased
    return ExperimentConfig(
        name=name,
        target="time-average",
        form="operator",
        seed=seed,
        problem=ProblemSpec(kind="pauli-terms", terms=((1.0, axes),)),
        delta=DeltaSpec(kind="all-ones", scale=math.sqrt(2.0)),
        weight=WeightSpec(kind="unit"),
        qpe=QpeConfig(m=1, shift=-1.0, scale=0.05),
        eth=_eth(0.01 * math.pi, 100_000, seed, initial=initial),
        expected=expected,
        tolerance=5e-7,
        outputs=OutputSpec(basename=name),
    )


def paper_example() -> ExperimentConfig:
    """Single qubit, all-ones observable: the average settles at 1/sqrt(2)."""
    return _single_qubit_observable_config(
        "paper-example", "Z", InitialState(kind="uniform"), 1.0 / math.sqrt(2.0), seed=11
    )


def integrable_counterexample() -> ExperimentConfig:
    """Same observable but a generator it commutes with, plus a biased start:
    the plateau tracks the diagonal ensemble, not the trace average."""
    amps = (complex(math.sqrt(0.8)), complex(math.sqrt(0.2)))
    cfg = _single_qubit_observable_config(
        "integrable-counterexample",
        "X",
        InitialState(kind="explicit", amplitudes=amps),
        0.9 * math.sqrt(2.0),
        seed=12,
    )
    return replace(cfg, tolerance=1e-9)


def trace_counterexample() -> ExperimentConfig:
    """Identity observable reweighted by energy: the sampled quantity is the
    conserved energy itself, so a biased start never reaches Tr(A)/N."""
    single_a = (math.sqrt(0.7), math.sqrt(0.3))
    single_b = (math.sqrt(0.6), math.sqrt(0.4))
    amps = tuple(complex(x * y) for x in single_a for y in single_b)
    expected = 0.4 + math.sqrt(0.24)
    return ExperimentConfig(
        name="trace-counterexample",
        target="time-average",
        form="operator",
        seed=13,
        problem=ProblemSpec(kind="pauli-terms", terms=((1.0, "ZI"), (0.5, "IX"))),
        delta=DeltaSpec(kind="identity"),
        weight=WeightSpec(kind="identity_of_e"),
        qpe=QpeConfig(m=3, shift=-2.0, scale=0.25),
        eth=_eth(0.01 * math.pi, 20_000, 13, initial=InitialState(kind="explicit", amplitudes=amps)),
        expected=expected,
        tolerance=1e-9,
        outputs=OutputSpec(basename="trace-counterexample"),
    )


def inverse_2q() -> ExperimentConfig:
    """Inverse expectation on the dyadic 2-qubit operator; exact on this grid."""
    expected = 25.0 / 12.0
    return ExperimentConfig(
        name="inverse-2q",
        target="inverse-expectation",
        form="operator",
        seed=23,
        problem=ProblemSpec(kind="pauli-terms", terms=_DYADIC_2Q_TERMS),
        delta=DeltaSpec(kind="projector-from-state", state="uniform"),
        weight=WeightSpec(kind="inverse"),
        qpe=QpeConfig(**_DYADIC_2Q_QPE),
        eth=_eth(_DYADIC_2Q_DT, 2560, 23),
        phi="uniform",
        expected=expected,
        tolerance=1e-4,
        outputs=OutputSpec(basename="inverse-2q"),
    )


def logdet_2q() -> ExperimentConfig:
    """Log-det gradient along a sparse Hermitian mask; Tr(A^{-1} mask) = 5."""
    return ExperimentConfig(
        name="logdet-2q",
        target="logdet-gradient",
        form="operator",
        seed=29,
        problem=ProblemSpec(kind="pauli-terms", terms=_DYADIC_2Q_TERMS),
        delta=DeltaSpec(
            kind="derivative-mask",
            entries=((0, 0, 1.0 + 0j), (3, 3, 1.0 + 0j), (1, 2, 0.5 + 0j), (2, 1, 0.5 + 0j)),
        ),
        weight=WeightSpec(kind="inverse"),
        qpe=QpeConfig(**_DYADIC_2Q_QPE),
        eth=_eth(_DYADIC_2Q_DT, 2560, 29),
        expected=5.0,
        tolerance=1e-3,
        outputs=OutputSpec(basename="logdet-2q"),
    )


def condition_sweep() -> ExperimentConfig:
    """Four inverse-expectation runs at spectral ratios 2, 10, 100, 1000 with
    a constant sample budget; the register decodes small eigenvalues badly,
    so the oracle gap grows with the ratio while cost stays flat."""
    # draw seed picked so every eigenvalue lands in its own register bin at
    # the two small ratios; the gap column then grows monotonically
    sweep = SweepSpec(ratios=(2.0, 10.0, 100.0, 1000.0), seed=1, n_qubits=3)
    terms = diagonal_pauli_terms(sweep_eigenvalues(sweep.seed, sweep.n_qubits, sweep.ratios[0]))
    return ExperimentConfig(
        name="condition-sweep",
        target="inverse-expectation",
        form="operator",
        seed=37,
        problem=ProblemSpec(kind="pauli-terms", terms=terms),
        delta=DeltaSpec(kind="projector-from-state", state="uniform"),
        weight=WeightSpec(kind="inverse"),
        qpe=QpeConfig(m=7, shift=-0.25, scale=0.4),
        eth=_eth(0.37, 4096, 37),
        phi="uniform",
        outputs=OutputSpec(basename="condition-sweep"),
        sweep=sweep,
    )


def sweep_eigenvalues(seed: int, n_qubits: int, ratio: float) -> np.ndarray:
    """Seeded spectrum affinely mapped onto [1/ratio, 1]; the draw is shared
    across ratios so only the spread changes between sweep runs."""
    dim = 1 << n_qubits
    u = substream(seed, "condition-sweep").random(dim)
    lo = 1.0 / ratio
    span = u.max() - u.min()
    return lo + (u - u.min()) * (1.0 - lo) / span


def diagonal_pauli_terms(values: np.ndarray) -> tuple:
    """Expand a diagonal operator over Z-strings (Walsh coefficients)."""
    values = np.asarray(values, dtype=float)
    dim = values.size
    n = int(np.log2(dim))
    if 1 << n != dim:
        raise ConfigError(f"diagonal length {dim} is not a power of two")
    terms = []
    for s in range(dim):
        signs = np.array([(-1) ** bin(x & s).count("1") for x in range(dim)])
        coef = float(values @ signs) / dim
        if abs(coef) < 1e-15:
            continue
        axes = "".join("Z" if (s >> (n - 1 - q)) & 1 else "I" for q in range(n))
        terms.append((coef, axes))
    return tuple(terms)


_BUILDERS = {
    "paper-example": paper_example,
    "integrable-counterexample": integrable_counterexample,
    "trace-counterexample": trace_counterexample,
    "inverse-2q": inverse_2q,
    "logdet-2q": logdet_2q,
    "condition-sweep": condition_sweep,
}


def build_preset(name: str) -> ExperimentConfig:
    if name not in _BUILDERS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    return _BUILDERS[name]()
