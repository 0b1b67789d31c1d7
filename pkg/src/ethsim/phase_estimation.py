"""Simulated multi-eigenvalue phase estimation and register weighting.

The register binning map is the exact arithmetic the algorithm relies on:
an affine phase map sends eigenvalues into [0, 1), an m-bit register bins
them, and weights act on the decoded bin energies rather than on the true
eigenvalues. Dyadic spectra make the binning exact; the circuit mode also
reproduces the finite-register leakage of real phase estimation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import DenseOperator, MAX_QUBITS, StateVector
from .errors import ConfigError, DomainError, SingularityError
from .spectral import Spectrum
from .weights import WeightSpec

QPE_MODES = ("exact-binning", "circuit")

# register slices holding less probability than this are treated as empty
OCCUPANCY_EPS = 1e-20


class PhaseCollisionWarning(UserWarning):
    """Two distinct eigenvalues landed in the same register bin."""


@dataclass(frozen=True)
class QpeConfig:
    """Register width and the affine map phi(E) = (E - shift) * scale.

    phi must land in [0, 1) for every eigenvalue handled; bin k decodes to
    energy shift + k / (2**m * scale).
    """

    m: int
    shift: float = 0.0
    scale: float = 1.0
    mode: str = "exact-binning"

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or not 1 <= self.m <= MAX_QUBITS:
            raise ConfigError(f"register width m must lie in [1, {MAX_QUBITS}], got {self.m!r}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ConfigError(f"phase-map scale must be positive and finite, got {self.scale!r}")
        if not np.isfinite(self.shift):
            raise ConfigError(f"phase-map shift must be finite, got {self.shift!r}")
        if self.mode not in QPE_MODES:
            raise ConfigError(f"unknown qpe mode {self.mode!r}; expected one of {QPE_MODES}")

    @property
    def register_size(self) -> int:
        return 2**self.m

    @property
    def representable_span(self) -> float:
        """Energy span covered by the register bins."""
        return (self.register_size - 1) / (self.register_size * self.scale)


def phase_map(config: QpeConfig, energy: float) -> int:
    """Register index for an energy: round(phi * 2**m) mod 2**m."""
    phi = (energy - config.shift) * config.scale
    if not 0.0 <= phi < 1.0:
        raise ConfigError(
            f"phase {phi} for energy {energy} lies outside [0, 1); adjust shift/scale"
        )
    return int(np.round(phi * config.register_size)) % config.register_size


def energy_of_index(config: QpeConfig, index: int) -> float:
    """Decoded bin energy, the exact inverse of phase_map on dyadic spectra."""
    if not 0 <= index < config.register_size:
        raise DomainError(f"register index {index} outside [0, {config.register_size})")
    return config.shift + index / (config.register_size * config.scale)


def energy_table(config: QpeConfig) -> np.ndarray:
    """Decoded energies of every register bin, length 2**m."""
    k = np.arange(config.register_size)
    return config.shift + k / (config.register_size * config.scale)


def register_indices(spec: Spectrum, config: QpeConfig) -> np.ndarray:
    """Bin index for every eigenvalue, warning on cross-group collisions.

    The map is injective whenever eigenvalue gaps exceed 2**-m / scale; when
    distinct degeneracy groups still share a bin the collision is reported
    through PhaseCollisionWarning, never silently absorbed.
    """
    indices = np.array([phase_map(config, e) for e in spec.eigenvalues], dtype=int)
    group_bins = {}
    for gi, group in enumerate(spec.degeneracy_groups):
        for p in group:
            k = indices[p]
            prior = group_bins.get(k)
            if prior is not None and prior != gi:
                warnings.warn(
                    f"eigenvalues {spec.eigenvalues[group[0]]} and bin-{k} neighbour map to "
                    f"the same register index; increase m or rescale the phase map",
                    PhaseCollisionWarning,
                    stacklevel=2,
                )
            group_bins[k] = gi
    return indices


def is_dyadic(spec: Spectrum, config: QpeConfig, tol: float = 1e-12) -> bool:
    """True when every eigenvalue phase is an exact m-bit fraction."""
    phi = (spec.eigenvalues - config.shift) * config.scale
    scaled = phi * config.register_size
    return bool(np.all(np.abs(scaled - np.round(scaled)) <= tol * config.register_size))


@dataclass(frozen=True, eq=False)
class WeightedJointState:
    """Normalized joint system+register state with its norm bookkeeping.

    norm_factor is the norm the state lost to non-unitary weighting;
    expectation-style consumers multiply it back in quadrature.
    """

    joint: StateVector
    norm_factor: float
    provenance: tuple = ()

    @classmethod
    def wrap(cls, state: StateVector) -> "WeightedJointState":
        return cls(joint=state, norm_factor=1.0, provenance=())


def _split_dims(joint_dim: int, config: QpeConfig):
    m_dim = config.register_size
    if joint_dim % m_dim != 0 or joint_dim // m_dim < 2:
        raise DomainError(
            f"joint dimension {joint_dim} does not factor into system x 2**{config.m} register"
        )
    return joint_dim // m_dim, m_dim


def _hadamard_matrix(m: int) -> np.ndarray:
    dim = 2**m
    j = np.arange(dim)
    signs = (-1.0) ** np.array(
        [[bin(a & b).count("1") for b in j] for a in j], dtype=float
    )
    return signs / np.sqrt(dim)


def _dft_matrix(m: int) -> np.ndarray:
    dim = 2**m
    j = np.arange(dim)
    omega = np.exp(2.0j * np.pi / dim)
    return omega ** np.outer(j, j) / np.sqrt(dim)


def _transform_register_rows(rows: np.ndarray, spec: Spectrum, config: QpeConfig, inverse: bool):
    """Apply the per-eigenvector register transform to eigenbasis rows."""
    n_levels, m_dim = rows.shape
    if config.mode == "exact-binning":
        kp = register_indices(spec, config)
        base = np.arange(m_dim)[None, :]
        if inverse:
            idx = (base + kp[:, None]) % m_dim
        else:
            idx = (base - kp[:, None]) % m_dim
        return np.take_along_axis(rows, idx, axis=1)

    # circuit mode: H then controlled phase powers then inverse DFT
    phi = (spec.eigenvalues - config.shift) * config.scale
    if np.any(phi < 0.0) or np.any(phi >= 1.0):
        raise ConfigError("an eigenvalue phase lies outside [0, 1); adjust shift/scale")
    k = np.arange(m_dim)
    d = np.exp(2.0j * np.pi * np.outer(phi, k))
    h = _hadamard_matrix(config.m)
    f = _dft_matrix(config.m)
    if inverse:
        return ((rows @ f.T) * d.conj()) @ h.T
    return ((rows @ h.T) * d) @ f.conj()


def _apply_qpe(joint: np.ndarray, spec: Spectrum, config: QpeConfig, inverse: bool) -> np.ndarray:
    n_dim, m_dim = _split_dims(joint.shape[0], config)
    if n_dim != spec.dim:
        raise DomainError(f"system dimension {n_dim} does not match spectrum {spec.dim}")
    v = spec.eigenvectors
    rows = v.conj().T @ joint.reshape(n_dim, m_dim)
    rows = _transform_register_rows(rows, spec, config, inverse)
    return (v @ rows).reshape(-1)


def qpe_entangle(spec: Spectrum, state: StateVector, config: QpeConfig) -> StateVector:
    """Attach an m-qubit |0> register and bin-entangle it with the system.

    In exact-binning mode eigenvector p pairs with register bin k_p exactly;
    circuit mode instead simulates controlled powers of exp(2 pi i phi(A))
    followed by an inverse Fourier transform, which coincides with binning
    on dyadic spectra and leaks across neighbouring bins otherwise.
    """
    if state.n_qubits + config.m > MAX_QUBITS:
        raise DomainError(
            f"joint register of {state.n_qubits}+{config.m} qubits exceeds the cap {MAX_QUBITS}"
        )
    joint = np.zeros((state.dim, config.register_size), dtype=complex)
    joint[:, 0] = state.amplitudes
    out = _apply_qpe(joint.reshape(-1), spec, config, inverse=False)
    return StateVector(state.n_qubits + config.m, out)


def apply_upsilon(joint: StateVector, config: QpeConfig, w: WeightSpec, power: str = "one") -> WeightedJointState:
    """Multiply every occupied register slice by w(decoded energy)**power.

    The weight sees the decoded bin energy, not the true eigenvalue; on
    dyadic spectra the two coincide. power "half" is the square-root weight
    used when the weighted state itself is the object of interest. Slices
    holding less than OCCUPANCY_EPS probability are dropped as numerically
    empty. The result is renormalized, with the lost norm recorded.
    """
    if power not in ("one", "half"):
        raise ConfigError(f"power must be 'one' or 'half', got {power!r}")
    n_dim, m_dim = _split_dims(joint.dim, config)
    rows = joint.amplitudes.reshape(n_dim, m_dim)
    col_prob = np.sum(np.abs(rows) ** 2, axis=0)
    occupied = col_prob > OCCUPANCY_EPS
    if not np.any(occupied):
        raise DomainError("joint state has no occupied register slice")

    energies = energy_table(config)[occupied]
    base = w.evaluate(energies, config.representable_span)
    if power == "half":
        if not np.iscomplexobj(base) and np.any(base < 0):
            if w.policy == "reject":
                bad = energies[base < 0][0]
                raise SingularityError(
                    f"negative weight at decoded energy {bad} under half power; "
                    "regularize to allow complex weights"
                )
            base = base.astype(complex)
        multipliers = np.sqrt(base)
    else:
        multipliers = base

    full = np.zeros(m_dim, dtype=complex if np.iscomplexobj(multipliers) else float)
    full[occupied] = multipliers
    weighted = rows * full[None, :]
    norm_factor = float(np.linalg.norm(weighted))
    if norm_factor <= 1e-14:
        raise SingularityError("weighting annihilated every occupied register slice")
    out = StateVector(joint.n_qubits, (weighted / norm_factor).reshape(-1))
    return WeightedJointState(out, norm_factor, (f"upsilon:{w.kind}^{power}",))


def qpe_disentangle(weighted: WeightedJointState, spec: Spectrum, config: QpeConfig) -> WeightedJointState:
    """Invert the entangling transform, ideally returning the register to |0>.

    Exact-binning round trips are exact. In circuit mode a register slice
    that leaked across bins only refocuses onto |0> when the weighting was
    constant over the occupied slices; the residual is measurable via
    register_residual.
    """
    out = _apply_qpe(weighted.joint.amplitudes, spec, config, inverse=True)
    state = StateVector(weighted.joint.n_qubits, out)
    return WeightedJointState(state, weighted.norm_factor, weighted.provenance + ("qpe-disentangle",))


def register_residual(weighted: WeightedJointState, config: QpeConfig) -> float:
    """Probability left outside the |0...0> register slice."""
    n_dim, m_dim = _split_dims(weighted.joint.dim, config)
    rows = weighted.joint.amplitudes.reshape(n_dim, m_dim)
    return float(max(0.0, 1.0 - np.sum(np.abs(rows[:, 0]) ** 2)))


def system_slice(weighted: WeightedJointState, config: QpeConfig) -> np.ndarray:
    """Unnormalized system amplitudes co-located with register |0...0>."""
    n_dim, m_dim = _split_dims(weighted.joint.dim, config)
    return weighted.joint.amplitudes.reshape(n_dim, m_dim)[:, 0].copy()


def reweighted_delta(delta: DenseOperator, spec: Spectrum, w: WeightSpec, energies=None) -> DenseOperator:
    """Observable with eigenbasis diagonal rescaled by the weight.

    In the eigenbasis of the input operator the result carries entries
    Delta_pp * f(E_p) on the diagonal and Delta_pq unchanged off it. Passing
    explicit energies (e.g. decoded register energies) reweights against
    those instead of the true eigenvalues.
    """
    if delta.dim != spec.dim:
        raise DomainError(f"operator dimensions differ: {delta.dim} vs {spec.dim}")
    if energies is None:
        energies = spec.eigenvalues
    values = w.evaluate(np.asarray(energies, dtype=float), spec.spectral_range)
    v = spec.eigenvectors
    delta_eig = v.conj().T @ delta.entries @ v
    np.fill_diagonal(delta_eig, np.diag(delta_eig) * values)
    mat = v @ delta_eig @ v.conj().T
    if np.iscomplexobj(values):
        return DenseOperator(spec.dim, mat)
    mat = 0.5 * (mat + mat.conj().T)
    return DenseOperator(spec.dim, mat, hermitian=True)


def entangle_matrix(spec: Spectrum, config: QpeConfig) -> np.ndarray:
    """Dense unitary of the entangling transform on the joint space.

    Oracle-grade construction for tests and the shot-noise observable;
    estimators use the streamlined per-state transforms instead.
    """
    n_dim = spec.dim
    m_dim = config.register_size
    v = spec.eigenvectors
    total = np.zeros((n_dim * m_dim, n_dim * m_dim), dtype=complex)
    if config.mode == "exact-binning":
        kp = register_indices(spec, config)
        regs = []
        for p in range(n_dim):
            r = np.zeros((m_dim, m_dim), dtype=complex)
            r[(np.arange(m_dim) + kp[p]) % m_dim, np.arange(m_dim)] = 1.0
            regs.append(r)
    else:
        phi = (spec.eigenvalues - config.shift) * config.scale
        k = np.arange(m_dim)
        h = _hadamard_matrix(config.m)
        f = _dft_matrix(config.m)
        regs = [f.conj().T @ np.diag(np.exp(2.0j * np.pi * phi[p] * k)) @ h for p in range(n_dim)]
    for p in range(n_dim):
        proj = np.outer(v[:, p], v[:, p].conj())
        total += np.kron(proj, regs[p])
    return total


def upsilon_table(spec: Spectrum, config: QpeConfig, w: WeightSpec) -> np.ndarray:
    """Register weight table of length 2**m.

    Bins in the image of the spectrum must evaluate cleanly; bins no
    eigenvalue maps to are clamped to zero when their decoded energy is
    singular, since no amplitude can reach them in exact binning.
    """
    table = energy_table(config)
    occupied_bins = set(int(k) for k in register_indices(spec, config))
    span = config.representable_span
    values = np.zeros(config.register_size, dtype=float)
    complex_seen = False
    out = values.astype(complex)
    for k in range(config.register_size):
        try:
            val = w.evaluate(np.array([table[k]]), span)[0]
        except SingularityError:
            if k in occupied_bins:
                raise
            val = 0.0
        out[k] = val
        complex_seen = complex_seen or bool(np.iscomplex(val))
    return out if complex_seen else out.real


def joint_observable_matrix(delta: DenseOperator, spec: Spectrum, config: QpeConfig, w: WeightSpec) -> np.ndarray:
    """Dense Hermitian observable: entangle, weight the register, disentangle.

    This is the measured operator of the expectation-style estimator; its
    restriction to the |0> register sector reproduces qpe_sandwich_matrix.
    """
    if delta.dim != spec.dim:
        raise DomainError(f"operator dimensions differ: {delta.dim} vs {spec.dim}")
    e = entangle_matrix(spec, config)
    table = upsilon_table(spec, config, w)
    joint = np.kron(delta.entries, np.diag(table))
    obs = e.conj().T @ joint @ e
    if not np.iscomplexobj(table):
        obs = 0.5 * (obs + obs.conj().T)
    return obs


def qpe_sandwich_matrix(delta: DenseOperator, spec: Spectrum, config: QpeConfig, w: WeightSpec) -> np.ndarray:
    """System-space compression of the weighted sandwich at register |0>."""
    obs = joint_observable_matrix(delta, spec, config, w)
    m_dim = config.register_size
    n_dim = spec.dim
    return obs.reshape(n_dim, m_dim, n_dim, m_dim)[:, 0, :, 0]
