"""Exact spectral oracles.

Full eigendecomposition is the ground truth everything else is judged
against: spectral functions f(A), trace-weighted sums, the infinite-time
diagonal ensemble, and the log-det gradient. Dense eigh is deliberate; the
package targets desk-scale verification, not asymptotic performance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DenseOperator, HERMITIAN_TOL, StateVector
from .errors import DomainError, SingularityError
from .weights import WeightSpec

DEGENERACY_FRACTION = 1e-9


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigendecomposition A = V diag(E) V^dag with degeneracy bookkeeping.

    eigenvalues are ascending; eigenvectors[:, p] belongs to eigenvalues[p].
    degeneracy_groups partitions eigenvalue indices into maximal runs closer
    than the resolution tolerance, so time averages can keep the cross terms
    that never dephase.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_groups: tuple

    def __post_init__(self):
        evals = np.array(self.eigenvalues, dtype=float)
        evecs = np.array(self.eigenvectors, dtype=complex)
        evals.setflags(write=False)
        evecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", evals)
        object.__setattr__(self, "eigenvectors", evecs)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def spectral_range(self) -> float:
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def operator(self) -> np.ndarray:
        """Reconstruct the dense matrix V diag(E) V^dag."""
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigendecompose(a: DenseOperator, degeneracy_tol: Optional[float] = None) -> Spectrum:
    """Exact Hermitian eigendecomposition with degeneracy grouping.

    degeneracy_tol defaults to 1e-9 times the spectral range; consecutive
    eigenvalues with gaps at or below it share a group.
    """
    mat = a.entries
    dev = float(np.abs(mat - mat.conj().T).max())
    if not a.hermitian or dev > HERMITIAN_TOL:
        raise DomainError(f"eigendecompose requires a Hermitian operator (max |M - M^dag| = {dev})")
    evals, evecs = np.linalg.eigh(mat)
    if degeneracy_tol is None:
        degeneracy_tol = DEGENERACY_FRACTION * float(evals[-1] - evals[0])
    groups = []
    current = [0]
    for p in range(1, len(evals)):
        if evals[p] - evals[p - 1] <= degeneracy_tol:
            current.append(p)
        else:
            groups.append(tuple(current))
            current = [p]
    groups.append(tuple(current))
    return Spectrum(evals, evecs, tuple(groups))


def matrix_function(spec: Spectrum, f: WeightSpec) -> DenseOperator:
    """f(A) = sum_p f(E_p) |p><p| under the weight's singularity policy."""
    values = f.evaluate(spec.eigenvalues, spec.spectral_range)
    v = spec.eigenvectors
    mat = (v * values) @ v.conj().T
    if np.iscomplexobj(values):
        return DenseOperator(spec.dim, mat)
    mat = 0.5 * (mat + mat.conj().T)
    return DenseOperator(spec.dim, mat, hermitian=True)


def _eigenbasis_diagonal(spec: Spectrum, delta: DenseOperator) -> np.ndarray:
    """<p| Delta |p> for every eigenvector p."""
    if delta.dim != spec.dim:
        raise DomainError(f"operator dimensions differ: {delta.dim} vs {spec.dim}")
    v = spec.eigenvectors
    return np.einsum("ip,ij,jp->p", v.conj(), delta.entries, v)


def trace_weighted(spec: Spectrum, delta: DenseOperator, f: WeightSpec) -> float:
    """sum_p f(E_p) <p|Delta|p>, i.e. Tr(f(A) Delta), evaluated exactly."""
    values = f.evaluate(spec.eigenvalues, spec.spectral_range)
    diag = _eigenbasis_diagonal(spec, delta)
    total = np.sum(values * diag)
    return float(np.real(total))


def diagonal_ensemble(spec: Spectrum, delta: DenseOperator, r: StateVector) -> float:
    """Infinite-time average of <r(t)|Delta|r(t)> under A.

    Equals sum over degeneracy groups G of <r| P_G Delta P_G |r>; for a
    nondegenerate spectrum this is sum_p |c_p|^2 <p|Delta|p>.
    """
    if delta.dim != spec.dim or r.dim != spec.dim:
        raise DomainError(
            f"dimension mismatch: spectrum {spec.dim}, delta {delta.dim}, state {r.dim}"
        )
    v = spec.eigenvectors
    c = v.conj().T @ r.amplitudes
    delta_eig = v.conj().T @ delta.entries @ v
    total = 0.0 + 0.0j
    for group in spec.degeneracy_groups:
        idx = np.array(group)
        block = delta_eig[np.ix_(idx, idx)]
        cg = c[idx]
        total += cg.conj() @ block @ cg
    return float(np.real(total))


def logdet_gradient_oracle(a: DenseOperator, delta: DenseOperator) -> float:
    """Tr(A^{-1} Delta), the derivative of ln |det A| along Delta.

    Computed spectrally and cross-checked against a forward difference of
    ln |det (A + h Delta)| at h = 1e-6. The two must agree to O(h) with a
    curvature-aware allowance; disagreement means the spectrum is too close
    to singular for the oracle to be trusted, and raises.
    """
    spec = eigendecompose(a)
    inverse = WeightSpec(kind="inverse", policy="reject")
    value = trace_weighted(spec, delta, inverse)

    h = 1e-6
    sign0, logdet0 = np.linalg.slogdet(a.entries)
    sign1, logdet1 = np.linalg.slogdet(a.entries + h * delta.entries)
    if sign0 == 0 or sign1 == 0:
        raise SingularityError("determinant vanished inside the finite-difference check")
    fd = (logdet1 - logdet0) / h

    # forward-difference truncation is (h/2) Tr((A^{-1} Delta)^2) to leading order
    b = matrix_function(spec, inverse).entries @ delta.entries
    curvature = float(np.abs(np.trace(b @ b)))
    tol = 5.0 * h * curvature + 1e-8 * (1.0 + abs(value))
    if abs(value - fd) > tol:
        raise SingularityError(
            f"log-det gradient cross-check failed: spectral {value} vs finite difference {fd} "
            f"(allowance {tol:.3e})"
        )
    return value
