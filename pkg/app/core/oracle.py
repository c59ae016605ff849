"""
Exact spectral ground truth in finite dimensions.

Unitaries are built with a known spectrum, or diagonalized through the
Hermitian part H_c = (e^{-ic} U + e^{ic} U*)/2 with a cyclic Jacobi
eigensolver. f(U) is then V diag(f(e^{i theta})) V*.
"""

import logging
from typing import Optional, Tuple, Union

import backoff
import numpy as np
from pydantic import BaseModel, ConfigDict

from app.config import JACOBI_MAX_SWEEPS, JACOBI_TOL, MAX_RETRIES, SPECTRAL_RESIDUAL_TOL
from app.core.exceptions import (
    DimensionMismatchError,
    NonFiniteError,
    RankDeficiencyError,
    SpectralRecoveryError,
    UnitarityError,
)
from app.core.linalg import (
    TWO_PI,
    ComplexVec,
    DenseUnitary,
    DiagonalPhases,
    MatrixFreeUnitary,
    SpectralForm,
    UnitaryOperator,
    normalize_angles,
    verify_unitary,
)
from app.services.funcexpr import CircleFunction
from app.utils.misc import make_rng, random_complex

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10


def _log_retry(details) -> None:
    logger.info("Retrying %s (attempt %d)", details["target"].__name__, details["tries"])


class ConstructedUnitary(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    spectral: SpectralForm
    dense: np.ndarray

    @property
    def operator(self) -> DenseUnitary:
        return DenseUnitary(self.dense)


class AtomicMeasure(BaseModel):
    """sum_j weights_j * delta_{atoms_j} on [0, 2pi)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    atoms: np.ndarray
    weights: np.ndarray

    def integrate(self, f: CircleFunction) -> complex:
        return complex(np.sum(f.on_angles(self.atoms) * self.weights))

    @property
    def total_mass(self) -> complex:
        return complex(np.sum(self.weights))


def orthonormalize(G: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass per column."""
    Q = np.array(G, dtype=complex)
    n_cols = Q.shape[1]
    for j in range(n_cols):
        original = np.linalg.norm(Q[:, j])
        for _ in range(2):
            for i in range(j):
                Q[:, j] -= np.sum(np.conj(Q[:, i]) * Q[:, j]) * Q[:, i]
        norm = np.linalg.norm(Q[:, j])
        if original == 0.0 or norm <= RANK_TOL * original:
            raise RankDeficiencyError(f"random matrix is rank deficient at column {j}")
        Q[:, j] /= norm
    return Q


def construct(thetas, seed: int = 0) -> ConstructedUnitary:
    """Unitary V diag(e^{i theta}) V* with V drawn from a seeded random matrix."""
    thetas = normalize_angles(np.atleast_1d(thetas))
    d = thetas.shape[0]
    if d == 0:
        raise ValueError("thetas must be non-empty")
    rng = make_rng(seed)

    @backoff.on_exception(
        backoff.constant,
        RankDeficiencyError,
        max_tries=MAX_RETRIES,
        interval=0,
        jitter=None,
        on_backoff=_log_retry,
    )
    def draw_basis() -> np.ndarray:
        return orthonormalize(random_complex(rng, d, d))

    V = draw_basis()
    dense = (V * np.exp(1j * thetas)) @ V.conj().T
    dense.setflags(write=False)
    spectral = SpectralForm(eigenphases=thetas, eigenvectors=V)
    return ConstructedUnitary(spectral=spectral, dense=dense)


def jacobi_eigh(
    H: np.ndarray,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi for a Hermitian matrix. Returns (eigenvalues, eigenvector columns)."""
    A = np.array(H, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V

    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            return np.real(np.diag(A)).copy(), V
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                theta = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = 1.0 if theta == 0.0 else np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                phase = np.conj(apq / mag)
                J = np.array([[c, s], [-s * phase, c * phase]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                V[:, idx] = V[:, idx] @ J
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
    raise SpectralRecoveryError(f"Jacobi did not converge in {max_sweeps} sweeps")


def _as_dense(U: Union[UnitaryOperator, np.ndarray]) -> DenseUnitary:
    if isinstance(U, DenseUnitary):
        return U
    if isinstance(U, UnitaryOperator):
        return DenseUnitary(U.to_dense())
    return DenseUnitary(U)


def recover_spectral(U: Union[UnitaryOperator, np.ndarray], seed: int = 0) -> SpectralForm:
    dense = _as_dense(U)
    report = verify_unitary(dense)
    if not report.passed:
        raise UnitarityError(f"operator is not unitary: residual {report.max_residual:.3e}")
    matrix = dense.matrix
    adjoint = matrix.conj().T
    rng = make_rng(seed)

    @backoff.on_exception(
        backoff.constant,
        SpectralRecoveryError,
        max_tries=MAX_RETRIES,
        interval=0,
        jitter=None,
        on_backoff=_log_retry,
    )
    def diagonalize() -> SpectralForm:
        c = rng.uniform(0.0, TWO_PI)
        H = (np.exp(-1j * c) * matrix + np.exp(1j * c) * adjoint) / 2.0
        H = (H + H.conj().T) / 2.0
        _, V = jacobi_eigh(H)
        UV = matrix @ V
        rayleigh = np.sum(np.conj(V) * UV, axis=0)
        thetas = normalize_angles(np.angle(rayleigh))
        residuals = np.linalg.norm(UV - V * np.exp(1j * thetas), axis=0)
        worst = int(np.argmax(residuals))
        if residuals[worst] > SPECTRAL_RESIDUAL_TOL:
            raise SpectralRecoveryError(
                f"eigenpair residual {residuals[worst]:.3e} at column {worst} (phase c={c:.6f})",
                worst_column=worst,
                residual=float(residuals[worst]),
            )
        return SpectralForm(eigenphases=thetas, eigenvectors=V)

    return diagonalize()


def spectral_form_of(U: UnitaryOperator, seed: int = 0) -> Optional[SpectralForm]:
    if isinstance(U, DiagonalPhases):
        return SpectralForm(eigenphases=U.thetas, eigenvectors=np.eye(U.dim, dtype=complex))
    if isinstance(U, DenseUnitary):
        return recover_spectral(U, seed=seed)
    if isinstance(U, MatrixFreeUnitary):
        return U.spectral
    return None


def _check_dims(s: SpectralForm, *vectors: ComplexVec) -> None:
    for v in vectors:
        if v.dim != s.dim:
            raise DimensionMismatchError(s.dim, v.dim)


def _spectral_values(f: CircleFunction, s: SpectralForm) -> np.ndarray:
    values = f.on_angles(s.eigenphases)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"{f!r} is not finite on the spectrum")
    return values


def exact_f_of_U(f: CircleFunction, s: SpectralForm, v: ComplexVec) -> ComplexVec:
    """V diag(f(e^{i theta_j})) V* v."""
    _check_dims(s, v)
    V = s.eigenvectors
    coords = V.conj().T @ v.entries
    return ComplexVec(entries=V @ (_spectral_values(f, s) * coords))


def spectral_measure(s: SpectralForm, x: ComplexVec, y: ComplexVec) -> AtomicMeasure:
    """mu_{x,y} = sum_j (V*x)_j conj((V*y)_j) delta_{theta_j}."""
    _check_dims(s, x, y)
    V = s.eigenvectors
    a = V.conj().T @ x.entries
    b = V.conj().T @ y.entries
    return AtomicMeasure(atoms=s.eigenphases, weights=a * np.conj(b))


def exact_functional(f: CircleFunction, s: SpectralForm, x: ComplexVec, y: ComplexVec) -> complex:
    """<f(U) x, y> as the integral of f against the atomic measure mu_{x,y}."""
    measure = spectral_measure(s, x, y)
    return complex(np.sum(_spectral_values(f, s) * measure.weights))
