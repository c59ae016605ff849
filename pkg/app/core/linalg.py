"""
Complex vectors, the inner product and the unitary-operator abstraction.

The inner product is linear in the first argument and conjugate-linear in the
second. Negative powers of U are always applied through the adjoint.
"""

from abc import ABC, abstractmethod
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.config import SAMPLED_UNITARY_TOL, UNITARY_SAMPLES, UNITARY_TOL
from app.core.exceptions import DimensionMismatchError, NonFiniteError
from app.utils.misc import make_rng, random_complex

TWO_PI = 2.0 * np.pi

ArrayMap = Callable[[np.ndarray], np.ndarray]


def normalize_angles(thetas) -> np.ndarray:
    """Map angles into [0, 2pi)."""
    out = np.mod(np.asarray(thetas, dtype=float), TWO_PI)
    out[out >= TWO_PI] = 0.0
    return out


def vdot(a: np.ndarray, b: np.ndarray) -> complex:
    # conjugates the second argument; pairwise summation through np.sum
    return complex(np.sum(a * np.conj(b)))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class ComplexVec(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray

    @field_validator("entries", mode="before")
    @classmethod
    def _coerce(cls, value):
        arr = np.array(value, dtype=complex)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("ComplexVec needs a non-empty one-dimensional list of entries")
        if not np.all(np.isfinite(arr)):
            raise ValueError("ComplexVec entries must be finite")
        return _frozen(arr)

    @classmethod
    def of(cls, values) -> "ComplexVec":
        return cls(entries=values)

    @classmethod
    def basis(cls, dim: int, index: int) -> "ComplexVec":
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for dim {dim}")
        e = np.zeros(dim, dtype=complex)
        e[index] = 1.0
        return cls(entries=e)

    @classmethod
    def random(cls, dim: int, seed: Optional[int] = None, normalized: bool = True) -> "ComplexVec":
        v = random_complex(make_rng(seed), dim)
        if normalized:
            v = v / np.linalg.norm(v)
        return cls(entries=v)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.entries) ** 2)))

    def __len__(self) -> int:
        return self.dim


def inner(x: ComplexVec, y: ComplexVec) -> complex:
    """<x, y> = sum_j x_j * conj(y_j)."""
    if x.dim != y.dim:
        raise DimensionMismatchError(x.dim, y.dim)
    return vdot(x.entries, y.entries)


class UnitaryOperator(ABC):
    """A unitary U on C^d, known through forward and adjoint application."""

    form: str = "abstract"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("operator dimension must be positive")
        self.dim = dim

    @abstractmethod
    def matvec(self, v: np.ndarray) -> np.ndarray:
        """U @ v on raw arrays."""

    @abstractmethod
    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        """U* @ v on raw arrays."""

    def __matmul__(self, v: np.ndarray) -> np.ndarray:
        return self.matvec(v)

    def to_dense(self) -> np.ndarray:
        eye = np.eye(self.dim, dtype=complex)
        return np.column_stack([self.matvec(eye[:, j]) for j in range(self.dim)])

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class DenseUnitary(UnitaryOperator):
    form = "dense"

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"dense operator must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonFiniteError("dense operator has non-finite entries")
        super().__init__(m.shape[0])
        self.matrix = _frozen(m)
        self._adjoint = _frozen(m.conj().T.copy())

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        return self._adjoint @ v

    def to_dense(self) -> np.ndarray:
        return np.array(self.matrix)


class DiagonalPhases(UnitaryOperator):
    form = "diagonal"

    def __init__(self, thetas):
        th = normalize_angles(np.atleast_1d(thetas))
        super().__init__(th.shape[0])
        self.thetas = _frozen(th)
        self._phases = _frozen(np.exp(1j * th))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self._phases * v

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        return np.conj(self._phases) * v

    def to_dense(self) -> np.ndarray:
        return np.diag(self._phases)


class MatrixFreeUnitary(UnitaryOperator):
    form = "matrix_free"

    def __init__(
        self,
        dim: int,
        forward: ArrayMap,
        adjoint: ArrayMap,
        spectral: Optional["SpectralForm"] = None,
    ):
        super().__init__(dim)
        self._forward = forward
        self._adjoint = adjoint
        self.spectral = spectral

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self._forward(v), dtype=complex)

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self._adjoint(v), dtype=complex)


def apply(U: UnitaryOperator, v: ComplexVec, power_sign: Literal[1, -1] = 1) -> ComplexVec:
    """U v for power_sign=+1, U* v = U^{-1} v for power_sign=-1."""
    if v.dim != U.dim:
        raise DimensionMismatchError(U.dim, v.dim)
    if power_sign == 1:
        out = U.matvec(v.entries)
    elif power_sign == -1:
        out = U.rmatvec(v.entries)
    else:
        raise ValueError(f"power_sign must be +1 or -1, got {power_sign}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"{U!r} produced non-finite output")
    return ComplexVec(entries=out)


class UnitarityReport(BaseModel):
    max_residual: float
    passed: bool
    tolerance: float
    method: Literal["exact", "sampled"]
    samples: int


def verify_unitary(U: UnitaryOperator, samples: int = UNITARY_SAMPLES, seed: int = 0) -> UnitarityReport:
    if samples < 1:
        raise ValueError("samples must be >= 1")

    if isinstance(U, DenseUnitary):
        gram = U.matrix.conj().T @ U.matrix
        residual = float(np.max(np.abs(gram - np.eye(U.dim))))
        return UnitarityReport(
            max_residual=residual,
            passed=bool(residual <= UNITARY_TOL),
            tolerance=UNITARY_TOL,
            method="exact",
            samples=0,
        )

    rng = make_rng(seed)
    residual = 0.0
    for _ in range(samples):
        v = random_complex(rng, U.dim)
        norm_v = np.linalg.norm(v)
        forward = U.matvec(v)
        round_trip = U.rmatvec(forward)
        reverse_trip = U.matvec(U.rmatvec(v))
        residual = max(
            residual,
            float(np.linalg.norm(round_trip - v) / norm_v),
            float(np.linalg.norm(reverse_trip - v) / norm_v),
            abs(float(np.linalg.norm(forward)) - norm_v) / norm_v,
        )
    if not np.isfinite(residual):
        residual = float("inf")
    return UnitarityReport(
        max_residual=residual,
        passed=bool(residual <= SAMPLED_UNITARY_TOL),
        tolerance=SAMPLED_UNITARY_TOL,
        method="sampled",
        samples=samples,
    )


class SpectralForm(BaseModel):
    """Eigenphases theta_j in [0, 2pi) and orthonormal eigenvector columns V."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenphases: np.ndarray
    eigenvectors: np.ndarray

    @field_validator("eigenphases", mode="before")
    @classmethod
    def _phases(cls, value):
        return _frozen(normalize_angles(np.atleast_1d(value)))

    @field_validator("eigenvectors", mode="before")
    @classmethod
    def _vectors(cls, value):
        return _frozen(np.array(value, dtype=complex))

    @model_validator(mode="after")
    def _check(self):
        d = self.eigenphases.shape[0]
        if self.eigenvectors.shape != (d, d):
            raise ValueError(f"eigenvectors must be {d}x{d}, got {self.eigenvectors.shape}")
        if self.orthonormality_residual() > UNITARY_TOL:
            raise ValueError("eigenvector columns are not orthonormal")
        return self

    @property
    def dim(self) -> int:
        return int(self.eigenphases.shape[0])

    def orthonormality_residual(self) -> float:
        V = self.eigenvectors
        return float(np.max(np.abs(V.conj().T @ V - np.eye(V.shape[0]))))

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * np.exp(1j * self.eigenphases)) @ V.conj().T
