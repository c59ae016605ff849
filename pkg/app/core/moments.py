"""
Operator trigonometric moments m_k = <U^k x, y> and the vectors T_N(t) v.

Powers are produced by iterated application, never by forming U^k; negative
powers go through the adjoint. Norm drift along the orbit is monitored.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.config import DRIFT_FAIL, DRIFT_WARN
from app.core.exceptions import DimensionMismatchError, OrbitDriftError, OrderError
from app.core.linalg import ComplexVec, UnitaryOperator, vdot

logger = logging.getLogger(__name__)


class PowerOrbit(BaseModel):
    """u_k = U^k v for k = -N..N, stored row-wise at index k + N."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    N: int
    vectors: np.ndarray
    max_drift: float

    def u(self, k: int) -> np.ndarray:
        if abs(k) > self.N:
            raise IndexError(f"orbit of order {self.N} has no power {k}")
        return self.vectors[k + self.N]

    @property
    def nonnegative(self) -> np.ndarray:
        """u_0 .. u_N."""
        return self.vectors[self.N:]


class MomentTable(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    N: int
    m: np.ndarray
    x_id: str = "x"
    y_id: str = "y"
    max_drift: float = 0.0

    def moment(self, k: int) -> complex:
        if abs(k) > self.N:
            raise IndexError(f"moment table of order {self.N} has no index {k}")
        return complex(self.m[k + self.N])

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)


def _check_inputs(U: UnitaryOperator, v: ComplexVec, N: int) -> None:
    if N < 0:
        raise OrderError(f"order N must be >= 0, got {N}")
    if v.dim != U.dim:
        raise DimensionMismatchError(U.dim, v.dim)


def check_drift(max_deviation: float, base_norm: float) -> float:
    """Relative norm drift; warns above DRIFT_WARN and fails above DRIFT_FAIL."""
    if base_norm == 0.0:
        return max_deviation
    relative = max_deviation / base_norm
    if relative > DRIFT_FAIL:
        raise OrbitDriftError(f"power orbit lost unitarity: relative norm drift {relative:.3e}")
    if relative > DRIFT_WARN:
        logger.warning("Power orbit norm drift %.3e exceeds %.0e", relative, DRIFT_WARN)
    return relative


def power_orbit(U: UnitaryOperator, v: ComplexVec, N: int) -> PowerOrbit:
    _check_inputs(U, v, N)
    vectors = np.empty((2 * N + 1, U.dim), dtype=complex)
    vectors[N] = v.entries
    for k in range(N):
        vectors[N + k + 1] = U.matvec(vectors[N + k])
        vectors[N - k - 1] = U.rmatvec(vectors[N - k])

    base_norm = v.norm()
    deviation = float(np.max(np.abs(np.linalg.norm(vectors, axis=1) - base_norm)))
    drift = check_drift(deviation, base_norm)
    vectors.setflags(write=False)
    return PowerOrbit(N=N, vectors=vectors, max_drift=drift)


def moment_table(
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N: int,
    streaming: bool = False,
    x_id: str = "x",
    y_id: str = "y",
) -> MomentTable:
    """m_k = <U^k x, y> for |k| <= N."""
    _check_inputs(U, x, N)
    if y.dim != U.dim:
        raise DimensionMismatchError(U.dim, y.dim)

    m = np.empty(2 * N + 1, dtype=complex)
    if streaming:
        base_norm = x.norm()
        forward = backward = x.entries
        m[N] = vdot(forward, y.entries)
        deviation = 0.0
        for k in range(1, N + 1):
            forward = U.matvec(forward)
            backward = U.rmatvec(backward)
            m[N + k] = vdot(forward, y.entries)
            m[N - k] = vdot(backward, y.entries)
            deviation = max(
                deviation,
                abs(float(np.linalg.norm(forward)) - base_norm),
                abs(float(np.linalg.norm(backward)) - base_norm),
            )
        drift = check_drift(deviation, base_norm)
    else:
        orbit = power_orbit(U, x, N)
        m[:] = np.sum(orbit.vectors * np.conj(y.entries)[None, :], axis=1)
        drift = orbit.max_drift

    m.setflags(write=False)
    return MomentTable(N=N, m=m, x_id=x_id, y_id=y_id, max_drift=drift)


def synthesize_T_batch(orbit: PowerOrbit, ts) -> np.ndarray:
    """Rows T_N(t_j) v = sum_{n=0}^N e^{-i t_j n} u_n for every t_j."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    n = np.arange(orbit.N + 1)
    phases = np.exp(-1j * np.outer(ts, n))
    return phases @ orbit.nonnegative


def synthesize_T(orbit: PowerOrbit, t: float) -> ComplexVec:
    return ComplexVec(entries=synthesize_T_batch(orbit, [t])[0])
