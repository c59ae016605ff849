"""
Fejér kernel and weights, equispaced circle grids, Fourier coefficients of
circle functions and Fejér means.

Reference normalization: (1/2pi) * integral of K_N over [0, 2pi) equals 1.
All t-integrals are equal-weight averages over an equispaced grid, which are
exact for trigonometric polynomials of degree <= M-1.
"""

from functools import lru_cache
from typing import TYPE_CHECKING, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.config import MIN_COEFF_GRID, MIN_SUP_GRID
from app.core.exceptions import GridTooSmallError, NonFiniteError, OrderError

if TYPE_CHECKING:
    from app.services.funcexpr import CircleFunction

TWO_PI = 2.0 * np.pi
KERNEL_SERIES_CUTOFF = 1e-8
_ROW_BLOCK = 256


def _check_order(N: int) -> None:
    if N < 0:
        raise OrderError(f"order N must be >= 0, got {N}")


class FejerWeights(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    N: int
    w: np.ndarray

    def weight(self, k: int) -> float:
        if abs(k) > self.N:
            return 0.0
        return float(self.w[k + self.N])


@lru_cache(maxsize=128)
def fejer_weights(N: int) -> FejerWeights:
    """w_k = 1 - |k|/(N+1) for k = -N..N."""
    _check_order(N)
    k = np.arange(-N, N + 1)
    w = 1.0 - np.abs(k) / (N + 1)
    w.setflags(write=False)
    return FejerWeights(N=N, w=w)


def fejer_kernel(N: int, tau):
    """K_N(tau), closed form with a direct-sum fallback near tau in 2*pi*Z."""
    _check_order(N)
    t = np.atleast_1d(np.asarray(tau, dtype=float))
    half_sin = np.sin(t / 2.0)
    near_pole = np.abs(half_sin) < KERNEL_SERIES_CUTOFF
    out = np.empty_like(t)

    regular = ~near_pole
    out[regular] = (np.sin((N + 1) * t[regular] / 2.0) / half_sin[regular]) ** 2 / (N + 1)

    if np.any(near_pole):
        w = fejer_weights(N).w[N + 1:]
        k = np.arange(1, N + 1)
        series = 1.0 + 2.0 * np.sum(w[None, :] * np.cos(np.outer(t[near_pole], k)), axis=1)
        out[near_pole] = series

    if np.ndim(tau) == 0:
        return float(out[0])
    return out


class CircleGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    M: int = Field(gt=0)

    @property
    def nodes(self) -> np.ndarray:
        """t_j = 2*pi*j/M, j = 0..M-1."""
        return TWO_PI * np.arange(self.M) / self.M

    def points(self) -> np.ndarray:
        return np.exp(1j * self.nodes)


def default_grid_size(N: int) -> int:
    """Coefficient grid: alias-free for the band and fine enough for smooth f."""
    return max(2 * N + 2, MIN_COEFF_GRID)


def quadrature_grid_size(N: int) -> int:
    return 2 * N + 2


def require_grid(M: int, N: int) -> None:
    if M < 2 * N + 2:
        raise GridTooSmallError(M, 2 * N + 2)


class FourierTable(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    N: int
    coeffs: np.ndarray
    grid_size: int

    @field_validator("coeffs", mode="before")
    @classmethod
    def _freeze(cls, value):
        arr = np.array(value, dtype=complex)
        arr.setflags(write=False)
        return arr

    def coefficient(self, k: int) -> complex:
        if abs(k) > self.N:
            return 0j
        return complex(self.coeffs[k + self.N])

    def weighted(self) -> np.ndarray:
        """w_k * f^(k), k = -N..N."""
        return fejer_weights(self.N).w * self.coeffs


def _phase_matrix(k: np.ndarray, M: int, sign: int) -> np.ndarray:
    # exp(sign * 2*pi*i * k*j / M), reduced mod M in integers first
    j = np.arange(M)
    idx = np.mod(np.outer(k, j), M)
    return np.exp(sign * 2j * np.pi * idx / M)


def sample_on_grid(f: "CircleFunction", grid: CircleGrid) -> np.ndarray:
    values = f.on_angles(grid.nodes)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"{f!r} is not finite on the grid")
    return values


def fourier_coeffs(
    f: "CircleFunction",
    N: int,
    M: Optional[int] = None,
    method: Literal["direct", "fft"] = "direct",
) -> FourierTable:
    """f^(k) = (1/M) sum_j f(e^{i t_j}) e^{-i k t_j}, k = -N..N."""
    _check_order(N)
    if M is None:
        M = default_grid_size(N)
    require_grid(M, N)
    values = sample_on_grid(f, CircleGrid(M=M))
    k = np.arange(-N, N + 1)

    if method == "fft":
        coeffs = np.fft.fft(values)[np.mod(k, M)] / M
    elif method == "direct":
        coeffs = np.empty(2 * N + 1, dtype=complex)
        for start in range(0, 2 * N + 1, _ROW_BLOCK):
            rows = k[start:start + _ROW_BLOCK]
            coeffs[start:start + _ROW_BLOCK] = np.sum(_phase_matrix(rows, M, -1) * values[None, :], axis=1) / M
    else:
        raise ValueError(f"unknown method {method!r}")
    return FourierTable(N=N, coeffs=coeffs, grid_size=M)


def synthesize_on_grid(coeffs: np.ndarray, N: int, grid: CircleGrid) -> np.ndarray:
    """sum_{k=-N..N} a_k e^{i k t_j} on the grid nodes."""
    k = np.arange(-N, N + 1)
    out = np.zeros(grid.M, dtype=complex)
    for start in range(0, 2 * N + 1, _ROW_BLOCK):
        rows = k[start:start + _ROW_BLOCK]
        out += np.sum(_phase_matrix(rows, grid.M, 1) * coeffs[start:start + _ROW_BLOCK, None], axis=0)
    return out


def fejer_mean(f: "CircleFunction", N: int, grid: CircleGrid) -> np.ndarray:
    """sigma_N f(t_j) = sum_k w_k f^(k) e^{i k t_j}."""
    table = fourier_coeffs(f, N, grid.M)
    return synthesize_on_grid(table.weighted(), N, grid)


def sup_error(f: "CircleFunction", N: int, fine_grid: Optional[CircleGrid] = None) -> float:
    """max_j |sigma_N f(t_j) - f(e^{i t_j})| over a fine grid."""
    _check_order(N)
    required = max(4 * N, MIN_SUP_GRID)
    if fine_grid is None:
        fine_grid = CircleGrid(M=required)
    if fine_grid.M < required:
        raise GridTooSmallError(fine_grid.M, required)
    smoothed = fejer_mean(f, N, fine_grid)
    exact = sample_on_grid(f, fine_grid)
    return float(np.max(np.abs(smoothed - exact)))


def smooth_measure(atoms, weights, N: int, grid: CircleGrid) -> np.ndarray:
    """(1/2pi) * sum_j a_j K_N(t - theta_j) for the atomic measure sum_j a_j delta_{theta_j}."""
    atoms = np.asarray(atoms, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    if atoms.shape != weights.shape:
        raise ValueError("atoms and weights must have the same length")
    t = grid.nodes
    kernel = fejer_kernel(N, t[:, None] - atoms[None, :]).reshape(t.size, atoms.size)
    return np.sum(kernel * weights[None, :], axis=1) / TWO_PI
