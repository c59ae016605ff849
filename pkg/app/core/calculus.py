"""
Fejér functional calculus.

F^N_{x,y}(f) = (1/(N+1)) (1/2pi) int <T_N(t)x, T_N(t)y> f(e^{it}) dt
             = sum_{|k|<=N} w_k f^(k) <U^k x, y>

is computed on both sides of that identity (coefficient and quadrature
paths), together with (sigma_N f)(U) v, the smoothed spectral density and the
adjoint / product law residuals.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.config import MAX_WORKERS, MIN_SUP_GRID
from app.core.exceptions import DimensionMismatchError, OrderError
from app.core.fejer import (
    TWO_PI,
    CircleGrid,
    FourierTable,
    default_grid_size,
    fejer_weights,
    fourier_coeffs,
    quadrature_grid_size,
    require_grid,
    sample_on_grid,
    sup_error,
    synthesize_on_grid,
)
from app.core.linalg import ComplexVec, SpectralForm, UnitaryOperator, inner
from app.core.moments import moment_table, power_orbit, synthesize_T_batch
from app.core.oracle import exact_functional, spectral_form_of
from app.services.funcexpr import CircleFunction

logger = logging.getLogger(__name__)


class FunctionalResult(BaseModel):
    N: int
    value: complex
    error_bound: float
    path: Literal["coefficient", "quadrature"]
    grid_size: int
    f_sup: float
    oracle_gap: Optional[float] = None


class DensityEstimate(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    N: int
    grid: CircleGrid
    values: np.ndarray
    total_mass: complex


class TrigPolynomial(BaseModel):
    """p(e^{it}) = sum_{|k|<=degree} c_k e^{ikt}."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    degree: int
    coeffs: np.ndarray

    @field_validator("coeffs", mode="before")
    @classmethod
    def _coerce(cls, value):
        return np.array(value, dtype=complex)

    @model_validator(mode="after")
    def _check(self):
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        if self.coeffs.shape != (2 * self.degree + 1,):
            raise ValueError(f"need {2 * self.degree + 1} coefficients, got {self.coeffs.shape}")
        return self

    @classmethod
    def from_dict(cls, coeffs: dict) -> "TrigPolynomial":
        degree = max((abs(k) for k in coeffs), default=0)
        c = np.zeros(2 * degree + 1, dtype=complex)
        for k, value in coeffs.items():
            c[k + degree] = value
        return cls(degree=degree, coeffs=c)

    def evaluate(self, t) -> np.ndarray:
        k = np.arange(-self.degree, self.degree + 1)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.sum(np.exp(1j * np.outer(t, k)) * self.coeffs[None, :], axis=1)

    def sup_norm(self, grid: Optional[CircleGrid] = None) -> float:
        if grid is None:
            grid = CircleGrid(M=max(2 * self.degree + 2, MIN_SUP_GRID))
        return float(np.max(np.abs(synthesize_on_grid(self.coeffs, self.degree, grid))))


class SweepRow(BaseModel):
    N: int
    value: complex
    error_bound: float
    oracle_gap: Optional[float] = None


def fejer_polynomial(table: FourierTable) -> TrigPolynomial:
    """sigma_N f as a trigonometric polynomial of degree N."""
    return TrigPolynomial(degree=table.N, coeffs=table.weighted())


def _check_pair(U: UnitaryOperator, x: ComplexVec, y: ComplexVec, N: int) -> None:
    if N < 0:
        raise OrderError(f"order N must be >= 0, got {N}")
    for v in (x, y):
        if v.dim != U.dim:
            raise DimensionMismatchError(U.dim, v.dim)


def _bound(f: CircleFunction, N: int, x: ComplexVec, y: ComplexVec) -> float:
    return sup_error(f, N) * x.norm() * y.norm()


def functional_coeff(
    f: CircleFunction,
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N: int,
    M: Optional[int] = None,
) -> FunctionalResult:
    """sum_k w_k f^(k) m_k."""
    _check_pair(U, x, y, N)
    if M is None:
        M = default_grid_size(N)
    table = fourier_coeffs(f, N, M)
    moments = moment_table(U, x, y, N)
    value = complex(np.sum(table.weighted() * moments.m))
    f_sup = float(np.max(np.abs(sample_on_grid(f, CircleGrid(M=M)))))
    return FunctionalResult(
        N=N,
        value=value,
        error_bound=_bound(f, N, x, y),
        path="coefficient",
        grid_size=M,
        f_sup=f_sup,
    )


def _pointwise_products(U: UnitaryOperator, x: ComplexVec, y: ComplexVec, N: int, grid: CircleGrid) -> np.ndarray:
    """(1/(N+1)) <T_N(t_j) x, T_N(t_j) y> on the grid."""
    orbit_x = power_orbit(U, x, N)
    orbit_y = orbit_x if y is x else power_orbit(U, y, N)
    tx = synthesize_T_batch(orbit_x, grid.nodes)
    ty = tx if orbit_y is orbit_x else synthesize_T_batch(orbit_y, grid.nodes)
    return np.sum(tx * np.conj(ty), axis=1) / (N + 1)


def functional_quad(
    f: CircleFunction,
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N: int,
    M: Optional[int] = None,
) -> FunctionalResult:
    """(1/(N+1)) (1/M) sum_j <T_N(t_j)x, T_N(t_j)y> f(e^{i t_j})."""
    _check_pair(U, x, y, N)
    if M is None:
        M = quadrature_grid_size(N)
    require_grid(M, N)
    grid = CircleGrid(M=M)
    products = _pointwise_products(U, x, y, N, grid)
    f_values = sample_on_grid(f, grid)
    value = complex(np.sum(products * f_values) / M)
    return FunctionalResult(
        N=N,
        value=value,
        error_bound=_bound(f, N, x, y),
        path="quadrature",
        grid_size=M,
        f_sup=float(np.max(np.abs(f_values))),
    )


def functional_norm(
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N: int,
    M: Optional[int] = None,
) -> float:
    """(1/(N+1)) (1/M) sum_j |<T_N(t_j)x, T_N(t_j)y>|, an upper bound for ||F^N_{x,y}||."""
    _check_pair(U, x, y, N)
    if M is None:
        M = quadrature_grid_size(N)
    require_grid(M, N)
    products = _pointwise_products(U, x, y, N, CircleGrid(M=M))
    return float(np.sum(np.abs(products)) / M)


def fejer_apply(
    f: CircleFunction,
    U: UnitaryOperator,
    v: ComplexVec,
    N: int,
    M: Optional[int] = None,
) -> ComplexVec:
    """(sigma_N f)(U) v = sum_k w_k f^(k) U^k v."""
    table = fourier_coeffs(f, N, M)
    orbit = power_orbit(U, v, N)
    return ComplexVec(entries=np.sum(table.weighted()[:, None] * orbit.vectors, axis=0))


def apply_trig_poly(p: TrigPolynomial, U: UnitaryOperator, v: ComplexVec) -> ComplexVec:
    """p(U) v = sum_k c_k U^k v, without Fejér damping."""
    orbit = power_orbit(U, v, p.degree)
    return ComplexVec(entries=np.sum(p.coeffs[:, None] * orbit.vectors, axis=0))


def density(
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N: int,
    grid: Optional[CircleGrid] = None,
) -> DensityEstimate:
    """d_N(t_j) = (1/2pi) sum_k w_k m_k e^{-ikt_j}, the Fejér smoothing of mu_{x,y}."""
    _check_pair(U, x, y, N)
    if grid is None:
        grid = CircleGrid(M=quadrature_grid_size(N))
    require_grid(grid.M, N)
    moments = moment_table(U, x, y, N)
    weighted = fejer_weights(N).w * moments.m
    # e^{-ikt} synthesis is e^{ikt} synthesis of the reversed sequence
    values = synthesize_on_grid(weighted[::-1], N, grid) / TWO_PI
    values.setflags(write=False)
    total_mass = complex(np.sum(values) * TWO_PI / grid.M)
    return DensityEstimate(N=N, grid=grid, values=values, total_mass=total_mass)


def adjoint_residual(
    f: CircleFunction,
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N: int,
) -> float:
    """|F^N_{x,y}(conj f) - conj(F^N_{y,x}(f))|, zero up to rounding."""
    lhs = functional_coeff(f.conjugate(), U, x, y, N).value
    rhs = functional_coeff(f, U, y, x, N).value
    return abs(lhs - np.conj(rhs))


def product_residual(
    f: CircleFunction,
    g: CircleFunction,
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N: int,
) -> float:
    """|F^N_{x,y}(f g) - <(sigma_N g)(U) x, (sigma_N conj f)(U) y>|; decays with N."""
    lhs = functional_coeff(f * g, U, x, y, N).value
    gx = fejer_apply(g, U, x, N)
    fy = fejer_apply(f.conjugate(), U, y, N)
    return abs(lhs - inner(gx, fy))


def convergence_sweep(
    f: CircleFunction,
    U: UnitaryOperator,
    x: ComplexVec,
    y: ComplexVec,
    N_list: Sequence[int],
    spectral: Optional[SpectralForm] = None,
    use_oracle: bool = True,
    max_workers: int = MAX_WORKERS,
) -> List[SweepRow]:
    """Value, Fejér bound and (when a spectral form exists) the gap to <f(U)x, y> per N."""
    N_list = list(N_list)
    if not N_list:
        raise OrderError("N_list must be non-empty")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise OrderError(f"N_list must be strictly increasing, got {N_list}")

    exact = None
    if use_oracle:
        if spectral is None:
            spectral = spectral_form_of(U)
        if spectral is not None:
            exact = exact_functional(f, spectral, x, y)
        else:
            logger.info("No spectral form for %r; oracle gap omitted", U)

    def row(N: int) -> SweepRow:
        result = functional_coeff(f, U, x, y, N)
        gap = abs(result.value - exact) if exact is not None else None
        return SweepRow(N=N, value=result.value, error_bound=result.error_bound, oracle_gap=gap)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(row, N_list))
