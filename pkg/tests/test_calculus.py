import numpy as np
import pytest
from pydantic import ValidationError

from app.core.calculus import (
    TrigPolynomial,
    adjoint_residual,
    apply_trig_poly,
    convergence_sweep,
    density,
    fejer_apply,
    fejer_polynomial,
    functional_coeff,
    functional_norm,
    functional_quad,
    product_residual,
)
from app.core.exceptions import GridTooSmallError, OrderError
from app.core.fejer import CircleGrid, fourier_coeffs, smooth_measure
from app.core.linalg import ComplexVec, DenseUnitary, DiagonalPhases, MatrixFreeUnitary, apply, inner
from app.core.moments import moment_table
from app.core.oracle import spectral_form_of, spectral_measure
from app.services.funcexpr import CircleFunction
from app.services.generators import generate

ONE = CircleFunction.resolve("one")
Z = CircleFunction.resolve("z")


def test_constant_function_gives_inner_product(make_unitary, make_vector):
    U, x, y = make_unitary(6), make_vector(6), make_vector(6)
    result = functional_coeff(ONE, U, x, y, 9)
    assert abs(result.value - inner(x, y)) < 1e-12
    assert result.path == "coefficient"
    assert result.grid_size == 256
    assert result.f_sup == pytest.approx(1.0)


def test_monomial_law(make_unitary, make_vector):
    U, x, y = make_unitary(5), make_vector(5), make_vector(5)
    table = moment_table(U, x, y, 6)
    for n in (-3, 1, 3, 6):
        value = functional_coeff(CircleFunction.resolve(f"power({n})"), U, x, y, 6).value
        assert abs(value - (1 - abs(n) / 7) * table.moment(n)) < 1e-12


def test_out_of_band_monomial_vanishes(make_unitary, make_vector):
    U, x, y = make_unitary(5), make_vector(5), make_vector(5)
    assert abs(functional_coeff(CircleFunction.resolve("z^9"), U, x, y, 6).value) < 1e-12


def test_quadrature_mass_identity(make_unitary, make_vector):
    U, x = make_unitary(7), make_vector(7, normalized=False)
    result = functional_quad(ONE, U, x, x, 5)
    assert result.value == pytest.approx(x.norm() ** 2, rel=1e-10)
    assert result.grid_size == 12
    assert result.path == "quadrature"


def test_paths_agree_for_z(make_unitary, make_vector):
    U, x, y = make_unitary(6), make_vector(6), make_vector(6)
    coeff = functional_coeff(Z, U, x, y, 3, 8)
    quad = functional_quad(Z, U, x, y, 3, 8)
    assert abs(coeff.value - quad.value) < 1e-10


def test_quadrature_band_orthogonality(make_unitary, make_vector):
    U, x, y = make_unitary(6), make_vector(6), make_vector(6)
    N = 5
    assert abs(functional_quad(CircleFunction.resolve(f"z^{N + 1}"), U, x, y, N).value) < 1e-10


def test_quadrature_grid_too_small(make_unitary, make_vector):
    U, x = make_unitary(3), make_vector(3)
    with pytest.raises(GridTooSmallError):
        functional_quad(ONE, U, x, x, 4, 9)


def test_error_bound_scales_with_norms(make_unitary, make_vector):
    U, x, y = make_unitary(4), make_vector(4, normalized=False), make_vector(4, normalized=False)
    result = functional_coeff(CircleFunction.resolve("re_z"), U, x, y, 9)
    assert result.error_bound == pytest.approx(0.1 * x.norm() * y.norm(), rel=1e-10)


def test_fejer_apply_z(make_unitary, make_vector):
    U, v = make_unitary(5), make_vector(5)
    N = 4
    expected = (1 - 1 / (N + 1)) * apply(U, v).entries
    assert np.allclose(fejer_apply(Z, U, v, N).entries, expected, atol=1e-12)


def test_fejer_apply_one_is_identity(make_unitary, make_vector):
    U, v = make_unitary(5), make_vector(5)
    assert np.allclose(fejer_apply(ONE, U, v, 7).entries, v.entries, atol=1e-14)


def test_fejer_apply_diagonal_is_componentwise():
    thetas = np.array([0.2, 1.5, 3.3, 5.9])
    U = DiagonalPhases(thetas)
    v = ComplexVec.of([1, -1j, 0.5, 2])
    f = CircleFunction.resolve("exp_z")
    N = 10
    sigma = fejer_polynomial(fourier_coeffs(f, N)).evaluate(thetas)
    assert np.allclose(fejer_apply(f, U, v, N).entries, sigma * v.entries, atol=1e-10)


def test_fejer_apply_pairs_with_functional(make_unitary, make_vector):
    U, v, y = make_unitary(6), make_vector(6), make_vector(6)
    f = CircleFunction.resolve("1/(z-2) + re(z)^2")
    lhs = inner(fejer_apply(f, U, v, 12), y)
    assert abs(lhs - functional_coeff(f, U, v, y, 12).value) < 1e-10


def test_fejer_apply_equals_fejer_polynomial(make_unitary, make_vector):
    U, v = make_unitary(6), make_vector(6)
    f = CircleFunction.resolve("exp_z")
    p = fejer_polynomial(fourier_coeffs(f, 9))
    assert p.degree == 9
    assert np.allclose(fejer_apply(f, U, v, 9).entries, apply_trig_poly(p, U, v).entries, atol=1e-12)


def test_apply_trig_poly_on_shift():
    U = generate("shift", 4).operator
    p = TrigPolynomial.from_dict({2: 1.0})
    assert np.allclose(apply_trig_poly(p, U, ComplexVec.basis(4, 0)).entries, ComplexVec.basis(4, 2).entries)


def test_apply_trig_poly_constant(make_unitary, make_vector):
    U, v = make_unitary(3), make_vector(3)
    p = TrigPolynomial(degree=0, coeffs=[2 - 1j])
    assert np.allclose(apply_trig_poly(p, U, v).entries, (2 - 1j) * v.entries)


def test_apply_trig_poly_cosine_on_diagonal():
    thetas = np.array([0.0, 1.0, 2.5])
    v = ComplexVec.of([1, 2, 3j])
    p = TrigPolynomial.from_dict({1: 0.5, -1: 0.5})
    out = apply_trig_poly(p, DiagonalPhases(thetas), v)
    assert np.allclose(out.entries, np.cos(thetas) * v.entries, atol=1e-14)


def test_apply_trig_poly_norm_and_moments(make_unitary, make_vector):
    U, x, y = make_unitary(6), make_vector(6), make_vector(6)
    p = TrigPolynomial.from_dict({-2: 0.3j, 0: 1.0, 3: -0.7})
    out = apply_trig_poly(p, U, x)
    assert out.norm() <= p.sup_norm() * x.norm() + 1e-9
    table = moment_table(U, x, y, 3)
    expected = sum(p.coeffs[k + 3] * table.moment(k) for k in range(-3, 4))
    assert abs(inner(out, y) - expected) < 1e-10


def test_trig_polynomial_validation():
    with pytest.raises(ValidationError):
        TrigPolynomial(degree=1, coeffs=[1, 2])
    with pytest.raises(ValidationError):
        TrigPolynomial(degree=-1, coeffs=[])
    p = TrigPolynomial.from_dict({1: 1.0})
    assert p.evaluate(0.5)[0] == pytest.approx(np.exp(0.5j))


def test_density_diagonal_matches_kernel_sum():
    thetas = np.array([0.4, 2.0, 4.4])
    U = DiagonalPhases(thetas)
    x = ComplexVec.of([0.6, 0.8j, 0])
    N = 16
    est = density(U, x, x, N)
    assert est.grid.M == 2 * N + 2
    expected = smooth_measure(thetas, np.abs(x.entries) ** 2, N, est.grid)
    assert np.allclose(est.values, expected, atol=1e-10)


def test_density_equals_smoothed_spectral_measure(make_constructed, make_vector):
    built = make_constructed(6, seed=4)
    x, y = make_vector(6), make_vector(6)
    grid = CircleGrid(M=50)
    est = density(built.operator, x, y, 12, grid)
    mu = spectral_measure(built.spectral, x, y)
    assert np.allclose(est.values, smooth_measure(mu.atoms, mu.weights, 12, grid), atol=1e-10)


def test_density_total_mass(make_unitary, make_vector):
    U, x, y = make_unitary(5), make_vector(5), make_vector(5)
    est = density(U, x, y, 8)
    assert abs(est.total_mass - inner(x, y)) < 1e-10


def test_density_of_orthogonal_vectors_under_identity():
    U = DenseUnitary(np.eye(3))
    est = density(U, ComplexVec.basis(3, 0), ComplexVec.basis(3, 1), 5)
    assert np.max(np.abs(est.values)) == 0.0


def test_density_grid_too_small(make_unitary, make_vector):
    U, x = make_unitary(3), make_vector(3)
    with pytest.raises(GridTooSmallError):
        density(U, x, x, 5, CircleGrid(M=11))


def test_adjoint_residual_for_z(make_unitary, make_vector):
    U, x, y = make_unitary(6), make_vector(6), make_vector(6)
    assert adjoint_residual(Z, U, x, y, 10) < 1e-12


def test_real_function_gives_real_value(make_unitary, make_vector):
    U, x = make_unitary(6), make_vector(6)
    f = CircleFunction.resolve("re_z")
    assert adjoint_residual(f, U, x, x, 10) < 1e-12
    assert abs(functional_coeff(f, U, x, x, 10).value.imag) < 1e-12


def test_adjoint_residual_random_expression(make_unitary, make_vector, make_expression):
    U, x, y = make_unitary(8), make_vector(8), make_vector(8)
    for _ in range(5):
        assert adjoint_residual(make_expression(), U, x, y, 16) < 1e-10


def test_product_residual_constant(make_unitary, make_vector):
    U, x, y = make_unitary(4), make_vector(4), make_vector(4)
    assert product_residual(ONE, ONE, U, x, y, 6) < 1e-12


def test_product_residual_identity_closed_form(make_vector):
    U = DenseUnitary(np.eye(4))
    x = make_vector(4)
    g = CircleFunction.resolve("z^-1")
    for N in (1, 4, 32):
        expected = (2 * N + 1) / (N + 1) ** 2
        assert product_residual(Z, g, U, x, x, N) == pytest.approx(expected, abs=1e-10)


def test_product_residual_decays(make_unitary, make_vector):
    U, x, y = make_unitary(8), make_vector(8), make_vector(8)
    f = CircleFunction.resolve("re_z")
    assert product_residual(f, f, U, x, y, 256) < product_residual(f, f, U, x, y, 16)


def test_functional_norm_bounds(make_unitary, make_vector):
    U, x, y = make_unitary(6), make_vector(6, normalized=False), make_vector(6, normalized=False)
    assert functional_norm(U, x, y, 10) <= x.norm() * y.norm() + 1e-9
    assert functional_norm(U, x, x, 10) == pytest.approx(x.norm() ** 2, rel=1e-10)


def test_sweep_monomial_gap(make_constructed, make_vector):
    built = make_constructed(8, seed=2)
    x, y = make_vector(8), make_vector(8)
    n = 3
    rows = convergence_sweep(CircleFunction.resolve("z^3"), built.operator, x, y, [4, 16, 64], spectral=built.spectral)
    assert [r.N for r in rows] == [4, 16, 64]
    m_n = moment_table(built.operator, x, y, n).moment(n)
    for row in rows:
        assert row.oracle_gap == pytest.approx(n / (row.N + 1) * abs(m_n), abs=1e-10)


def test_sweep_constant_has_no_gap(make_unitary, make_vector):
    U, x, y = make_unitary(5), make_vector(5), make_vector(5)
    rows = convergence_sweep(ONE, U, x, y, [1, 2, 8])
    assert all(r.oracle_gap < 1e-10 for r in rows)
    assert all(r.error_bound < 1e-12 for r in rows)


def test_sweep_without_spectral_form_omits_gap(make_vector):
    U = MatrixFreeUnitary(4, forward=lambda v: np.roll(v, 1), adjoint=lambda v: np.roll(v, -1))
    assert spectral_form_of(U) is None
    x = make_vector(4)
    rows = convergence_sweep(Z, U, x, x, [2, 4])
    assert all(r.oracle_gap is None for r in rows)


def test_sweep_rejects_bad_orders(make_unitary, make_vector):
    U, x = make_unitary(3), make_vector(3)
    with pytest.raises(OrderError):
        convergence_sweep(Z, U, x, x, [])
    with pytest.raises(OrderError):
        convergence_sweep(Z, U, x, x, [4, 2])
