import math

import numpy as np
import pytest

from app.core.exceptions import GridTooSmallError, OrderError
from app.core.fejer import (
    TWO_PI,
    CircleGrid,
    default_grid_size,
    fejer_kernel,
    fejer_mean,
    fejer_weights,
    fourier_coeffs,
    smooth_measure,
    sup_error,
)
from app.services.funcexpr import CircleFunction


def test_weights_shape_and_values():
    fw = fejer_weights(4)
    assert fw.w.shape == (9,)
    assert fw.weight(0) == 1.0
    assert fw.weight(4) == pytest.approx(0.2)
    assert fw.weight(-4) == pytest.approx(0.2)
    assert fw.weight(5) == 0.0
    assert np.array_equal(fw.w, fw.w[::-1])


def test_weights_order_zero():
    assert fejer_weights(0).w.tolist() == [1.0]


def test_negative_order_rejected():
    with pytest.raises(OrderError):
        fejer_weights(-1)
    with pytest.raises(OrderError):
        fejer_kernel(-1, 0.0)


def test_kernel_peak_and_fallback():
    assert fejer_kernel(7, 0.0) == pytest.approx(8.0, abs=1e-12)
    assert fejer_kernel(7, TWO_PI) == pytest.approx(8.0, abs=1e-9)
    assert fejer_kernel(7, 1e-10) == pytest.approx(8.0, abs=1e-9)
    assert isinstance(fejer_kernel(3, 0.4), float)


def test_kernel_closed_form_matches_series():
    N = 7
    tau = np.linspace(0.01, 6.2, 50)
    k = np.arange(1, N + 1)
    series = 1.0 + 2.0 * np.sum((1 - k / (N + 1)) * np.cos(np.outer(tau, k)), axis=1)
    assert np.allclose(fejer_kernel(N, tau), series, atol=1e-10)


def test_kernel_nonnegative_with_unit_mean():
    N = 12
    grid = CircleGrid(M=2 * N + 2)
    values = fejer_kernel(N, grid.nodes)
    assert values.min() >= -1e-12
    assert np.mean(values) == pytest.approx(1.0, abs=1e-12)


def test_grid_nodes():
    grid = CircleGrid(M=4)
    assert np.allclose(grid.nodes, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert np.allclose(grid.points(), [1, 1j, -1, -1j])
    with pytest.raises(ValueError):
        CircleGrid(M=0)


def test_default_grid_size():
    assert default_grid_size(3) == 256
    assert default_grid_size(500) == 1002


def test_monomial_coefficients():
    table = fourier_coeffs(CircleFunction.resolve("z^3"), 5)
    expected = np.zeros(11, dtype=complex)
    expected[3 + 5] = 1.0
    assert np.allclose(table.coeffs, expected, atol=1e-13)
    assert table.grid_size == 256


def test_out_of_band_monomial_has_zero_table():
    table = fourier_coeffs(CircleFunction.resolve("z^5"), 3)
    assert np.max(np.abs(table.coeffs)) < 1e-13
    assert table.coefficient(5) == 0j


def test_inv_shift_coefficients():
    # 1/(z-2) = -sum_{n>=0} z^n / 2^{n+1}
    table = fourier_coeffs(CircleFunction.resolve("inv_shift(2)"), 6)
    for n in range(7):
        assert table.coefficient(n) == pytest.approx(-(0.5 ** (n + 1)), abs=1e-12)
    for n in range(1, 7):
        assert abs(table.coefficient(-n)) < 1e-12


def test_fft_matches_direct():
    f = CircleFunction.resolve("exp_z")
    direct = fourier_coeffs(f, 20, 64)
    fft = fourier_coeffs(f, 20, 64, method="fft")
    assert np.allclose(direct.coeffs, fft.coeffs, atol=1e-12)


def test_grid_too_small():
    with pytest.raises(GridTooSmallError):
        fourier_coeffs(CircleFunction.resolve("z"), 10, 21)


def test_fejer_mean_of_constant():
    grid = CircleGrid(M=64)
    values = fejer_mean(CircleFunction.resolve("one"), 10, grid)
    assert np.allclose(values, 1.0, atol=1e-13)


def test_sup_error_of_real_part():
    # sigma_N re(z) = (1 - 1/(N+1)) re(z)
    for N in (1, 8, 64):
        assert sup_error(CircleFunction.resolve("re_z"), N) == pytest.approx(1 / (N + 1), abs=1e-12)


def test_sup_error_decreases():
    f = CircleFunction.resolve("exp_z")
    assert sup_error(f, 64) < sup_error(f, 8)


def test_sup_error_needs_fine_grid():
    with pytest.raises(GridTooSmallError):
        sup_error(CircleFunction.resolve("z"), 4, CircleGrid(M=100))


def test_smooth_single_atom():
    grid = CircleGrid(M=32)
    smoothed = smooth_measure([0.0], [1.0], 5, grid)
    assert np.allclose(smoothed, fejer_kernel(5, grid.nodes) / TWO_PI, atol=1e-13)


def test_exp_coefficients_are_inverse_factorials():
    table = fourier_coeffs(CircleFunction.resolve("exp(z)"), 12, 256)
    for k in range(-12, 13):
        expected = 1 / math.factorial(k) if k >= 0 else 0.0
        assert abs(table.coefficient(k) - expected) < 1e-12, k


@pytest.mark.parametrize("spec", ["one", "z", "re_z", "exp_z", "inv_shift(2)", "inv_shift(0.5)", "power(3)", "power(-2)"])
def test_sup_error_nonincreasing_under_doubling(spec):
    f = CircleFunction.resolve(spec)
    errors = [sup_error(f, N) for N in (1, 2, 4, 8, 16, 32, 64, 128, 256)]
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= 1.01 * coarse + 1e-12
