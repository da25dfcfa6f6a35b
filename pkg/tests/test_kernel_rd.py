import numpy as np
import pytest

from src.errors import ConfigurationError, ConvergenceError, UnsupportedError
from src.kernel.kernel_rd import (RdPlant, fold_kernel, kernel_envelope, rd_gain_explicit, rd_gain_profile, rd_gains,
									rd_kernel_explicit, rd_kernel_goursat, rd_kernel_residual, unfold_kernel)
from src.numerics.grid import HourglassGrid

def test_explicit_diagonal_and_anti_diagonal():
	grid = HourglassGrid.build(1.0, 201)
	kernel = rd_kernel_explicit(RdPlant(1.0, 5.0), grid)
	x = grid.base.nodes
	np.testing.assert_allclose(kernel.diagonal(), -2.5*x, rtol=1e-14, atol=1e-15)
	np.testing.assert_array_equal(kernel.anti_diagonal(), np.zeros(grid.n))

def test_explicit_kernel_is_odd(small_grid):
	K = rd_kernel_explicit(RdPlant(2.0, 3.0), small_grid).values
	inside = small_grid.mask
	np.testing.assert_allclose(K[::-1, ::-1][inside], -K[inside], atol=1e-14)
	assert np.all(np.isnan(K[~inside]))

def test_zero_reaction_gives_zero_kernel(small_grid):
	K = rd_kernel_explicit(RdPlant(1.0, 0.0), small_grid).values
	assert np.all(K[small_grid.mask] == 0.0)

def test_explicit_rejects_negative_or_variable_lambda(small_grid):
	with pytest.raises(UnsupportedError):
		rd_kernel_explicit(RdPlant(1.0, -1.0), small_grid)
	with pytest.raises(UnsupportedError):
		rd_kernel_explicit(RdPlant(1.0, '1 + x'), small_grid)

def test_grid_must_match_plant():
	with pytest.raises(ConfigurationError):
		rd_kernel_explicit(RdPlant(1.0, 1.0, L=2.0), HourglassGrid.build(1.0, 11))

@pytest.mark.parametrize('lam', [1.0, 5.0, 12.0])
def test_goursat_matches_explicit(lam):
	grid = HourglassGrid.build(1.0, 201)
	plant = RdPlant(1.0, lam)
	explicit = rd_kernel_explicit(plant, grid).values
	numeric = rd_kernel_goursat(plant, grid).values
	inside = grid.mask
	assert np.max(np.abs(numeric[inside] - explicit[inside])) < 1e-6

def test_goursat_variable_lambda_boundary_conditions():
	grid = HourglassGrid.build(1.0, 81)
	plant = RdPlant(1.0, '1 + x^2')
	kernel = rd_kernel_goursat(plant, grid)
	x = grid.base.nodes
	#K(x, x) = -int_0^x (1 + s^2) ds / 2
	np.testing.assert_allclose(kernel.diagonal(), -(x + x**3/3.0)/2.0, atol=1e-9)
	np.testing.assert_allclose(kernel.anti_diagonal(), 0.0, atol=1e-12)
	assert np.nanmax(np.abs(kernel.values)) <= kernel_envelope(plant, grid)

def test_goursat_zero_reaction_gives_zero_kernel(small_grid):
	kernel = rd_kernel_goursat(RdPlant(1.0, 0.0), small_grid)
	assert np.all(kernel.values[small_grid.mask] == 0.0)
	assert kernel.iterations == 1

def test_goursat_negative_lambda_is_supported(small_grid):
	kernel = rd_kernel_goursat(RdPlant(1.0, -2.0), small_grid)
	np.testing.assert_allclose(kernel.diagonal(), small_grid.base.nodes, atol=1e-9)

def test_goursat_exhausts_iterations(small_grid):
	with pytest.raises(ConvergenceError) as info:
		rd_kernel_goursat(RdPlant(1.0, 5.0), small_grid, max_iter=1)
	assert info.value.iterations == 1

def test_residual_is_second_order():
	plant = RdPlant(1.0, 5.0)
	errors = []
	for n in (41, 81, 161):
		kernel = rd_kernel_explicit(plant, HourglassGrid.build(1.0, n))
		errors.append(np.nanmax(np.abs(rd_kernel_residual(kernel, plant))))
	orders = np.log2(np.array(errors[:-1])/np.array(errors[1:]))
	assert np.all(orders >= 1.7)

def test_goursat_residual_is_second_order():
	plant = RdPlant(1.0, '1 + x^2')
	errors = []
	for n in (41, 81, 161):
		kernel = rd_kernel_goursat(plant, HourglassGrid.build(1.0, n))
		errors.append(np.nanmax(np.abs(rd_kernel_residual(kernel, plant))))
	orders = np.log2(np.array(errors[:-1])/np.array(errors[1:]))
	assert np.all(orders >= 1.7)

def test_gains_from_kernel_match_closed_form():
	grid = HourglassGrid.build(1.0, 101)
	plant = RdPlant(1.0, 5.0)
	right, left = rd_gains(rd_kernel_explicit(plant, grid))
	np.testing.assert_allclose(right.samples, rd_gain_explicit(plant, 'right', grid).samples, atol=1e-12)
	np.testing.assert_allclose(left.samples, rd_gain_explicit(plant, 'left', grid).samples, atol=1e-12)
	#mirror image of each other
	np.testing.assert_allclose(left.samples, right.samples[::-1], atol=1e-12)

def test_gain_endpoints():
	plant = RdPlant(2.0, 6.0)
	g = rd_gain_profile(plant, 'right')
	assert g(-1.0) == 0.0
	assert g(1.0) == pytest.approx(-0.5*3.0*2.0*0.5)
	assert np.isfinite(rd_gain_profile(plant, 'left')(np.array([-1.0, 1.0]))).all()

def test_gain_end_validation(small_grid):
	with pytest.raises(ConfigurationError):
		rd_gain_explicit(RdPlant(1.0, 1.0), 'middle', small_grid)

def test_fold_unfold_round_trip(small_grid):
	kernel = rd_kernel_explicit(RdPlant(1.0, 4.0), small_grid)
	pieces = fold_kernel(kernel)
	m = small_grid.base.m
	assert all(piece.shape == (m + 1, m + 1) for piece in pieces)
	#K11(x, x) is the diagonal of the right triangle
	np.testing.assert_allclose(np.diag(pieces[0]), kernel.diagonal()[m:])
	np.testing.assert_allclose(unfold_kernel(pieces, small_grid)[small_grid.mask], kernel.values[small_grid.mask])

def test_delta():
	assert RdPlant(1.0, 4.0).delta == pytest.approx(2.0)
	assert RdPlant(4.0, 4.0, L=3.0).delta == pytest.approx(3.0)

@pytest.mark.parametrize('solver', [rd_kernel_explicit, rd_kernel_goursat])
def test_fold_pieces_of_a_constant_lambda_kernel(solver, small_grid):
	K11, K12, K21, K22 = fold_kernel(solver(RdPlant(1.0, 4.0), small_grid))
	#K12(x, x) = K(x, -x)
	np.testing.assert_allclose(np.diag(K12), 0.0, atol=1e-12)
	valid = ~np.isnan(K11)
	np.testing.assert_allclose(K22[valid], -K11[valid], atol=1e-12)
	np.testing.assert_allclose(K21[valid], -K12[valid], atol=1e-12)
	assert np.all(np.isnan(K22) == np.isnan(K11))
