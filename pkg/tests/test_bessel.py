import numpy as np
import pytest
from scipy import special

from src.errors import DomainError
from src.numerics.bessel import bessel_i0, bessel_i1, bessel_i1_over_z

def test_values_at_zero():
	assert bessel_i0(0.0) == 1.0
	assert bessel_i1(0.0) == 0.0
	assert bessel_i1_over_z(0.0) == 0.5

def test_known_values():
	assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-13)
	assert bessel_i1(1.0) == pytest.approx(0.5651591039924851, rel=1e-13)

def test_matches_reference_on_0_20():
	z = np.linspace(0.0, 20.0, 1000)
	np.testing.assert_allclose(bessel_i0(z), special.i0(z), rtol=1e-10)
	np.testing.assert_allclose(bessel_i1(z), special.i1(z), rtol=1e-10, atol=1e-300)

def test_large_arguments_use_asymptotic_branch():
	z = np.array([15.5, 40.0, 120.0, 400.0])
	np.testing.assert_allclose(bessel_i0(z), special.i0(z), rtol=1e-10)
	np.testing.assert_allclose(bessel_i1(z), special.i1(z), rtol=1e-10)
	np.testing.assert_allclose(bessel_i1_over_z(z), special.i1(z)/z, rtol=1e-10)

def test_i1_over_z_near_zero():
	z = np.array([0.0, 1e-12, 1e-6, 1e-3])
	expected = 0.5 + z*z/16.0
	np.testing.assert_allclose(bessel_i1_over_z(z), expected, rtol=1e-12)

def test_monotone_and_signs():
	z = np.linspace(0.0, 30.0, 301)
	i0, i1 = bessel_i0(z), bessel_i1(z)
	assert np.all(i0 >= 1.0)
	assert np.all(i1 >= 0.0)
	assert np.all(np.diff(i0) > 0)
	assert np.all(np.diff(i1) > 0)

def test_derivative_of_i0_is_i1():
	z = np.linspace(0.5, 25.0, 50)
	step = 1e-5
	derivative = (bessel_i0(z + step) - bessel_i0(z - step))/(2.0*step)
	np.testing.assert_allclose(derivative, bessel_i1(z), rtol=1e-7)

def test_small_argument_bound():
	z = np.linspace(0.0, 0.1, 21)
	assert np.all(np.abs(bessel_i1(z) - z/2.0) <= z**3/8.0)

@pytest.mark.parametrize('z', [-1.0, np.inf, np.nan, 500.5])
def test_domain_errors(z):
	with pytest.raises(DomainError):
		bessel_i0(z)
	with pytest.raises(DomainError):
		bessel_i1(np.array([1.0, z]))

def test_scalar_and_array_shapes():
	assert isinstance(bessel_i0(2.0), float)
	values = bessel_i1(np.ones((3, 4)))
	assert values.shape == (3, 4)
