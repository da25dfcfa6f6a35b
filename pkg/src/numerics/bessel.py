'''
Description: Modified Bessel functions of the first kind (orders 0 and 1) for nonnegative real arguments.
Power series up to SERIES_LIMIT, scaled asymptotic expansion above it. Scalars in, floats out; arrays in, arrays out.
'''

import numpy as np

from src.errors import DomainError

SERIES_LIMIT = 15.0
ARGUMENT_GUARD = 500.0

_SERIES_TOL = 1e-16
_MAX_SERIES_TERMS = 200
_MAX_ASYMPTOTIC_TERMS = 60

def _check_argument(z):
	z = np.asarray(z, dtype=float)
	if not np.all(np.isfinite(z)) or np.any(z < 0) or np.any(z > ARGUMENT_GUARD):
		raise DomainError('Bessel argument must lie in [0, {}]'.format(ARGUMENT_GUARD))
	return z

def _series(z, order, over_z=False):
	#sum (z/2)^(2k+order) / (k! (k+order)!)
	q = 0.25*z*z
	if order == 0:
		term = np.ones_like(z)
	elif over_z:
		term = np.full_like(z, 0.5)
	else:
		term = 0.5*z
	total = term.copy()
	for k in range(1, _MAX_SERIES_TERMS):
		term = term*q/(k*(k + order))
		total += term
		if np.all(term <= _SERIES_TOL*total):
			break
	return total

def _asymptotic(z, order):
	#e^z / sqrt(2 pi z) * sum (-1)^k a_k(order) / z^k, stopped at the smallest term
	mu = 4.0*order*order
	term = np.ones_like(z)
	total = np.ones_like(z)
	active = np.ones(z.shape, dtype=bool)
	for k in range(1, _MAX_ASYMPTOTIC_TERMS):
		nxt = term*((2*k - 1)**2 - mu)/(8.0*k*z)
		active &= np.abs(nxt) < np.abs(term)
		total = np.where(active, total + nxt, total)
		active &= np.abs(nxt) > _SERIES_TOL*np.abs(total)
		term = nxt
		if not active.any():
			break
	return np.exp(z)/np.sqrt(2.0*np.pi*z)*total

def _evaluate(z, order, over_z=False):
	z = _check_argument(z)
	flat = np.atleast_1d(z).ravel()
	out = np.empty_like(flat)

	small = flat <= SERIES_LIMIT
	if small.any():
		out[small] = _series(flat[small], order, over_z)
	if (~small).any():
		large = flat[~small]
		out[~small] = _asymptotic(large, order)/large if over_z else _asymptotic(large, order)

	if z.ndim == 0:
		return float(out[0])
	return out.reshape(z.shape)

def bessel_i0(z):
	return _evaluate(z, 0)

def bessel_i1(z):
	return _evaluate(z, 1)

def bessel_i1_over_z(z):
	'''
	I1(z)/z with its removable value 1/2 at z = 0. Every kernel and gain formula goes through this
	so that the square-root endpoint factors never meet a 0/0.
	'''
	return _evaluate(z, 1, over_z=True)
