'''
Description: Bilateral backstepping kernel and boundary gains for the reaction-diffusion plant
u_t = eps u_xx + lambda(x) u on [-L, L] with u(t, L) = U1 and u(t, -L) = U2.

The transformation is w = u - int_{-x}^{x} K(x, xi) u(xi) dxi with an oriented integral, so for x < 0 it
reads w = u + int_{x}^{-x} K u. The kernel solves eps K_xx - eps K_xixi = lambda(xi) K on the hourglass with
K(x, x) = -int_0^x lambda / (2 eps) and K(x, -x) = 0, for x of either sign.
'''

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from src.errors import ConfigurationError, ConvergenceError, KernelConsistencyError, UnsupportedError
from src.kernel.gain import GainFunction
from src.numerics.bessel import bessel_i1_over_z
from src.numerics.grid import CoefficientProfile, HourglassGrid, mirror_to_T2, richardson_extrapolate

logger = logging.getLogger(__name__)

DEFAULT_N = 201
GAUSS_ORDER = 5

@dataclass(frozen=True)
class RdPlant:
	epsilon: float
	lam: CoefficientProfile
	L: float = 1.0

	def __post_init__(self):
		if not self.epsilon > 0:
			raise ConfigurationError('diffusivity epsilon must be positive, got {}'.format(self.epsilon))
		if not self.L > 0:
			raise ConfigurationError('half length L must be positive, got {}'.format(self.L))
		object.__setattr__(self, 'lam', CoefficientProfile.coerce(self.lam))

	@property
	def delta(self):
		'''L sqrt(lambda/eps), the group that governs the unilateral/bilateral effort comparison.'''
		return self.L*np.sqrt(constant_lambda(self)/self.epsilon)

@dataclass
class RdKernel:
	values: np.ndarray = field(repr=False)
	grid: HourglassGrid
	provenance: str
	iterations: int = 0
	residual: float = 0.0

	def row(self, end):
		return self.values[-1] if end == 'right' else self.values[0]

	def diagonal(self):
		return np.diag(self.values).copy()

	def anti_diagonal(self):
		return np.diag(self.values[:, ::-1]).copy()

def constant_lambda(plant):
	if not plant.lam.is_constant:
		raise UnsupportedError('explicit reaction-diffusion formulas need a constant lambda')
	if plant.lam.value < 0:
		raise UnsupportedError('explicit reaction-diffusion formulas need lambda >= 0, got {}; use the Goursat solver'.format(plant.lam.value))
	return plant.lam.value

def _resolve_grid(plant, grid):
	if grid is None:
		return HourglassGrid.build(plant.L, DEFAULT_N)
	if not np.isclose(grid.base.L, plant.L):
		raise ConfigurationError('grid half length {} does not match plant L = {}'.format(grid.base.L, plant.L))
	return grid

def rd_kernel_explicit(plant, grid=None):
	'''
	K = -(lambda/(2 eps)) (x + xi) I1(z)/z with z = sqrt((lambda/eps)(x^2 - xi^2)). Same function as the
	sgn(x) sqrt((x+xi)/(x-xi)) form on all of T, without its 0/0 on the diagonal.
	'''
	a = constant_lambda(plant)/plant.epsilon
	grid = _resolve_grid(plant, grid)
	X, XI = grid.mesh
	inside = grid.mask

	K = grid.empty_field()
	s = np.clip(X[inside]**2 - XI[inside]**2, 0.0, None)
	K[inside] = -0.5*a*(X[inside] + XI[inside])*bessel_i1_over_z(np.sqrt(a*s))
	return RdKernel(K, grid, 'explicit')

def _boundary_data(lam, epsilon, N, k):
	#phi[a] = -(1/(2 eps)) int_0^{a k/2} lambda, Gauss-Legendre on each lattice cell
	nodes, weights = np.polynomial.legendre.leggauss(GAUSS_ORDER)
	half = 0.25*k
	centers = (np.arange(N) + 0.5)*0.5*k
	points = centers[:, None] + half*nodes[None, :]
	cells = (lam(points)*weights).sum(axis=1)*half
	return -np.concatenate(([0.0], np.cumsum(cells)))/(2.0*epsilon)

def _goursat_lattice(lam, epsilon, M, h, r, tol, max_iter):
	'''
	Successive approximation of G = phi(alpha) + int_0^alpha int_0^beta lambda((s-t)/2)/(4 eps) G
	on the (alpha, beta) lattice with spacing h/r. Axis 0 is alpha, axis 1 is beta.
	'''
	N = 2*M*r
	k = h/r
	idx = np.arange(N + 1)
	A, B = np.meshgrid(idx, idx, indexing='ij')
	inside = A + B <= N
	weight = np.where(inside, lam((A - B)*0.5*k)/(4.0*epsilon), 0.0)

	phi = _boundary_data(lam, epsilon, N, k)
	G = np.repeat(phi[:, None], N + 1, axis=1)
	change = np.inf
	for it in range(1, max_iter + 1):
		inner = cumulative_trapezoid(weight*G, dx=k, axis=1, initial=0)
		update = phi[:, None] + cumulative_trapezoid(inner, dx=k, axis=0, initial=0)
		change = np.max(np.abs(update - G)[inside])
		G = update
		logger.debug('goursat r=%d iteration %d change %.3e', r, it, change)
		if change < tol:
			return G, it, change
	raise ConvergenceError('Goursat iteration did not reach tol={} in {} iterations (last change {:.3e})'.format(tol, max_iter, change), residual=change, iterations=max_iter)

def _lattice_to_t1(G, grid):
	K = grid.empty_field()
	P, Q = grid.offsets
	t1 = grid.mask_t1
	K[t1] = G[(P + Q)[t1], (P - Q)[t1]]
	return K

def _solve_t1(lam, epsilon, grid, tol, max_iter, richardson_levels):
	M, h = grid.base.m, grid.base.h
	samples, iterations, residual = [], 0, 0.0
	for level in range(richardson_levels + 1):
		r = 2**level
		G, it, change = _goursat_lattice(lam, epsilon, M, h, r, tol, max_iter)
		samples.append(G[::r, ::r])
		iterations, residual = max(iterations, it), max(residual, change)
	return _lattice_to_t1(richardson_extrapolate(samples), grid), iterations, residual

def kernel_envelope(plant, grid):
	'''Ceiling lambda_bar L/(2 eps) exp(2 L sqrt(lambda_bar/eps)) on |K| over T, lambda_bar = max |lambda|.'''
	lam_bar = np.max(np.abs(plant.lam(grid.base.nodes)))
	return lam_bar*plant.L/(2.0*plant.epsilon)*np.exp(2.0*plant.L*np.sqrt(lam_bar/plant.epsilon))

def rd_kernel_goursat(plant, grid=None, tol=1e-10, max_iter=200, richardson_levels=2):
	'''
	Kernel for any continuous lambda by successive approximation of the Goursat problem on T1.
	T2 is the T1 solution for the reflected coefficient lambda(-s), mirrored with odd parity.
	'''
	if not tol > 0:
		raise ConfigurationError('tol must be positive, got {}'.format(tol))
	if max_iter < 1 or richardson_levels < 0:
		raise ConfigurationError('max_iter must be >= 1 and richardson_levels >= 0')
	grid = _resolve_grid(plant, grid)

	t1, iterations, residual = _solve_t1(plant.lam, plant.epsilon, grid, tol, max_iter, richardson_levels)
	reflected = None
	if not plant.lam.is_constant:
		t1_hat, it_hat, res_hat = _solve_t1(lambda s: plant.lam(-s), plant.epsilon, grid, tol, max_iter, richardson_levels)
		reflected = {'K': t1_hat}
		iterations, residual = max(iterations, it_hat), max(residual, res_hat)
	K = mirror_to_T2({'K': t1}, {'K': -1}, grid, reflected)['K']

	ceiling = kernel_envelope(plant, grid)
	if np.nanmax(np.abs(K)) > ceiling*(1.0 + 1e-6) + 1e-12:
		raise KernelConsistencyError('kernel exceeds its envelope {:.3e}'.format(ceiling))

	logger.info('Goursat kernel converged in %d iterations (last change %.2e)', iterations, residual)
	return RdKernel(K, grid, 'goursat', iterations, residual)

def rd_gains(kernel):
	'''(g_right, g_left) with U1 = int g_right u and U2 = int g_left u; g_left carries the oriented-integral sign.'''
	base = kernel.grid.base
	right = GainFunction('right', base, kernel.row('right').copy(), 'U1')
	left = GainFunction('left', base, -kernel.row('left'), 'U2')
	return right, left

def rd_gain_profile(plant, end):
	'''Closed-form gain as a callable of xi; g_left(xi) = g_right(-xi).'''
	a = constant_lambda(plant)/plant.epsilon
	L = plant.L

	def gain(xi):
		xi = np.asarray(xi, dtype=float)
		weight = L + xi if end == 'right' else L - xi
		s = np.clip(L*L - xi*xi, 0.0, None)
		return -0.5*a*weight*bessel_i1_over_z(np.sqrt(a*s))

	return gain

def rd_gain_explicit(plant, end, grid=None):
	if end not in ('right', 'left'):
		raise ConfigurationError('gain end must be right or left, got {!r}'.format(end))
	grid = _resolve_grid(plant, grid)
	samples = rd_gain_profile(plant, end)(grid.base.nodes)
	return GainFunction(end, grid.base, samples, 'U1' if end == 'right' else 'U2')

def fold_kernel(kernel):
	'''
	The four pieces on {x >= 0, 0 <= xi <= x}: K11(x,xi) = K(x,xi), K12(x,xi) = K(x,-xi),
	K21(x,xi) = K(-x,xi), K22(x,xi) = K(-x,-xi). Arrays are indexed [p, q] with x = p h, xi = q h.
	'''
	K, m = kernel.values, kernel.grid.base.m
	valid = np.tril(np.ones((m + 1, m + 1), dtype=bool))
	pieces = (K[m:, m:], K[m:, m::-1], K[m::-1, m:], K[m::-1, m::-1])
	return tuple(np.where(valid, piece, np.nan) for piece in pieces)

def unfold_kernel(pieces, grid):
	K11, K12, K21, K22 = pieces
	P, Q = grid.offsets
	inside = grid.mask
	ap, aq = np.abs(P[inside]), np.abs(Q[inside])
	right, up = P[inside] >= 0, Q[inside] >= 0

	K = grid.empty_field()
	K[inside] = np.select([right & up, right & ~up, ~right & up], [K11[ap, aq], K12[ap, aq], K21[ap, aq]], K22[ap, aq])
	return K

def rd_kernel_residual(kernel, plant):
	'''Second-order central residual of eps K_xx - eps K_xixi - lambda(xi) K, NaN where the stencil leaves a triangle.'''
	K, grid = kernel.values, kernel.grid
	h = grid.base.h
	inside = grid.stencil_mask([(1, 0), (-1, 0), (0, 1), (0, -1)])

	with np.errstate(invalid='ignore'):
		K_xx = (np.roll(K, -1, axis=0) - 2.0*K + np.roll(K, 1, axis=0))/h**2
		K_ss = (np.roll(K, -1, axis=1) - 2.0*K + np.roll(K, 1, axis=1))/h**2
		_, XI = grid.mesh
		R = plant.epsilon*(K_xx - K_ss) - plant.lam(XI)*K
	return np.where(inside, R, np.nan)
