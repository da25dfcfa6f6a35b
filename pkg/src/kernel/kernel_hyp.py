'''
Description: Backstepping kernels and feedback laws for the 2x2 hyperbolic plant with equal transport speeds
	u_t = -eps u_x + c1 u + c2 v,  v_t = eps v_x + c3 u + c4 v,  u(t, -L) = U1,  v(t, L) = U2.

The transformation (alpha, beta) = (u, v) - int_{-x}^{x} K (u, v) dxi (oriented) maps the plant to the
decoupled target alpha_t = -eps alpha_x + c1 alpha, beta_t = eps beta_x + c4 beta with zero inflow.
With Sigma = diag(-eps, eps) the kernel equations split into two pairs of the same shape,
	eps (A_x + A_xi) = a A + b B,  A(x, -x) = 0,
	eps (B_x - B_xi) = c B + d A,  B(x, x) = g(x),
with (A, B) = (K^uu, K^uv) or (K^vv, K^vu). In y = x + xi, z = x - xi this is
	G^A_y = (a G^A + b G^B)/(2 eps),  G^B_z = (c G^B + d G^A)/(2 eps),
solved by successive approximation on T1.
'''

import logging
import threading
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from src.errors import ConfigurationError, ConvergenceError, KernelConsistencyError, UnsupportedError
from src.kernel.gain import GainFunction
from src.numerics.bessel import bessel_i0, bessel_i1_over_z
from src.numerics.grid import CoefficientProfile, HourglassGrid, mirror_to_T2, richardson_extrapolate

logger = logging.getLogger(__name__)

DEFAULT_N = 201
COMPONENTS = ('uu', 'uv', 'vu', 'vv')

@dataclass(frozen=True)
class HypPlant:
	epsilon: float
	c1: CoefficientProfile
	c2: CoefficientProfile
	c3: CoefficientProfile
	c4: CoefficientProfile
	L: float = 1.0

	def __post_init__(self):
		if not self.epsilon > 0:
			raise ConfigurationError('transport speed epsilon must be positive, got {}'.format(self.epsilon))
		if not self.L > 0:
			raise ConfigurationError('half length L must be positive, got {}'.format(self.L))
		for name in ('c1', 'c2', 'c3', 'c4'):
			object.__setattr__(self, name, CoefficientProfile.coerce(getattr(self, name)))

	@property
	def coefficients(self):
		return self.c1, self.c2, self.c3, self.c4

	@property
	def is_constant(self):
		return all(c.is_constant for c in self.coefficients)

	def lam_bar(self, samples=4001):
		'''max |c_i| / (2 eps) over [-L, L]; absolute values so the series bound also holds for sign-changing coefficients.'''
		x = np.linspace(-self.L, self.L, samples)
		return max(np.max(np.abs(c(x))) for c in self.coefficients)/(2.0*self.epsilon)

@dataclass
class SeriesTermLedger:
	'''Per-term sup norms of the series for one kernel pair and the analytic bound 4^i lam^(i+1) (2L)^i / i!.'''
	pair: str
	lam_bar: float
	L: float
	sup_a: list = field(default_factory=list)
	sup_b: list = field(default_factory=list)

	def bound(self, i):
		value = self.lam_bar
		for k in range(1, i + 1):
			value *= 4.0*self.lam_bar*2.0*self.L/k
		return value

	def record(self, sup_a, sup_b):
		self.sup_a.append(float(sup_a))
		self.sup_b.append(float(sup_b))

	@property
	def terms(self):
		return len(self.sup_a)

	def holds(self):
		return all(max(a, b) <= self.bound(i)*(1.0 + 1e-9) for i, (a, b) in enumerate(zip(self.sup_a, self.sup_b)))

	def to_frame(self):
		return pd.DataFrame({'term': np.arange(self.terms), 'sup_a': self.sup_a, 'sup_b': self.sup_b,
							'bound': [self.bound(i) for i in range(self.terms)]})

@dataclass
class HypKernel:
	uu: np.ndarray = field(repr=False)
	uv: np.ndarray = field(repr=False)
	vu: np.ndarray = field(repr=False)
	vv: np.ndarray = field(repr=False)
	grid: HourglassGrid = None
	provenance: str = 'explicit'
	terms: int = 0

	@property
	def components(self):
		return {name: getattr(self, name) for name in COMPONENTS}

	def row(self, name, end):
		values = getattr(self, name)
		return values[-1] if end == 'right' else values[0]

@dataclass(frozen=True)
class HypGains:
	u1_u: GainFunction
	u1_v: GainFunction
	u2_u: GainFunction
	u2_v: GainFunction

	def resample(self, grid):
		return HypGains(*(g.resample(grid) for g in (self.u1_u, self.u1_v, self.u2_u, self.u2_v)))

	def as_dict(self):
		return {'U1_u': self.u1_u, 'U1_v': self.u1_v, 'U2_u': self.u2_u, 'U2_v': self.u2_v}

@dataclass(frozen=True)
class _Pair:
	'''Coefficients of one kernel pair; a, c functions of (x, xi), b, d of xi, g of x.'''
	name: str
	a: object
	b: object
	c: object
	d: object
	g: object

	def reflected(self):
		#Khat(x, xi) = -K(-x, -xi) solves the same pair with these coefficients
		return _Pair(self.name + '-reflected',
					lambda X, S: -self.a(-X, -S), lambda S: -self.b(-S),
					lambda X, S: -self.c(-X, -S), lambda S: -self.d(-S),
					lambda X: -self.g(-X))

def _pairs(plant):
	c1, c2, c3, c4 = plant.coefficients
	eps = plant.epsilon
	uu = _Pair('uu', lambda X, S: c1(X) - c1(S), lambda S: -c3(S),
				lambda X, S: c1(X) - c4(S), lambda S: -c2(S), lambda X: c2(X)/(2.0*eps))
	vv = _Pair('vv', lambda X, S: c4(S) - c4(X), lambda S: c2(S),
				lambda X, S: c1(S) - c4(X), lambda S: c3(S), lambda X: -c3(X)/(2.0*eps))
	return uu, vv

def _series_lattice(pair, epsilon, M, h, r, n_terms, tol, lam_bar, ledger=None):
	N = 2*M*r
	k = h/r
	idx = np.arange(N + 1)
	Yi, Zi = np.meshgrid(idx, idx, indexing='ij')
	inside = Yi + Zi <= N
	Y, Z = Yi*k, Zi*k
	X, S = 0.5*(Y + Z), 0.5*(Y - Z)
	scale = 0.5/epsilon

	a = np.where(inside, pair.a(X, S)*scale, 0.0)
	b = np.where(inside, pair.b(S)*scale, 0.0)
	c = np.where(inside, pair.c(X, S)*scale, 0.0)
	d = np.where(inside, pair.d(S)*scale, 0.0)

	FA = np.zeros_like(Y)
	FB = np.where(inside, pair.g(0.5*Y), 0.0)
	GA, GB = FA.copy(), FB.copy()

	#discrete counterpart of the analytic bound, indexed by y + z
	bound = np.full(N + 1, lam_bar)
	if ledger is not None:
		ledger.record(0.0, np.max(np.abs(FB)))

	for i in range(1, n_terms + 1):
		FA, FB = (np.where(inside, cumulative_trapezoid(a*FA + b*FB, dx=k, axis=0, initial=0), 0.0),
				np.where(inside, cumulative_trapezoid(c*FB + d*FA, dx=k, axis=1, initial=0), 0.0))
		GA += FA
		GB += FB

		bound = 4.0*lam_bar*cumulative_trapezoid(bound, dx=k, initial=0)
		limit = bound[np.minimum(Yi + Zi, N)]*(1.0 + 1e-9) + 1e-300
		if np.any(np.abs(FA) > limit) or np.any(np.abs(FB) > limit):
			raise KernelConsistencyError('series term {} of pair {} exceeds its bound'.format(i, pair.name))

		sup_a, sup_b = np.max(np.abs(FA)), np.max(np.abs(FB))
		if ledger is not None:
			ledger.record(sup_a, sup_b)
		logger.debug('series %s r=%d term %d sup %.3e %.3e', pair.name, r, i, sup_a, sup_b)
		if max(sup_a, sup_b) < tol:
			return GA, GB, i

	raise ConvergenceError('series for pair {} did not fall below tol={} in {} terms'.format(pair.name, tol, n_terms), residual=max(sup_a, sup_b), iterations=n_terms)

def _lattice_to_t1(G, grid):
	K = grid.empty_field()
	P, Q = grid.offsets
	t1 = grid.mask_t1
	K[t1] = G[(P + Q)[t1], (P - Q)[t1]]
	return K

def _solve_pair_t1(pair, epsilon, grid, n_terms, tol, levels, lam_bar, ledger):
	M, h = grid.base.m, grid.base.h
	samples_a, samples_b, terms = [], [], 0
	for level in range(levels + 1):
		r = 2**level
		GA, GB, used = _series_lattice(pair, epsilon, M, h, r, n_terms, tol, lam_bar, ledger if level == 0 else None)
		samples_a.append(GA[::r, ::r])
		samples_b.append(GB[::r, ::r])
		terms = max(terms, used)
	return _lattice_to_t1(richardson_extrapolate(samples_a), grid), _lattice_to_t1(richardson_extrapolate(samples_b), grid), terms

def _solve_pair(pair, plant, grid, n_terms, tol, levels, lam_bar, results):
	try:
		ledger = SeriesTermLedger(pair.name, lam_bar, plant.L)
		A, B, terms = _solve_pair_t1(pair, plant.epsilon, grid, n_terms, tol, levels, lam_bar, ledger)
		A_hat, B_hat, terms_hat = _solve_pair_t1(pair.reflected(), plant.epsilon, grid, n_terms, tol, levels, lam_bar, None)
		full = mirror_to_T2({'A': A, 'B': B}, {'A': -1, 'B': -1}, grid, {'A': A_hat, 'B': B_hat})
		results[pair.name] = (full['A'], full['B'], ledger, max(terms, terms_hat))
	except Exception as exc:
		results[pair.name] = exc

def hyp_kernel_series(plant, grid=None, n_terms=100, tol=1e-10, richardson_levels=2):
	'''
	Four kernel components by successive approximation; the (uu, uv) and (vv, vu) pairs are solved in
	two threads. Returns (HypKernel, {'uu': ledger, 'vv': ledger}).
	'''
	if n_terms < 1 or not tol > 0:
		raise ConfigurationError('n_terms must be >= 1 and tol positive')
	if richardson_levels < 0:
		raise ConfigurationError('richardson_levels must be >= 0')
	grid = _resolve_grid(plant, grid)
	lam_bar = plant.lam_bar()

	results = {}
	threads = [threading.Thread(target=_solve_pair, args=(pair, plant, grid, n_terms, tol, richardson_levels, lam_bar, results))
				for pair in _pairs(plant)]
	for t in threads:
		t.start()
	for t in threads:
		t.join()

	for outcome in results.values():
		if isinstance(outcome, Exception):
			raise outcome

	uu, uv, ledger_uu, terms_uu = results['uu']
	vv, vu, ledger_vv, terms_vv = results['vv']
	logger.info('series kernels converged with %d and %d terms', terms_uu, terms_vv)
	kernel = HypKernel(uu, uv, vu, vv, grid, 'series', max(terms_uu, terms_vv))
	return kernel, {'uu': ledger_uu, 'vv': ledger_vv}

def _resolve_grid(plant, grid):
	if grid is None:
		return HourglassGrid.build(plant.L, DEFAULT_N)
	if not np.isclose(grid.base.L, plant.L):
		raise ConfigurationError('grid half length {} does not match plant L = {}'.format(grid.base.L, plant.L))
	return grid

def hyp_kernel_explicit(plant, grid=None):
	'''
	Constant coefficients with c2 c3 >= 0. With mu = c2 c3 / eps^2, z = sqrt(mu (x^2 - xi^2)) and
	E = exp((c1 - c4)(x - xi)/(2 eps)):
		K^uu = K^vv = -E (mu/2)(x + xi) I1(z)/z,  K^uv = (c2/(2 eps)) E I0(z),  K^vu = -(c3/(2 eps)) E I0(z).
	'''
	if not plant.is_constant:
		raise UnsupportedError('explicit hyperbolic kernels need constant coefficients')
	c1, c2, c3, c4 = (c.value for c in plant.coefficients)
	eps = plant.epsilon
	mu = c2*c3/eps**2
	if mu < 0:
		raise UnsupportedError('explicit hyperbolic kernels need c2*c3 >= 0, got {}; use the series solver'.format(c2*c3))
	grid = _resolve_grid(plant, grid)

	X, XI = grid.mesh
	inside = grid.mask
	x, xi = X[inside], XI[inside]
	z = np.sqrt(mu*np.clip(x*x - xi*xi, 0.0, None))
	E = np.exp((c1 - c4)*(x - xi)/(2.0*eps))
	F = -0.5*mu*(x + xi)*bessel_i1_over_z(z)
	H = bessel_i0(z)

	fields = {name: grid.empty_field() for name in COMPONENTS}
	fields['uu'][inside] = E*F
	fields['vv'][inside] = E*F
	fields['uv'][inside] = c2/(2.0*eps)*E*H
	fields['vu'][inside] = -c3/(2.0*eps)*E*H
	return HypKernel(grid=grid, provenance='explicit', **fields)

def hyp_gains(kernel):
	'''
	U1 = -int K^uu(-L, xi) u - int K^uv(-L, xi) v (the oriented integral at x = -L flips the sign),
	U2 = int K^vu(L, xi) u + int K^vv(L, xi) v.
	'''
	base = kernel.grid.base
	return HypGains(GainFunction('left', base, -kernel.row('uu', 'left'), 'U1_u'),
					GainFunction('left', base, -kernel.row('uv', 'left'), 'U1_v'),
					GainFunction('right', base, kernel.row('vu', 'right').copy(), 'U2_u'),
					GainFunction('right', base, kernel.row('vv', 'right').copy(), 'U2_v'))

def kernel_bound(plant):
	lam = plant.lam_bar()
	return lam*np.exp(8.0*lam*plant.L)

def hyp_kernel_residual(kernel, plant):
	'''Central residuals of the four kernel equations along the diagonal directions; NaN off the stencil.'''
	grid = kernel.grid
	h = grid.base.h
	inside = grid.stencil_mask([(1, 1), (-1, -1), (1, -1), (-1, 1)])
	X, S = grid.mesh
	c1, c2, c3, c4 = plant.coefficients
	eps = plant.epsilon

	def plus(K):
		return (np.roll(K, (-1, -1), axis=(0, 1)) - np.roll(K, (1, 1), axis=(0, 1)))/(2.0*h)

	def minus(K):
		return (np.roll(K, (-1, 1), axis=(0, 1)) - np.roll(K, (1, -1), axis=(0, 1)))/(2.0*h)

	uu, uv, vu, vv = kernel.uu, kernel.uv, kernel.vu, kernel.vv
	with np.errstate(invalid='ignore'):
		residuals = {
			'uu': eps*plus(uu) - (c1(X) - c1(S))*uu + c3(S)*uv,
			'uv': eps*minus(uv) - (c1(X) - c4(S))*uv + c2(S)*uu,
			'vv': eps*plus(vv) - (c4(S) - c4(X))*vv - c2(S)*vu,
			'vu': eps*minus(vu) - (c1(S) - c4(X))*vu - c3(S)*vv,
		}
	return {name: np.where(inside, R, np.nan) for name, R in residuals.items()}
