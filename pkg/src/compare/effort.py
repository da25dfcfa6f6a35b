'''
Description: Control-effort comparison between the unilateral and the bilateral reaction-diffusion laws.

With L = eps = 1 and lambda = delta^2 the L1 norms of the gains only depend on delta:
	J2 = delta^2 int_{-1}^{1} (1 + xi) I1(delta sqrt(1 - xi^2))/(delta sqrt(1 - xi^2)) dxi   (both bilateral gains)
	J1 = delta^2 int_{-1}^{1} |w(xi)| I1(delta r)/(delta r) dxi,  r = sqrt(4 - (1 + xi)^2)       (one unilateral gain)
where w = 1 + xi for the shifted unilateral kernel and w = xi for the literal weight.

The norms and the crossover search default to the literal weight, the only one whose J1 drops below J2 for
small delta. The gain itself defaults to the shifted kernel.
'''

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from src.errors import ConfigurationError, CrossoverNotFoundError
from src.kernel.gain import GainFunction
from src.kernel.kernel_rd import constant_lambda
from src.numerics.bessel import bessel_i1_over_z
from src.numerics.grid import HourglassGrid, IntervalGrid, richardson_trapezoid

logger = logging.getLogger(__name__)

VARIANTS = ('literal', 'shifted')
MAX_DELTA = 10.0

def _check_variant(variant):
	if variant not in VARIANTS:
		raise ConfigurationError('unilateral variant must be literal or shifted, got {!r}'.format(variant))

def unilateral_rd_gain(plant, grid=None, variant='shifted'):
	'''
	Single-ended gain acting at x = L: g(xi) = -(lambda/eps) w(xi) I1(z)/z, z = sqrt(lambda/eps) sqrt(4L^2 - (xi + L)^2),
	with w = xi + L (shifted) or xi (literal).
	'''
	_check_variant(variant)
	a = constant_lambda(plant)/plant.epsilon
	L = plant.L
	if grid is None:
		grid = IntervalGrid(L, 201)
	elif isinstance(grid, HourglassGrid):
		grid = grid.base

	xi = grid.nodes
	weight = xi + L if variant == 'shifted' else xi
	z = np.sqrt(a)*np.sqrt(np.clip(4.0*L*L - (xi + L)**2, 0.0, None))
	return GainFunction('right', grid, -a*weight*bessel_i1_over_z(z), 'unilateral-' + variant)

def _check_delta(delta):
	if not 0 < delta <= MAX_DELTA:
		raise ConfigurationError('delta must lie in (0, {}], got {}'.format(MAX_DELTA, delta))

def _j2_integrand(delta):
	def f(xi):
		return delta*delta*(1.0 + xi)*bessel_i1_over_z(delta*np.sqrt(np.clip(1.0 - xi*xi, 0.0, None)))
	return f

def _j1_integrand(delta, variant):
	def f(xi):
		weight = np.abs(1.0 + xi) if variant == 'shifted' else np.abs(xi)
		r = np.sqrt(np.clip(4.0 - (1.0 + xi)**2, 0.0, None))
		return delta*delta*weight*bessel_i1_over_z(delta*r)
	return f

def j2_norm(delta, rtol=1e-8):
	_check_delta(delta)
	return richardson_trapezoid(_j2_integrand(delta), -1.0, 1.0, rtol)

def j1_norm(delta, variant='literal', rtol=1e-8):
	_check_delta(delta)
	_check_variant(variant)
	f = _j1_integrand(delta, variant)
	if variant == 'literal':
		#|xi| has a kink at 0
		return richardson_trapezoid(f, -1.0, 0.0, rtol) + richardson_trapezoid(f, 0.0, 1.0, rtol)
	return richardson_trapezoid(f, -1.0, 1.0, rtol)

def j_norms(delta, variant='literal', rtol=1e-8):
	return j1_norm(delta, variant, rtol), j2_norm(delta, rtol)

def j_norms_all(delta, rtol=1e-8):
	'''Row of the effort curve: both unilateral variants and the bilateral norm.'''
	return {'delta': delta, 'J1_literal': j1_norm(delta, 'literal', rtol),
			'J1_shifted': j1_norm(delta, 'shifted', rtol), 'J2': j2_norm(delta, rtol)}

def find_crossover(lo=0.5, hi=5.0, tol=1e-6, variant='literal', j1=None, j2=None, rtol=1e-10):
	'''
	Bisection on J1 - J2 over [lo, hi]. j1 and j2 default to the norms of the given variant; any callables
	of delta can be passed instead.
	'''
	if not 0 < lo < hi:
		raise ConfigurationError('crossover bracket must satisfy 0 < lo < hi, got [{}, {}]'.format(lo, hi))
	j1 = j1 or (lambda d: j1_norm(d, variant, rtol))
	j2 = j2 or (lambda d: j2_norm(d, rtol))

	def gap(d):
		return j1(d) - j2(d)

	f_lo, f_hi = gap(lo), gap(hi)
	if f_lo == 0:
		return lo
	if f_hi == 0:
		return hi
	if np.sign(f_lo) == np.sign(f_hi):
		raise CrossoverNotFoundError('J1 - J2 does not change sign on [{}, {}]'.format(lo, hi))
	root = bisect(gap, lo, hi, xtol=tol)
	logger.info('crossover at delta = %.8f', root)
	return root

@dataclass
class EffortCurve:
	frame: pd.DataFrame = field(repr=False)
	crossovers: dict = field(default_factory=dict)
	attempted: bool = False

	@property
	def deltas(self):
		return self.frame['delta'].values

	def to_csv(self, path):
		self.frame.to_csv(path, index=False, float_format='%.17g')

	@classmethod
	def from_csv(cls, path):
		return cls(pd.read_csv(path, float_precision='round_trip'))

	def to_dict(self):
		return {'samples': len(self.frame), 'crossover_attempted': self.attempted, 'crossovers': dict(self.crossovers),
				'columns': list(self.frame.columns)}

def effort_curve(deltas, rtol=1e-8, workers=4, tol=1e-6):
	'''
	Tabulate J1 (both variants) and J2 at sorted positive deltas, evaluated in a thread pool. For every variant
	whose J1 - J2 changes sign between two adjacent samples the crossover is refined by bisection; a variant
	without a sign change gets None.
	'''
	deltas = [float(d) for d in deltas]
	if not deltas:
		raise ConfigurationError('effort curve needs at least one delta')
	if any(np.diff(deltas) <= 0):
		raise ConfigurationError('delta samples must be strictly increasing')
	for d in deltas:
		_check_delta(d)

	with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
		rows = list(pool.map(lambda d: j_norms_all(d, rtol), deltas))
	frame = pd.DataFrame(rows, columns=['delta', 'J1_literal', 'J1_shifted', 'J2'])

	curve = EffortCurve(frame, attempted=len(deltas) > 1)
	if not curve.attempted:
		return curve

	for variant in VARIANTS:
		gap = frame['J1_' + variant].values - frame['J2'].values
		changes = np.nonzero(np.sign(gap[:-1]) != np.sign(gap[1:]))[0]
		if len(changes) == 0:
			logger.info('no crossover for the %s variant on [%g, %g]', variant, deltas[0], deltas[-1])
			curve.crossovers[variant] = None
			continue
		i = changes[0]
		curve.crossovers[variant] = find_crossover(deltas[i], deltas[i + 1], tol, variant, rtol=rtol)
	return curve
