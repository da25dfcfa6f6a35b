'''
Description: Uniform grids on [-L, L], the hourglass kernel domain T = T1 u T2, coefficient profiles and quadrature.

Kernel fields are stored as n x n arrays K[i, j] over (x_i, xi_j) and hold NaN outside T. Row 0 is x = -L,
row n-1 is x = L. With m = (n-1)/2 the node offsets p = i - m, q = j - m are integers, so the characteristic
coordinates y = x + xi and z = x - xi sit on the integer lattice (p+q, p-q).
'''

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from src.errors import ConfigurationError, NumericError
from src.numerics.expression import compile_expression

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class IntervalGrid:
	L: float
	n: int

	def __post_init__(self):
		if not self.L > 0:
			raise ConfigurationError('half length L must be positive, got {}'.format(self.L))
		if self.n < 3 or self.n % 2 == 0:
			raise ConfigurationError('grid size must be odd and at least 3, got {}'.format(self.n))

	@property
	def h(self):
		return 2.0*self.L/(self.n - 1)

	@property
	def m(self):
		return (self.n - 1)//2

	@property
	def nodes(self):
		#built from integer offsets so the grid is exactly symmetric about 0
		return np.arange(-self.m, self.m + 1)*self.h

	@property
	def weights(self):
		w = np.full(self.n, self.h)
		w[0] = w[-1] = 0.5*self.h
		return w

	def resample(self, values, source):
		'''Linear interpolation of values given on grid source onto this grid.'''
		values = np.asarray(values, dtype=float)
		if source == self:
			return values.copy()
		return np.interp(self.nodes, source.nodes, values)

def quadrature(values, grid):
	'''Composite trapezoid rule over all nodes of grid.'''
	values = np.asarray(values, dtype=float)
	if values.shape[-1] != grid.n:
		raise ConfigurationError('expected {} samples, got {}'.format(grid.n, values.shape[-1]))
	if np.isnan(values).any():
		raise NumericError('NaN in quadrature values')
	return values @ grid.weights

def richardson_trapezoid(f, a, b, rtol=1e-8, max_levels=24, min_levels=3):
	'''
	Romberg integration of a vectorized f over [a, b]: trapezoid rules on 1, 2, 4, ... panels
	extrapolated along each row of the table until successive diagonal entries agree to rtol.
	'''
	r = np.zeros((max_levels, max_levels))
	h = b - a
	r[0, 0] = 0.5*h*(f(np.array([a]))[0] + f(np.array([b]))[0])

	n = 1
	for i in range(1, max_levels):
		n *= 2
		h *= 0.5
		#midpoints of the previous panels
		xa = a + (2.0*np.arange(1, n//2 + 1) - 1.0)*h
		fa = np.asarray(f(xa), dtype=float)
		if np.isnan(fa).any():
			raise NumericError('NaN in integrand on [{}, {}]'.format(a, b))
		r[i, 0] = 0.5*r[i - 1, 0] + h*fa.sum()

		for j in range(1, i + 1):
			r[i, j] = r[i, j - 1] + (r[i, j - 1] - r[i - 1, j - 1])/(4**j - 1)

		if i >= min_levels and abs(r[i, i] - r[i - 1, i - 1]) <= rtol*abs(r[i, i]):
			return r[i, i]

	raise NumericError('Romberg quadrature on [{}, {}] did not reach rtol={}'.format(a, b, rtol))

def richardson_extrapolate(levels):
	'''
	Combine lattice solutions sampled on the same nodes but computed with spacings h, h/2, h/4, ...
	assuming an error expansion in even powers of h. Returns the most extrapolated estimate.
	'''
	table = [np.asarray(level, dtype=float) for level in levels]
	for j in range(1, len(levels)):
		factor = 4.0**j - 1.0
		table = [table[k + 1] + (table[k + 1] - table[k])/factor for k in range(len(table) - 1)]
	return table[-1]

class Region(Enum):
	T1_INTERIOR = 'T1'
	T2_INTERIOR = 'T2'
	DIAGONAL = 'diagonal'
	ANTI_DIAGONAL = 'anti-diagonal'
	OUTSIDE = 'outside'

@dataclass(frozen=True)
class HourglassGrid:
	base: IntervalGrid

	@classmethod
	def build(cls, L, n):
		return cls(IntervalGrid(L, n))

	@property
	def n(self):
		return self.base.n

	@property
	def offsets(self):
		'''Integer offsets (P, Q) with P[i, j] = i - m and Q[i, j] = j - m.'''
		k = np.arange(self.n) - self.base.m
		return np.meshgrid(k, k, indexing='ij')

	@property
	def mesh(self):
		P, Q = self.offsets
		return P*self.base.h, Q*self.base.h

	@property
	def mask(self):
		P, Q = self.offsets
		return np.abs(Q) <= np.abs(P)

	@property
	def mask_t1(self):
		P, Q = self.offsets
		return (P >= 0) & (np.abs(Q) <= P)

	@property
	def mask_t2(self):
		P, Q = self.offsets
		return (P <= 0) & (np.abs(Q) <= -P)

	def contains(self, x, xi):
		return abs(xi) <= abs(x) and abs(x) <= self.base.L

	def classify(self, i, j):
		p, q = i - self.base.m, j - self.base.m
		if abs(q) > abs(p):
			return Region.OUTSIDE
		if q == p:
			return Region.DIAGONAL
		if q == -p:
			return Region.ANTI_DIAGONAL
		return Region.T1_INTERIOR if p > 0 else Region.T2_INTERIOR

	def empty_field(self):
		return np.full((self.n, self.n), np.nan)

	def stencil_mask(self, steps):
		'''
		Nodes (i, j) for which every (i + di, j + dj) in steps stays inside the same triangle,
		so finite differences there never straddle the waist or leave T.
		'''
		P, Q = self.offsets
		M = self.base.m
		inside = np.zeros_like(P, dtype=bool)
		for sign in (1, -1):
			ok = sign*P >= 0
			for di, dj in steps:
				p, q = sign*(P + di), sign*(Q + dj)
				ok &= (p >= 0) & (p <= M) & (np.abs(q) <= p)
			inside |= ok
		return inside

def to_characteristic(p, q):
	'''Node offsets (p, q) of (x, xi) to lattice indices (a, b) of (y, z) = (x + xi, x - xi).'''
	return p + q, p - q

def from_characteristic(a, b):
	return (a + b)//2, (a - b)//2

def mirror_to_T2(fields, parity, grid, reflected=None):
	'''
	Extend kernel components known on T1 to T2 by point reflection: K(x, xi) = s * Khat(-x, -xi) where
	Khat is the T1 solution of the reflected problem (the field itself unless reflected is given) and s the
	parity sign for the component. Returns new arrays defined on all of T.
	'''
	reflected = fields if reflected is None else reflected
	t1, t2 = grid.mask_t1, grid.mask_t2
	out = {}
	for name, values in fields.items():
		if name not in parity:
			raise ConfigurationError('no parity rule for kernel component {!r}'.format(name))
		full = grid.empty_field()
		full[t1] = np.asarray(values)[t1]
		mirrored = parity[name]*np.asarray(reflected[name])[::-1, ::-1]
		full[t2 & ~t1] = mirrored[t2 & ~t1]

		m = grid.base.m
		gap = abs(full[m, m] - mirrored[m, m])
		if gap > 1e-8*(1.0 + np.nanmax(np.abs(full))):
			logger.warning('component %s disagrees at the waist by %.3e', name, gap)
		out[name] = full
	return out

@dataclass(frozen=True)
class CoefficientProfile:
	kind: str
	sampler: object = field(compare=False, repr=False)
	value: float = None
	source: object = None
	span: tuple = None

	@classmethod
	def constant(cls, value):
		value = float(value)
		return cls('constant', lambda x: np.full(np.shape(x), value), value=value, source=value)

	@classmethod
	def expression(cls, text):
		return cls('expression', compile_expression(text), source=text)

	@classmethod
	def tabulated(cls, xs, ys, source=None):
		xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
		if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
			raise ConfigurationError('tabulated profile needs matching 1-D x and value columns')
		if np.any(np.diff(xs) <= 0):
			raise ConfigurationError('tabulated profile x column must be strictly increasing')
		return cls('tabulated', lambda x: np.interp(x, xs, ys), source=source, span=(xs[0], xs[-1]))

	@classmethod
	def from_csv(cls, path):
		df = pd.read_csv(path)
		if not {'x', 'value'} <= set(df.columns):
			raise ConfigurationError('{} needs columns x and value'.format(path))
		return cls.tabulated(df['x'].values, df['value'].values, source={'file': str(path)})

	@classmethod
	def coerce(cls, entry):
		if isinstance(entry, CoefficientProfile):
			return entry
		if callable(entry):
			return cls('expression', entry, source=getattr(entry, '__name__', 'callable'))
		if isinstance(entry, str):
			return cls.expression(entry)
		return cls.constant(entry)

	@property
	def is_constant(self):
		return self.kind == 'constant'

	def __call__(self, x):
		x = np.asarray(x, dtype=float)
		values = np.asarray(self.sampler(x), dtype=float)
		return np.broadcast_to(values, x.shape).copy()

	def covers(self, L):
		'''True when the profile is defined on all of [-L, L] (tabulated tables must span it).'''
		if self.span is None:
			return True
		slack = 1e-12*L
		return self.span[0] <= -L + slack and self.span[1] >= L - slack
