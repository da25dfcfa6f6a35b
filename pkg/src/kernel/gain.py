'''
Description: Boundary gain functions. A gain is the kernel trace g(xi) whose trapezoid inner product with the
current state gives one actuator value.
'''

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from src.errors import NumericError
from src.numerics.grid import quadrature

@dataclass(frozen=True)
class GainFunction:
	end: str
	grid: object
	samples: np.ndarray = field(compare=False, repr=False)
	label: str = ''

	def __post_init__(self):
		samples = np.asarray(self.samples, dtype=float)
		if samples.shape != (self.grid.n,):
			raise NumericError('gain {} has {} samples for a {}-node grid'.format(self.label or self.end, samples.shape, self.grid.n))
		if not np.all(np.isfinite(samples)):
			raise NumericError('gain {} is not finite at every node'.format(self.label or self.end))
		object.__setattr__(self, 'samples', samples)

	@property
	def weights(self):
		'''Samples times trapezoid weights, so that U = weights @ state.'''
		return self.samples*self.grid.weights

	def apply(self, state):
		return quadrature(self.samples*np.asarray(state, dtype=float), self.grid)

	def resample(self, grid):
		if grid == self.grid:
			return self
		return GainFunction(self.end, grid, grid.resample(self.samples, self.grid), self.label)

	def l1_norm(self):
		return quadrature(np.abs(self.samples), self.grid)

	def to_frame(self):
		return pd.DataFrame({'xi': self.grid.nodes, 'g': self.samples})
