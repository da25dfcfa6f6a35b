'''
Description: Applies the backstepping transformation to simulated snapshots and measures how closely the
transformed states follow the target dynamics (w_t = eps w_xx with zero traces for reaction-diffusion,
pure transport with zero inflow for the hyperbolic and wave plants).
'''

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.interpolate import LinearNDInterpolator, NearestNDInterpolator

from src.errors import ConfigurationError
from src.kernel.wave_bridge import wave_to_hyp
from src.numerics.grid import HourglassGrid
from src.sim.closed_loop import norm_history

logger = logging.getLogger(__name__)

TRACE_TOLERANCE = 1e-6

@dataclass
class TargetCheck:
	kind: str
	times: np.ndarray = field(repr=False)
	transformed: dict = field(repr=False)
	traces: pd.DataFrame = field(repr=False)
	dynamics: pd.DataFrame = field(repr=False)
	norms: pd.DataFrame = field(repr=False)

	@property
	def max_relative_trace(self):
		#the initial snapshot is not yet under feedback
		relative = self.traces['relative'].values
		return float(np.max(relative[1:] if len(relative) > 1 else relative))

	@property
	def max_dynamics_residual(self):
		return float(self.dynamics['residual'].max()) if len(self.dynamics) else 0.0

	def decay_rate(self, t0, t1):
		return decay_rate(self.norms, t0, t1)

	def summary(self):
		return {'max_relative_trace': self.max_relative_trace, 'max_dynamics_residual': self.max_dynamics_residual,
				'final_l2': float(self.norms['l2'].iloc[-1])}

def decay_rate(norms, t0, t1):
	'''Least-squares slope of -log ||.||_2 over snapshots with t0 <= t <= t1.'''
	window = (norms['t'] >= t0) & (norms['t'] <= t1) & (norms['l2'] > 0)
	if window.sum() < 2:
		raise ConfigurationError('need at least two positive norms in [{}, {}] to fit a rate'.format(t0, t1))
	slope = np.polyfit(norms['t'][window].values, np.log(norms['l2'][window].values), 1)[0]
	return -slope

def _resample_field(values, source, target):
	if source.base == target.base:
		return values
	ns, nk = target.n, source.n
	if np.isclose(source.base.L, target.base.L) and (nk - 1) % (ns - 1) == 0:
		r = (nk - 1)//(ns - 1)
		return values[::r, ::r]

	#interpolate each triangle on its own; the two only meet at the waist
	out = target.empty_field()
	X, S = source.mesh
	Xt, St = target.mesh
	for mask_s, mask_t in ((source.mask_t1, target.mask_t1), (source.mask_t2, target.mask_t2)):
		points = np.column_stack([X[mask_s], S[mask_s]])
		queries = np.column_stack([Xt[mask_t], St[mask_t]])
		sampled = LinearNDInterpolator(points, values[mask_s])(queries)
		missing = np.isnan(sampled)
		if missing.any():
			sampled[missing] = NearestNDInterpolator(points, values[mask_s])(queries[missing])
		out[mask_t] = sampled
	return out

def transform_matrix(K, grid):
	'''Matrix T with (T u)_i = sgn(x_i) int_{-|x_i|}^{|x_i|} K(x_i, xi) u(xi) dxi by the trapezoid rule.'''
	P, Q = grid.offsets
	h = grid.base.h
	span = np.abs(Q) <= np.abs(P)
	W = np.where(span, h, 0.0)
	W[np.abs(Q) == np.abs(P)] *= 0.5
	return np.sign(P)*W*np.where(span, K, 0.0)

def _interval_times(times):
	return times[1:], np.diff(times)

def _rd_dynamics(w, times, plant, grid):
	t, dts = _interval_times(times)
	h = grid.h
	lap = (w[:, 2:] - 2.0*w[:, 1:-1] + w[:, :-2])/h**2
	R = (w[1:, 1:-1] - w[:-1, 1:-1])/dts[:, None] - 0.5*plant.epsilon*(lap[1:] + lap[:-1])
	return pd.DataFrame({'t': t, 'residual': np.max(np.abs(R), axis=1) if R.size else np.zeros(len(t))})

def _transport_dynamics(alpha, beta, times, plant, grid, stride):
	'''Trapezoid-in-time residuals of alpha_t + eps alpha_x = c1 alpha and beta_t - eps beta_x = c4 beta along characteristics.'''
	t, dts = _interval_times(times)
	s = stride
	if s >= grid.n:
		return pd.DataFrame({'t': t, 'residual': np.zeros(len(t))})
	x = grid.nodes
	c1, c4 = plant.c1(x), plant.c4(x)
	half = 0.5*dts[:, None]
	Ra = alpha[1:, s:] - alpha[:-1, :-s] - half*(c1[:-s]*alpha[:-1, :-s] + c1[s:]*alpha[1:, s:])
	Rb = beta[1:, :-s] - beta[:-1, s:] - half*(c4[s:]*beta[:-1, s:] + c4[:-s]*beta[1:, :-s])
	residual = np.maximum(np.max(np.abs(Ra), axis=1), np.max(np.abs(Rb), axis=1))/dts
	return pd.DataFrame({'t': t, 'residual': residual})

def target_check(trajectory, kernel):
	'''
	Transform every snapshot of trajectory with kernel (resampled to the simulation grid when the grids differ)
	and report the boundary traces, relative to the sup norm of the state, and the target-dynamics residuals.
	'''
	grid = trajectory.grid
	hourglass = HourglassGrid(grid)
	if not np.isclose(kernel.grid.base.L, grid.L):
		raise ConfigurationError('kernel and trajectory live on different intervals')
	times = trajectory.times
	scale = trajectory.norms['sup'].values

	if trajectory.kind == 'rd':
		T = transform_matrix(_resample_field(kernel.values, kernel.grid, hourglass), hourglass)
		u = trajectory.fields['u']
		w = u - u @ T.T
		transformed = {'w': w}
		traces = pd.DataFrame({'t': times, 'w_right': w[:, -1], 'w_left': w[:, 0]})
		dynamics = _rd_dynamics(w, times, trajectory.plant, grid)
	else:
		if trajectory.kind == 'wave':
			plant = wave_to_hyp(trajectory.plant)[0]
			u, v = trajectory.fields['v'], trajectory.fields['w']
		else:
			plant = trajectory.plant
			u, v = trajectory.fields['u'], trajectory.fields['v']
		T = {name: transform_matrix(_resample_field(values, kernel.grid, hourglass), hourglass)
			for name, values in kernel.components.items()}
		alpha = u - (u @ T['uu'].T + v @ T['uv'].T)
		beta = v - (u @ T['vu'].T + v @ T['vv'].T)
		transformed = {'alpha': alpha, 'beta': beta}
		traces = pd.DataFrame({'t': times, 'alpha_left': alpha[:, 0], 'beta_right': beta[:, -1]})
		dynamics = _transport_dynamics(alpha, beta, times, plant, grid, trajectory.stride)

	worst = traces.drop(columns='t').abs().max(axis=1).values
	with np.errstate(invalid='ignore', divide='ignore'):
		traces['relative'] = np.where(scale > 0, worst/scale, 0.0)

	check = TargetCheck(trajectory.kind, times, transformed, traces, dynamics, norm_history(times, transformed, grid))
	if trajectory.closed_loop and check.max_relative_trace > TRACE_TOLERANCE:
		logger.warning('transformed boundary trace reaches %.3e of sup|state|', check.max_relative_trace)
	return check
