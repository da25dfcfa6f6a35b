'''
Description: Time integration of the reaction-diffusion, hyperbolic and wave plants, either open loop or
under the bilateral backstepping feedback.

Reaction-diffusion: Crank-Nicolson on the interior with the two Dirichlet values closed against their gain
quadratures. Hyperbolic: unit-CFL characteristic march (dt = h/eps), sources by the trapezoid rule along each
characteristic, boundary values closed against a BoundaryLaw. Wave: the Riemann pair is marched as a
hyperbolic system and the displacement is rebuilt from u_t = (w - v)/2.
'''

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.linalg import solve_banded

from src.errors import ConfigurationError, DivergenceError, NumericError
from src.kernel.kernel_hyp import HypGains
from src.kernel.wave_bridge import ActuatorState, actuator_ode_step, wave_energy, wave_to_hyp
from src.numerics.expression import compile_expression

logger = logging.getLogger(__name__)

OVERFLOW = 1e150
NORM_FIELDS = {'rd': ('u',), 'hyp': ('u', 'v'), 'wave': ('v', 'w')}

@dataclass
class Trajectory:
	kind: str
	plant: object
	grid: object
	dt: float
	stride: int
	closed_loop: bool
	times: np.ndarray = field(repr=False)
	fields: dict = field(repr=False)
	actuators: dict = field(repr=False)
	boundary_map: dict
	norms: pd.DataFrame = field(repr=False)
	extras: dict = field(default_factory=dict, repr=False)

	def check(self):
		'''Boundary snapshots equal the actuator histories bit for bit and the norm history matches the snapshots.'''
		consistent = True
		for name, (fname, node) in self.boundary_map.items():
			if not np.array_equal(self.fields[fname][:, node], self.actuators[name]):
				logger.warning('%s history differs from the %s boundary snapshots', name, fname)
				consistent = False

		recomputed = norm_history(self.times, {k: self.fields[k] for k in NORM_FIELDS[self.kind]}, self.grid)
		if not np.allclose(recomputed[['l2', 'sup']].values, self.norms[['l2', 'sup']].values, rtol=1e-12, atol=0.0):
			logger.warning('stored norm history does not match the snapshots')
			consistent = False
		return consistent

	def to_frame(self):
		'''Long format t, x, field, value over every snapshot.'''
		steps, n = len(self.times), self.grid.n
		frames = [pd.DataFrame({'t': np.repeat(self.times, n), 'x': np.tile(self.grid.nodes, steps),
								'field': name, 'value': values.ravel()})
				for name, values in self.fields.items()]
		return pd.concat(frames, ignore_index=True)

def norm_history(times, fields, grid):
	squares = sum(((values**2) @ grid.weights for values in fields.values()))
	sup = np.max([np.max(np.abs(values), axis=1) for values in fields.values()], axis=0)
	return pd.DataFrame({'t': times, 'l2': np.sqrt(squares), 'sup': sup})

class _Recorder:
	def __init__(self, stride):
		if stride < 1:
			raise ConfigurationError('stride must be >= 1, got {}'.format(stride))
		self.stride = stride
		self.times = []
		self.fields = {}
		self.actuators = {}
		self.extras = {}

	def record(self, step, t, fields, actuators, extras=None):
		if step % self.stride:
			return
		self.times.append(t)
		for group, values in ((self.fields, fields), (self.actuators, actuators), (self.extras, extras or {})):
			for name, value in values.items():
				group.setdefault(name, []).append(np.copy(value))

	def build(self, kind, plant, grid, dt, closed_loop, boundary_map):
		times = np.asarray(self.times)
		fields = {name: np.asarray(values) for name, values in self.fields.items()}
		norms = norm_history(times, {k: fields[k] for k in NORM_FIELDS[kind]}, grid)
		return Trajectory(kind, plant, grid, dt, self.stride, closed_loop, times, fields,
						{name: np.asarray(values) for name, values in self.actuators.items()},
						boundary_map, norms, {name: np.asarray(values) for name, values in self.extras.items()})

def _step_count(T, dt):
	if not dt > 0:
		raise ConfigurationError('time step must be positive, got {}'.format(dt))
	if T < 0:
		raise ConfigurationError('final time must be non-negative, got {}'.format(T))
	return int(np.ceil(T/dt - 1e-9))

def _check_finite(step, *arrays):
	for values in arrays:
		if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > OVERFLOW:
			raise DivergenceError('state diverged at step {}'.format(step), step=step)

def sample_profile(profile, grid):
	'''Initial data as an array on grid from None (zero), an expression string, a callable of x or samples.'''
	if profile is None:
		return np.zeros(grid.n)
	if isinstance(profile, str):
		profile = compile_expression(profile)
	if callable(profile):
		values = np.broadcast_to(np.asarray(profile(grid.nodes), dtype=float), (grid.n,))
	else:
		values = np.asarray(profile, dtype=float)
	if values.shape != (grid.n,):
		raise ConfigurationError('initial profile has shape {}, grid has {} nodes'.format(values.shape, grid.n))
	return values.copy()

def simulate_rd(plant, grid, gains=None, initial=None, dt=None, T=1.0, stride=1, closure='exact'):
	'''
	Crank-Nicolson march of u_t = eps u_xx + lambda u. gains is None (open loop, U = 0) or the pair of
	GainFunctions from rd_gains. The interior solution is affine in the two new boundary values,
	u_int = z + b0 a + b1 c, so the closure 'exact' solves the 2x2 system b0 = g_left.u, b1 = g_right.u;
	'two-pass' predicts the boundary values from the previous state and corrects them once.
	At t = 0 the recorded actuators are the initial boundary values.
	'''
	if closure not in ('exact', 'two-pass'):
		raise ConfigurationError('closure must be exact or two-pass, got {!r}'.format(closure))
	dt = grid.h if dt is None else dt
	steps = _step_count(T, dt)
	u = sample_profile(initial, grid)
	n, h = grid.n, grid.h

	r = dt*plant.epsilon/(2.0*h*h)
	lam = plant.lam(grid.nodes)[1:-1]
	ab = np.zeros((3, n - 2))
	ab[0, 1:] = -r
	ab[1] = 1.0 + 2.0*r - 0.5*dt*lam
	ab[2, :-1] = -r
	edge = np.zeros(n - 2)
	edge[0] = r
	a = solve_banded((1, 1), ab, edge)
	c = solve_banded((1, 1), ab, edge[::-1])

	if gains is not None:
		by_end = {g.end: g.resample(grid) for g in gains}
		if set(by_end) != {'right', 'left'}:
			raise ConfigurationError('reaction-diffusion feedback needs a right and a left gain')
		wr, wl = by_end['right'].weights, by_end['left'].weights
		closure_matrix = np.array([[1.0 - wl[0] - wl[1:-1] @ a, -wl[-1] - wl[1:-1] @ c],
									[-wr[0] - wr[1:-1] @ a, 1.0 - wr[-1] - wr[1:-1] @ c]])
		if np.linalg.cond(closure_matrix) > 1e12:
			raise NumericError('boundary closure is singular for these gains')

	recorder = _Recorder(stride)
	recorder.record(0, 0.0, {'u': u}, {'U1': u[-1], 'U2': u[0]})
	logger.info('reaction-diffusion %s loop: %d steps of dt=%.3g on %d nodes', 'closed' if gains else 'open', steps, dt, n)

	for k in range(1, steps + 1):
		rhs = (1.0 - 2.0*r + 0.5*dt*lam)*u[1:-1] + r*(u[:-2] + u[2:])
		z = solve_banded((1, 1), ab, rhs, check_finite=False)
		if gains is None:
			b0 = b1 = 0.0
		elif closure == 'exact':
			b0, b1 = np.linalg.solve(closure_matrix, [wl[1:-1] @ z, wr[1:-1] @ z])
		else:
			b0, b1 = wl @ u, wr @ u
			predicted = np.concatenate(([b0], z + b0*a + b1*c, [b1]))
			b0, b1 = wl @ predicted, wr @ predicted

		u = np.concatenate(([b0], z + b0*a + b1*c, [b1]))
		_check_finite(k, u)
		recorder.record(k, k*dt, {'u': u}, {'U1': u[-1], 'U2': u[0]})

	return recorder.build('rd', plant, grid, dt, gains is not None, {'U1': ('u', -1), 'U2': ('u', 0)})

@dataclass(frozen=True)
class BoundaryLaw:
	'''U1 = w1u.u + w1v.v and U2 = w2u.u + w2v.v; the weight vectors already include the quadrature weights.'''
	kind: str
	grid: object
	w1u: np.ndarray = field(compare=False, repr=False)
	w1v: np.ndarray = field(compare=False, repr=False)
	w2u: np.ndarray = field(compare=False, repr=False)
	w2v: np.ndarray = field(compare=False, repr=False)

	def evaluate(self, u, v):
		return self.w1u @ u + self.w1v @ v, self.w2u @ u + self.w2v @ v

def feedback_law(gains, grid):
	g = gains.resample(grid)
	return BoundaryLaw('feedback', grid, g.u1_u.weights, g.u1_v.weights, g.u2_u.weights, g.u2_v.weights)

def zero_law(grid):
	zero = np.zeros(grid.n)
	return BoundaryLaw('zero', grid, zero, zero, zero, zero)

def reflecting_law(grid):
	'''u(-L) = v(-L) and v(L) = u(L); for the wave reduction these are fixed ends (u_t = 0).'''
	first, last = np.zeros(grid.n), np.zeros(grid.n)
	first[0] = last[-1] = 1.0
	return BoundaryLaw('reflecting', grid, np.zeros(grid.n), first, last, np.zeros(grid.n))

def _as_law(law, grid):
	if law is None:
		return zero_law(grid)
	if isinstance(law, HypGains):
		return feedback_law(law, grid)
	if law.grid != grid:
		raise ConfigurationError('boundary law was built for a different grid')
	return law

def _compatibility_coefficients(law, u, v, directions):
	def defect(su, sv):
		U1, U2 = law.evaluate(su, sv)
		return np.array([su[0] - U1, sv[-1] - U2])

	A = np.column_stack([defect(*d) for d in directions])
	try:
		return np.linalg.solve(A, -defect(u, v))
	except np.linalg.LinAlgError as exc:
		raise ConfigurationError('initial data cannot be made compatible with the {} law'.format(law.kind)) from exc

def _ramps(grid):
	x, L = grid.nodes, grid.L
	return (L - x)/(2.0*L), (x + L)/(2.0*L)

def compatible_initial_state(law, grid, u, v):
	'''
	Add a phi + b psi corrections (phi = 1 at -L, psi = 1 at L, linear) to u and v so that
	u(-L) and v(L) already equal the law at t = 0.
	'''
	u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
	phi, psi = _ramps(grid)
	zero = np.zeros(grid.n)
	a, b = _compatibility_coefficients(law, u, v, ((phi, zero), (zero, psi)))
	return u + a*phi, v + b*psi

class _CharacteristicMarch:
	'''One unit-CFL step of the hyperbolic plant with the boundary law closed exactly.'''

	def __init__(self, plant, grid, law, dt):
		x = grid.nodes
		self.c1, self.c2, self.c3, self.c4 = (c(x) for c in plant.coefficients)
		self.half = 0.5*dt
		self.law = law

		hd = self.half
		self.det = (1.0 - hd*self.c1)*(1.0 - hd*self.c4) - hd*hd*self.c2*self.c3
		self.left = 1.0 - hd*self.c4[0]
		self.right = 1.0 - hd*self.c1[-1]
		if np.any(np.abs(self.det[1:-1]) < 1e-12) or abs(self.left) < 1e-12 or abs(self.right) < 1e-12:
			raise ConfigurationError('source terms are too stiff for dt = {}'.format(dt))

		#new state is affine in (U1, U2); U1 only reaches node 0 and U2 only node n-1
		n = grid.n
		e1u, e1v, e2u, e2v = (np.zeros(n) for _ in range(4))
		e1u[0], e1v[0] = 1.0, hd*self.c3[0]/self.left
		e2v[-1], e2u[-1] = 1.0, hd*self.c2[-1]/self.right
		W1 = law.evaluate(e1u, e1v)
		W2 = law.evaluate(e2u, e2v)
		self.closure = np.array([[1.0 - W1[0], -W2[0]], [-W1[1], 1.0 - W2[1]]])
		if np.linalg.cond(self.closure) > 1e12:
			raise NumericError('boundary closure is singular for the {} law'.format(law.kind))

	def advance(self, u, v, U1, U2):
		hd = self.half
		c1, c2, c3, c4 = self.c1, self.c2, self.c3, self.c4
		pu, pv = np.empty_like(u), np.empty_like(v)
		pu[1:] = u[:-1] + hd*(c1[:-1]*u[:-1] + c2[:-1]*v[:-1])
		pv[:-1] = v[1:] + hd*(c3[1:]*u[1:] + c4[1:]*v[1:])

		un, vn = np.empty_like(u), np.empty_like(v)
		i = slice(1, -1)
		un[i] = ((1.0 - hd*c4[i])*pu[i] + hd*c2[i]*pv[i])/self.det[i]
		vn[i] = (hd*c3[i]*pu[i] + (1.0 - hd*c1[i])*pv[i])/self.det[i]
		un[0] = U1
		vn[0] = (pv[0] + hd*c3[0]*U1)/self.left
		vn[-1] = U2
		un[-1] = (pu[-1] + hd*c2[-1]*U2)/self.right
		return un, vn

	def step(self, u, v):
		free_u, free_v = self.advance(u, v, 0.0, 0.0)
		U1, U2 = np.linalg.solve(self.closure, self.law.evaluate(free_u, free_v))
		return self.advance(u, v, U1, U2)

def simulate_hyp(plant, grid, law=None, initial_u=None, initial_v=None, T=1.0, dt=None, stride=1, compatible=None):
	'''
	law is None (zero inflow), HypGains (feedback) or any BoundaryLaw on grid. dt must equal h/eps.
	compatible=None corrects the initial data to the law only under feedback. Uncorrected data leaves a
	boundary jump that the march transports without smoothing, so the residue after 2L/eps shrinks only like h.
	With all coefficients zero each step is an exact shift of both fields.
	'''
	expected = grid.h/plant.epsilon
	if dt is not None and abs(dt - expected) > 1e-12*expected:
		raise ConfigurationError('characteristic scheme needs dt = h/eps = {:.6g}, got {}'.format(expected, dt))
	if not np.isclose(grid.L, plant.L):
		raise ConfigurationError('grid half length {} does not match plant L = {}'.format(grid.L, plant.L))
	law = _as_law(law, grid)
	steps = _step_count(T, expected)

	u, v = sample_profile(initial_u, grid), sample_profile(initial_v, grid)
	if compatible is None:
		compatible = law.kind == 'feedback'
	if compatible:
		u, v = compatible_initial_state(law, grid, u, v)
	march = _CharacteristicMarch(plant, grid, law, expected)

	recorder = _Recorder(stride)
	recorder.record(0, 0.0, {'u': u, 'v': v}, {'U1': u[0], 'U2': v[-1]})
	logger.info('hyperbolic %s law: %d steps of dt=%.3g on %d nodes', law.kind, steps, expected, grid.n)

	for k in range(1, steps + 1):
		u, v = march.step(u, v)
		_check_finite(k, u, v)
		recorder.record(k, k*expected, {'u': u, 'v': v}, {'U1': u[0], 'U2': v[-1]})

	return recorder.build('hyp', plant, grid, expected, law.kind == 'feedback', {'U1': ('u', 0), 'U2': ('v', -1)})

def simulate_wave(plant, grid, gains=None, displacement=None, velocity=None, T=1.0, stride=1, compatible=None):
	'''
	Wave plant through its Riemann pair. gains are HypGains of the reduced plant (closed loop) or None, in
	which case the ends are held fixed. Fields: u (displacement), v = u_x - u_t, w = u_x + u_t. Extras: energy,
	the inflow controls V1, V2 and the gap between the rebuilt boundary displacement and the actuator ODE.
	compatible=None corrects the initial velocity to the law whenever gains are given.
	'''
	hyp, maps = wave_to_hyp(plant)
	if not np.isclose(grid.L, plant.L):
		raise ConfigurationError('grid half length {} does not match plant L = {}'.format(grid.L, plant.L))
	dt = grid.h
	steps = _step_count(T, dt)
	law = feedback_law(gains, grid) if gains is not None else reflecting_law(grid)

	u = sample_profile(displacement, grid)
	ut = sample_profile(velocity, grid)
	ux = np.gradient(u, grid.h, edge_order=2)
	if compatible is None:
		compatible = gains is not None
	if compatible:
		phi, psi = _ramps(grid)
		v0, w0 = ux - ut, ux + ut
		a, b = _compatibility_coefficients(law, v0, w0, ((-phi, phi), (-psi, psi)))
		ut = ut + a*phi + b*psi
	w, v = maps.forward(ux, ut)

	march = _CharacteristicMarch(hyp, grid, law, dt)
	actuator = ActuatorState.initial(u, dt, rates=(ut[0], ut[-1]))
	u[0], u[-1] = actuator.U1, actuator.U2

	recorder = _Recorder(stride)
	extras = {'energy': wave_energy(w, v, grid), 'V1': v[0], 'V2': w[-1], 'gap': 0.0}
	recorder.record(0, 0.0, {'u': u, 'v': v, 'w': w}, {'U1': actuator.U1, 'U2': actuator.U2}, extras)
	logger.info('wave %s: %d steps of dt=%.3g on %d nodes', 'closed loop' if gains is not None else 'fixed ends', steps, dt, grid.n)

	for k in range(1, steps + 1):
		v, w = march.step(v, w)
		V1, V2 = v[0], w[-1]
		ux_new, ut_new = maps.inverse(w, v)
		actuator = actuator_ode_step(actuator, V1, V2, ux_new[0], ux_new[-1], dt)

		u = u + 0.5*dt*(ut + ut_new)
		gap = max(abs(u[0] - actuator.U1), abs(u[-1] - actuator.U2))
		u[0], u[-1] = actuator.U1, actuator.U2
		ut = ut_new
		_check_finite(k, u, v, w)

		extras = {'energy': wave_energy(w, v, grid), 'V1': V1, 'V2': V2, 'gap': gap}
		recorder.record(k, k*dt, {'u': u, 'v': v, 'w': w}, {'U1': actuator.U1, 'U2': actuator.U2}, extras)

	return recorder.build('wave', plant, grid, dt, gains is not None, {'U1': ('u', 0), 'U2': ('u', -1)})
