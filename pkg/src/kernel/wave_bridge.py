'''
Description: Reduction of the wave equation u_tt = u_xx + 2 lambda(x) u_t + alpha(x) u_x (beta = 0) with Dirichlet
actuation u(t, -L) = U1, u(t, L) = U2 to the 2x2 hyperbolic system, and the actuator ODEs recovering U from the
hyperbolic inflow controls.

Riemann variables w = u_x + u_t (leftward) and v = u_x - u_t (rightward) obey
	v_t = -v_x + (lambda - alpha/2) v - (lambda + alpha/2) w,
	w_t =  w_x + (alpha/2 - lambda) v + (lambda + alpha/2) w,
so the rightward hyperbolic state is v, controlled at its inflow v(-L) = V1, and the leftward state is w,
controlled at w(L) = V2. Since u_t = u_x - v at x = -L and u_t = w - u_x at x = L, the actuators follow
	dU1/dt = u_x(t, -L) - V1,  dU2/dt = V2 - u_x(t, L).
'''

from dataclasses import dataclass, field, replace

import numpy as np

from src.errors import ConfigurationError, UnsupportedError
from src.kernel.kernel_hyp import HypPlant
from src.numerics.grid import CoefficientProfile

@dataclass(frozen=True)
class WavePlant:
	lam: CoefficientProfile
	alpha: CoefficientProfile
	L: float = 1.0
	beta: CoefficientProfile = 0.0

	def __post_init__(self):
		if not self.L > 0:
			raise ConfigurationError('half length L must be positive, got {}'.format(self.L))
		for name in ('lam', 'alpha', 'beta'):
			object.__setattr__(self, name, CoefficientProfile.coerce(getattr(self, name)))

@dataclass(frozen=True)
class RiemannMaps:
	'''Forward (u_x, u_t) -> (w, v) and inverse (w, v) -> (u_x, u_t).'''

	@staticmethod
	def forward(u_x, u_t):
		return u_x + u_t, u_x - u_t

	@staticmethod
	def inverse(w, v):
		return 0.5*(w + v), 0.5*(w - v)

def wave_to_hyp(plant, samples=4001):
	'''
	HypPlant with eps = 1 whose rightward state is v and leftward state is w:
	c1 = lambda - alpha/2, c2 = -(lambda + alpha/2), c3 = alpha/2 - lambda, c4 = lambda + alpha/2.
	'''
	x = np.linspace(-plant.L, plant.L, samples)
	if np.any(plant.beta(x) != 0):
		raise UnsupportedError('only beta = 0 reduces to the 2x2 hyperbolic system')

	lam, alpha = plant.lam, plant.alpha
	if lam.is_constant and alpha.is_constant:
		l, a = lam.value, alpha.value
		coefficients = (l - 0.5*a, -(l + 0.5*a), 0.5*a - l, l + 0.5*a)
	else:
		coefficients = (lambda x: lam(x) - 0.5*alpha(x), lambda x: -(lam(x) + 0.5*alpha(x)),
						lambda x: 0.5*alpha(x) - lam(x), lambda x: lam(x) + 0.5*alpha(x))
	return HypPlant(1.0, *coefficients, L=plant.L), RiemannMaps()

@dataclass(frozen=True)
class ActuatorState:
	U1: float
	U2: float
	expected_dt: float
	rates: tuple = None
	t: float = 0.0
	history: tuple = field(default=(), repr=False)

	@classmethod
	def initial(cls, displacement, dt, rates=None):
		'''
		Actuators consistent with the initial boundary displacements u(0, -L) and u(0, L). Passing the
		initial boundary velocities as rates makes the first step a trapezoid step too.
		'''
		displacement = np.asarray(displacement, dtype=float)
		U1, U2 = float(displacement[0]), float(displacement[-1])
		if rates is not None:
			rates = (float(rates[0]), float(rates[1]))
		return cls(U1, U2, dt, rates=rates, history=((0.0, U1, U2),))

def actuator_ode_step(state, V1, V2, ux_left, ux_right, dt):
	'''
	Advance U1, U2 by one step. The rates use the boundary slopes at the new time level; with a previous
	rate available the step is the trapezoid rule (second order, like the field scheme), otherwise forward Euler.
	'''
	if not dt > 0:
		raise ConfigurationError('time step must be positive, got {}'.format(dt))
	if abs(dt - state.expected_dt) > 1e-12*state.expected_dt:
		raise ConfigurationError('actuator step {} does not match the field scheme step {}'.format(dt, state.expected_dt))

	rates = (ux_left - V1, V2 - ux_right)
	if state.rates is None:
		U1 = state.U1 + dt*rates[0]
		U2 = state.U2 + dt*rates[1]
	else:
		U1 = state.U1 + 0.5*dt*(state.rates[0] + rates[0])
		U2 = state.U2 + 0.5*dt*(state.rates[1] + rates[1])

	t = state.t + dt
	return replace(state, U1=U1, U2=U2, rates=rates, t=t, history=state.history + ((t, U1, U2),))

def wave_energy(w, v, grid):
	'''int (u_t^2 + u_x^2) dx = int (w^2 + v^2)/2 dx by the trapezoid rule.'''
	return 0.5*(np.asarray(w)**2 + np.asarray(v)**2) @ grid.weights
