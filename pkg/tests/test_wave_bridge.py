import numpy as np
import pytest

from src.errors import ConfigurationError, UnsupportedError
from src.kernel.wave_bridge import ActuatorState, RiemannMaps, WavePlant, actuator_ode_step, wave_energy, wave_to_hyp
from src.numerics.grid import IntervalGrid

def test_constant_reduction_coefficients():
	hyp, maps = wave_to_hyp(WavePlant(0.5, 0.4))
	assert hyp.epsilon == 1.0
	assert hyp.is_constant
	c1, c2, c3, c4 = (c.value for c in hyp.coefficients)
	assert c1 == pytest.approx(0.3)
	assert c2 == pytest.approx(-0.7)
	assert c3 == pytest.approx(-0.3)
	assert c4 == pytest.approx(0.7)
	assert isinstance(maps, RiemannMaps)

def test_variable_reduction_coefficients():
	hyp, _ = wave_to_hyp(WavePlant('1 + x', '2*x'))
	x = np.linspace(-1.0, 1.0, 11)
	c1, c2, c3, c4 = hyp.coefficients
	np.testing.assert_allclose(c1(x), 1.0, atol=1e-15)
	np.testing.assert_allclose(c2(x), -(1.0 + 2.0*x), atol=1e-15)
	np.testing.assert_allclose(c3(x), -1.0, atol=1e-15)
	np.testing.assert_allclose(c4(x), 1.0 + 2.0*x, atol=1e-15)

def test_beta_is_unsupported():
	with pytest.raises(UnsupportedError):
		wave_to_hyp(WavePlant(0.5, 0.0, beta=1.0))

def test_riemann_maps_invert():
	u_x, u_t = np.array([0.3, -1.2]), np.array([2.0, 0.5])
	w, v = RiemannMaps.forward(u_x, u_t)
	np.testing.assert_allclose(w, u_x + u_t)
	back = RiemannMaps.inverse(w, v)
	np.testing.assert_allclose(back[0], u_x)
	np.testing.assert_allclose(back[1], u_t)

def test_riemann_variables_satisfy_the_reduced_system():
	#u = exp(kt) sin(x) solves u_tt = u_xx + 2 lam u_t + alpha u_x only for alpha = 0; use k^2 = -1 + 2 lam k
	lam = 1.5
	k = lam + np.sqrt(lam*lam - 1.0)
	hyp, _ = wave_to_hyp(WavePlant(lam, 0.0))
	c1, c2, c3, c4 = (c.value for c in hyp.coefficients)
	x, t = 0.37, 0.21
	u_x, u_t = np.exp(k*t)*np.cos(x), k*np.exp(k*t)*np.sin(x)
	w, v = RiemannMaps.forward(u_x, u_t)
	#time and space derivatives of v = u_x - u_t and w = u_x + u_t
	v_t = k*np.exp(k*t)*np.cos(x) - k*k*np.exp(k*t)*np.sin(x)
	v_x = -np.exp(k*t)*np.sin(x) - k*np.exp(k*t)*np.cos(x)
	w_t = k*np.exp(k*t)*np.cos(x) + k*k*np.exp(k*t)*np.sin(x)
	w_x = -np.exp(k*t)*np.sin(x) + k*np.exp(k*t)*np.cos(x)
	assert v_t == pytest.approx(-v_x + c1*v + c2*w, rel=1e-12)
	assert w_t == pytest.approx(w_x + c3*v + c4*w, rel=1e-12)

def test_actuator_step_euler_then_trapezoid():
	state = ActuatorState.initial(np.array([1.0, 0.0, 2.0]), 0.1)
	assert (state.U1, state.U2) == (1.0, 2.0)
	state = actuator_ode_step(state, V1=0.5, V2=1.0, ux_left=1.5, ux_right=0.0, dt=0.1)
	assert state.U1 == pytest.approx(1.1)
	assert state.U2 == pytest.approx(2.1)
	state = actuator_ode_step(state, V1=0.0, V2=0.0, ux_left=3.0, ux_right=1.0, dt=0.1)
	assert state.U1 == pytest.approx(1.1 + 0.05*(1.0 + 3.0))
	assert state.U2 == pytest.approx(2.1 + 0.05*(1.0 - 1.0))
	assert len(state.history) == 3
	assert state.t == pytest.approx(0.2)

def test_actuator_step_rejects_mismatched_dt():
	state = ActuatorState.initial(np.zeros(5), 0.1)
	with pytest.raises(ConfigurationError):
		actuator_ode_step(state, 0.0, 0.0, 0.0, 0.0, 0.05)
	with pytest.raises(ConfigurationError):
		actuator_ode_step(state, 0.0, 0.0, 0.0, 0.0, 0.0)

def test_wave_energy():
	grid = IntervalGrid(1.0, 201)
	w = np.ones(grid.n)
	v = np.zeros(grid.n)
	assert wave_energy(w, v, grid) == pytest.approx(1.0)
	assert wave_energy(grid.nodes, grid.nodes, grid) == pytest.approx(2.0/3.0, rel=1e-3)
