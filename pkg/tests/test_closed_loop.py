import numpy as np
import pytest

from src.errors import ConfigurationError, DivergenceError
from src.kernel.kernel_hyp import HypPlant, hyp_gains, hyp_kernel_explicit
from src.kernel.kernel_rd import RdPlant, rd_gains, rd_kernel_explicit
from src.kernel.wave_bridge import WavePlant, wave_to_hyp
from src.numerics.grid import HourglassGrid, IntervalGrid
from src.sim.closed_loop import (compatible_initial_state, feedback_law, reflecting_law, sample_profile, simulate_hyp,
									simulate_rd, simulate_wave, zero_law)
from src.sim.target import decay_rate

def _rd_feedback(plant, grid):
	return rd_gains(rd_kernel_explicit(plant, HourglassGrid(grid)))

def test_heat_equation_decays_at_first_eigenvalue(first_mode, sim_grid):
	trajectory = simulate_rd(RdPlant(1.0, 0.0), sim_grid, initial=first_mode, dt=0.005, T=1.0)
	ratio = trajectory.norms['l2'].iloc[-1]/trajectory.norms['l2'].iloc[0]
	assert ratio == pytest.approx(np.exp(-np.pi**2/4.0), rel=0.02)
	assert trajectory.check()
	assert not trajectory.closed_loop

def test_unstable_open_loop_grows(rd_plant_unstable, first_mode, sim_grid):
	trajectory = simulate_rd(rd_plant_unstable, sim_grid, initial=first_mode, dt=0.005, T=0.5)
	assert trajectory.norms['l2'].iloc[-1] > 10.0*trajectory.norms['l2'].iloc[0]
	np.testing.assert_array_equal(trajectory.actuators['U1'][1:], 0.0)

def test_unstable_closed_loop_decays(rd_plant_unstable, first_mode, sim_grid):
	gains = _rd_feedback(rd_plant_unstable, sim_grid)
	trajectory = simulate_rd(rd_plant_unstable, sim_grid, gains, first_mode, dt=0.005, T=2.0)
	norms = trajectory.norms
	#closed loop inherits the slowest mode of the target heat equation
	assert decay_rate(norms, 1.0, 2.0) == pytest.approx(np.pi**2/4.0, rel=0.05)
	assert norms['l2'].iloc[-1] < norms['l2'][norms['t'] <= 1.0].iloc[-1]
	assert trajectory.closed_loop
	assert trajectory.check()
	#boundary values are the gain quadratures of the same snapshot
	right, left = gains
	u = trajectory.fields['u']
	for k in (1, 50, len(u) - 1):
		assert u[k, -1] == pytest.approx(right.apply(u[k]), abs=1e-12)
		assert u[k, 0] == pytest.approx(left.apply(u[k]), abs=1e-12)

def test_two_pass_closure_also_stabilizes(rd_plant_unstable, first_mode, sim_grid):
	gains = _rd_feedback(rd_plant_unstable, sim_grid)
	trajectory = simulate_rd(rd_plant_unstable, sim_grid, gains, first_mode, dt=0.005, T=2.0, closure='two-pass')
	assert trajectory.norms['l2'].iloc[-1] < trajectory.norms['l2'].iloc[0]
	with pytest.raises(ConfigurationError):
		simulate_rd(rd_plant_unstable, sim_grid, gains, first_mode, closure='implicit')

def test_zero_initial_data_stays_zero(rd_plant_unstable, sim_grid):
	trajectory = simulate_rd(rd_plant_unstable, sim_grid, _rd_feedback(rd_plant_unstable, sim_grid), None, T=0.2)
	assert np.all(trajectory.fields['u'] == 0.0)
	assert np.all(trajectory.norms['l2'] == 0.0)

def test_stride_and_step_count(first_mode, sim_grid):
	trajectory = simulate_rd(RdPlant(1.0, 1.0), sim_grid, initial=first_mode, dt=0.01, T=0.1, stride=2)
	np.testing.assert_allclose(trajectory.times, [0.0, 0.02, 0.04, 0.06, 0.08, 0.1])
	assert trajectory.fields['u'].shape == (6, sim_grid.n)
	frame = trajectory.to_frame()
	assert len(frame) == 6*sim_grid.n
	assert list(frame.columns) == ['t', 'x', 'field', 'value']

def test_nan_initial_data_raises_at_first_step(sim_grid):
	with pytest.raises(DivergenceError) as info:
		simulate_rd(RdPlant(1.0, 1.0), sim_grid, initial=lambda x: np.full_like(x, np.nan), T=0.1)
	assert info.value.step == 1

def test_overflow_raises(first_mode):
	with pytest.raises(DivergenceError) as info:
		simulate_rd(RdPlant(1.0, 5000.0), IntervalGrid(1.0, 21), initial=first_mode, dt=1e-4, T=0.1)
	assert info.value.exit_code == 4

def test_sample_profile_forms(sim_grid):
	np.testing.assert_array_equal(sample_profile(None, sim_grid), 0.0)
	np.testing.assert_allclose(sample_profile('x^2', sim_grid), sim_grid.nodes**2)
	np.testing.assert_array_equal(sample_profile(lambda x: 3.0, sim_grid), 3.0)
	with pytest.raises(ConfigurationError):
		sample_profile(np.zeros(5), sim_grid)

def test_uncoupled_transport_is_an_exact_shift():
	grid = IntervalGrid(1.0, 41)
	plant = HypPlant(1.0, 0.0, 0.0, 0.0, 0.0)
	u0 = np.cos(grid.nodes) + 2.0
	v0 = np.sin(3.0*grid.nodes)
	trajectory = simulate_hyp(plant, grid, None, u0, v0, T=2.1)
	u, v = trajectory.fields['u'], trajectory.fields['v']
	np.testing.assert_array_equal(u[5, 5:], u0[:-5])
	np.testing.assert_array_equal(u[5, :5], 0.0)
	np.testing.assert_array_equal(v[5, :-5], v0[5:])
	#the last node still carries u0[0] at t = 2L/eps, everything has left after that
	assert u[40, -1] == u0[0]
	assert np.all(u[41:] == 0.0) and np.all(v[41:] == 0.0)
	assert trajectory.check()

def test_hyperbolic_step_must_match_cfl(hyp_plant_coupled, sim_grid):
	with pytest.raises(ConfigurationError):
		simulate_hyp(hyp_plant_coupled, sim_grid, dt=0.5*sim_grid.h)
	with pytest.raises(ConfigurationError):
		simulate_hyp(hyp_plant_coupled, IntervalGrid(2.0, 101))

def test_compatible_initial_state_satisfies_the_law(hyp_plant_coupled):
	grid = IntervalGrid(1.0, 101)
	gains = hyp_gains(hyp_kernel_explicit(hyp_plant_coupled, HourglassGrid(grid)))
	law = feedback_law(gains, grid)
	u, v = compatible_initial_state(law, grid, np.sin(np.pi*grid.nodes) + 1.0, grid.nodes**2)
	U1, U2 = law.evaluate(u, v)
	assert u[0] == pytest.approx(U1, abs=1e-12)
	assert v[-1] == pytest.approx(U2, abs=1e-12)

def _hyp_closed_loop_residue(plant, n, compatible=None):
	grid = IntervalGrid(1.0, n)
	gains = hyp_gains(hyp_kernel_explicit(plant, HourglassGrid(grid)))
	trajectory = simulate_hyp(plant, grid, gains, 'sin(pi*x)', 'x^2', T=2.1, compatible=compatible)
	assert trajectory.closed_loop
	assert trajectory.check()
	norms = trajectory.norms
	return norms['sup'].iloc[-1]/norms['sup'].iloc[0]

def test_hyperbolic_closed_loop_vanishes_after_two_crossings(hyp_plant_coupled):
	#feedback runs start from data that already satisfies the law
	assert _hyp_closed_loop_residue(hyp_plant_coupled, 401) < 1e-3

def test_hyperbolic_closed_loop_residue_shrinks_under_refinement(hyp_plant_coupled):
	compatible = [_hyp_closed_loop_residue(hyp_plant_coupled, n) for n in (201, 401, 801)]
	assert compatible[2] < compatible[1] < compatible[0]
	#a boundary jump at t = 0 is transported, not smoothed, so its residue only falls like h
	jump = [_hyp_closed_loop_residue(hyp_plant_coupled, n, compatible=False) for n in (201, 401, 801)]
	assert jump[1] < 0.7*jump[0] and jump[2] < 0.7*jump[1]
	assert all(c < j for c, j in zip(compatible, jump))

def test_target_system_with_zero_inflow_vanishes_after_two_crossings():
	grid = IntervalGrid(1.0, 41)
	plant = HypPlant(1.0, '0.5 + x', 0.0, 0.0, '-cos(x)')
	trajectory = simulate_hyp(plant, grid, None, 'sin(pi*x) + 1', 'exp(x)', T=2.5)
	u, v = trajectory.fields['u'], trajectory.fields['v']
	assert u[40, -1] != 0.0 and v[40, 0] != 0.0
	assert np.all(u[41:] == 0.0) and np.all(v[41:] == 0.0)
	assert trajectory.check()

def test_zero_and_reflecting_laws():
	grid = IntervalGrid(1.0, 11)
	u, v = np.arange(11.0), -np.arange(11.0)
	assert zero_law(grid).evaluate(u, v) == (0.0, 0.0)
	assert reflecting_law(grid).evaluate(u, v) == (v[0], u[-1])

def test_undamped_wave_without_feedback_freezes():
	grid = IntervalGrid(1.0, 41)
	plant = WavePlant(0.0, 0.0)
	hyp, _ = wave_to_hyp(plant)
	gains = hyp_gains(hyp_kernel_explicit(hyp, HourglassGrid(grid)))
	trajectory = simulate_wave(plant, grid, gains, 'sin(pi*x)', 'cos(pi*x/2)', T=2.1)
	assert np.all(trajectory.fields['v'][41:] == 0.0)
	assert np.all(trajectory.fields['w'][41:] == 0.0)
	np.testing.assert_array_equal(trajectory.fields['u'][-1], trajectory.fields['u'][-2])
	assert trajectory.check()

def test_antidamped_wave_gains_energy_with_fixed_ends():
	grid = IntervalGrid(1.0, 201)
	trajectory = simulate_wave(WavePlant(0.5, 0.0), grid, None, None, 'sin(pi*x)', T=2.0)
	energy = trajectory.extras['energy']
	assert energy[-1] > energy[0]
	assert not trajectory.closed_loop
	#fixed ends keep the displacement at its initial boundary values
	np.testing.assert_allclose(trajectory.actuators['U1'], 0.0, atol=1e-12)
	np.testing.assert_allclose(trajectory.actuators['U2'], 0.0, atol=1e-12)

def test_wave_closed_loop_riemann_pair_vanishes():
	grid = IntervalGrid(1.0, 401)
	plant = WavePlant(0.5, 0.0)
	hyp, _ = wave_to_hyp(plant)
	gains = hyp_gains(hyp_kernel_explicit(hyp, HourglassGrid(grid)))
	trajectory = simulate_wave(plant, grid, gains, None, 'sin(pi*x)', T=2.1)
	norms = trajectory.norms
	assert norms['sup'].iloc[-1] < 1e-3*norms['sup'].iloc[0]
	assert np.max(trajectory.extras['gap']) < 1e-10
	assert trajectory.check()
	assert set(trajectory.fields) == {'u', 'v', 'w'}
