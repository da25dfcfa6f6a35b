'''
Description: Command line driver. Synthesizes kernels, runs open- and closed-loop simulations with an optional
target check, and tabulates the unilateral/bilateral effort comparison.

	python3 -m src.cli kernel configs/rd_unstable.json --method numeric
	python3 -m src.cli simulate configs/hyperbolic.json --closed-loop --target-check
	python3 -m src.cli compare --delta-min 0.5 --delta-max 5 --samples 10
'''

import argparse
import logging
import sys

import numpy as np

from src.compare.effort import effort_curve
from src.config import build_plant, load_config, profile
from src.errors import BacksteppingError, ConfigurationError
from src.export import write_effort_curve, write_kernel, write_trajectory
from src.kernel.kernel_hyp import HypPlant, hyp_gains, hyp_kernel_explicit, hyp_kernel_residual, hyp_kernel_series
from src.kernel.kernel_rd import RdPlant, rd_gains, rd_kernel_explicit, rd_kernel_goursat, rd_kernel_residual
from src.kernel.wave_bridge import wave_to_hyp
from src.sim.closed_loop import simulate_hyp, simulate_rd, simulate_wave
from src.sim.target import target_check

logger = logging.getLogger(__name__)

def _max_abs(values):
	finite = np.asarray(values)[np.isfinite(values)]
	return float(np.max(np.abs(finite))) if finite.size else 0.0

def _default_method(plant):
	if isinstance(plant, RdPlant):
		return 'explicit' if plant.lam.is_constant and plant.lam.value >= 0 else 'numeric'
	if plant.is_constant:
		c2, c3 = plant.c2.value, plant.c3.value
		return 'explicit' if c2*c3 >= 0 else 'numeric'
	return 'numeric'

def synthesize_kernel(plant, config, method=None):
	'''Kernel of plant (the reduced hyperbolic plant for a wave config) on the solver grid plus a report.'''
	grid = config.kernel_grid()
	solver = config.solver
	method = method or _default_method(plant)
	report = {'method': method, 'n': grid.n}

	if isinstance(plant, RdPlant):
		if method == 'explicit':
			kernel = rd_kernel_explicit(plant, grid)
		else:
			kernel = rd_kernel_goursat(plant, grid, solver['tol'], solver['max_iter'], solver['richardson_levels'])
			report.update(iterations=kernel.iterations, last_change=kernel.residual)
		right, left = rd_gains(kernel)
		report.update(pde_residual=_max_abs(rd_kernel_residual(kernel, plant)),
					gain_l1={'right': right.l1_norm(), 'left': left.l1_norm()})
		return kernel, report

	if method == 'explicit':
		kernel = hyp_kernel_explicit(plant, grid)
	else:
		kernel, ledgers = hyp_kernel_series(plant, grid, solver['n_terms'], solver['tol'], solver['richardson_levels'])
		report.update(terms=kernel.terms, ledger={name: {'holds': ledger.holds(), 'table': ledger.to_frame().to_dict(orient='list')}
												for name, ledger in ledgers.items()})
	report['pde_residual'] = {name: _max_abs(R) for name, R in hyp_kernel_residual(kernel, plant).items()}
	report['gain_l1'] = {name: g.l1_norm() for name, g in hyp_gains(kernel).as_dict().items()}
	return kernel, report

def _output_dir(args, config, command):
	if args.output:
		return args.output
	if config is not None and config.output['directory']:
		return config.output['directory']
	return './results/{}'.format(command)

def _kernel_plant(plant):
	return wave_to_hyp(plant)[0] if not isinstance(plant, (RdPlant, HypPlant)) else plant

def cmd_kernel(args):
	config = load_config(args.config, args.plant_class)
	plant = _kernel_plant(build_plant(config))
	out_dir = _output_dir(args, config, 'kernel')

	print('Computing {} kernel on {} nodes...'.format(config.plant_class, config.solver['n']))
	kernel, report = synthesize_kernel(plant, config, args.method)
	report['config'] = config.to_dict()
	written = write_kernel(kernel, out_dir, config.output['formats'], report)
	print('Wrote {} files to {}'.format(len(written), out_dir))
	return 0

def _initial(config, key):
	return profile(config.simulation[key], config.plant['L'])

def cmd_simulate(args):
	config = load_config(args.config)
	plant = build_plant(config)
	sim = config.simulation
	grid = config.simulation_grid()
	out_dir = _output_dir(args, config, 'simulate')
	formats = list(config.output['formats'])
	if args.plot and 'png' not in formats:
		formats.append('png')

	kernel = None
	if args.closed_loop or args.target_check:
		print('Computing kernel...')
		kernel, _ = synthesize_kernel(_kernel_plant(plant), config, args.method)

	print('Simulating {} plant, {} loop, T={}...'.format(config.plant_class, 'closed' if args.closed_loop else 'open', sim['T']))
	if config.plant_class == 'reaction-diffusion':
		gains = rd_gains(kernel) if args.closed_loop else None
		trajectory = simulate_rd(plant, grid, gains, _initial(config, 'initial'), sim['dt'], sim['T'], sim['stride'], sim['closure'])
	elif config.plant_class == 'hyperbolic':
		law = hyp_gains(kernel) if args.closed_loop else None
		trajectory = simulate_hyp(plant, grid, law, _initial(config, 'initial_u'), _initial(config, 'initial_v'), sim['T'],
								sim['dt'], sim['stride'], sim['compatible'])
	else:
		gains = hyp_gains(kernel) if args.closed_loop else None
		trajectory = simulate_wave(plant, grid, gains, _initial(config, 'initial'), _initial(config, 'initial_velocity'), sim['T'],
								sim['stride'], sim['compatible'])

	check = target_check(trajectory, kernel) if args.target_check else None
	if check is not None:
		print('Target check: max relative trace {:.3e}, max dynamics residual {:.3e}'.format(check.max_relative_trace, check.max_dynamics_residual))

	written = write_trajectory(trajectory, out_dir, formats, config, check)
	if 'png' in formats:
		from src.plot_utils import plot_norm_history
		written.append(plot_norm_history(trajectory.norms, out_dir, title=config.plant_class,
										target_norms=check.norms if check is not None else None))
	print('Final L2 norm {:.3e} (initial {:.3e}); wrote {} files to {}'.format(trajectory.norms['l2'].iloc[-1],
			trajectory.norms['l2'].iloc[0], len(written), out_dir))
	return 0

def cmd_compare(args):
	if not 0 < args.delta_min <= args.delta_max:
		raise ConfigurationError('need 0 < delta-min <= delta-max')
	if args.samples < 1:
		raise ConfigurationError('need at least one sample')
	if args.samples > 1 and args.delta_min == args.delta_max:
		raise ConfigurationError('need delta-min < delta-max for more than one sample')
	out_dir = args.output or './results/compare'
	formats = ['csv', 'json'] + (['png'] if args.plot else [])

	deltas = np.linspace(args.delta_min, args.delta_max, args.samples)
	print('Evaluating effort curve at {} values of delta...'.format(args.samples))
	curve = effort_curve(deltas, rtol=args.rtol, workers=args.workers)
	parameters = {'delta_min': args.delta_min, 'delta_max': args.delta_max, 'samples': args.samples, 'rtol': args.rtol}
	write_effort_curve(curve, out_dir, formats, parameters)
	if args.plot:
		from src.plot_utils import plot_effort_curve
		plot_effort_curve(curve.frame, curve.crossovers, out_dir)

	for variant, delta in curve.crossovers.items():
		print('Crossover ({}): {}'.format(variant, 'not found' if delta is None else '{:.6f}'.format(delta)))
	if curve.attempted and all(delta is None for delta in curve.crossovers.values()):
		print('error: no unilateral variant crosses the bilateral norm on [{}, {}]'.format(args.delta_min, args.delta_max), file=sys.stderr)
		return 3
	return 0

def build_parser():
	parser = argparse.ArgumentParser(prog='python3 -m src.cli', description='Bilateral boundary backstepping toolkit')
	parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
	sub = parser.add_subparsers(dest='command', required=True)

	kernel = sub.add_parser('kernel', help='compute a kernel and its gains')
	kernel.add_argument('config', type=str)
	kernel.add_argument('--class', dest='plant_class', choices=['reaction-diffusion', 'hyperbolic', 'wave'], default=None)
	kernel.add_argument('--method', choices=['explicit', 'numeric'], default=None, help='default: explicit when a closed form exists')
	kernel.add_argument('--output', type=str, default=None)
	kernel.set_defaults(func=cmd_kernel)

	simulate = sub.add_parser('simulate', help='simulate the plant open or closed loop')
	simulate.add_argument('config', type=str)
	loop = simulate.add_mutually_exclusive_group()
	loop.add_argument('--closed-loop', dest='closed_loop', action='store_true', default=True)
	loop.add_argument('--open-loop', dest='closed_loop', action='store_false')
	simulate.add_argument('--target-check', action='store_true')
	simulate.add_argument('--method', choices=['explicit', 'numeric'], default=None)
	simulate.add_argument('--output', type=str, default=None)
	simulate.add_argument('--plot', action='store_true')
	simulate.set_defaults(func=cmd_simulate)

	compare = sub.add_parser('compare', help='unilateral vs bilateral control effort')
	compare.add_argument('--delta-min', type=float, default=0.5)
	compare.add_argument('--delta-max', type=float, default=5.0)
	compare.add_argument('--samples', type=int, default=10)
	compare.add_argument('--rtol', type=float, default=1e-8)
	compare.add_argument('--workers', type=int, default=4)
	compare.add_argument('--output', type=str, default=None)
	compare.add_argument('--plot', action='store_true')
	compare.set_defaults(func=cmd_compare)
	return parser

def main(argv=None):
	args = build_parser().parse_args(argv)
	logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format='%(levelname)s %(name)s: %(message)s')
	try:
		return args.func(args)
	except BacksteppingError as exc:
		print('error: {}'.format(exc), file=sys.stderr)
		return exc.exit_code

if __name__ == '__main__':
	sys.exit(main())
