'''
Description: Run configuration. One JSON file with the sections plant, solver, simulation and output; unknown
keys are rejected and defaults are filled in so that the resolved configuration reproduces a run on its own.
'''

import copy
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from src.errors import ConfigurationError
from src.kernel.kernel_hyp import HypPlant
from src.kernel.kernel_rd import RdPlant
from src.kernel.wave_bridge import WavePlant
from src.numerics.grid import CoefficientProfile, HourglassGrid, IntervalGrid

logger = logging.getLogger(__name__)

PLANT_CLASSES = ('reaction-diffusion', 'hyperbolic', 'wave')
PLANT_KEYS = {
	'reaction-diffusion': {'required': ('epsilon', 'lambda'), 'optional': {'L': 1.0}},
	'hyperbolic': {'required': ('epsilon', 'c1', 'c2', 'c3', 'c4'), 'optional': {'L': 1.0}},
	'wave': {'required': ('lambda', 'alpha'), 'optional': {'L': 1.0, 'beta': 0.0}},
}
COEFFICIENT_KEYS = ('lambda', 'c1', 'c2', 'c3', 'c4', 'alpha', 'beta')

SOLVER_DEFAULTS = {'n': 201, 'tol': 1e-10, 'max_iter': 200, 'n_terms': 100, 'richardson_levels': 2}
SIMULATION_DEFAULTS = {'n': 101, 'dt': None, 'T': 1.0, 'stride': 1, 'initial': None, 'initial_u': None,
						'initial_v': None, 'initial_velocity': None, 'closure': 'exact', 'compatible': None}
OUTPUT_DEFAULTS = {'directory': None, 'formats': ['csv', 'json']}
FORMATS = ('csv', 'json', 'png')

@dataclass(frozen=True)
class RunConfig:
	plant: dict
	solver: dict
	simulation: dict
	output: dict
	base_dir: Path = Path('.')

	@property
	def plant_class(self):
		return self.plant['class']

	def to_dict(self):
		return copy.deepcopy({'plant': self.plant, 'solver': self.solver, 'simulation': self.simulation, 'output': self.output})

	def kernel_grid(self):
		return HourglassGrid.build(self.plant['L'], self.solver['n'])

	def simulation_grid(self):
		return IntervalGrid(self.plant['L'], self.simulation['n'])

def _check_keys(section, values, allowed):
	if not isinstance(values, dict):
		raise ConfigurationError('section {} must be an object'.format(section))
	unknown = sorted(set(values) - set(allowed))
	if unknown:
		raise ConfigurationError('unknown key(s) in {}: {}'.format(section, ', '.join(unknown)))

def _is_number(value):
	#JSON true/false load as bool, which is an int subclass
	return isinstance(value, (int, float)) and not isinstance(value, bool)

def _is_integer(value):
	return isinstance(value, int) and not isinstance(value, bool)

def _with_defaults(section, values, defaults):
	_check_keys(section, values, defaults)
	resolved = dict(defaults)
	resolved.update(values)
	return resolved

def _resolve_file(entry, base_dir):
	'''{"file": path} with the path made absolute against the config directory.'''
	if set(entry) != {'file'}:
		raise ConfigurationError('tabulated profiles are given as {{"file": <csv>}}, got {}'.format(entry))
	path = Path(entry['file'])
	if not path.is_absolute():
		path = (base_dir/path).resolve()
	if not path.exists():
		raise ConfigurationError('profile table {} does not exist'.format(path))
	return {'file': str(path)}

def _resolve_profile(name, entry, base_dir):
	if isinstance(entry, bool) or not isinstance(entry, (int, float, str, dict)):
		raise ConfigurationError('{} must be a number, an expression or {{"file": <csv>}}'.format(name))
	if isinstance(entry, dict):
		return _resolve_file(entry, base_dir)
	if isinstance(entry, str):
		#parse now so a bad expression fails at load time
		CoefficientProfile.expression(entry)
	return entry

def profile(entry, L=None):
	'''CoefficientProfile for a resolved config value; tabulated tables must cover [-L, L].'''
	if entry is None:
		return None
	if isinstance(entry, dict):
		result = CoefficientProfile.from_csv(entry['file'])
	else:
		result = CoefficientProfile.coerce(entry)
	if L is not None and not result.covers(L):
		raise ConfigurationError('profile table {} does not cover [-{}, {}]'.format(entry, L, L))
	return result

def _resolve_plant(values, base_dir, plant_class):
	if not isinstance(values, dict):
		raise ConfigurationError('section plant must be an object')
	values = dict(values)
	declared = values.get('class', plant_class)
	if plant_class is not None and declared != plant_class:
		raise ConfigurationError('config declares plant class {!r} but {!r} was requested'.format(declared, plant_class))
	if declared not in PLANT_CLASSES:
		raise ConfigurationError('plant class must be one of {}, got {!r}'.format(', '.join(PLANT_CLASSES), declared))
	values['class'] = declared

	keys = PLANT_KEYS[declared]
	_check_keys('plant', values, ('class',) + keys['required'] + tuple(keys['optional']))
	missing = [k for k in keys['required'] if k not in values]
	if missing:
		raise ConfigurationError('{} plant needs {}'.format(declared, ', '.join(missing)))

	resolved = dict(keys['optional'])
	resolved.update(values)
	for key in COEFFICIENT_KEYS:
		if key in resolved:
			resolved[key] = _resolve_profile(key, resolved[key], base_dir)

	if not _is_number(resolved['L']) or not resolved['L'] > 0:
		raise ConfigurationError('L must be a positive number')
	if 'epsilon' in resolved and (not _is_number(resolved['epsilon']) or not resolved['epsilon'] > 0):
		raise ConfigurationError('epsilon must be a positive number')
	for key in COEFFICIENT_KEYS:
		if key in resolved:
			profile(resolved[key], resolved['L'])
	return resolved

def _check_grid_size(section, n):
	if not _is_integer(n) or n < 3 or n % 2 == 0:
		raise ConfigurationError('{}.n must be an odd integer >= 3, got {}'.format(section, n))

def _validate_solver(solver):
	_check_grid_size('solver', solver['n'])
	if not _is_number(solver['tol']) or not solver['tol'] > 0:
		raise ConfigurationError('solver.tol must be positive')
	for key, low in (('max_iter', 1), ('n_terms', 1), ('richardson_levels', 0)):
		if not _is_integer(solver[key]) or solver[key] < low:
			raise ConfigurationError('solver.{} must be an integer >= {}'.format(key, low))

def _validate_simulation(simulation, plant):
	_check_grid_size('simulation', simulation['n'])
	if not _is_number(simulation['T']) or not simulation['T'] >= 0:
		raise ConfigurationError('simulation.T must be non-negative')
	if not _is_integer(simulation['stride']) or simulation['stride'] < 1:
		raise ConfigurationError('simulation.stride must be an integer >= 1')
	if simulation['closure'] not in ('exact', 'two-pass'):
		raise ConfigurationError('simulation.closure must be exact or two-pass')
	if simulation['compatible'] is not None and not isinstance(simulation['compatible'], bool):
		raise ConfigurationError('simulation.compatible must be true, false or null')

	dt = simulation['dt']
	if dt is not None:
		if not _is_number(dt) or not dt > 0:
			raise ConfigurationError('simulation.dt must be positive')
		if plant['class'] != 'reaction-diffusion':
			#characteristic schemes fix dt = h/eps
			speed = plant.get('epsilon', 1.0)
			expected = 2.0*plant['L']/(simulation['n'] - 1)/speed
			if abs(dt - expected) > 1e-12*expected:
				raise ConfigurationError('simulation.dt must equal h/eps = {:.17g} for the {} plant'.format(expected, plant['class']))

def _validate_output(output):
	formats = output['formats']
	if not isinstance(formats, list) or not set(formats) <= set(FORMATS):
		raise ConfigurationError('output.formats must be a list drawn from {}'.format(', '.join(FORMATS)))

def parse_config(data, base_dir='.', plant_class=None):
	'''Validate a config mapping and fill in defaults.'''
	base_dir = Path(base_dir)
	_check_keys('config', data, ('plant', 'solver', 'simulation', 'output'))
	if 'plant' not in data:
		raise ConfigurationError('config needs a plant section')

	plant = _resolve_plant(data['plant'], base_dir, plant_class)
	solver = _with_defaults('solver', data.get('solver', {}), SOLVER_DEFAULTS)
	simulation = _with_defaults('simulation', data.get('simulation', {}), SIMULATION_DEFAULTS)
	output = _with_defaults('output', data.get('output', {}), OUTPUT_DEFAULTS)
	for key in ('initial', 'initial_u', 'initial_v', 'initial_velocity'):
		if simulation[key] is not None:
			simulation[key] = _resolve_profile('simulation.' + key, simulation[key], base_dir)

	_validate_solver(solver)
	_validate_simulation(simulation, plant)
	_validate_output(output)
	return RunConfig(plant, solver, simulation, output, base_dir)

def load_config(path, plant_class=None):
	path = Path(path)
	try:
		with open(path) as f:
			data = json.load(f)
	except OSError as exc:
		raise ConfigurationError('cannot read config {}: {}'.format(path, exc)) from exc
	except json.JSONDecodeError as exc:
		raise ConfigurationError('config {} is not valid JSON: {}'.format(path, exc)) from exc
	logger.debug('loaded config %s', path)
	return parse_config(data, path.parent, plant_class)

def build_plant(config):
	p = config.plant
	L = p['L']
	if p['class'] == 'reaction-diffusion':
		return RdPlant(float(p['epsilon']), profile(p['lambda'], L), L=float(L))
	if p['class'] == 'hyperbolic':
		return HypPlant(float(p['epsilon']), *(profile(p[k], L) for k in ('c1', 'c2', 'c3', 'c4')), L=float(L))
	return WavePlant(profile(p['lambda'], L), profile(p['alpha'], L), L=float(L), beta=profile(p['beta'], L))
