'''
Description: Writers for kernel, trajectory and effort-curve artefacts. CSV floats carry 17 significant digits
and JSON keys are sorted, so the same run always produces byte-identical files.
'''

import json
import math
import os

import numpy as np
import pandas as pd

FLOAT_FORMAT = '%.17g'

def _clean(value):
	'''numpy scalars and arrays to plain JSON values, NaN and infinities to null.'''
	if isinstance(value, dict):
		return {str(k): _clean(v) for k, v in value.items()}
	if isinstance(value, (list, tuple)):
		return [_clean(v) for v in value]
	if isinstance(value, np.ndarray):
		return _clean(value.tolist())
	if isinstance(value, (np.bool_, bool)):
		return bool(value)
	if isinstance(value, (np.integer, int)):
		return int(value)
	if isinstance(value, (np.floating, float)):
		value = float(value)
		return value if math.isfinite(value) else None
	return value

def write_json(data, path):
	with open(path, 'w') as f:
		json.dump(_clean(data), f, sort_keys=True, indent=2, allow_nan=False)
		f.write('\n')

def write_csv(frame, path):
	frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)

def kernel_frame(values, grid):
	'''Long table x, xi, K over the nodes of the hourglass domain, rows ordered by x then xi.'''
	X, XI = grid.mesh
	inside = grid.mask
	return pd.DataFrame({'x': X[inside], 'xi': XI[inside], 'K': values[inside]})

def write_kernel(kernel, directory, formats, report=None):
	'''One file pair per component; the report (iterations, residuals, ledgers) goes to kernel_report.json.'''
	os.makedirs(directory, exist_ok=True)
	components = kernel.components if hasattr(kernel, 'components') else {'K': kernel.values}
	grid = kernel.grid
	written = []
	for name, values in components.items():
		stem = os.path.join(directory, 'kernel_{}'.format(name))
		if 'csv' in formats:
			write_csv(kernel_frame(values, grid), stem + '.csv')
			written.append(stem + '.csv')
		if 'json' in formats:
			write_json({'component': name, 'provenance': kernel.provenance, 'L': grid.base.L, 'n': grid.n,
						'h': grid.base.h, 'values': values}, stem + '.json')
			written.append(stem + '.json')
	if report is not None and 'json' in formats:
		path = os.path.join(directory, 'kernel_report.json')
		write_json(report, path)
		written.append(path)
	return written

def trajectory_summary(trajectory, config=None, target=None):
	norms = trajectory.norms
	initial, final = float(norms['l2'].iloc[0]), float(norms['l2'].iloc[-1])
	summary = {
		'kind': trajectory.kind,
		'closed_loop': trajectory.closed_loop,
		'dt': trajectory.dt,
		'stride': trajectory.stride,
		'steps': len(trajectory.times),
		'n': trajectory.grid.n,
		'norms': {'t': norms['t'].values, 'l2': norms['l2'].values, 'sup': norms['sup'].values},
		'actuators': {name: values for name, values in trajectory.actuators.items()},
		'initial_l2': initial,
		'final_l2': final,
		'behaviour': 'decay' if final < initial else 'growth' if final > initial else 'steady',
		'consistent': trajectory.check(),
	}
	if 'energy' in trajectory.extras:
		summary['energy'] = trajectory.extras['energy']
		summary['max_reconstruction_gap'] = float(np.max(trajectory.extras['gap']))
	if config is not None:
		summary['config'] = config.to_dict()
	if target is not None:
		summary['target_check'] = dict(target.summary(), traces=target.traces.drop(columns='t').to_dict(orient='list'),
										l2=target.norms['l2'].values)
	return summary

def write_trajectory(trajectory, directory, formats, config=None, target=None):
	os.makedirs(directory, exist_ok=True)
	written = []
	if 'csv' in formats:
		path = os.path.join(directory, 'trajectory.csv')
		write_csv(trajectory.to_frame(), path)
		written.append(path)
	if 'json' in formats:
		path = os.path.join(directory, 'summary.json')
		write_json(trajectory_summary(trajectory, config, target), path)
		written.append(path)
	return written

def write_effort_curve(curve, directory, formats, parameters=None):
	os.makedirs(directory, exist_ok=True)
	written = []
	if 'csv' in formats:
		path = os.path.join(directory, 'effort_curve.csv')
		curve.to_csv(path)
		written.append(path)
	if 'json' in formats:
		path = os.path.join(directory, 'effort_curve.json')
		data = dict(curve.to_dict(), rows=curve.frame.to_dict(orient='list'))
		if parameters is not None:
			data['parameters'] = parameters
		write_json(data, path)
		written.append(path)
	return written
