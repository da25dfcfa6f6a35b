import json

import numpy as np
import pytest

from src.kernel.kernel_hyp import HypPlant
from src.kernel.kernel_rd import RdPlant
from src.numerics.grid import HourglassGrid, IntervalGrid

@pytest.fixture
def small_grid():
	return HourglassGrid.build(1.0, 41)

@pytest.fixture
def rd_plant_unstable():
	return RdPlant(1.0, 12.0, L=1.0)

@pytest.fixture
def hyp_plant_coupled():
	#c1 = c4 = 0, c2 = c3 = 1
	return HypPlant(1.0, 0.0, 1.0, 1.0, 0.0, L=1.0)

@pytest.fixture
def first_mode():
	return lambda x: np.sin(np.pi*(x + 1.0)/2.0)

@pytest.fixture
def write_config(tmp_path):
	def write(data, name='config.json'):
		path = tmp_path/name
		path.write_text(json.dumps(data))
		return str(path)
	return write

@pytest.fixture
def sim_grid():
	return IntervalGrid(1.0, 101)
