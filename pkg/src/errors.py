'''
Description: Exception hierarchy shared by the kernel solvers, simulators and the command line driver.
Each class carries the process exit code the CLI maps it to.
'''

class BacksteppingError(Exception):
	exit_code = 1

class DomainError(BacksteppingError, ValueError):
	exit_code = 2

class ConfigurationError(BacksteppingError, ValueError):
	exit_code = 2

class UnsupportedError(BacksteppingError):
	exit_code = 2

class ConvergenceError(BacksteppingError):
	exit_code = 3

	def __init__(self, message, residual=None, iterations=None):
		super().__init__(message)
		self.residual = residual
		self.iterations = iterations

class KernelConsistencyError(BacksteppingError):
	exit_code = 3

class NumericError(BacksteppingError, ArithmeticError):
	exit_code = 3

class CrossoverNotFoundError(BacksteppingError):
	exit_code = 3

class DivergenceError(BacksteppingError):
	exit_code = 4

	def __init__(self, message, step=None):
		super().__init__(message)
		self.step = step
