'''
Description: Small arithmetic grammar for closed-form coefficient profiles such as "1 + x^2" or "2*exp(-x)*sin(pi*x)".
Anything richer has to be supplied as a tabulated profile.
'''

import numpy as np
import pyparsing as pp

from src.errors import ConfigurationError

FUNCTIONS = {'sin': np.sin, 'cos': np.cos, 'exp': np.exp}
CONSTANTS = {'pi': np.pi, 'e': np.e}

def _build_grammar():
	expr = pp.Forward()

	number = pp.Regex(r'(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?').set_parse_action(lambda t: float(t[0]))
	variable = pp.MatchFirst([pp.Keyword(name) for name in ['x'] + list(CONSTANTS)])
	function = pp.MatchFirst([pp.Keyword(name) for name in FUNCTIONS])
	call = pp.Group(function + pp.Suppress('(') + expr + pp.Suppress(')'))
	operand = call | number | variable

	expr <<= pp.infix_notation(operand, [
		(pp.one_of('** ^'), 2, pp.OpAssoc.RIGHT),
		(pp.one_of('+ -'), 1, pp.OpAssoc.RIGHT),
		(pp.one_of('* /'), 2, pp.OpAssoc.LEFT),
		(pp.one_of('+ -'), 2, pp.OpAssoc.LEFT),
	])
	return expr

_GRAMMAR = _build_grammar()

def _evaluate(node, x):
	if isinstance(node, float):
		return node
	if isinstance(node, str):
		return x if node == 'x' else CONSTANTS[node]

	tokens = list(node)
	if len(tokens) == 1:
		return _evaluate(tokens[0], x)
	if isinstance(tokens[0], str) and tokens[0] in FUNCTIONS:
		return FUNCTIONS[tokens[0]](_evaluate(tokens[1], x))
	if len(tokens) == 2:
		#unary sign
		value = _evaluate(tokens[1], x)
		return -value if tokens[0] == '-' else value

	operators = tokens[1::2]
	if operators[0] in ('^', '**'):
		value = _evaluate(tokens[-1], x)
		for operand in reversed(tokens[:-1:2]):
			value = np.power(_evaluate(operand, x), value)
		return value

	value = _evaluate(tokens[0], x)
	for op, operand in zip(operators, tokens[2::2]):
		rhs = _evaluate(operand, x)
		if op == '+':
			value = value + rhs
		elif op == '-':
			value = value - rhs
		elif op == '*':
			value = value*rhs
		else:
			value = value/rhs
	return value

def compile_expression(text):
	'''
	Parse text once and return a vectorized callable x -> values with the shape of x.
	'''
	try:
		tree = _GRAMMAR.parse_string(text, parse_all=True)[0]
	except pp.ParseBaseException as exc:
		raise ConfigurationError('cannot parse coefficient expression {!r}: {}'.format(text, exc))

	def sampler(x):
		x = np.asarray(x, dtype=float)
		with np.errstate(all='ignore'):
			values = np.broadcast_to(_evaluate(tree, x), x.shape).astype(float)
		return values

	return sampler
