"""Shared fixtures and test utilities."""

import numpy as np
import pytest

from degenlag.symbolic import Chart, add, con, coord, div, func, mul, neg, power, sub

# ----------------------------------------------------------------------
# random expression trees for property-style checks


def random_polynomial(rng, names, depth=4):
    """A random polynomial tree: safe to evaluate and differentiate anywhere."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return con(int(rng.integers(-4, 5)))
        return coord(str(rng.choice(names)))
    pick = rng.random()
    if pick < 0.35:
        return add(random_polynomial(rng, names, depth - 1), random_polynomial(rng, names, depth - 1))
    if pick < 0.6:
        return sub(random_polynomial(rng, names, depth - 1), random_polynomial(rng, names, depth - 1))
    if pick < 0.85:
        return mul(random_polynomial(rng, names, depth - 1), random_polynomial(rng, names, depth - 1))
    if pick < 0.95:
        return power(random_polynomial(rng, names, depth - 1), int(rng.integers(2, 4)))
    return neg(random_polynomial(rng, names, depth - 1))


def random_tree(rng, names, depth=4):
    """A random tree over the full node set, including partial functions."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.35:
            return con(int(rng.integers(-4, 5)))
        return coord(str(rng.choice(names)))
    pick = rng.random()
    if pick < 0.25:
        return add(random_tree(rng, names, depth - 1), random_tree(rng, names, depth - 1))
    if pick < 0.45:
        return sub(random_tree(rng, names, depth - 1), random_tree(rng, names, depth - 1))
    if pick < 0.65:
        return mul(random_tree(rng, names, depth - 1), random_tree(rng, names, depth - 1))
    if pick < 0.75:
        return div(random_tree(rng, names, depth - 1), random_tree(rng, names, depth - 1))
    if pick < 0.82:
        return power(random_tree(rng, names, depth - 1), int(rng.integers(-2, 4)))
    if pick < 0.88:
        return neg(random_tree(rng, names, depth - 1))
    name = str(rng.choice(["sin", "cos", "exp", "log", "sqrt"]))
    return func(name, random_tree(rng, names, depth - 1))


def finite_difference(f, point, name, h=1e-6):
    """Central-difference derivative of a point-function, the independent
    oracle for symbolic differentiation."""
    up = dict(point)
    dn = dict(point)
    up[name] = point[name] + h
    dn[name] = point[name] - h
    return (f(up) - f(dn)) / (2.0 * h)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


@pytest.fixture
def tangent2():
    return Chart.tangent(2)
