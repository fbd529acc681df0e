"""Closed-form smooth test fields with analytic divergence."""

import numpy as np

from brickstress.interpolation import StressField, VectorField

COEF = np.array([[1.0, 0.5, -0.3], [0.5, 2.0, 0.25], [-0.3, 0.25, -1.5]])


def _g(x):
    return np.sin(2 * x[:, 0] + x[:, 1]) * np.cos(x[:, 2]) + np.exp(x[:, 0] * x[:, 2])


def _grad_g(x):
    s, c = np.sin(2 * x[:, 0] + x[:, 1]), np.cos(2 * x[:, 0] + x[:, 1])
    e = np.exp(x[:, 0] * x[:, 2])
    return np.stack([2 * c * np.cos(x[:, 2]) + x[:, 2] * e, c * np.cos(x[:, 2]), -s * np.sin(x[:, 2]) + x[:, 0] * e], axis=1)


def smooth_stress() -> StressField:
    """``tau = g(x) C`` with a fixed symmetric ``C``; ``div tau = C grad g``."""
    return StressField(lambda x: _g(x)[:, None, None] * COEF, lambda x: _grad_g(x) @ COEF.T)


def smooth_vector() -> VectorField:
    return VectorField(lambda x: np.stack([np.cos(3 * x[:, 0]) * x[:, 1], np.exp(x[:, 2]), np.sin(x.sum(axis=1))], axis=1))


def rates(errors):
    e = np.asarray(errors)
    return np.log2(e[:-1] / e[1:])
