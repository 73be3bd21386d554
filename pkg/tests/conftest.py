"""Shared numerical helpers for the test suite."""

import math

import numpy as np
import pytest

from vbesharp import AltSplineParams, altspline_momfun, extreme_momfun, power_momfun


def fd_deriv(fn, x, h=None):
    """Central finite difference of fn at x."""
    h = h if h is not None else 1e-6 * max(abs(x), 1.0)
    return (float(fn(x + h)) - float(fn(x - h))) / (2.0 * h)


def kink_free_log_grid(lo=1e-3, hi=1e3, n=61, avoid=(), pad=1e-4):
    """Log-spaced grid with points within relative `pad` of `avoid` dropped."""
    g = np.geomspace(lo, hi, n) * 1.0000137  # shift off round values
    for a in avoid:
        g = g[np.abs(g - a) > pad * max(a, 1.0)]
    return g


def family_pool():
    """One representative per implemented family, with its kink locations."""
    return [
        (extreme_momfun(1.0), (1.0,)),
        (extreme_momfun(math.inf), ()),
        (power_momfun(1.3), ()),
        (power_momfun(1.7), ()),
        (power_momfun(2.0), ()),
        (altspline_momfun(AltSplineParams(0.1)),
         tuple(altspline_momfun(AltSplineParams(0.1)).param.breakpoints[1:9])),
    ]


@pytest.fixture
def pool():
    return family_pool()
