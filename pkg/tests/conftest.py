"""Shared test helpers."""

import math
from fractions import Fraction

import numpy as np

from jumprates.grid import Grid1D, GridFunction1D


def synthetic_triple(p, r, base_intervals=128, amplitude=1.0):
    """Snapshots u_h = u_e + c(x) * h^p on grids refined by ratio r.

    c is a smooth bump vanishing (with its derivative) at the endpoints, so
    the nodal rectangle norm of c agrees across subgrids to spectral accuracy
    and the smooth-data cancellation argument holds to tight tolerance.
    """
    m1 = Fraction(base_intervals)
    counts = [m1, m1 / r, m1 / r / r]
    snaps = []
    for m in counts:
        assert m.denominator == 1
        n = int(m) + 1
        g = Grid1D(-math.pi, math.pi, n)
        x = g.nodes()
        c = 0.5 * (1.0 + np.cos(x))
        u = amplitude * (np.sin(x) + c * g.h**p)
        snaps.append(GridFunction1D(g, u, time=2.0))
    return snaps
