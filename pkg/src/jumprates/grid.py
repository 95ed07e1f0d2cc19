"""Uniform 1D nodal grids, grid functions, jump initial data and discrete norms.

Cross-resolution comparisons are done by injection on coincident nodes only.
Which nodes coincide is decided by integer arithmetic on interval counts,
never by comparing floating-point coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO

import numpy as np

__all__ = [
    "Grid1D",
    "GridFunction1D",
    "JumpIC",
    "DomainMismatchError",
    "make_jump_function",
    "l1_norm",
    "common_subgrid",
    "coincident_difference",
    "write_grid_function_csv",
]


class DomainMismatchError(ValueError):
    """Two grids that must share a domain do not."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform nodal grid on [x_left, x_right] with node i at x_left + i*h."""

    x_left: float
    x_right: float
    n_points: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_left) and math.isfinite(self.x_right)):
            raise ValueError("grid bounds must be finite")
        if self.x_right <= self.x_left:
            raise ValueError("x_right must exceed x_left")
        if self.n_points < 2:
            raise ValueError("need at least 2 grid points")

    @property
    def h(self) -> float:
        return (self.x_right - self.x_left) / (self.n_points - 1)

    @property
    def n_intervals(self) -> int:
        return self.n_points - 1

    def node(self, i: int) -> float:
        return self.x_left + i * self.h

    def nodes(self) -> np.ndarray:
        # x_left + i*h, not linspace: keeps the node formula identical to node().
        return self.x_left + np.arange(self.n_points) * self.h


@dataclass(frozen=True)
class GridFunction1D:
    """Nodal samples of a solution on a Grid1D at a fixed time.

    The value array is copied and frozen at construction; instances are
    immutable and safe to share across threads or processes.
    """

    grid: Grid1D
    values: np.ndarray
    time: float

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.shape[0] != self.grid.n_points:
            raise ValueError(
                f"values length {vals.shape} does not match grid "
                f"with {self.grid.n_points} points"
            )
        if not np.isfinite(vals).all():
            raise ValueError("grid function values must all be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class JumpIC:
    """Two-state jump initial condition; the left state is taken at the jump node."""

    u_left: float
    u_right: float
    jump_location: float = 0.0

    def __post_init__(self) -> None:
        if self.u_left == self.u_right:
            raise ValueError("degenerate jump: u_left must differ from u_right")

    @property
    def magnitude(self) -> float:
        return abs(self.u_right - self.u_left)


def make_jump_function(grid: Grid1D, ic: JumpIC) -> GridFunction1D:
    """Sample a jump IC on a grid at t = 0.

    Nodes at or left of the jump get u_left, nodes right of it u_right. The
    jump node is found by rounding the continuous index, so a node that lands
    on the jump location up to roundoff (the standard case: odd point count on
    a symmetric domain, jump at 0) is classified exactly.
    """
    if not (grid.x_left <= ic.jump_location <= grid.x_right):
        raise ValueError("jump location lies outside the grid domain")
    t = (ic.jump_location - grid.x_left) / grid.h
    jump_index = math.floor(t + 0.5)
    jump_index = min(max(jump_index, 0), grid.n_points - 1)
    values = np.where(
        np.arange(grid.n_points) <= jump_index, ic.u_left, ic.u_right
    ).astype(float)
    return GridFunction1D(grid, values, time=0.0)


def l1_norm(f: GridFunction1D) -> float:
    """Discrete L1 norm: h * sum(|values|), uniform weight at every node."""
    return f.grid.h * float(np.abs(f.values).sum())


def common_subgrid(grid_a: Grid1D, grid_b: Grid1D) -> tuple[Grid1D, int, int]:
    """Coarsest grid whose nodes appear in both grids, plus index strides.

    Node i of grid_a coincides with node j of grid_b iff i/Ma == j/Mb as exact
    rationals (Ma, Mb interval counts), i.e. i is a multiple of Ma/gcd(Ma, Mb).
    Returns (subgrid, stride_a, stride_b); subgrid has gcd(Ma, Mb)+1 points.
    Both endpoints always coincide, so the subgrid is never empty.
    """
    if grid_a.x_left != grid_b.x_left or grid_a.x_right != grid_b.x_right:
        raise DomainMismatchError(
            f"grids cover [{grid_a.x_left}, {grid_a.x_right}] and "
            f"[{grid_b.x_left}, {grid_b.x_right}]"
        )
    g = math.gcd(grid_a.n_intervals, grid_b.n_intervals)
    sub = Grid1D(grid_a.x_left, grid_a.x_right, g + 1)
    return sub, grid_a.n_intervals // g, grid_b.n_intervals // g


def coincident_difference(
    f_coarse: GridFunction1D, f_fine: GridFunction1D
) -> GridFunction1D:
    """Pointwise difference f_coarse - f_fine on the nodes both grids share.

    Injection on coincident nodes, deliberately not interpolation: transfer
    operators would add O(h) artifacts of their own near a discontinuity,
    polluting exactly the differences whose norms feed the rate estimate.
    """
    sub, stride_a, stride_b = common_subgrid(f_coarse.grid, f_fine.grid)
    diff = f_coarse.values[::stride_a] - f_fine.values[::stride_b]
    return GridFunction1D(sub, diff, time=f_coarse.time)


def write_grid_function_csv(f: GridFunction1D, stream: IO[str]) -> None:
    """Serialize a snapshot as `x,u` rows at full double precision."""
    stream.write("x,u\n")
    x = f.grid.nodes()
    for xi, ui in zip(x, f.values):
        stream.write(f"{xi:.17g},{ui:.17g}\n")
