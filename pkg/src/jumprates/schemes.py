"""Explicit single-step advection discretizations and their time integration.

Five schemes: first-, second-, fourth- and sixth-order upwind-biased linear
stencils, plus a second-order MUSCL scheme with MinMod-limited slopes. The
linear stencil coefficients are stored as integer polynomials in the CFL
number and evaluated per run, so there is a single transcription of each
coefficient table that exact-arithmetic tests can check symbolically.

All update rules advance nodal values one time step of size dt = lam*h/a.
Physical boundaries use zero-gradient ghost replication; the experiments are
arranged so no wave reaches a boundary, making the detail immaterial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.ndimage import correlate1d

from .grid import Grid1D, GridFunction1D

__all__ = [
    "SCHEME_KINDS",
    "SCHEME_ORDER",
    "FOOTPRINTS",
    "SchemeSpec",
    "StencilFootprint",
    "StabilityError",
    "minmod",
    "update_weights",
    "stencil_polynomials",
    "step",
    "integrate_to",
    "step_count",
    "smooth_convergence_order",
]

SCHEME_KINDS = ("upwind1", "godunov2", "upwind4", "upwind6", "minmod")

# Formal order of accuracy on smooth data.
SCHEME_ORDER = {
    "upwind1": 1,
    "godunov2": 2,
    "upwind4": 4,
    "upwind6": 6,
    "minmod": 2,
}


class StabilityError(RuntimeError):
    """Time integration produced non-finite values."""


@dataclass(frozen=True)
class StencilFootprint:
    """How many neighbours an update reaches to the left and right."""

    left_width: int
    right_width: int

    @property
    def width(self) -> int:
        return self.left_width + self.right_width + 1


FOOTPRINTS = {
    "upwind1": StencilFootprint(1, 0),
    "godunov2": StencilFootprint(2, 1),
    "upwind4": StencilFootprint(3, 2),
    "upwind6": StencilFootprint(4, 3),
    "minmod": StencilFootprint(2, 1),
}


@dataclass(frozen=True)
class SchemeSpec:
    """A discretization choice: scheme kind, CFL number and advection speed."""

    kind: str
    lam: float = 0.6
    advection_speed: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; choose from {SCHEME_KINDS}")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"CFL number must lie in (0, 1], got {self.lam}")
        if not self.advection_speed > 0:
            raise ValueError("advection speed must be positive")

    @property
    def order(self) -> int:
        return SCHEME_ORDER[self.kind]

    @property
    def footprint(self) -> StencilFootprint:
        return FOOTPRINTS[self.kind]


# Update coefficients of the linear schemes, as integer polynomials in lam.
# The full update is u_new[i] = u[i] + (lam/denom) * sum_s poly_s(lam) * u[i+s],
# with rows keyed by offset s. The second-order entries are the expanded form
# of the unlimited Godunov update
#   u_i - lam*[(u_i + (1-lam)/4*(u_{i+1}-u_{i-1})) - (u_{i-1} + (1-lam)/4*(u_i-u_{i-2}))].
_STENCIL_POLYS: dict[str, tuple[int, dict[int, tuple[int, ...]]]] = {
    "upwind1": (1, {-1: (1,), 0: (-1,)}),
    "godunov2": (
        4,
        {
            -2: (-1, 1),
            -1: (5, -1),
            0: (-3, -1),
            1: (-1, 1),
        },
    ),
    "upwind4": (
        144,
        {
            -3: (5, 0, -8, 3),
            -2: (-37, -6, 52, -9),
            -1: (146, 96, -104, 6),
            0: (-50, -180, 80, 6),
            1: (-71, 96, -16, -9),
            2: (7, -6, -4, 3),
        },
    ),
    "upwind6": (
        4320,
        {
            -4: (-31, 0, 43, 0, -15, 3),
            -3: (289, 24, -391, -30, 123, -15),
            -2: (-1299, -324, 1623, 360, -387, 27),
            -1: (4325, 3240, -2675, -1170, 615, -15),
            0: (-1085, -5880, 1505, 1680, -525, -15),
            1: (-2589, 3240, 267, -1170, 225, 27),
            2: (431, -324, -419, 360, -33, -15),
            3: (-41, 24, 47, -30, -3, 3),
        },
    ),
}


def stencil_polynomials(kind: str) -> tuple[int, dict[int, tuple[int, ...]]]:
    """Integer polynomial table (denominator, {offset: coefficients}) for a linear scheme."""
    if kind not in _STENCIL_POLYS:
        raise ValueError(f"{kind!r} has no linear stencil table")
    return _STENCIL_POLYS[kind]


def update_weights(kind: str, lam: float) -> np.ndarray:
    """Full one-step update weights for a linear scheme, ordered by offset.

    Entry k corresponds to offset s = k - left_width and includes the identity
    contribution at s = 0, so one correlation application advances a field.
    """
    denom, polys = stencil_polynomials(kind)
    fp = FOOTPRINTS[kind]
    w = np.zeros(fp.width)
    for s, coeffs in polys.items():
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * lam + c
        w[s + fp.left_width] = lam / denom * acc
    w[fp.left_width] += 1.0
    return w


def minmod(b: float, c: float) -> float:
    """Smaller-magnitude argument when signs agree, zero otherwise."""
    if b * c <= 0:
        return 0.0
    return b if abs(b) < abs(c) else c


def _minmod_vec(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.where(b * c > 0, np.where(np.abs(b) < np.abs(c), b, c), 0.0)


def _advance_linear(values: np.ndarray, kind: str, lam: float) -> np.ndarray:
    fp = FOOTPRINTS[kind]
    w = update_weights(kind, lam)
    origin = fp.width // 2 - fp.left_width
    # mode="nearest" replicates the edge value into the ghosts: zero gradient.
    return correlate1d(values, w, mode="nearest", origin=origin)


def _advance_minmod(values: np.ndarray, lam: float) -> np.ndarray:
    n = values.shape[0]
    padded = np.empty(n + 3)
    padded[2:-1] = values
    padded[0] = padded[1] = values[0]
    padded[-1] = values[-1]
    d = padded[1:] - padded[:-1]          # d[k] = u_{k-1} - u_{k-2}
    alpha = _minmod_vec(d[1:], d[:-1])    # alpha[m] = limited slope at node m-1
    return (
        values
        - lam * d[1 : n + 1]
        - 0.5 * lam * (1.0 - lam) * (alpha[1:] - alpha[:-1])
    )


def _advance(values: np.ndarray, kind: str, lam: float) -> np.ndarray:
    if kind == "minmod":
        return _advance_minmod(values, lam)
    return _advance_linear(values, kind, lam)


def step(u: GridFunction1D, spec: SchemeSpec) -> GridFunction1D:
    """One explicit step of size dt = lam*h/a."""
    fp = spec.footprint
    if u.grid.n_points < fp.width:
        raise ValueError(
            f"grid with {u.grid.n_points} points is smaller than the "
            f"{fp.width}-point footprint of {spec.kind}"
        )
    new_values = _advance(u.values, spec.kind, spec.lam)
    dt = spec.lam * u.grid.h / spec.advection_speed
    return GridFunction1D(u.grid, new_values, time=u.time + dt)


def step_count(t_span: float, dt_full: float) -> tuple[int, float]:
    """Number of full steps fitting in t_span, and the leftover time."""
    n_full = int(math.floor(t_span / dt_full))
    remainder = t_span - n_full * dt_full
    if remainder <= 1e-12 * dt_full:
        remainder = 0.0
    return n_full, remainder


_NAN_CHECK_INTERVAL = 256


def _integrate_values(
    values: np.ndarray,
    kind: str,
    lam: float,
    a: float,
    h: float,
    t_span: float,
) -> np.ndarray:
    """Advance raw nodal values through t_span, shortening the last step."""
    dt_full = lam * h / a
    n_full, remainder = step_count(t_span, dt_full)
    cur = np.array(values, dtype=float)
    if kind == "minmod":
        for k in range(n_full):
            cur = _advance_minmod(cur, lam)
            if k % _NAN_CHECK_INTERVAL == 0 and not np.isfinite(cur).all():
                raise StabilityError(
                    f"non-finite values after step {k + 1} of {kind} (lam={lam})"
                )
    else:
        fp = FOOTPRINTS[kind]
        w = update_weights(kind, lam)
        origin = fp.width // 2 - fp.left_width
        buf = np.empty_like(cur)
        for k in range(n_full):
            correlate1d(cur, w, mode="nearest", origin=origin, output=buf)
            cur, buf = buf, cur
            if k % _NAN_CHECK_INTERVAL == 0 and not np.isfinite(cur).all():
                raise StabilityError(
                    f"non-finite values after step {k + 1} of {kind} (lam={lam})"
                )
    if remainder > 0.0:
        cur = _advance(cur, kind, a * remainder / h)
    if not np.isfinite(cur).all():
        raise StabilityError(f"non-finite values at end of {kind} run (lam={lam})")
    return cur


def integrate_to(u0: GridFunction1D, spec: SchemeSpec, t_final: float) -> GridFunction1D:
    """Advance a snapshot to t_final exactly.

    Full steps of size lam*h/a are taken while they fit; the last step runs at
    a reduced CFL number so the final time is hit exactly, which keeps
    cross-resolution snapshots comparable at a common time.
    """
    t_span = t_final - u0.time
    if t_span < 0:
        raise ValueError(f"t_final={t_final} precedes snapshot time {u0.time}")
    if t_span == 0:
        return u0
    fp = spec.footprint
    if u0.grid.n_points < fp.width:
        raise ValueError(
            f"grid with {u0.grid.n_points} points is smaller than the "
            f"{fp.width}-point footprint of {spec.kind}"
        )
    values = _integrate_values(
        u0.values, spec.kind, spec.lam, spec.advection_speed, u0.grid.h, t_span
    )
    return GridFunction1D(u0.grid, values, time=t_final)


# -- smooth-solution order verification ------------------------------------
#
# The jump experiments never touch a boundary, but order verification against
# a known smooth solution wants clean periodic wraparound. The runner below
# evolves the N-1 unique nodes of [x_left, x_right] as a periodic array.


def _advance_periodic(values: np.ndarray, kind: str, lam: float) -> np.ndarray:
    if kind == "minmod":
        n = values.shape[0]
        padded = np.concatenate((values[-2:], values, values[:1]))
        d = padded[1:] - padded[:-1]
        alpha = _minmod_vec(d[1:], d[:-1])
        return (
            values
            - lam * d[1 : n + 1]
            - 0.5 * lam * (1.0 - lam) * (alpha[1:] - alpha[:-1])
        )
    fp = FOOTPRINTS[kind]
    w = update_weights(kind, lam)
    origin = fp.width // 2 - fp.left_width
    return correlate1d(values, w, mode="wrap", origin=origin)


def smooth_convergence_order(
    spec: SchemeSpec,
    resolutions: Sequence[int],
    t_final: float = 2.0,
    x_left: float = -math.pi,
    x_right: float = math.pi,
) -> list[float]:
    """Measured orders from sin(x) initial data advected periodically.

    For each resolution the L1 error against the exact shifted sine is
    computed; consecutive resolutions give log-ratio order estimates. Used to
    confirm the formal order of each scheme before any jump experiments.
    """
    if len(resolutions) < 2:
        raise ValueError("need at least two resolutions")
    errors: list[float] = []
    spacings: list[float] = []
    for n_points in resolutions:
        grid = Grid1D(x_left, x_right, n_points)
        h = grid.h
        x = x_left + np.arange(n_points - 1) * h  # unique periodic nodes
        cur = np.sin(x)
        dt_full = spec.lam * h / spec.advection_speed
        n_full, remainder = step_count(t_final, dt_full)
        for _ in range(n_full):
            cur = _advance_periodic(cur, spec.kind, spec.lam)
        if remainder > 0.0:
            cur = _advance_periodic(
                cur, spec.kind, spec.advection_speed * remainder / h
            )
        exact = np.sin(x - spec.advection_speed * t_final)
        errors.append(h * float(np.abs(cur - exact).sum()))
        spacings.append(h)
    orders = []
    for (e1, h1), (e2, h2) in zip(zip(errors, spacings), zip(errors[1:], spacings[1:])):
        orders.append(math.log(e1 / e2) / math.log(h1 / h2))
    return orders
