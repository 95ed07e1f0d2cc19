"""Convergence-rate estimation from three snapshots at different resolutions.

The measured quantity is the ratio R of L1 norms of pairwise solution
differences. The estimated rate sigma solves

    R = |h_a^sigma - h_b^sigma| / |h_b^sigma - h_c^sigma|

for the three spacings in the order they were compared. Three distinct
orderings of the same three snapshots exist, and for non-smooth solutions
they give genuinely different answers:

    successive     (h1, r*h1, r^2*h1)   difference of successive refinements
    wide_middle    (h1, r^2*h1, r*h1)   coarsest vs finest in the numerator
    coarse_middle  (r*h1, h1, r^2*h1)   coarsest in the middle slot

Uniform triples use closed forms; general triples go through a bracketing
scan that reports every root it finds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Mapping

import numpy as np

from .grid import GridFunction1D, coincident_difference, l1_norm

__all__ = [
    "SUCCESSIVE",
    "WIDE_MIDDLE",
    "COARSE_MIDDLE",
    "ORDERINGS",
    "RefinementTriple",
    "RateEstimate",
    "NoValidRateError",
    "IndeterminateRateError",
    "norm_ratio",
    "solve_rate",
    "estimate_all_orderings",
    "write_rates_csv",
    "read_rates_csv",
    "format_rate_table",
]

SUCCESSIVE = "successive"
WIDE_MIDDLE = "wide_middle"
COARSE_MIDDLE = "coarse_middle"
ORDERINGS = (SUCCESSIVE, WIDE_MIDDLE, COARSE_MIDDLE)

SCAN_BRACKET = (-20.0, 20.0)
SCAN_STEP = 0.01


class NoValidRateError(ValueError):
    """The measured ratio is infeasible for the requested ordering."""


class IndeterminateRateError(ValueError):
    """Identical solutions give a zero denominator; no rate is defined."""


@dataclass(frozen=True)
class RefinementTriple:
    """Three spacings in the order they enter the rate equation."""

    h_a: float
    h_b: float
    h_c: float
    ordering_tag: str | None = None
    uniform_ratio: Fraction | None = None

    def __post_init__(self) -> None:
        spacings = (self.h_a, self.h_b, self.h_c)
        if any(h <= 0 for h in spacings):
            raise ValueError("spacings must be positive")
        if len({self.h_a, self.h_b, self.h_c}) != 3:
            raise ValueError("spacings must be pairwise distinct")
        if self.ordering_tag is not None and self.ordering_tag not in ORDERINGS:
            raise ValueError(f"unknown ordering tag {self.ordering_tag!r}")
        if self.uniform_ratio is not None and not 0 < self.uniform_ratio < 1:
            raise ValueError("uniform ratio must lie in (0, 1)")

    @classmethod
    def uniform(cls, h1: float, r: Fraction, ordering_tag: str) -> "RefinementTriple":
        """Build the spacing triple a given ordering sees under uniform refinement."""
        rf = float(r)
        h2, h3 = rf * h1, rf * rf * h1
        by_tag = {
            SUCCESSIVE: (h1, h2, h3),
            WIDE_MIDDLE: (h1, h3, h2),
            COARSE_MIDDLE: (h2, h1, h3),
        }
        if ordering_tag not in by_tag:
            raise ValueError(f"unknown ordering tag {ordering_tag!r}")
        ha, hb, hc = by_tag[ordering_tag]
        return cls(ha, hb, hc, ordering_tag=ordering_tag, uniform_ratio=Fraction(r))


@dataclass(frozen=True)
class RateEstimate:
    """Solved rate plus solver diagnostics.

    sigma is None when no root exists in the bracket or the ordering cannot
    accommodate the measured ratio; `failure` then says why.
    """

    ratio_R: float
    sigma: float | None
    residual: float
    bracket: tuple[float, float]
    multiple_roots: bool = False
    roots_found: tuple[float, ...] = field(default_factory=tuple)
    failure: str | None = None


def _spacing_ratio(sigma: float, h_a: float, h_b: float, h_c: float) -> float:
    """|h_a^s - h_b^s| / |h_b^s - h_c^s|, with the removable s=0 limit filled in.

    Evaluated as exp(s*beta)*|expm1(s*alpha)|/|expm1(s*beta)| with
    alpha = ln(h_a/h_b), beta = ln(h_b/h_c): the naive power differences lose
    all digits for |s| << 1, where this form stays fully accurate.
    """
    alpha = math.log(h_a / h_b)
    beta = math.log(h_b / h_c)
    if sigma == 0.0:
        return abs(alpha) / abs(beta)
    return math.exp(sigma * beta) * abs(math.expm1(sigma * alpha)) / abs(
        math.expm1(sigma * beta)
    )


def norm_ratio(
    u_a: GridFunction1D, u_b: GridFunction1D, u_c: GridFunction1D
) -> float:
    """Measured ratio ||u_a - u_b|| / ||u_b - u_c|| on coincident nodes."""
    times = (u_a.time, u_b.time, u_c.time)
    if max(times) - min(times) > 1e-9 * max(1.0, abs(times[0])):
        raise ValueError(f"snapshots taken at different times: {times}")
    num = l1_norm(coincident_difference(u_a, u_b))
    den = l1_norm(coincident_difference(u_b, u_c))
    if den == 0.0:
        raise IndeterminateRateError(
            "denominator solutions are identical on the common subgrid"
        )
    return num / den


def _closed_form(R: float, triple: RefinementTriple) -> float:
    r = float(triple.uniform_ratio)  # type: ignore[arg-type]
    tag = triple.ordering_tag
    if tag == SUCCESSIVE:
        # spacing ratio reduces to r^(-sigma)
        return math.log(R) / math.log(1.0 / r)
    if tag == WIDE_MIDDLE:
        # reduces to 1 + r^(-sigma), feasible only for R > 1
        if R <= 1.0:
            raise NoValidRateError(
                f"no valid rate for ordering {tag}: requires R > 1, got R={R}"
            )
        return math.log(R - 1.0) / math.log(1.0 / r)
    if tag == COARSE_MIDDLE:
        # reduces to 1 / (1 + r^sigma), feasible only for 0 < R < 1
        if not 0.0 < R < 1.0:
            raise NoValidRateError(
                f"no valid rate for ordering {tag}: requires 0 < R < 1, got R={R}"
            )
        return math.log(1.0 / R - 1.0) / math.log(r)
    raise ValueError(f"closed form needs an ordering tag, got {tag!r}")


def _bisect(
    f, lo: float, hi: float, f_lo: float, max_iter: int = 200
) -> float:
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-14 * max(1.0, abs(mid)):
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0) == (f_mid < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _scan_roots(R: float, h_a: float, h_b: float, h_c: float) -> list[float]:
    """All roots of R - spacing_ratio(sigma) inside the scan bracket."""
    lo, hi = SCAN_BRACKET
    n = int(round((hi - lo) / SCAN_STEP)) + 1
    sig = np.linspace(lo, hi, n)
    alpha = math.log(h_a / h_b)
    beta = math.log(h_b / h_c)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.exp(sig * beta) * np.abs(np.expm1(sig * alpha)) / np.abs(
            np.expm1(sig * beta)
        )
    zero = sig == 0.0
    g[zero] = _spacing_ratio(0.0, h_a, h_b, h_c)
    f_vals = R - g

    def f(s: float) -> float:
        return R - _spacing_ratio(s, h_a, h_b, h_c)

    roots: list[float] = []
    for i in range(n - 1):
        a, b = f_vals[i], f_vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(float(sig[i]))
        elif (a < 0) != (b < 0):
            roots.append(_bisect(f, float(sig[i]), float(sig[i + 1]), float(a)))
    if np.isfinite(f_vals[-1]) and f_vals[-1] == 0.0:
        roots.append(float(sig[-1]))
    # collapse duplicates from a root sitting on a scan node
    dedup: list[float] = []
    for root in roots:
        if not dedup or abs(root - dedup[-1]) > 1e-9:
            dedup.append(root)
    return dedup


def _select_root(roots: list[float], nominal_rate: float | None) -> float:
    """Pick the reported sigma; with several roots, nearest the nominal rate.

    Every ordering of a genuine spacing triple appears to give a monotone
    spacing-ratio function (randomized search finds no multi-root case), so
    this policy only matters defensively; all roots are reported regardless.
    """
    if nominal_rate is not None and len(roots) > 1:
        return min(roots, key=lambda s: abs(s - nominal_rate))
    return roots[0]


def solve_rate(
    R: float,
    triple: RefinementTriple,
    nominal_rate: float | None = None,
) -> RateEstimate:
    """Solve the rate equation for sigma given a measured norm ratio.

    Uniform tagged triples use the exact closed form of their ordering and
    raise NoValidRateError when R is outside its admissible range. General
    triples are scanned over the bracket for sign changes and every root is
    bisected and reported; with several roots, sigma is the one closest to
    nominal_rate when given, otherwise the smallest.
    """
    if not (math.isfinite(R) and R > 0):
        raise ValueError(f"norm ratio must be positive and finite, got {R}")
    if triple.uniform_ratio is not None and triple.ordering_tag is not None:
        sigma = _closed_form(R, triple)
        residual = abs(R - _spacing_ratio(sigma, triple.h_a, triple.h_b, triple.h_c))
        return RateEstimate(
            ratio_R=R,
            sigma=sigma,
            residual=residual,
            bracket=SCAN_BRACKET,
            multiple_roots=False,
            roots_found=(sigma,),
        )
    roots = _scan_roots(R, triple.h_a, triple.h_b, triple.h_c)
    if not roots:
        return RateEstimate(
            ratio_R=R,
            sigma=None,
            residual=math.nan,
            bracket=SCAN_BRACKET,
            multiple_roots=False,
            roots_found=(),
            failure=f"no root of the rate equation in {SCAN_BRACKET}",
        )
    sigma = _select_root(roots, nominal_rate)
    residual = abs(R - _spacing_ratio(sigma, triple.h_a, triple.h_b, triple.h_c))
    return RateEstimate(
        ratio_R=R,
        sigma=sigma,
        residual=residual,
        bracket=SCAN_BRACKET,
        multiple_roots=len(roots) > 1,
        roots_found=tuple(roots),
    )


def estimate_all_orderings(
    u_h1: GridFunction1D,
    u_h2: GridFunction1D,
    u_h3: GridFunction1D,
    r: Fraction,
    nominal_rate: float | None = None,
) -> dict[str, RateEstimate]:
    """Rate estimates for all three orderings of one refinement triple.

    Snapshots must satisfy h2 = r*h1 and h3 = r^2*h1. A failure in one
    ordering (infeasible ratio, no root) is recorded in its estimate and does
    not abort the others.
    """
    r = Fraction(r)
    h1, h2, h3 = u_h1.grid.h, u_h2.grid.h, u_h3.grid.h
    rf = float(r)
    if abs(h2 - rf * h1) > 1e-9 * h1 or abs(h3 - rf * rf * h1) > 1e-9 * h1:
        raise ValueError(
            f"spacings ({h1}, {h2}, {h3}) are not a uniform triple with ratio {r}"
        )
    times = (u_h1.time, u_h2.time, u_h3.time)
    if max(times) - min(times) > 1e-9 * max(1.0, abs(times[0])):
        raise ValueError(f"snapshots taken at different times: {times}")
    d12 = l1_norm(coincident_difference(u_h1, u_h2))
    d23 = l1_norm(coincident_difference(u_h2, u_h3))
    d13 = l1_norm(coincident_difference(u_h1, u_h3))
    ratios = {
        SUCCESSIVE: (d12, d23),
        WIDE_MIDDLE: (d13, d23),
        COARSE_MIDDLE: (d12, d13),
    }
    estimates: dict[str, RateEstimate] = {}
    for tag in ORDERINGS:
        num, den = ratios[tag]
        triple = RefinementTriple.uniform(h1, r, tag)
        if den == 0.0:
            estimates[tag] = RateEstimate(
                ratio_R=math.inf,
                sigma=None,
                residual=math.nan,
                bracket=SCAN_BRACKET,
                failure="zero denominator: solutions identical on common subgrid",
            )
            continue
        R = num / den
        try:
            estimates[tag] = solve_rate(R, triple, nominal_rate=nominal_rate)
        except NoValidRateError as exc:
            estimates[tag] = RateEstimate(
                ratio_R=R,
                sigma=None,
                residual=math.nan,
                bracket=SCAN_BRACKET,
                failure=str(exc),
            )
    return estimates


# -- serialization -----------------------------------------------------------

CSV_HEADER = "scheme,r,ordering,R,sigma,residual,multiple_roots"


def write_rates_csv(
    entries: Iterable[tuple[str, str, str, RateEstimate]], stream: IO[str]
) -> None:
    """Write (scheme, r, ordering, estimate) records in the rate-table schema."""
    stream.write(CSV_HEADER + "\n")
    for scheme, r_label, ordering, est in entries:
        sigma = "" if est.sigma is None else f"{est.sigma:.17g}"
        residual = "" if math.isnan(est.residual) else f"{est.residual:.17g}"
        stream.write(
            f"{scheme},{r_label},{ordering},{est.ratio_R:.17g},"
            f"{sigma},{residual},{est.multiple_roots}\n"
        )


def read_rates_csv(stream: IO[str]) -> list[dict]:
    """Parse the rate-table CSV back into plain records (exact round-trip)."""
    header = stream.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"unexpected header {header!r}")
    records = []
    for line in stream:
        line = line.strip()
        if not line:
            continue
        scheme, r_label, ordering, ratio, sigma, residual, multiple = line.split(",")
        records.append(
            {
                "scheme": scheme,
                "r": r_label,
                "ordering": ordering,
                "R": float(ratio),
                "sigma": None if sigma == "" else float(sigma),
                "residual": math.nan if residual == "" else float(residual),
                "multiple_roots": multiple == "True",
            }
        )
    return records


def format_rate_table(
    rows: Iterable[tuple[str, Mapping[str, RateEstimate]]], title: str = ""
) -> str:
    """Human-readable aligned table, one row per ratio, one column per ordering.

    Rates are shown rounded half-even to two decimals, matching the usual
    presentation; full precision lives in the CSV output.
    """
    lines = []
    if title:
        lines.append(title)
    header = f"{'r':>8} | {'successive':>10} | {'wide_middle':>11} | {'coarse_middle':>13}"
    lines.append(header)
    lines.append("-" * len(header))
    for r_label, estimates in rows:
        cells = []
        for tag in ORDERINGS:
            est = estimates[tag]
            cells.append("   n/a" if est.sigma is None else f"{round(est.sigma, 2):.2f}")
        lines.append(
            f"{r_label:>8} | {cells[0]:>10} | {cells[1]:>11} | {cells[2]:>13}"
        )
    return "\n".join(lines) + "\n"
