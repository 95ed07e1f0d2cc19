"""Similarity-profile oracles for jump-bearing advection runs.

A p-th order scheme smears a passive jump into a self-similar front: the
truncated modified equation has solutions of the form

    u(xi) = (u_L + u_R)/2 + (u_R - u_L)/2 * S(xi),

where S is a profile running from -1 to +1 in the similarity variable
xi = z / (kappa * t)^(1/(p+1)) of the moving frame z = x - a*t. For p = 1 the
profile is an error function; for the unlimited second-order scheme it is a
combination of generalized hypergeometric functions that oscillates on the
upstream side. These profiles explain both the p/(p+1) convergence rate of
successive uniform refinement and the erratic estimates of other comparison
orderings, and they serve as independent oracles for the measured tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Callable, NamedTuple

import numpy as np

from .schemes import SchemeSpec

__all__ = [
    "PrecisionLossError",
    "TailTruncationError",
    "DegenerateProfileError",
    "Hyp1F2Result",
    "hyp1f2",
    "SimilarityProfile",
    "ScaledFrame",
    "erf_profile",
    "first_order_norm_gap",
    "godunov2_profile",
    "godunov2_similarity_profile",
    "RatioResult",
    "scaled_ratio_quadrature",
    "scaled_frame_difference",
    "adaptive_simpson",
    "write_samples_csv",
]


class PrecisionLossError(ArithmeticError):
    """Series evaluation lost too many digits to cancellation to be trusted."""


class TailTruncationError(ValueError):
    """The profile's trusted domain is too narrow for the requested integral."""


class DegenerateProfileError(ValueError):
    """The requested profile degenerates to the exact jump (no smearing)."""


# -- generalized hypergeometric series --------------------------------------


class Hyp1F2Result(NamedTuple):
    value: float
    condition: float
    terms: int


#: Condition estimates above this raise PrecisionLossError.
CONDITION_LIMIT = 1e12

_TERM_TOL = 1e-17
_MAX_TERMS = 10_000


def hyp1f2(a: float, b1: float, b2: float, z: float) -> Hyp1F2Result:
    """1F2(a; b1, b2; z) by direct series summation with loss detection.

    Terms follow the ratio recurrence t_{k+1} = t_k * (a+k) * z /
    ((b1+k)(b2+k)(k+1)) and are accumulated with compensated summation until
    a term drops below 1e-17 of the largest partial sum seen. That largest
    partial sum divided by the result is returned as a condition estimate:
    for z << 0 the series cancels catastrophically and the estimate grows
    without bound, so evaluation refuses to return a digitless answer rather
    than silently producing one.
    """
    for b in (b1, b2):
        if b <= 0 and b == int(b):
            raise ValueError(f"lower parameter {b} is a nonpositive integer")
    total = 1.0
    comp = 0.0
    term = 1.0
    run_max = 1.0
    k = 0
    while k < _MAX_TERMS:
        term *= (a + k) / ((b1 + k) * (b2 + k)) * z / (k + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(total) > run_max:
            run_max = abs(total)
        k += 1
        if abs(term) < _TERM_TOL * run_max:
            break
    condition = math.inf if total == 0.0 else run_max / abs(total)
    if condition > CONDITION_LIMIT:
        raise PrecisionLossError(
            f"1F2({a}; {b1}, {b2}; {z}) condition estimate {condition:.2e} "
            f"exceeds {CONDITION_LIMIT:.0e}"
        )
    return Hyp1F2Result(total, condition, k)


# -- profiles ----------------------------------------------------------------


@dataclass(frozen=True)
class SimilarityProfile:
    """Normalized jump profile S(xi) for a scheme of formal order p.

    s_of_xi maps the similarity variable to the (-1, 1)-normalized profile;
    general left/right states enter only through the affine wrapper u_of_xi.
    kappa_scale is the physical diffusion/dispersion coefficient when it is
    known (first order); None means the profile is only used in the
    normalized frame, where spacing enters through stretch factors alone.
    """

    order_p: int
    s_of_xi: Callable[[float], float]
    xi_domain: tuple[float, float]
    kappa_scale: float | None
    t_f: float
    u_left: float = -1.0
    u_right: float = 1.0

    def u_of_xi(self, xi: float) -> float:
        return 0.5 * (self.u_left + self.u_right) + 0.5 * (
            self.u_right - self.u_left
        ) * self.s_of_xi(xi)

    def u_of_z(self, z: float) -> float:
        """Profile in the moving physical frame; needs a known kappa."""
        if self.kappa_scale is None:
            raise ValueError("profile has no physical scale; use the xi frame")
        scale = (self.kappa_scale * self.t_f) ** (1.0 / (self.order_p + 1))
        return self.u_of_xi(z / scale)


@dataclass(frozen=True)
class ScaledFrame:
    """Common scaled coordinate for comparing two resolutions of one profile."""

    chi: np.ndarray
    stretch: float


def erf_profile(nu: float, t_f: float, ic) -> SimilarityProfile:
    """First-order profile: an erf front of width set by nu = a*h*(1-lam)/2.

    In the moving frame the profile is
        U(z) = (u_L+u_R)/2 + (u_R-u_L)/2 * erf(z / sqrt(4*nu*t_f)),
    i.e. S(xi) = erf(xi/2) with xi = z / sqrt(nu*t_f). nu = 0 (lam = 1) is
    rejected: the scheme then shifts exactly and the profile is the raw jump.
    """
    if nu <= 0:
        raise DegenerateProfileError(
            "nu must be positive; at lam = 1 the profile is the exact jump"
        )
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    return SimilarityProfile(
        order_p=1,
        s_of_xi=lambda xi: math.erf(0.5 * xi),
        xi_domain=(-40.0, 40.0),
        kappa_scale=nu,
        t_f=t_f,
        u_left=ic.u_left,
        u_right=ic.u_right,
    )


def first_order_norm_gap(
    h_1: float, h_2: float, spec: SchemeSpec, ic, t_f: float
) -> float:
    """Predicted L1 distance between two first-order runs of spacings h_1 > h_2.

    Each run is an erf front of width delta_i = sqrt(4*nu_i*t_f) with
    nu_i = a*h_i*(1-lam)/2; integrating the absolute difference of the two
    fronts gives exactly |u_R - u_L| * (delta_1 - delta_2) / sqrt(pi). The
    spacing enters through sqrt(h), which is what makes the measured rate of
    successive refinements come out at 1/2 regardless of the ratio used.
    """
    if spec.kind != "upwind1":
        raise ValueError("closed-form gap applies to the first-order scheme only")
    if h_2 > h_1:
        raise ValueError("expected h_1 >= h_2")
    if h_1 <= 0 or t_f <= 0:
        raise ValueError("spacings and t_f must be positive")
    a, lam = spec.advection_speed, spec.lam
    delta_1 = math.sqrt(4.0 * (a * h_1 * (1.0 - lam) / 2.0) * t_f)
    delta_2 = math.sqrt(4.0 * (a * h_2 * (1.0 - lam) / 2.0) * t_f)
    return ic.magnitude * (delta_1 - delta_2) / math.sqrt(math.pi)


_GAMMA_TWO_THIRDS = math.gamma(2.0 / 3.0)

#: Calibrated via the 1F2 condition estimate: at |xi| = 12 the estimate is
#: ~1e5, at |xi| ~ 20 it crosses the 1e12 refusal threshold.
GODUNOV2_XI_DOMAIN = (-12.0, 12.0)


def godunov2_profile(xi: float) -> float:
    """Normalized (-1, 1) jump profile of the unlimited second-order scheme.

    The dispersive third-derivative modified equation yields

        S(xi) = 1/3 - xi*(xi*sqrt(3)*Gamma(2/3)^2 * 1F2(2/3; 4/3, 5/3; xi^3/27)
                          - 4*pi * 1F2(1/3; 2/3, 4/3; xi^3/27))
                     / (6*Gamma(2/3)*pi),

    which tends to +1 smoothly downstream and oscillates about -1 upstream.
    Evaluation propagates PrecisionLossError once cancellation in the series
    exceeds the condition limit (far outside GODUNOV2_XI_DOMAIN).
    """
    z = xi * xi * xi / 27.0
    f1 = hyp1f2(2.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0, z).value
    f2 = hyp1f2(1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, z).value
    g = _GAMMA_TWO_THIRDS
    return 1.0 / 3.0 - xi * (
        xi * math.sqrt(3.0) * g * g * f1 - 4.0 * math.pi * f2
    ) / (6.0 * g * math.pi)


def godunov2_similarity_profile(
    u_left: float = -1.0, u_right: float = 1.0
) -> SimilarityProfile:
    """Second-order similarity profile wrapped for general states.

    The dispersion coefficient scale is not pinned down here (kappa_scale is
    None); every use is in the normalized frame, where only stretch factors
    (h_a/h_b)^(1/(p+1)) matter.
    """
    return SimilarityProfile(
        order_p=2,
        s_of_xi=godunov2_profile,
        xi_domain=GODUNOV2_XI_DOMAIN,
        kappa_scale=None,
        t_f=1.0,
        u_left=u_left,
        u_right=u_right,
    )


# -- quadrature of scaled-profile differences --------------------------------


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
    n_base: int = 32,
) -> float:
    """Adaptive Simpson integration with Richardson correction of accepted panels.

    The interval is first cut into n_base panels refined independently, so a
    feature narrower than the whole interval (a hump between flat tails, an
    oscillation packet) cannot hide from the initial sampling.
    """
    if a == b:
        return 0.0

    def simpson(fa: float, fm: float, fb: float, width: float) -> float:
        return width / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(
        lo: float,
        hi: float,
        f_lo: float,
        f_mid: float,
        f_hi: float,
        whole: float,
        depth: int,
        tol: float,
    ) -> float:
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        f_lm = f(lm)
        f_rm = f(rm)
        left = simpson(f_lo, f_lm, f_mid, mid - lo)
        right = simpson(f_mid, f_rm, f_hi, hi - mid)
        combined = left + right
        err = (combined - whole) / 15.0
        if depth >= max_depth or abs(err) <= tol:
            return combined + err
        return recurse(lo, mid, f_lo, f_lm, f_mid, left, depth + 1, tol / 2.0) + recurse(
            mid, hi, f_mid, f_rm, f_hi, right, depth + 1, tol / 2.0
        )

    edges = np.linspace(a, b, n_base + 1)
    f_edges = [f(x) for x in edges]
    total = 0.0
    panel_tol = tol / n_base
    for i in range(n_base):
        lo, hi = float(edges[i]), float(edges[i + 1])
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        whole = simpson(f_edges[i], f_mid, f_edges[i + 1], hi - lo)
        total += recurse(lo, hi, f_edges[i], f_mid, f_edges[i + 1], whole, 0, panel_tol)
    return total


class RatioResult(NamedTuple):
    value: float
    error_bound: float


#: Maximum tolerated tail contribution relative to the integral.
TAIL_REL_TOL = 1e-6


def _stretched_diff_integral(
    profile: SimilarityProfile, stretch: float, quad_tol: float
) -> tuple[float, float]:
    """Truncated integral of |S(chi) - S(chi*stretch)| and its tail bound.

    Integration covers the widest window keeping both arguments inside the
    trusted domain. The tail beyond it is majorized by a rectangle: band
    height = how far S still is from its limits at the window edge, taken at
    both edge arguments chi and chi*stretch (for stretch < 1 the stretched
    argument is the straggler); width = how far the slower argument needs to
    run before it too reaches the trust boundary. For exponentially tailed
    profiles the bound is negligible; for slowly decaying oscillatory
    profiles it is honest about being large.
    """
    x_lo, x_hi = profile.xi_domain
    half = min(-x_lo, x_hi) / max(1.0, stretch)
    s = profile.s_of_xi

    def integrand(chi: float) -> float:
        return abs(s(chi) - s(chi * stretch))

    coarse = max(integrand(c) for c in np.linspace(-half, half, 33))
    scale = max(coarse * 2.0 * half, 1e-300)
    integral = adaptive_simpson(integrand, -half, half, tol=quad_tol * scale)
    band = 0.0
    for edge in (half, half * stretch):
        band = max(band, abs(s(edge) - 1.0), abs(s(-edge) + 1.0))
    tail_width = 2.0 * half * max(stretch, 1.0 / stretch)
    tail_bound = band * tail_width
    return integral, tail_bound


def scaled_ratio_quadrature(
    profile: SimilarityProfile,
    stretch_num: float,
    stretch_den: float,
    quad_tol: float = 1e-10,
) -> RatioResult:
    """Ratio of integrals of scaled-profile differences.

    Computes int |S(chi) - S(chi*stretch_num)| dchi divided by the same with
    stretch_den. Under uniform refinement compared successively both
    stretches are equal, the integrands are identical, and the ratio is
    exactly one before any integration error enters; that cancellation is the
    whole mechanism behind the predictable p/(p+1) estimate, so equal
    stretches short-circuit to 1 even when each individual integral would be
    untrustworthy. For unequal stretches the truncation tail must stay below
    TAIL_REL_TOL of each integral or TailTruncationError is raised.
    """
    if stretch_num <= 0 or stretch_den <= 0:
        raise ValueError("stretch factors must be positive")
    if stretch_num == stretch_den:
        return RatioResult(1.0, 0.0)
    num, num_tail = _stretched_diff_integral(profile, stretch_num, quad_tol)
    den, den_tail = _stretched_diff_integral(profile, stretch_den, quad_tol)
    if den == 0.0:
        raise ValueError("denominator integrand is identically zero")
    rel_err = num_tail / max(num, 1e-300) + den_tail / den
    if rel_err > TAIL_REL_TOL:
        raise TailTruncationError(
            f"tail truncation error {rel_err:.2e} of the integral exceeds "
            f"{TAIL_REL_TOL:.0e}; the trusted domain {profile.xi_domain} is too "
            f"narrow for stretches ({stretch_num}, {stretch_den})"
        )
    ratio = num / den
    return RatioResult(ratio, ratio * rel_err)


def scaled_frame_difference(
    profile: SimilarityProfile,
    h_a: float,
    h_b: float,
    n_samples: int = 1201,
) -> tuple[ScaledFrame, np.ndarray]:
    """Tabulate S(chi) - S(chi * (h_a/h_b)^(1/(p+1))) over the trusted window.

    This is the figure-data view of the cancellation argument: any two
    resolution pairs sharing the same spacing ratio produce the same curve in
    their own scaled frame.
    """
    if h_a <= 0 or h_b <= 0:
        raise ValueError("spacings must be positive")
    stretch = (h_a / h_b) ** (1.0 / (profile.order_p + 1))
    x_lo, x_hi = profile.xi_domain
    half = min(-x_lo, x_hi) / max(1.0, stretch)
    chi = np.linspace(-half, half, n_samples)
    s = profile.s_of_xi
    values = np.array([s(c) - s(c * stretch) for c in chi])
    return ScaledFrame(chi=chi, stretch=stretch), values


def write_samples_csv(
    x: np.ndarray, values: np.ndarray, stream: IO[str], x_name: str = "xi"
) -> None:
    """Serialize (coordinate, value) samples for external plotting."""
    stream.write(f"{x_name},value\n")
    for xi, vi in zip(x, values):
        stream.write(f"{xi:.17g},{vi:.17g}\n")
