"""Closed-form and quadrature-based predictions for the trip model.

Let L be the lognormal transition length, V the mixture travel speed, and
T = L / V the transition duration when L and V are drawn independently.
This module provides:

* the duration density h(t) and CDF H(t), evaluated by fixed-order
  Gauss-Legendre quadrature over each mixture component's speed range;
* the inverse CDF of T (monotone bisection on H, absolute tolerance in
  seconds), used for duration-first trip sampling;
* the expected duration E[T] = E[L] * E[1/V];
* the expected handoff count per transition against a Poisson deployment of
  intensity lambda,  E[N] = 2 * E[V] * E[|sin(bearing)|] * sqrt(lambda) * E[T],
  and the long-run handoff rate  E[N] / (E[T] + pause);
* utilities matching the classic random-waypoint construction, where
  waypoints are nearest points of an auxiliary Poisson process: the waypoint
  density whose mean hop equals E[L], and an inverse-CDF sampler of its hop
  length law.

The handoff-count formula treats speed and duration as uncorrelated within a
transition, which is exact for duration-first sampling and a deliberate
approximation (off by the factor E[V] * E[1/V]) for length-first sampling.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .trips import BearingModel, LengthModel, VelocityMixture

__all__ = [
    "QuadratureSpec",
    "TheoryInputs",
    "DEFAULT_QUADRATURE",
    "duration_pdf",
    "duration_cdf",
    "duration_quantile",
    "expected_duration",
    "mean_abs_sin",
    "expected_handoffs",
    "handoff_rate",
    "literature_waypoint_density",
    "literature_length_sampler",
]

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
_SPEED_FLOOR = 1e-6  # m/s, guards the 1/v singularity in speed integrals


@dataclass(frozen=True)
class QuadratureSpec:
    """Fixed-order Gauss-Legendre rule for per-component speed integrals.

    Each mixture component is integrated over
    [max(floor, mean - half_width_sigmas * std), mean + half_width_sigmas * std].
    abs_tol is the absolute tolerance used by iterative solves built on the
    rule (the inverse-CDF bisection, in seconds).
    """

    nodes_per_component: int = 64
    half_width_sigmas: float = 10.0
    abs_tol: float = 1e-10

    def __post_init__(self):
        if self.nodes_per_component < 16:
            raise ValueError("nodes_per_component must be >= 16")
        if self.half_width_sigmas < 8.0:
            raise ValueError("half_width_sigmas must be >= 8")
        if self.abs_tol <= 0.0:
            raise ValueError("abs_tol must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class TheoryInputs:
    """Everything the handoff-rate prediction needs."""

    length: LengthModel
    velocity: VelocityMixture
    intensity_per_m2: float
    pause_s: float = 0.0
    bearing: BearingModel = BearingModel.uniform()

    def __post_init__(self):
        if self.intensity_per_m2 <= 0.0 or not math.isfinite(self.intensity_per_m2):
            raise ValueError("intensity_per_m2 must be positive and finite")
        if self.pause_s < 0.0 or not math.isfinite(self.pause_s):
            raise ValueError("pause_s must be non-negative and finite")


@lru_cache(maxsize=8)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def _speed_rule(mix, quad):
    """Quadrature nodes/weights for each component, flattened to 1-D arrays.

    Returns (v, w) where the integral of f(v) * N(v; mu_d, sd_d) dv summed
    with mixture proportions is approximated by sum(w * f(v)): the Gaussian
    density and the mixture proportions are folded into w.
    """
    x, gw = _leggauss(quad.nodes_per_component)
    wts = mix.weight_array()
    wts = wts / np.sum(wts)
    mu = mix.mean_array()
    sd = mix.std_array()
    lo = np.maximum(_SPEED_FLOOR, mu - quad.half_width_sigmas * sd)
    hi = mu + quad.half_width_sigmas * sd
    mid = 0.5 * (hi + lo)
    half = 0.5 * (hi - lo)
    v = mid[:, None] + half[:, None] * x[None, :]
    gauss = np.exp(-0.5 * ((v - mu[:, None]) / sd[:, None]) ** 2) / (
        sd[:, None] * _SQRT_TWO_PI
    )
    w = (wts * half)[:, None] * gw[None, :] * gauss
    return v.ravel(), w.ravel()


def duration_pdf(t, length, mix, quad=DEFAULT_QUADRATURE):
    """Density of the transition duration T = L / V at t (seconds).

    Vectorized over t; every t must be strictly positive.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if np.any(t_arr <= 0.0) or not np.all(np.isfinite(t_arr)):
        raise ValueError("duration_pdf is defined for finite t > 0 only")
    v, w = _speed_rule(mix, quad)
    z = (np.log(np.outer(t_arr, v)) - length.mu_log) / length.sigma_log
    # T = L/V given V=v is lognormal in t with density
    #   exp(-z^2/2) / (sigma_log * t * sqrt(2 pi));
    # mix over v with the folded weights w.
    vals = np.sum(np.exp(-0.5 * z * z) * w, axis=1) / (
        length.sigma_log * t_arr * _SQRT_TWO_PI
    )
    return vals if np.ndim(t) else float(vals[0])


def duration_cdf(t, length, mix, quad=DEFAULT_QUADRATURE):
    """CDF of the transition duration T = L / V at t (t <= 0 gives 0)."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros(t_arr.shape, dtype=np.float64)
    pos = t_arr > 0.0
    if np.any(pos):
        v, w = _speed_rule(mix, quad)
        z = (np.log(np.outer(t_arr[pos], v)) - length.mu_log) / length.sigma_log
        out[pos] = np.sum(special.ndtr(z) * w, axis=1)
    return out if np.ndim(t) else float(out[0])


def duration_quantile(u, length, mix, quad=DEFAULT_QUADRATURE):
    """Inverse CDF of the transition duration by monotone bisection.

    u may be scalar or array, each value in [0, 1). The bracket is widened by
    doubling until it contains every requested quantile, then bisected until
    its width is below quad.abs_tol seconds.
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any((u_arr < 0.0) | (u_arr >= 1.0)):
        raise ValueError("quantile levels must lie in [0, 1)")

    # initial scale: mean length over mixture mean speed
    scale = length.mean() / mix.mean()
    hi = max(scale, quad.abs_tol)
    u_max = float(np.max(u_arr))
    for _ in range(200):
        if duration_cdf(hi, length, mix, quad) > u_max:
            break
        hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the requested duration quantile")

    lo_v = np.zeros_like(u_arr)
    hi_v = np.full_like(u_arr, hi)
    for _ in range(200):
        if np.max(hi_v - lo_v) <= quad.abs_tol:
            break
        mid = 0.5 * (lo_v + hi_v)
        below = duration_cdf(mid, length, mix, quad) < u_arr
        lo_v = np.where(below, mid, lo_v)
        hi_v = np.where(below, hi_v, mid)
    result = 0.5 * (lo_v + hi_v)
    return result if np.ndim(u) else float(result[0])


def expected_duration(length, mix, quad=DEFAULT_QUADRATURE):
    """E[T] = E[L] * E[1/V] for independent L and V.

    E[1/V] is the mixture expectation of 1/v, evaluated with the same
    per-component quadrature rule as the duration law.
    """
    v, w = _speed_rule(mix, quad)
    return length.mean() * float(np.sum(w / v))


def mean_abs_sin(bearing):
    """E[|sin(bearing)|] under the bearing law.

    Uniform bearings give exactly 2/pi. Wrapped-normal bearings are handled
    by 256-node Gauss-Legendre quadrature over one period, summing enough
    periodic images of the normal density to cover its mass.
    """
    if bearing.kind == "uniform":
        return 2.0 / math.pi
    if bearing.std == 0.0:
        return abs(math.sin(bearing.mean))
    x, gw = _leggauss(128)
    two_pi = 2.0 * math.pi
    # |sin| kinks at 0, pi, 2*pi; integrate each smooth half-period separately
    half = 0.5 * math.pi
    theta = np.concatenate([half * (x + 1.0), math.pi + half * (x + 1.0)])
    weights = np.concatenate([half * gw, half * gw])
    k_span = int(math.ceil((10.0 * bearing.std + abs(bearing.mean)) / two_pi)) + 1
    dens = np.zeros_like(theta)
    for k in range(-k_span, k_span + 1):
        z = (theta + two_pi * k - bearing.mean) / bearing.std
        dens += np.exp(-0.5 * z * z)
    dens /= bearing.std * _SQRT_TWO_PI
    return float(np.sum(weights * np.abs(np.sin(theta)) * dens))


def expected_handoffs(inputs, mean_duration=None, quad=DEFAULT_QUADRATURE):
    """Expected nearest-site changes per transition.

    E[N] = 2 * E[V] * E[|sin(bearing)|] * sqrt(lambda) * E[T]. The factor
    2 * E[|sin|] * sqrt(lambda) is the expected boundary crossings per metre
    of travel for Poisson cells (boundary length intensity 2*sqrt(lambda)
    probed at the bearing law's incidence).
    """
    if mean_duration is None:
        mean_duration = expected_duration(inputs.length, inputs.velocity, quad)
    return (
        2.0
        * inputs.velocity.mean()
        * mean_abs_sin(inputs.bearing)
        * math.sqrt(inputs.intensity_per_m2)
        * mean_duration
    )


def handoff_rate(inputs, quad=DEFAULT_QUADRATURE):
    """Long-run handoffs per second: E[N] / (E[T] + pause).

    With uniform bearings this reduces to
    4 * sqrt(lambda) * E[V] * E[T] / (pi * (E[T] + pause)).
    """
    mean_t = expected_duration(inputs.length, inputs.velocity, quad)
    return expected_handoffs(inputs, mean_t) / (mean_t + inputs.pause_s)


def literature_waypoint_density(length):
    """Density of the auxiliary waypoint process in the classic construction.

    In the classic random-waypoint variant, each hop goes to the nearest
    point of a fresh Poisson process of density lambda_wp, so hop lengths are
    Rayleigh with mean 1 / (2 * sqrt(lambda_wp)). Matching that mean to the
    lognormal mean E[L] gives lambda_wp = 1 / (4 * E[L]^2).
    """
    return 1.0 / (4.0 * math.exp(2.0 * (length.mu_log + 0.5 * length.sigma_log**2)))


def literature_length_sampler(lambda_wp, rng, size=None):
    """Sample hop lengths of the classic nearest-waypoint construction.

    The nearest-point distance of a Poisson process has CDF
    F(l) = 1 - exp(-lambda_wp * pi * l^2); this inverts it on uniform draws.
    """
    if lambda_wp <= 0.0:
        raise ValueError("lambda_wp must be positive")
    u = rng.uniform(size=size)
    return np.sqrt(-np.log1p(-u) / (lambda_wp * math.pi))
