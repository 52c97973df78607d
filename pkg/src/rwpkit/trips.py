"""Random-waypoint trip model with lognormal transition lengths and
Gaussian-mixture travel speeds.

A trip is a sequence of straight transitions. Each transition gets a bearing
(radians, clockwise from true north), a length, and a constant travel speed;
the endpoint is ``start + length * (sin(bearing), cos(bearing))`` in planar
(east, north) metres. After each transition the user pauses for a fixed time
before the next one starts.

Two generation orders are supported and they are NOT statistically
equivalent:

* ``length-first``: draw the length from the lognormal law and the speed from
  the mixture, independently. The transition duration is then length/speed.
* ``duration-first``: draw the speed from the mixture and the duration from
  the single-transition duration law (numerical inverse CDF), independently,
  and set length = speed * duration. Durations and speeds keep their exact
  marginals and are independent, which is the sampling scheme under which
  closed-form handoff-rate predictions hold without a speed-duration
  correlation correction. The implied length marginal is close to but not
  exactly the lognormal law; its mean is E[L] * E[V] * E[1/V].

The draw order inside each mode is fixed and documented because it is part of
the reproducibility contract: callers seed a Generator and must get identical
trips forever.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LengthModel",
    "VelocityMixture",
    "BearingModel",
    "Trip",
    "generate_trip",
    "LENGTH_FIRST",
    "DURATION_FIRST",
]

LENGTH_FIRST = "length-first"
DURATION_FIRST = "duration-first"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LengthModel:
    """Lognormal transition-length law: log(length) ~ Normal(mu_log, sigma_log**2).

    Parameters are in log-metres. ``mean()`` is exp(mu_log + sigma_log**2 / 2).
    """

    mu_log: float
    sigma_log: float

    def __post_init__(self):
        if not (math.isfinite(self.mu_log) and math.isfinite(self.sigma_log)):
            raise ValueError("length model parameters must be finite")
        if self.sigma_log <= 0.0:
            raise ValueError("sigma_log must be positive")

    def mean(self):
        return math.exp(self.mu_log + 0.5 * self.sigma_log**2)

    def median(self):
        return math.exp(self.mu_log)

    def sample(self, rng, size=None):
        """Draw lengths in metres; scalar when size is None."""
        return np.exp(rng.normal(self.mu_log, self.sigma_log, size=size))


@dataclass(frozen=True)
class VelocityMixture:
    """Travel-speed law: a positive-weight mixture of normal components.

    Weights need not be normalized; they are proportions. Component means and
    standard deviations are in m/s. Sampling rejects draws at or below the
    requested floor, so the realized law is the mixture truncated to
    (floor, inf); with the default floor of 0 and road-speed components the
    truncation is negligible.
    """

    weights: tuple
    means: tuple
    stds: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        m = tuple(float(v) for v in self.means)
        s = tuple(float(v) for v in self.stds)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "stds", s)
        if not (len(w) == len(m) == len(s)) or len(w) == 0:
            raise ValueError("weights, means, stds must be equal-length and non-empty")
        if any(x < 0.0 for x in w) or sum(w) <= 0.0:
            raise ValueError("weights must be non-negative with positive sum")
        if any(x <= 0.0 for x in m):
            raise ValueError("component means must be positive")
        if any(x <= 0.0 for x in s):
            raise ValueError("component standard deviations must be positive")

    @property
    def n_components(self):
        return len(self.weights)

    def weight_array(self):
        return np.asarray(self.weights, dtype=np.float64)

    def mean_array(self):
        return np.asarray(self.means, dtype=np.float64)

    def std_array(self):
        return np.asarray(self.stds, dtype=np.float64)

    def mean(self):
        """Mixture mean speed: sum(w_d * mu_d) / sum(w_d)."""
        w = self.weight_array()
        return float(np.sum(w * self.mean_array()) / np.sum(w))

    def pdf(self, v):
        """Mixture density (no floor truncation), vectorized over v."""
        v = np.asarray(v, dtype=np.float64)
        w = self.weight_array()
        w = w / np.sum(w)
        mu = self.mean_array()
        sd = self.std_array()
        z = (v[..., None] - mu) / sd
        comp = np.exp(-0.5 * z * z) / (sd * math.sqrt(TWO_PI))
        return np.sum(w * comp, axis=-1)

    def sample(self, rng, size=None, floor=0.0, max_retries=10_000):
        """Draw speeds in m/s, rejecting values <= floor; scalar when size is None.

        Raises RuntimeError if any slot is still rejected after max_retries
        redraw passes (only possible when the mixture mass above the floor is
        tiny).
        """
        scalar = size is None
        n = 1 if scalar else int(size)
        if n < 0:
            raise ValueError("size must be non-negative")
        w = self.weight_array()
        p = w / np.sum(w)
        mu = self.mean_array()
        sd = self.std_array()
        out = np.empty(n, dtype=np.float64)
        pending = np.arange(n)
        for _ in range(max_retries):
            if pending.size == 0:
                break
            comp = rng.choice(self.n_components, size=pending.size, p=p)
            draw = rng.normal(mu[comp], sd[comp])
            ok = draw > floor
            out[pending[ok]] = draw[ok]
            pending = pending[~ok]
        if pending.size:
            raise RuntimeError(
                "velocity rejection sampling exhausted %d retries; "
                "mixture mass above floor=%g is too small" % (max_retries, floor)
            )
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class BearingModel:
    """Bearing law in radians clockwise from true north, on (0, 2*pi].

    Two variants: uniform on the circle, or a wrapped normal with the given
    mean and standard deviation (std 0 gives a deterministic bearing).
    """

    kind: str
    mean: float = 0.0
    std: float = 0.0

    _KINDS = ("uniform", "normal")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError("bearing kind must be one of %s" % (self._KINDS,))
        if self.kind == "normal" and self.std < 0.0:
            raise ValueError("bearing std must be non-negative")

    @classmethod
    def uniform(cls):
        return cls(kind="uniform")

    @classmethod
    def normal(cls, mean, std):
        return cls(kind="normal", mean=float(mean), std=float(std))

    def sample(self, rng, size=None):
        """Draw bearings in (0, 2*pi]; scalar when size is None."""
        if self.kind == "uniform":
            theta = TWO_PI - rng.uniform(0.0, TWO_PI, size=size)
        else:
            raw = rng.normal(self.mean, self.std, size=size)
            theta = np.mod(raw, TWO_PI)
            theta = np.where(theta == 0.0, TWO_PI, theta)
            if size is None:
                theta = float(theta)
        return theta


@dataclass(frozen=True, eq=False)
class Trip:
    """An ordered run of straight transitions.

    waypoints: (M+1, 2) planar metres; row 0 is the start point.
    velocities: (M,) m/s, constant within each transition.
    pauses: (M,) seconds spent at each destination waypoint.
    """

    waypoints: np.ndarray
    velocities: np.ndarray
    pauses: np.ndarray

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=np.float64)
        v = np.atleast_1d(np.asarray(self.velocities, dtype=np.float64))
        p = np.atleast_1d(np.asarray(self.pauses, dtype=np.float64))
        object.__setattr__(self, "waypoints", wp)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "pauses", p)
        if wp.ndim != 2 or wp.shape[1] != 2 or wp.shape[0] < 2:
            raise ValueError("waypoints must have shape (M+1, 2) with M >= 1")
        m = wp.shape[0] - 1
        if v.shape != (m,) or p.shape != (m,):
            raise ValueError("velocities and pauses must have shape (M,)")
        if not np.all(np.isfinite(wp)):
            raise ValueError("waypoints must be finite")
        if not np.all(v > 0.0):
            raise ValueError("velocities must be positive")
        if not np.all(p >= 0.0):
            raise ValueError("pauses must be non-negative")
        if not np.all(self.lengths > 0.0):
            raise ValueError("every transition must have positive length")

    @property
    def n_transitions(self):
        return self.waypoints.shape[0] - 1

    @property
    def lengths(self):
        deltas = np.diff(self.waypoints, axis=0)
        return np.hypot(deltas[:, 0], deltas[:, 1])

    @property
    def durations(self):
        return self.lengths / self.velocities

    @property
    def travel_time(self):
        return float(np.sum(self.durations))

    @property
    def pause_time(self):
        return float(np.sum(self.pauses))

    @property
    def total_time(self):
        return self.travel_time + self.pause_time

    def segments(self):
        """(M, 4) array of rows (ax, ay, bx, by), one per transition."""
        return np.column_stack([self.waypoints[:-1], self.waypoints[1:]])


def waypoints_from_polar(start, lengths, bearings):
    """Chain waypoints from per-transition lengths and bearings.

    Displacement convention: east = length * sin(bearing),
    north = length * cos(bearing).
    """
    lengths = np.asarray(lengths, dtype=np.float64)
    bearings = np.asarray(bearings, dtype=np.float64)
    east = lengths * np.sin(bearings)
    north = lengths * np.cos(bearings)
    wp = np.empty((lengths.size + 1, 2), dtype=np.float64)
    wp[0] = start
    wp[1:, 0] = start[0] + np.cumsum(east)
    wp[1:, 1] = start[1] + np.cumsum(north)
    return wp


def generate_trip(
    start,
    n_transitions,
    length,
    velocity,
    bearing,
    pause_s=0.0,
    mode=LENGTH_FIRST,
    rng=None,
    velocity_floor=0.0,
):
    """Sample one trip.

    mode 'length-first' draws, in order: all lengths, all speeds, all
    bearings. mode 'duration-first' draws all speeds, then one uniform variate
    per transition that is mapped through the duration law's inverse CDF, then
    all bearings; lengths are speed * duration. See the module docstring for
    why the two modes differ statistically.
    """
    if rng is None:
        raise ValueError("an explicit numpy Generator is required for reproducibility")
    m = int(n_transitions)
    if m < 1:
        raise ValueError("n_transitions must be >= 1")
    if pause_s < 0.0:
        raise ValueError("pause_s must be non-negative")
    start = np.asarray(start, dtype=np.float64).reshape(2)

    if mode == LENGTH_FIRST:
        lengths = length.sample(rng, size=m)
        speeds = velocity.sample(rng, size=m, floor=velocity_floor)
    elif mode == DURATION_FIRST:
        from . import theory  # late import: theory depends on these model types

        speeds = velocity.sample(rng, size=m, floor=velocity_floor)
        u = rng.uniform(size=m)
        durations = theory.duration_quantile(u, length, velocity)
        lengths = speeds * durations
    else:
        raise ValueError("mode must be %r or %r" % (LENGTH_FIRST, DURATION_FIRST))

    bearings = bearing.sample(rng, size=m)
    waypoints = waypoints_from_polar(start, lengths, bearings)
    pauses = np.full(m, float(pause_s))
    return Trip(waypoints=waypoints, velocities=speeds, pauses=pauses)
