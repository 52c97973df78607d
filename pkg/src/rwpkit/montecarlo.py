"""Monte Carlo handoff counting over Poisson deployments.

Each realization draws a fresh deployment and one trip that starts at the
region center, counts nearest-site changes exactly along every transition
(no time discretization), and accumulates handoffs, travel time, and pause
time. The empirical handoff rate is total handoffs over total elapsed time.

Determinism contract: realization r uses the substream
``SeedSequence(seed, spawn_key=(r,))``, every random draw happens inside its
realization in a fixed documented order, per-realization results are stored
by index, and reductions are fixed-order numpy sums. Results therefore
depend only on the configuration, never on the worker count; workers run
under a thread pool (the compiled kernels release the GIL).

Three trip profiles are available:

* `LognormalMixtureProfile` - the model's lognormal lengths and mixture
  speeds, in either generation mode (see `rwpkit.trips`);
* `PppWaypointProfile` - the classic construction where each hop goes to the
  nearest point of a fresh Poisson waypoint process (Rayleigh hop lengths)
  and speeds are uniform;
* `ReplayProfile` - replays recorded (length, velocity) transitions from a
  trace corpus with model-drawn bearings.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Region, count_handoffs_batch, generate_ppp
from .theory import TheoryInputs, literature_length_sampler
from .traces import reduce_transition
from .trips import (
    DURATION_FIRST,
    LENGTH_FIRST,
    BearingModel,
    Trip,
    generate_trip,
    waypoints_from_polar,
)

__all__ = [
    "LognormalMixtureProfile",
    "PppWaypointProfile",
    "ReplayProfile",
    "SimConfig",
    "HandoffStats",
    "run_simulation",
    "replay_trips",
    "empirical_rate",
    "rate_stderr",
]


@dataclass(frozen=True)
class LognormalMixtureProfile:
    """Model-generated trips: lognormal lengths, Gaussian-mixture speeds."""

    length: object
    velocity: object

    @classmethod
    def from_preset(cls, preset):
        return cls(length=preset.length, velocity=preset.velocity)

    def sample_trip(self, config, start, rng, realization):
        return generate_trip(
            start,
            config.transitions_per_trip,
            self.length,
            self.velocity,
            config.bearing,
            pause_s=config.pause_s,
            mode=config.trip_mode,
            rng=rng,
        )

    def theory_inputs(self, config):
        return TheoryInputs(
            length=self.length,
            velocity=self.velocity,
            intensity_per_m2=config.intensity_per_m2,
            pause_s=config.pause_s,
            bearing=config.bearing,
        )


@dataclass(frozen=True)
class PppWaypointProfile:
    """Classic nearest-waypoint trips: Rayleigh hop lengths, uniform speeds.

    Draw order per realization: all lengths, all speeds, all bearings.
    """

    waypoint_density_per_m2: float
    v_min_mps: float
    v_max_mps: float

    def __post_init__(self):
        if self.waypoint_density_per_m2 <= 0.0:
            raise ValueError("waypoint_density_per_m2 must be positive")
        if not (0.0 < self.v_min_mps < self.v_max_mps):
            raise ValueError("need 0 < v_min_mps < v_max_mps")

    def sample_trip(self, config, start, rng, realization):
        m = config.transitions_per_trip
        lengths = literature_length_sampler(self.waypoint_density_per_m2, rng, size=m)
        speeds = rng.uniform(self.v_min_mps, self.v_max_mps, size=m)
        bearings = config.bearing.sample(rng, size=m)
        waypoints = waypoints_from_polar(start, lengths, bearings)
        return Trip(waypoints, speeds, np.full(m, config.pause_s))

    def theory_inputs(self, config):
        return None


@dataclass(frozen=True, eq=False)
class ReplayProfile:
    """Replays recorded transitions; realization r plays trip r mod n_trips.

    ``trips`` is a tuple of (lengths, velocities) array pairs, one per
    recorded trip. Bearings are drawn from the configured bearing law (the
    recorded corpus has no planar geometry to reuse), so replayed trips keep
    recorded lengths, speeds and durations but explore random directions.
    """

    trips: tuple

    def __post_init__(self):
        if len(self.trips) == 0:
            raise ValueError("replay corpus is empty")
        canon = []
        for lengths, speeds in self.trips:
            lengths = np.asarray(lengths, dtype=np.float64)
            speeds = np.asarray(speeds, dtype=np.float64)
            if lengths.size == 0 or lengths.shape != speeds.shape:
                raise ValueError("each replay trip needs matching non-empty arrays")
            if not (np.all(lengths > 0.0) and np.all(speeds > 0.0)):
                raise ValueError("replay lengths and speeds must be positive")
            canon.append((lengths, speeds))
        object.__setattr__(self, "trips", tuple(canon))

    @classmethod
    def from_traces(cls, traces, length_from_waypoints=False):
        trips = []
        for trace in traces:
            samples = [
                reduce_transition(t, length_from_waypoints=length_from_waypoints)
                for t in trace.transitions
            ]
            trips.append(
                (
                    np.array([s.length_m for s in samples]),
                    np.array([s.velocity_mps for s in samples]),
                )
            )
        return cls(trips=tuple(trips))

    def sample_trip(self, config, start, rng, realization):
        lengths, speeds = self.trips[realization % len(self.trips)]
        bearings = config.bearing.sample(rng, size=lengths.size)
        waypoints = waypoints_from_polar(start, lengths, bearings)
        return Trip(waypoints, speeds, np.full(lengths.size, config.pause_s))

    def theory_inputs(self, config):
        return None


@dataclass(frozen=True)
class SimConfig:
    """Full description of one simulation run; identical configs give
    byte-identical results at any worker count."""

    profile: object
    intensity_per_m2: float
    realizations: int = 400
    region_side_m: float = 40_000.0
    transitions_per_trip: int = 10
    pause_s: float = 0.0
    bearing: BearingModel = BearingModel.uniform()
    seed: int = 0
    trip_mode: str = DURATION_FIRST
    workers: int = 1

    def __post_init__(self):
        if self.intensity_per_m2 <= 0.0 or not math.isfinite(self.intensity_per_m2):
            raise ValueError("intensity_per_m2 must be positive and finite")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.region_side_m <= 0.0:
            raise ValueError("region_side_m must be positive")
        if self.transitions_per_trip < 1:
            raise ValueError("transitions_per_trip must be >= 1")
        if self.pause_s < 0.0:
            raise ValueError("pause_s must be non-negative")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.trip_mode not in (LENGTH_FIRST, DURATION_FIRST):
            raise ValueError(
                "trip_mode must be %r or %r" % (LENGTH_FIRST, DURATION_FIRST)
            )
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True, eq=False)
class HandoffStats:
    """Aggregated simulation outcome plus per-realization breakdown.

    per_realization columns: handoffs, travel seconds, pause seconds.
    """

    per_realization: np.ndarray
    exited_region: np.ndarray

    @property
    def n_realizations(self):
        return self.per_realization.shape[0]

    @property
    def handoffs(self):
        return int(np.sum(self.per_realization[:, 0]))

    @property
    def travel_time_s(self):
        return float(np.sum(self.per_realization[:, 1]))

    @property
    def pause_time_s(self):
        return float(np.sum(self.per_realization[:, 2]))

    @property
    def boundary_exits(self):
        return int(np.sum(self.exited_region))


def empirical_rate(stats):
    """Total handoffs over total elapsed (travel + pause) seconds."""
    elapsed = stats.travel_time_s + stats.pause_time_s
    if elapsed <= 0.0:
        raise ValueError("total elapsed time is zero; no rate is defined")
    return stats.handoffs / elapsed


def rate_stderr(stats):
    """Standard error of the empirical rate (ratio-estimator linearization).

    Realizations are i.i.d., so with n_r handoffs and d_r elapsed seconds in
    realization r and H = sum(n) / sum(d), the linearized variance is
    sum((n_r - H * d_r)^2) / sum(d)^2.
    """
    n = stats.per_realization[:, 0]
    d = stats.per_realization[:, 1] + stats.per_realization[:, 2]
    total_d = float(np.sum(d))
    if total_d <= 0.0:
        raise ValueError("total elapsed time is zero; no rate is defined")
    h = float(np.sum(n)) / total_d
    resid = n - h * d
    return float(np.sqrt(np.sum(resid * resid)) / total_d)


def _run_one(config, region, start, r, per, exited):
    rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(r,)))
    deployment = generate_ppp(config.intensity_per_m2, region, rng)
    trip = config.profile.sample_trip(config, start, rng, r)
    counts = count_handoffs_batch(trip.segments(), deployment)
    per[r, 0] = counts.sum()
    per[r, 1] = trip.travel_time
    per[r, 2] = trip.pause_time
    exited[r] = not bool(np.all(region.contains(trip.waypoints)))


def run_simulation(config):
    """Run every realization of the config and aggregate exact handoff counts."""
    region = Region.square(config.region_side_m, center=(0.0, 0.0))
    start = np.asarray(region.center, dtype=np.float64)
    n = config.realizations
    per = np.zeros((n, 3), dtype=np.float64)
    exited = np.zeros(n, dtype=bool)
    if config.workers == 1:
        for r in range(n):
            _run_one(config, region, start, r, per, exited)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            list(pool.map(lambda r: _run_one(config, region, start, r, per, exited), range(n)))
    return HandoffStats(per_realization=per, exited_region=exited)


def replay_trips(traces, config, length_from_waypoints=False):
    """Run the simulation replaying a recorded corpus under this config."""
    profile = ReplayProfile.from_traces(
        traces, length_from_waypoints=length_from_waypoints
    )
    return run_simulation(replace(config, profile=profile))
