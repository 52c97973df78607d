"""Route-trace ingestion: a newline-delimited JSON schema for recorded trips,
reduction of multi-segment transitions to (length, velocity) samples, and
corpus summary statistics.

Schema: one trip per line, each line a JSON object

    {
      "trip_id": "<string>",
      "transitions": [
        {
          "waypoints": [[lat, lon], [lat, lon]],
          "sub_segments": [
            {"length_m": <number>, "velocity_mps": <number>},
            ...
          ]
        },
        ...
      ]
    }

A transition is one straight hop between consecutive trip waypoints; its
sub-segments are the road-network pieces a router produced for that hop,
each with a length and a travel speed. The reduction to one sample per
transition uses the total length and the harmonic (time-weighted) velocity

    V = L_total / sum(L_j / V_j)

so the reduced sample preserves the transition's true travel time.

Producing traces from a routing engine: request a route per consecutive
waypoint pair, then emit one transition whose ``waypoints`` are the pair and
whose ``sub_segments`` are the engine's per-step distances (metres) and
speeds (m/s, distance over duration). ``transition_from_steps`` assembles a
transition from such arrays; the live engine client itself is out of scope.
"""

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EARTH_RADIUS_M",
    "SubSegment",
    "Transition",
    "RouteTrace",
    "TransitionSample",
    "CorpusSummary",
    "TraceParseError",
    "parse_trace_file",
    "serialize_traces",
    "reduce_transition",
    "geodesic_distance",
    "corpus_statistics",
    "transition_from_steps",
    "trip_to_trace",
]

EARTH_RADIUS_M = 6_371_000.0
LONG_TRIP_TRANSITIONS = 30  # road-trip corpora rarely exceed this; warn beyond


class TraceParseError(ValueError):
    """A trace file violates the schema; the message names trip and index."""


@dataclass(frozen=True)
class SubSegment:
    length_m: float
    velocity_mps: float


@dataclass(frozen=True)
class Transition:
    """One hop between two (lat, lon) waypoints, with router sub-segments."""

    waypoints: tuple  # ((lat, lon), (lat, lon))
    sub_segments: tuple  # of SubSegment


@dataclass(frozen=True)
class RouteTrace:
    trip_id: str
    transitions: tuple  # of Transition


@dataclass(frozen=True)
class TransitionSample:
    """A transition reduced to scalar length and harmonic velocity."""

    length_m: float
    velocity_mps: float


@dataclass(frozen=True)
class CorpusSummary:
    n_trips: int
    n_transitions: int
    mean_length_m: float
    median_length_m: float
    lengths_m: np.ndarray
    velocities_mps: np.ndarray
    velocity_hist_counts: np.ndarray
    velocity_hist_edges: np.ndarray


def _check_latlon(pt, where):
    if (
        not isinstance(pt, (list, tuple))
        or len(pt) != 2
        or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in pt)
    ):
        raise TraceParseError("%s: waypoint must be a finite [lat, lon] pair" % where)
    lat = float(pt[0])
    if lat < -90.0 or lat > 90.0:
        raise TraceParseError("%s: latitude %g out of range" % (where, lat))
    return (lat, float(pt[1]))


def _parse_transition(obj, where):
    if not isinstance(obj, dict):
        raise TraceParseError("%s: transition must be an object" % where)
    wps = obj.get("waypoints")
    if not isinstance(wps, list) or len(wps) != 2:
        raise TraceParseError("%s: waypoints must be two [lat, lon] pairs" % where)
    waypoints = tuple(_check_latlon(p, where) for p in wps)
    subs = obj.get("sub_segments")
    if not isinstance(subs, list) or len(subs) == 0:
        raise TraceParseError("%s: sub_segments must be a non-empty list" % where)
    parsed = []
    for j, s in enumerate(subs):
        if not isinstance(s, dict):
            raise TraceParseError("%s: sub_segment %d must be an object" % (where, j))
        try:
            length = float(s["length_m"])
            vel = float(s["velocity_mps"])
        except (KeyError, TypeError, ValueError):
            raise TraceParseError(
                "%s: sub_segment %d needs numeric length_m and velocity_mps"
                % (where, j)
            ) from None
        if not (math.isfinite(length) and length > 0.0):
            raise TraceParseError(
                "%s: sub_segment %d length_m must be positive" % (where, j)
            )
        if not (math.isfinite(vel) and vel > 0.0):
            raise TraceParseError(
                "%s: sub_segment %d velocity_mps must be positive" % (where, j)
            )
        parsed.append(SubSegment(length_m=length, velocity_mps=vel))
    return Transition(waypoints=waypoints, sub_segments=tuple(parsed))


def parse_trace_file(data):
    """Parse newline-delimited JSON trips from bytes or str.

    Blank lines are ignored. Any schema violation raises TraceParseError
    identifying the trip id (or line number) and transition index.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    traces = []
    seen_ids = set()
    for lineno, line in enumerate(data.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceParseError("line %d: invalid JSON: %s" % (lineno, exc)) from None
        if not isinstance(obj, dict):
            raise TraceParseError("line %d: trip must be a JSON object" % lineno)
        trip_id = obj.get("trip_id")
        if not isinstance(trip_id, str) or not trip_id:
            raise TraceParseError("line %d: trip_id must be a non-empty string" % lineno)
        if trip_id in seen_ids:
            raise TraceParseError("line %d: duplicate trip_id %r" % (lineno, trip_id))
        seen_ids.add(trip_id)
        trans = obj.get("transitions")
        if not isinstance(trans, list) or len(trans) == 0:
            raise TraceParseError(
                "trip %r: transitions must be a non-empty list" % trip_id
            )
        parsed = tuple(
            _parse_transition(t, "trip %r transition %d" % (trip_id, i))
            for i, t in enumerate(trans)
        )
        traces.append(RouteTrace(trip_id=trip_id, transitions=parsed))
    return traces


def serialize_traces(traces):
    """Render traces back to newline-delimited JSON (inverse of parsing)."""
    lines = []
    for trace in traces:
        obj = {
            "trip_id": trace.trip_id,
            "transitions": [
                {
                    "waypoints": [list(w) for w in t.waypoints],
                    "sub_segments": [
                        {"length_m": s.length_m, "velocity_mps": s.velocity_mps}
                        for s in t.sub_segments
                    ],
                }
                for t in trace.transitions
            ],
        }
        lines.append(json.dumps(obj, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


def geodesic_distance(a, b):
    """Great-circle distance in metres between (lat, lon) points, in degrees.

    Haversine formula on a sphere of radius 6,371,000 m; exactly symmetric in
    its arguments.
    """
    lat1, lon1 = (float(v) for v in a)
    lat2, lon2 = (float(v) for v in b)
    for lat in (lat1, lat2):
        if lat < -90.0 or lat > 90.0:
            raise ValueError("latitude %g out of range [-90, 90]" % lat)
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    dphi = math.radians(abs(lat2 - lat1))
    dlam = math.radians(abs(lon2 - lon1))
    h = (
        math.sin(dphi / 2.0) ** 2
        + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def reduce_transition(transition, length_from_waypoints=False):
    """Collapse a transition to one (length, harmonic velocity) sample.

    The velocity is total length over total travel time of the sub-segments,
    which preserves the transition duration. By default the length is the
    sum of sub-segment lengths (the routed path); with
    ``length_from_waypoints`` it is the great-circle distance between the
    transition's endpoints (the straight-line hop) while the velocity still
    comes from the sub-segment timing.
    """
    subs = transition.sub_segments
    routed = sum(s.length_m for s in subs)
    travel_s = sum(s.length_m / s.velocity_mps for s in subs)
    length = (
        geodesic_distance(*transition.waypoints) if length_from_waypoints else routed
    )
    if length <= 0.0:
        raise ValueError("transition reduced to non-positive length")
    return TransitionSample(length_m=length, velocity_mps=routed / travel_s)


def corpus_statistics(traces, length_from_waypoints=False, hist_bins=50):
    """Pool every transition of every trip into summary statistics.

    Emits a warning for any trip with more than 30 transitions, which is
    outside the range road-trip corpora normally show and often indicates a
    segmentation problem upstream.
    """
    if not traces:
        raise ValueError("corpus is empty")
    lengths = []
    velocities = []
    n_transitions = 0
    for trace in traces:
        if len(trace.transitions) > LONG_TRIP_TRANSITIONS:
            warnings.warn(
                "trip %r has %d transitions (more than %d)"
                % (trace.trip_id, len(trace.transitions), LONG_TRIP_TRANSITIONS),
                stacklevel=2,
            )
        for t in trace.transitions:
            sample = reduce_transition(t, length_from_waypoints=length_from_waypoints)
            lengths.append(sample.length_m)
            velocities.append(sample.velocity_mps)
            n_transitions += 1
    lengths = np.asarray(lengths, dtype=np.float64)
    velocities = np.asarray(velocities, dtype=np.float64)
    counts, edges = np.histogram(velocities, bins=hist_bins)
    return CorpusSummary(
        n_trips=len(traces),
        n_transitions=n_transitions,
        mean_length_m=float(np.mean(lengths)),
        median_length_m=float(np.median(lengths)),
        lengths_m=lengths,
        velocities_mps=velocities,
        velocity_hist_counts=counts,
        velocity_hist_edges=edges,
    )


def transition_from_steps(start, end, step_lengths_m, step_velocities_mps):
    """Assemble one schema transition from routing-engine step arrays.

    ``start`` and ``end`` are (lat, lon); the step arrays are the engine's
    per-step distances in metres and speeds in m/s for the route between
    them. See the module docstring for the full production recipe.
    """
    subs = tuple(
        SubSegment(length_m=float(l), velocity_mps=float(v))
        for l, v in zip(step_lengths_m, step_velocities_mps, strict=True)
    )
    if not subs:
        raise ValueError("a transition needs at least one sub-segment")
    return Transition(
        waypoints=(
            (float(start[0]), float(start[1])),
            (float(end[0]), float(end[1])),
        ),
        sub_segments=subs,
    )


def trip_to_trace(trip, trip_id, origin=(0.0, 0.0)):
    """Convert a planar model trip into a schema trace.

    Planar (east, north) metres are mapped to (lat, lon) degrees around the
    origin with a local equirectangular projection; each transition becomes a
    single sub-segment carrying its length and speed, so reducing the trace
    recovers the trip's (length, velocity) samples.
    """
    lat0, lon0 = (float(v) for v in origin)
    coslat = math.cos(math.radians(lat0))
    if abs(coslat) < 1e-9:
        raise ValueError("origin latitude too close to a pole")

    def to_latlon(p):
        lat = lat0 + math.degrees(p[1] / EARTH_RADIUS_M)
        lon = lon0 + math.degrees(p[0] / (EARTH_RADIUS_M * coslat))
        return (lat, lon)

    lengths = trip.lengths
    transitions = []
    for i in range(trip.n_transitions):
        transitions.append(
            Transition(
                waypoints=(
                    to_latlon(trip.waypoints[i]),
                    to_latlon(trip.waypoints[i + 1]),
                ),
                sub_segments=(
                    SubSegment(
                        length_m=float(lengths[i]),
                        velocity_mps=float(trip.velocities[i]),
                    ),
                ),
            )
        )
    return RouteTrace(trip_id=str(trip_id), transitions=tuple(transitions))
