"""Route-trace ingestion tests: schema validation with precise error
attribution, serialization round trips, great-circle arithmetic, and the
harmonic-velocity reduction."""

import json
import math

import numpy as np
import pytest

from rwpkit import (
    EARTH_RADIUS_M,
    BearingModel,
    SubSegment,
    TraceParseError,
    Transition,
    corpus_statistics,
    generate_trip,
    geodesic_distance,
    get_preset,
    parse_trace_file,
    reduce_transition,
    serialize_traces,
    transition_from_steps,
    trip_to_trace,
)

GOOD_LINE = json.dumps(
    {
        "trip_id": "t-1",
        "transitions": [
            {
                "waypoints": [[40.75, -73.99], [40.76, -73.97]],
                "sub_segments": [
                    {"length_m": 800.0, "velocity_mps": 9.0},
                    {"length_m": 1100.0, "velocity_mps": 13.0},
                ],
            }
        ],
    }
)


def test_parse_single_trip():
    traces = parse_trace_file(GOOD_LINE + "\n\n")
    assert len(traces) == 1
    trace = traces[0]
    assert trace.trip_id == "t-1"
    assert len(trace.transitions) == 1
    tr = trace.transitions[0]
    assert tr.waypoints == ((40.75, -73.99), (40.76, -73.97))
    assert tr.sub_segments[0] == SubSegment(length_m=800.0, velocity_mps=9.0)
    # bytes input works too
    assert parse_trace_file(GOOD_LINE.encode()) == traces


def _broken(mutate):
    obj = json.loads(GOOD_LINE)
    mutate(obj)
    return json.dumps(obj)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("{not json", "invalid JSON"),
        ('["list"]', "must be a JSON object"),
        (_broken(lambda o: o.pop("trip_id")), "trip_id"),
        (_broken(lambda o: o.update(trip_id="")), "trip_id"),
        (GOOD_LINE + "\n" + GOOD_LINE, "duplicate trip_id 't-1'"),
        (_broken(lambda o: o.update(transitions=[])), "trip 't-1'"),
        (
            _broken(lambda o: o["transitions"][0].pop("waypoints")),
            "trip 't-1' transition 0",
        ),
        (
            _broken(
                lambda o: o["transitions"][0].update(
                    waypoints=[[40.75, -73.99]]
                )
            ),
            "two [lat, lon] pairs",
        ),
        (
            _broken(
                lambda o: o["transitions"][0].update(
                    waypoints=[[95.0, 0.0], [40.76, -73.97]]
                )
            ),
            "latitude 95 out of range",
        ),
        (
            _broken(
                lambda o: o["transitions"][0].update(
                    waypoints=[[None, 0.0], [40.76, -73.97]]
                )
            ),
            "finite [lat, lon]",
        ),
        (_broken(lambda o: o["transitions"][0].update(sub_segments=[])), "sub_segments"),
        (
            _broken(
                lambda o: o["transitions"][0]["sub_segments"][1].update(length_m=-5)
            ),
            "sub_segment 1 length_m",
        ),
        (
            _broken(
                lambda o: o["transitions"][0]["sub_segments"][0].update(
                    velocity_mps=0.0
                )
            ),
            "sub_segment 0 velocity_mps",
        ),
        (
            _broken(lambda o: o["transitions"][0]["sub_segments"][0].pop("length_m")),
            "needs numeric length_m",
        ),
    ],
)
def test_parse_errors_identify_the_culprit(text, needle):
    with pytest.raises(TraceParseError) as err:
        parse_trace_file(text)
    assert needle in str(err.value)


def test_serialize_round_trip():
    traces = parse_trace_file(GOOD_LINE)
    text = serialize_traces(traces)
    assert text.endswith("\n")
    assert parse_trace_file(text) == traces
    # serialization is canonical: a second pass is byte-identical
    assert serialize_traces(parse_trace_file(text)) == text
    assert serialize_traces([]) == ""


def test_geodesic_known_values():
    # one degree of longitude on the equator is 1/360 of the circumference
    oracle = 2.0 * math.pi * EARTH_RADIUS_M / 360.0
    assert geodesic_distance((0.0, 10.0), (0.0, 11.0)) == pytest.approx(
        oracle, rel=1e-12
    )
    # pole to pole is half the circumference
    assert geodesic_distance((90.0, 0.0), (-90.0, 77.0)) == pytest.approx(
        math.pi * EARTH_RADIUS_M, rel=1e-12
    )
    assert geodesic_distance((51.5, -0.1), (51.5, -0.1)) == 0.0
    with pytest.raises(ValueError):
        geodesic_distance((91.0, 0.0), (0.0, 0.0))


def test_geodesic_is_exactly_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(200):
        a = (rng.uniform(-90, 90), rng.uniform(-180, 180))
        b = (rng.uniform(-90, 90), rng.uniform(-180, 180))
        assert geodesic_distance(a, b) == geodesic_distance(b, a)


def test_harmonic_velocity_reduction():
    # 50 m at 10 m/s then 50 m at 5 m/s: 100 m in 15 s, exactly 20/3 m/s
    tr = transition_from_steps(
        (40.0, -74.0), (40.001, -74.0), [50.0, 50.0], [10.0, 5.0]
    )
    sample = reduce_transition(tr)
    assert sample.length_m == 100.0
    assert sample.velocity_mps == pytest.approx(20.0 / 3.0, rel=1e-15)


def test_reduce_transition_length_sources():
    tr = parse_trace_file(GOOD_LINE)[0].transitions[0]
    routed = reduce_transition(tr)
    assert routed.length_m == pytest.approx(1900.0, rel=1e-12)
    straight = reduce_transition(tr, length_from_waypoints=True)
    assert straight.length_m == pytest.approx(
        geodesic_distance(*tr.waypoints), rel=1e-12
    )
    # the velocity is timing-based either way
    assert straight.velocity_mps == routed.velocity_mps
    degenerate = Transition(
        waypoints=((0.0, 0.0), (0.0, 0.0)),
        sub_segments=(SubSegment(length_m=10.0, velocity_mps=2.0),),
    )
    with pytest.raises(ValueError):
        reduce_transition(degenerate, length_from_waypoints=True)


def test_transition_from_steps_validation():
    with pytest.raises(ValueError):
        transition_from_steps((0.0, 0.0), (1.0, 1.0), [], [])
    with pytest.raises(ValueError):
        transition_from_steps((0.0, 0.0), (1.0, 1.0), [10.0, 20.0], [5.0])


def test_trip_round_trips_through_the_schema():
    preset = get_preset("toronto")
    trip = generate_trip(
        (0.0, 0.0),
        8,
        preset.length,
        preset.velocity,
        BearingModel.uniform(),
        rng=np.random.default_rng(17),
    )
    trace = trip_to_trace(trip, "sim-0", origin=(43.65, -79.38))
    text = serialize_traces([trace])
    back = parse_trace_file(text)[0]
    samples = [reduce_transition(t) for t in back.transitions]
    assert np.allclose([s.length_m for s in samples], trip.lengths, rtol=1e-12)
    assert np.allclose(
        [s.velocity_mps for s in samples], trip.velocities, rtol=1e-12
    )
    # the projected hop distance agrees with the planar length to first order
    straight = [
        reduce_transition(t, length_from_waypoints=True).length_m
        for t in back.transitions
    ]
    assert np.allclose(straight, trip.lengths, rtol=2e-3)
    with pytest.raises(ValueError):
        trip_to_trace(trip, "sim-1", origin=(90.0, 0.0))


def test_corpus_statistics_pools_all_transitions():
    preset = get_preset("rome")
    rng = np.random.default_rng(23)
    traces = [
        trip_to_trace(
            generate_trip(
                (0.0, 0.0), 6, preset.length, preset.velocity,
                BearingModel.uniform(), rng=rng,
            ),
            f"trip-{k}",
            origin=(41.9, 12.5),
        )
        for k in range(40)
    ]
    summary = corpus_statistics(traces)
    assert summary.n_trips == 40
    assert summary.n_transitions == 240
    assert summary.lengths_m.shape == (240,)
    assert summary.velocities_mps.shape == (240,)
    assert summary.mean_length_m == pytest.approx(summary.lengths_m.mean())
    assert summary.median_length_m == pytest.approx(np.median(summary.lengths_m))
    assert summary.velocity_hist_counts.sum() == 240
    assert summary.velocity_hist_edges.size == summary.velocity_hist_counts.size + 1
    with pytest.raises(ValueError):
        corpus_statistics([])


def test_corpus_statistics_warns_on_overlong_trips():
    preset = get_preset("rome")
    trip = generate_trip(
        (0.0, 0.0), 31, preset.length, preset.velocity,
        BearingModel.uniform(), rng=np.random.default_rng(2),
    )
    trace = trip_to_trace(trip, "marathon")
    with pytest.warns(UserWarning, match="marathon"):
        corpus_statistics([trace])
