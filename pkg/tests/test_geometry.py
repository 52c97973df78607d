"""Deployment geometry tests.

The boundary-intensity estimator gets an oracle that needs no Poisson
theory at all: on a square lattice of sites the cell boundaries form a
known grid with exactly 2 / spacing meters of boundary per unit area, and
the isotropic-needle crossing relation must recover that figure with only
probe noise.
"""

import math

import numpy as np
import pytest

from rwpkit import (
    Deployment,
    Region,
    boundary_length_intensity,
    count_handoffs,
    count_handoffs_batch,
    generate_ppp,
    nearest_site,
)
from _oracles import crossings_by_events


def test_region_basics():
    r = Region(-10.0, -20.0, 30.0, 20.0)
    assert r.width == 40.0 and r.height == 40.0
    assert r.area == 1600.0
    assert r.center == (10.0, 0.0)
    sq = Region.square(100.0, center=(5.0, 5.0))
    assert (sq.xmin, sq.ymin, sq.xmax, sq.ymax) == (-45.0, -45.0, 55.0, 55.0)
    inside = r.contains(np.array([[0.0, 0.0], [30.0, 20.0], [31.0, 0.0]]))
    assert inside.tolist() == [True, True, False]
    with pytest.raises(ValueError):
        Region(1.0, 0.0, 1.0, 2.0)


def test_generate_ppp_count_and_uniformity():
    region = Region.square(10_000.0)
    lam = 5e-5
    rng = np.random.default_rng(8)
    dep = generate_ppp(lam, region, rng)
    expected = lam * region.area
    assert abs(dep.n_sites - expected) < 5.0 * math.sqrt(expected)
    assert np.all(region.contains(dep.sites))
    # positions uniform on each axis
    from scipy import stats

    for axis in (0, 1):
        u = (dep.sites[:, axis] - region.xmin) / region.width
        assert stats.kstest(u, "uniform").pvalue > 0.01
    # same seed reproduces the deployment exactly
    dep2 = generate_ppp(lam, region, np.random.default_rng(8))
    assert np.array_equal(dep.sites, dep2.sites)


def test_generate_ppp_guards():
    region = Region.square(10_000.0)
    with pytest.raises(ValueError):
        generate_ppp(0.0, region, np.random.default_rng(0))
    with pytest.raises(ValueError):
        generate_ppp(1.0, region, np.random.default_rng(0))  # 1e8 expected sites


def test_deployment_validation_and_json_round_trip():
    region = Region.square(100.0)
    with pytest.raises(ValueError):
        Deployment(1e-4, np.array([[60.0, 0.0]]), region)
    dep = Deployment(
        1e-4, np.array([[1.25, -3.5], [-40.0, 40.0]]), region, wrap=True
    )
    back = Deployment.from_json(dep.to_json())
    assert back.intensity_per_m2 == dep.intensity_per_m2
    assert back.region == dep.region
    assert back.wrap is True
    assert np.array_equal(back.sites, dep.sites)


def test_nearest_site_and_ties():
    region = Region.square(100.0)
    dep = Deployment(1e-4, np.array([[-10.0, 0.0], [10.0, 0.0]]), region)
    assert nearest_site((-9.0, 5.0), dep) == 0
    assert nearest_site((9.0, 5.0), dep) == 1
    # exact tie resolves to the lowest index
    assert nearest_site((0.0, 3.0), dep) == 0
    with pytest.raises(ValueError):
        nearest_site((0.0, 0.0), Deployment(1e-4, np.empty((0, 2)), region))


def test_nearest_site_wrap_uses_periodic_images():
    region = Region(0.0, 0.0, 100.0, 100.0)
    sites = np.array([[10.0, 50.0], [40.0, 50.0]])
    flat = Deployment(2e-4, sites, region, wrap=False)
    torus = Deployment(2e-4, sites, region, wrap=True)
    # at x=99 the image of site 0 at x=110 is 11 m away, site 1 is 59 m away
    assert nearest_site((99.0, 50.0), flat) == 1
    assert nearest_site((99.0, 50.0), torus) == 0


def test_count_handoffs_matches_event_oracle():
    rng = np.random.default_rng(55)
    region = Region.square(200.0)
    for _ in range(80):
        n = int(rng.integers(2, 30))
        sites = rng.uniform(-100.0, 100.0, size=(n, 2))
        dep = Deployment(n / region.area, sites, region)
        a = rng.uniform(-100.0, 100.0, size=2)
        b = rng.uniform(-100.0, 100.0, size=2)
        assert count_handoffs(a, b, dep) == crossings_by_events(a, b, sites)


def test_count_handoffs_batch_matches_scalar():
    rng = np.random.default_rng(56)
    region = Region.square(200.0)
    sites = rng.uniform(-100.0, 100.0, size=(25, 2))
    dep = Deployment(25 / region.area, sites, region)
    segs = rng.uniform(-100.0, 100.0, size=(40, 4))
    batch = count_handoffs_batch(segs, dep)
    scalar = [count_handoffs(s[:2], s[2:], dep) for s in segs]
    assert batch.tolist() == scalar


def test_count_handoffs_trivial_deployments():
    region = Region.square(100.0)
    empty = Deployment(1e-4, np.empty((0, 2)), region)
    single = Deployment(1e-4, np.array([[0.0, 0.0]]), region)
    assert count_handoffs((-40.0, 0.0), (40.0, 0.0), empty) == 0
    assert count_handoffs((-40.0, 0.0), (40.0, 0.0), single) == 0
    assert count_handoffs_batch(np.zeros((3, 4)), single).tolist() == [0, 0, 0]


def test_wrap_counts_image_handoffs_but_not_own_seams():
    region = Region(0.0, 0.0, 100.0, 100.0)
    # crossing into a periodic image of the *other* site is a handoff:
    # boundaries at x=25 (site 0 -> site 1) and x=75 (site 1 -> image of 0)
    two = Deployment(
        2e-4, np.array([[10.0, 50.0], [40.0, 50.0]]), region, wrap=True
    )
    assert count_handoffs((20.0, 50.0), (95.0, 50.0), two) == 2
    flat = Deployment(2e-4, two.sites, region, wrap=False)
    assert count_handoffs((20.0, 50.0), (95.0, 50.0), flat) == 1
    # crossing the seam between two images of the *same* site is not:
    # with one site the torus has no boundaries at all
    one = Deployment(1e-4, np.array([[10.0, 50.0]]), region, wrap=True)
    assert count_handoffs((20.0, 50.0), (95.0, 50.0), one) == 0
    segs = np.array([[20.0, 50.0, 95.0, 50.0], [20.0, 50.0, 24.0, 50.0]])
    assert count_handoffs_batch(segs, two).tolist() == [2, 0]


def test_boundary_intensity_on_square_lattice():
    # square lattice with spacing s has exactly 2/s boundary length per m^2
    s = 100.0
    coords = np.arange(50.0, 10_000.0, s)
    gx, gy = np.meshgrid(coords, coords)
    dep = Deployment(
        1.0 / s**2,
        np.column_stack([gx.ravel(), gy.ravel()]),
        Region(0.0, 0.0, 10_000.0, 10_000.0),
    )
    est = boundary_length_intensity(dep, np.random.default_rng(9), n_probes=20_000)
    assert abs(est / (2.0 / s) - 1.0) < 0.025
    # same probes, same answer
    again = boundary_length_intensity(dep, np.random.default_rng(9), n_probes=20_000)
    assert est == again


def test_boundary_intensity_on_poisson_deployment():
    lam = 1e-6
    dep = generate_ppp(lam, Region.square(80_000.0), np.random.default_rng(14))
    est = boundary_length_intensity(dep, np.random.default_rng(15), n_probes=30_000)
    assert abs(est / (2.0 * math.sqrt(lam)) - 1.0) < 0.04


def test_boundary_intensity_guards():
    region = Region.square(7_000.0)
    dep = generate_ppp(1e-6, region, np.random.default_rng(1))
    rng = np.random.default_rng(2)
    with pytest.raises(ValueError):
        boundary_length_intensity(dep, rng, n_probes=0)
    with pytest.raises(ValueError):
        # margin of 3 / sqrt(lam) + needle does not fit in a 7 km region
        boundary_length_intensity(dep, rng, n_probes=10)
    lonely = Deployment(1e-6, np.array([[0.0, 0.0]]), Region.square(90_000.0))
    with pytest.raises(ValueError):
        boundary_length_intensity(lonely, rng, n_probes=10)
    big = generate_ppp(1e-6, Region.square(90_000.0), np.random.default_rng(3))
    with pytest.raises(ValueError):
        boundary_length_intensity(big, np.random.default_rng(4), 10, needle_length=0.0)
