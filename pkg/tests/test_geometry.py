import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hapsim.geometry import (
    EARTH_RADIUS_M,
    GeoPoint,
    HapsNode,
    Region,
    elevation_from_ground_distance,
    elevation_of,
    place_haps,
    sample_user_array,
    sample_users,
    slant_range,
)

RE = EARTH_RADIUS_M


def chord(g, h):
    """Straight-line user-platform distance by the law of cosines."""
    phi = g / RE
    return math.sqrt(RE**2 + (RE + h) ** 2 - 2 * RE * (RE + h) * math.cos(phi))


def test_default_region_area():
    assert Region().area_m2 == pytest.approx(1.15e11, rel=1e-4)


def test_region_rejects_degenerate():
    with pytest.raises(ValueError):
        Region(0, 10)


def test_haps_altitude_bounds():
    with pytest.raises(ValueError):
        HapsNode(GeoPoint(0, 0), altitude_m=30_000)


def test_sample_users_bounds_unit_region():
    for seed in range(20):
        (p,) = sample_users(Region(1.0, 1.0), 1, seed)
        assert 0 <= p.x_m <= 1 and 0 <= p.y_m <= 1


def test_sample_users_deterministic():
    r = Region()
    assert sample_users(r, 500, 7) == sample_users(r, 500, 7)
    assert sample_users(r, 500, 7) != sample_users(r, 500, 8)


def test_sample_users_zero():
    assert sample_users(Region(), 0, 1) == []


def test_sample_users_mean_within_clt_bound():
    side = 339_116.0
    pts = sample_users(Region(side, side), 1_000_000, 42)
    mean_x = sum(p.x_m for p in pts) / len(pts)
    bound = 3 * (side / math.sqrt(12)) / 1e3
    assert abs(mean_x - side / 2) <= bound


def test_block_sampling_matches_serial():
    r = Region()
    full = sample_user_array(r, 1000, 3)
    parts = np.vstack([sample_user_array(r, 300, 3, 0), sample_user_array(r, 700, 3, 300)])
    assert np.array_equal(full, parts)


def test_place_one_haps_centre():
    assert place_haps(Region(100, 60), 1) == [GeoPoint(50, 30)]


def test_place_four_haps_quadrants():
    w = h = 400.0
    assert place_haps(Region(w, h), 4) == [
        GeoPoint(w / 4, h / 4),
        GeoPoint(3 * w / 4, h / 4),
        GeoPoint(w / 4, 3 * h / 4),
        GeoPoint(3 * w / 4, 3 * h / 4),
    ]


def test_place_two_haps_along_longer_axis():
    assert place_haps(Region(200, 100), 2) == [GeoPoint(50, 50), GeoPoint(150, 50)]
    assert place_haps(Region(100, 200), 2) == [GeoPoint(50, 50), GeoPoint(50, 150)]


def test_place_other_counts_on_grid():
    pts = place_haps(Region(300, 300), 3)
    assert len(pts) == 3 and len(set(pts)) == 3
    assert place_haps(Region(300, 300), 9)[4] == GeoPoint(150, 150)


def test_place_zero_rejected():
    with pytest.raises(ValueError):
        place_haps(Region(), 0)


def test_place_deterministic():
    assert place_haps(Region(), 4) == place_haps(Region(), 4)


def test_worst_case_distance_shrinks_with_four_haps():
    r = Region()
    users = sample_user_array(r, 10_000, 11)

    def worst(k):
        hs = np.array([(p.x_m, p.y_m) for p in place_haps(r, k)])
        d = np.hypot(users[:, None, 0] - hs[None, :, 0], users[:, None, 1] - hs[None, :, 1])
        return d.min(axis=1).max()

    assert worst(4) < worst(1)


def test_slant_range_zenith_exact():
    assert slant_range(90.0, 20_000.0) == 20_000.0


def test_slant_range_horizon():
    # tangent line length sqrt((Re+h)^2 - Re^2)
    assert slant_range(0.0, 20_000.0) == pytest.approx(505_212.83, abs=1.0)


def test_slant_range_thirty_degrees():
    d = slant_range(30.0, 20_000.0)
    assert d < 20_000.0 / math.sin(math.radians(30))  # flat-earth upper bound
    assert d == pytest.approx(39_813.98, abs=0.05)


@pytest.mark.parametrize("bad", [-0.1, 90.5, float("nan")])
def test_slant_range_rejects_bad_elevation(bad):
    with pytest.raises(ValueError):
        slant_range(bad, 20_000.0)


def test_slant_range_strictly_decreasing():
    e = np.linspace(0, 90, 2001)
    assert np.all(np.diff(slant_range(e, 20_000.0)) < 0)


def test_elevation_at_sub_point():
    h = HapsNode(GeoPoint(10, 10))
    assert elevation_of(GeoPoint(10, 10), h) == 90.0


def test_elevation_at_20km():
    e = elevation_from_ground_distance(20_000.0, 20_000.0)
    assert e < 45.0
    assert e == pytest.approx(44.87, abs=0.02)


def test_elevation_strictly_decreasing_sweep():
    g = np.linspace(0, 400_000, 1000)
    e = elevation_from_ground_distance(g, 20_000.0)
    assert np.all(np.diff(e) < 0)


def test_elevation_clamps_beyond_horizon():
    assert elevation_from_ground_distance(900_000.0, 20_000.0) == 0.0


@given(st.floats(0.0, 500_000.0), st.floats(17_000.0, 25_000.0))
def test_round_trip_against_chord(g, h):
    e = elevation_from_ground_distance(g, h)
    if e <= 0:
        return
    assert slant_range(e, h) == pytest.approx(chord(g, h), rel=1e-6)
