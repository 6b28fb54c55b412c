"""Region, user and HAPS placement, and spherical-earth link geometry.

The affected area is a rectangle on a local tangent plane.  Ground distance
between a user and the sub-platform point is the planar Euclidean distance,
which is then treated as an arc length on a sphere of radius ``EARTH_RADIUS_M``.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import streams

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_SIDE_M = 339_116.0  # square of ~115,000 km^2
HAPS_ALTITUDE_RANGE_M = (17_000.0, 25_000.0)
BANDS = ("S", "Ka")


@dataclass(frozen=True)
class Region:
    width_m: float = DEFAULT_SIDE_M
    height_m: float = DEFAULT_SIDE_M

    def __post_init__(self):
        if not (self.width_m > 0 and self.height_m > 0):
            raise ValueError(f"region sides must be positive, got {self.width_m} x {self.height_m}")

    @property
    def area_m2(self):
        return self.width_m * self.height_m


@dataclass(frozen=True, slots=True)
class GeoPoint:
    x_m: float
    y_m: float


@dataclass(frozen=True)
class HapsNode:
    position: GeoPoint
    altitude_m: float = 20_000.0
    eirp_dbm: float = 85.0
    band: str = "S"

    def __post_init__(self):
        lo, hi = HAPS_ALTITUDE_RANGE_M
        if not lo <= self.altitude_m <= hi:
            raise ValueError(f"HAPS altitude {self.altitude_m} m outside [{lo}, {hi}]")
        if self.band not in BANDS:
            raise ValueError(f"unknown band {self.band!r}")


def sample_user_array(region, n, seed, start=0):
    """Uniform user positions as an ``(n, 2)`` array.

    Rows are keyed by absolute user index, so ``start`` lets callers draw
    any contiguous block of the population independently.
    """
    u = streams.uniforms(seed, streams.USER_PLACEMENT, start, n)
    out = np.empty((max(n, 0), 2))
    out[:, 0] = u[:, 0] * region.width_m
    out[:, 1] = u[:, 1] * region.height_m
    return out


def sample_users(region, n, seed):
    """Draw ``n`` users i.i.d. uniform over ``region``."""
    return [GeoPoint(float(x), float(y)) for x, y in sample_user_array(region, n, seed)]


def place_haps(region, k):
    """Sub-platform points for a fleet of ``k`` HAPS.

    One platform sits at the centre, two split the region along its longer
    side, four sit at the quadrant centroids.  Any other count is laid out on
    a ``ceil(sqrt(k))``-column grid of cell centres, filled row by row.
    """
    if k < 1:
        raise ValueError(f"need at least one HAPS, got k={k}")
    w, h = region.width_m, region.height_m
    if k == 2 and h > w:
        cols, rows = 1, 2
    else:
        cols = math.ceil(math.sqrt(k))
        rows = math.ceil(k / cols)
    points = []
    for r in range(rows):
        for c in range(cols):
            if len(points) == k:
                break
            points.append(GeoPoint((c + 0.5) * w / cols, (r + 0.5) * h / rows))
    return points


def _check_elevation(elevation_deg):
    e = np.asarray(elevation_deg, dtype=float)
    if np.any((e < 0) | (e > 90)) or np.any(np.isnan(e)):
        raise ValueError(f"elevation must lie in [0, 90] deg, got {elevation_deg}")
    return e


def slant_range(elevation_deg, altitude_m):
    """Distance from ground user to platform for a given elevation angle."""
    e = _check_elevation(elevation_deg)
    s = np.sin(np.radians(e))
    re = EARTH_RADIUS_M
    d = np.sqrt(re**2 * s**2 + altitude_m**2 + 2 * re * altitude_m) - re * s
    # exact at zenith rather than leaving a rounding residue
    d = np.where(e == 90, altitude_m, d)
    return float(d) if d.ndim == 0 else d


def elevation_from_ground_distance(ground_m, altitude_m):
    """Elevation (deg) seen from a user ``ground_m`` away from the sub-platform point.

    Angles below the horizon clamp to 0.
    """
    g = np.asarray(ground_m, dtype=float)
    phi = g / EARTH_RADIUS_M
    ratio = EARTH_RADIUS_M / (EARTH_RADIUS_M + altitude_m)
    e = np.degrees(np.arctan2(np.cos(phi) - ratio, np.sin(phi)))
    e = np.clip(e, 0.0, 90.0)
    return float(e) if e.ndim == 0 else e


def below_horizon(ground_m, altitude_m):
    """True where the platform is not visible above the horizon."""
    phi = np.asarray(ground_m, dtype=float) / EARTH_RADIUS_M
    return np.cos(phi) < EARTH_RADIUS_M / (EARTH_RADIUS_M + altitude_m)


def elevation_of(user, haps):
    g = math.hypot(user.x_m - haps.position.x_m, user.y_m - haps.position.y_m)
    return elevation_from_ground_distance(g, haps.altitude_m)
