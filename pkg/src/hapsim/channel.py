"""Air-to-ground channel: LoS state, free-space loss, shadowing, clutter, gases.

Tables are indexed by elevation bins 10, 20, ..., 90 degrees and linearly
interpolated in between; queries below the first bin take the 10 degree value.
"""

import enum
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import ConfigError

ELEVATION_BINS_DEG = tuple(range(10, 91, 10))
MIN_ELEVATION_DEG = 5.0

# incremented whenever an elevation is raised to the mask angle
diagnostics = Counter()


class ChannelScenario(str, enum.Enum):
    DENSE_URBAN = "dense-urban"
    URBAN = "urban"
    SUBURBAN_RURAL = "suburban-rural"


@dataclass(frozen=True)
class ChannelProfile:
    """Per-scenario channel tables, with band-specific entries keyed by band name.

    ``shadow_sigma_db[band]`` is a ``(los, nlos)`` pair.
    """

    scenario: ChannelScenario
    los_probability: tuple
    shadow_sigma_db: dict
    clutter_db: dict
    zenith_atmos_db: dict
    freq_ghz: dict
    elevation_bins_deg: tuple = ELEVATION_BINS_DEG
    min_elevation_deg: float = MIN_ELEVATION_DEG

    def __post_init__(self):
        where = f"channel.{ChannelScenario(self.scenario).value}"
        if tuple(self.elevation_bins_deg) != ELEVATION_BINS_DEG:
            raise ConfigError(f"elevation bins must be {list(ELEVATION_BINS_DEG)}", f"{where}.elevation_bins_deg")
        _check_table(self.los_probability, f"{where}.los_probability", lo=0.0, hi=1.0, direction=+1)
        for band, table in self.clutter_db.items():
            _check_table(table, f"{where}.clutter_db.{band}", lo=0.0, direction=-1)
        for band, pair in self.shadow_sigma_db.items():
            if len(pair) != 2 or min(pair) < 0:
                raise ConfigError("expected non-negative (los, nlos) pair", f"{where}.shadow_sigma_db.{band}")
        for band, z in self.zenith_atmos_db.items():
            if z < 0:
                raise ConfigError("must be >= 0", f"{where}.zenith_atmos_db.{band}")
        for band, f in self.freq_ghz.items():
            if f <= 0:
                raise ConfigError("must be > 0", f"{where}.freq_ghz.{band}")
        bands = set(self.clutter_db)
        for name in ("shadow_sigma_db", "zenith_atmos_db", "freq_ghz"):
            if set(getattr(self, name)) != bands:
                raise ConfigError(f"bands {sorted(getattr(self, name))} do not match clutter bands {sorted(bands)}", f"{where}.{name}")

    def sigma(self, band, is_los):
        los, nlos = self.shadow_sigma_db[band]
        return los if is_los else nlos


def _check_table(table, path, lo=0.0, hi=math.inf, direction=0):
    if len(table) != len(ELEVATION_BINS_DEG):
        raise ConfigError(f"expected {len(ELEVATION_BINS_DEG)} entries (one per 10 deg bin), got {len(table)}", path)
    arr = np.asarray(table, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < lo) or np.any(arr > hi):
        raise ConfigError(f"entries must lie in [{lo}, {hi}]", path)
    steps = np.diff(arr) * direction
    if direction and np.any(steps < 0):
        raise ConfigError("must be " + ("non-decreasing" if direction > 0 else "non-increasing") + " in elevation", path)


def _interp(table, elevation_deg):
    return np.interp(elevation_deg, ELEVATION_BINS_DEG, table)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def los_probability(profile, elevation_deg):
    e = np.asarray(elevation_deg, dtype=float)
    if np.any((e < 0) | (e > 90)):
        raise ValueError(f"elevation must lie in [0, 90], got {elevation_deg}")
    return _scalar(_interp(profile.los_probability, e))


def sample_los(p, rng):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return bool(rng.random() < p)


def fspl(freq_ghz, dist_m):
    """Free-space path loss in dB (carrier in GHz, distance in metres)."""
    f = np.asarray(freq_ghz, dtype=float)
    d = np.asarray(dist_m, dtype=float)
    if np.any(f <= 0) or np.any(d <= 0):
        raise ValueError("frequency and distance must be positive")
    return _scalar(32.45 + 20 * np.log10(f) + 20 * np.log10(d))


def clutter_loss(profile, elevation_deg, is_los, band="S"):
    """Clutter loss for NLoS links, 0 dB for LoS."""
    table = profile.clutter_db[band]
    e = np.asarray(elevation_deg, dtype=float)
    return _scalar(np.where(is_los, 0.0, _interp(table, e)))


def atmospheric_loss(zenith_atmos_db, elevation_deg, min_elevation_deg=MIN_ELEVATION_DEG):
    """Gaseous loss scaled by the air-mass factor ``1 / sin(elevation)``."""
    e = np.asarray(elevation_deg, dtype=float)
    low = e < min_elevation_deg
    if np.any(low):
        diagnostics["elevation_clamped"] += int(np.count_nonzero(low))
        e = np.maximum(e, min_elevation_deg)
    return _scalar(zenith_atmos_db / np.sin(np.radians(e)))


def sample_shadow(sigma_db, rng):
    if sigma_db < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma_db}")
    if sigma_db == 0:
        return 0.0
    return float(rng.normal(0.0, sigma_db))


@dataclass(frozen=True)
class LinkDraw:
    is_los: bool
    shadow_db: float
    total_pl_db: float
    fspl_db: float = 0.0
    clutter_db: float = 0.0
    atmos_db: float = 0.0


def total_path_loss(profile, band, elevation_deg, dist_m, rng, force_los=None):
    """Draw one link realisation.

    ``force_los`` pins the LoS state instead of sampling it (the random
    stream is still advanced so forced and free draws stay aligned).
    """
    e_eval = max(float(elevation_deg), profile.min_elevation_deg)
    p = los_probability(profile, e_eval)
    is_los = sample_los(p, rng)
    if force_los is not None:
        is_los = bool(force_los)
    shadow = sample_shadow(profile.sigma(band, is_los), rng)
    f = fspl(profile.freq_ghz[band], dist_m)
    c = clutter_loss(profile, e_eval, is_los, band)
    a = atmospheric_loss(profile.zenith_atmos_db[band], elevation_deg, profile.min_elevation_deg)
    return LinkDraw(is_los, shadow, f + shadow + c + a, f, c, a)


@dataclass
class LinkDraws:
    """Vectorised counterpart of :class:`LinkDraw`."""

    is_los: np.ndarray
    shadow_db: np.ndarray
    total_pl_db: np.ndarray
    fspl_db: np.ndarray
    clutter_db: np.ndarray
    atmos_db: np.ndarray
    clamped: np.ndarray = field(default=None)


def draw_path_loss(profile, band, elevation_deg, dist_m, u_los, u_shadow, force_los=None):
    """Path-loss draws for arrays of links from pre-drawn uniforms.

    ``u_los`` decides the LoS state (LoS when below the interpolated
    probability); ``u_shadow`` is mapped through the normal quantile
    function.  Both must lie strictly inside (0, 1).
    """
    e = np.asarray(elevation_deg, dtype=float)
    clamped = e < profile.min_elevation_deg
    e_eval = np.maximum(e, profile.min_elevation_deg)
    p = _interp(profile.los_probability, e_eval)
    if force_los is None:
        is_los = u_los < p
    else:
        is_los = np.broadcast_to(np.asarray(force_los, dtype=bool), e.shape).copy()
    sig_los, sig_nlos = profile.shadow_sigma_db[band]
    shadow = ndtri(u_shadow) * np.where(is_los, sig_los, sig_nlos)
    f = fspl(profile.freq_ghz[band], dist_m)
    c = np.where(is_los, 0.0, _interp(profile.clutter_db[band], e_eval))
    a = profile.zenith_atmos_db[band] / np.sin(np.radians(e_eval))
    if np.any(clamped):
        diagnostics["elevation_clamped"] += int(np.count_nonzero(clamped))
    return LinkDraws(is_los, shadow, f + shadow + c + a, np.asarray(f), c, a, clamped)
