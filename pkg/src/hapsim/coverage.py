"""Monte Carlo received-power coverage of a HAPS fleet over a region.

Users are dropped uniformly, every user-HAPS link gets its own channel draw,
and each user is served by the link with the highest received power.  All
random numbers are keyed by (seed, stream, user index), so the population
can be split into blocks and evaluated in any order or in parallel.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import streams
from .channel import draw_path_loss
from .geometry import (
    Region,
    below_horizon,
    elevation_from_ground_distance,
    place_haps,
    sample_user_array,
    slant_range,
)
from .link_budget import LinkBudgetResult, received_power, snr


@dataclass(frozen=True)
class CoverageConfig:
    region: Region
    haps_count: int
    band: str
    profile: object  # ChannelProfile
    terminal: object  # TerminalModel
    eirp_dbm: float
    n_users: int = 100_000
    seed: int = 0
    altitude_m: float = 20_000.0
    keep_per_user: bool = False
    block_size: int = 1 << 16
    haps_positions: tuple = None  # explicit sub-platform points; overrides haps_count placement

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.haps_count < 1:
            raise ValueError("haps_count must be >= 1")
        if self.haps_positions is not None and len(self.haps_positions) != self.haps_count:
            raise ValueError("haps_positions must list haps_count points")
        if self.band != self.terminal.band:
            raise ValueError(f"terminal band {self.terminal.band!r} does not match run band {self.band!r}")

    @property
    def scenario(self):
        return self.profile.scenario

    def platforms(self):
        if self.haps_positions is not None:
            return list(self.haps_positions)
        return place_haps(self.region, self.haps_count)


@dataclass
class CoverageResult:
    cdf: list
    below_sensitivity_fraction: float
    median_p_rx_dbm: float
    p5_p_rx_dbm: float
    mean_p_rx_dbm: float
    n_users: int
    sensitivity_dbm: float
    per_user: list = None
    best_p_rx_dbm: np.ndarray = field(default=None, repr=False)

    def percentile(self, q):
        return float(np.percentile(self.best_p_rx_dbm, q))


def associate(powers):
    """Index of the strongest link; ties go to the lowest index."""
    p = np.asarray(powers, dtype=float)
    if p.size == 0:
        raise ValueError("need at least one HAPS to associate with")
    return int(np.argmax(p))


def empirical_cdf(samples):
    """``[(value, fraction), ...]`` sorted ascending, one row per distinct value."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    if n == 0:
        raise ValueError("empirical CDF of an empty sample")
    frac = np.arange(1, n + 1) / n
    last = np.append(s[1:] != s[:-1], True)
    return list(zip(s[last].tolist(), frac[last].tolist()))


def link_power_matrix(config, users, start, force_los=None):
    """Received power of every user towards every HAPS.

    ``users`` is an ``(n, 2)`` array of positions whose absolute indices begin
    at ``start``.  Returns ``(p_rx, elevation, is_los)`` arrays of shape
    ``(n, haps_count)``; links beyond the horizon get ``-inf``.
    """
    n = len(users)
    k = config.haps_count
    p_rx = np.empty((n, k))
    elev = np.empty((n, k))
    los = np.empty((n, k), dtype=bool)
    for j, hp in enumerate(config.platforms()):
        g = np.hypot(users[:, 0] - hp.x_m, users[:, 1] - hp.y_m)
        e = elevation_from_ground_distance(g, config.altitude_m)
        d = slant_range(e, config.altitude_m)
        u = streams.uniforms(config.seed, streams.CHANNEL_BASE + j, start, n)
        draw = draw_path_loss(config.profile, config.band, e, d, u[:, 0], u[:, 1], force_los)
        p = received_power(config.eirp_dbm, config.terminal.rx_gain_dbi, draw.total_pl_db)
        p_rx[:, j] = np.where(below_horizon(g, config.altitude_m), -np.inf, p)
        elev[:, j] = e
        los[:, j] = draw.is_los
    return p_rx, elev, los


def _run_block(config, start, stop):
    users = sample_user_array(config.region, stop - start, config.seed, start=start)
    p_rx, elev, los = link_power_matrix(config, users, start)
    serving = np.argmax(p_rx, axis=1)
    rows = np.arange(len(users))
    return p_rx[rows, serving], serving, elev[rows, serving], los[rows, serving]


def run_coverage(config, n_jobs=1):
    """Evaluate the whole population and summarise its received power."""
    bounds = [
        (a, min(a + config.block_size, config.n_users))
        for a in range(0, config.n_users, config.block_size)
    ]
    if n_jobs > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda b: _run_block(config, *b), bounds))
    else:
        parts = [_run_block(config, a, b) for a, b in bounds]
    best, serving, elev, los = (np.concatenate(col) for col in zip(*parts))

    sens = config.terminal.sensitivity_dbm
    per_user = None
    if config.keep_per_user:
        noise = config.terminal.noise_dbm
        per_user = [
            LinkBudgetResult(float(p), float(snr(p, noise)), bool(p >= sens), int(s), float(e), bool(l))
            for p, s, e, l in zip(best, serving, elev, los)
        ]
    return CoverageResult(
        cdf=empirical_cdf(best),
        below_sensitivity_fraction=float(np.count_nonzero(best < sens) / best.size),
        median_p_rx_dbm=float(np.median(best)),
        p5_p_rx_dbm=float(np.percentile(best, 5)),
        mean_p_rx_dbm=float(np.mean(best)),
        n_users=config.n_users,
        sensitivity_dbm=sens,
        per_user=per_user,
        best_p_rx_dbm=best,
    )
