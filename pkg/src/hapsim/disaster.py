"""Discrete-time disaster timeline.

Each tick applies due events, evaluates every surviving site's policy,
settles its energy, and tallies where its users are served.  HAPS radio
capacity is one shared pool handed out in site-index order, so results do
not depend on evaluation order.
"""

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import streams
from .energy import (
    LEDGER_SOURCES,
    BessState,
    EvDispatch,
    GeneratorState,
    ResProfile,
    SiteLoad,
    dispatch_ev,
    dispatch_tick,
    res_generation,
)
from .errors import ConfigError
from .policy import Action, GbsStatus, Thresholds, decide_indisaster, decide_predisaster

SERVED_VIA = ("GBS", "HAPS_RAN", "HAPS_BACKHAUL", "SATELLITE")
METHODOLOGIES = ("none", "predisaster", "indisaster")
FAILED = "FAILED"

_FAIL_ORDER_STREAM = 1 << 32
_TRAFFIC_STREAM = (1 << 32) + 1


class EventKind(str, enum.Enum):
    BS_FAIL_FRACTION = "BS_FAIL_FRACTION"
    GRID_OUTAGE = "GRID_OUTAGE"
    GRID_RESTORE = "GRID_RESTORE"
    BACKBONE_CUT = "BACKBONE_CUT"
    FUEL_DELIVERY = "FUEL_DELIVERY"
    HAPS_UP = "HAPS_UP"
    HAPS_DOWN = "HAPS_DOWN"
    SAT_UP = "SAT_UP"


@dataclass(frozen=True)
class ScenarioEvent:
    """A timeline event.

    Payload keys by kind: ``fraction`` (BS_FAIL_FRACTION, cumulative share of
    sites destroyed); ``sites`` (list of ids, default all) for the grid,
    backbone, fuel and satellite events; ``hours`` (FUEL_DELIVERY); ``haps``
    (list of platform ids, default ``[0]``) for HAPS_UP/HAPS_DOWN.
    """

    time_h: float
    kind: EventKind
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        if self.time_h < 0:
            raise ConfigError(f"event time must be >= 0, got {self.time_h}", "events.time_h")
        if self.kind is EventKind.BS_FAIL_FRACTION:
            f = self.payload.get("fraction")
            if f is None or not 0.0 <= f <= 1.0:
                raise ConfigError(f"fraction must lie in [0, 1], got {f}", "events.payload.fraction")
        if self.kind is EventKind.FUEL_DELIVERY and self.payload.get("hours", 0) < 0:
            raise ConfigError("fuel hours must be >= 0", "events.payload.hours")


@dataclass(frozen=True)
class SiteSpec:
    users: int
    bess: BessState = BessState()
    generator: GeneratorState = GeneratorState()
    res: ResProfile = ResProfile()


@dataclass(frozen=True)
class HapsSpec:
    capacity_users: int = 200_000
    initially_up: bool = False


@dataclass(frozen=True)
class TrafficProfile:
    """Diurnal load ``mean - amplitude*cos(2*pi*(h - trough)/24)``, scaled per site."""

    mean: float = 0.5
    amplitude: float = 0.45
    trough_hour: float = 4.0
    site_spread: float = 0.3

    def load(self, hour_of_day, scale=1.0):
        base = self.mean - self.amplitude * math.cos(2 * math.pi * (hour_of_day - self.trough_hour) / 24)
        return min(max(base * scale, 0.0), 1.5)


@dataclass(frozen=True)
class SimSettings:
    methodology: str = "indisaster"
    thresholds: Thresholds = Thresholds()
    site_load: SiteLoad = SiteLoad()
    ev: EvDispatch = EvDispatch()
    traffic: TrafficProfile = TrafficProfile()
    satellite_fraction: float = 0.2
    start_hour: float = 4.0

    def __post_init__(self):
        if self.methodology not in METHODOLOGIES:
            raise ConfigError(f"unknown methodology {self.methodology!r}", "disaster.methodology")
        if not 0.0 <= self.satellite_fraction <= 1.0:
            raise ConfigError("must lie in [0, 1]", "policy.satellite_fraction")


@dataclass
class SiteState:
    spec: SiteSpec
    bess: BessState
    generator: GeneratorState
    failed: bool = False
    grid_ok: bool = True
    backbone_ok: bool = True
    satellite_available: bool = False
    radio_on: bool = True
    ev_schedule: object = None
    ev_remaining_kwh: float = 0.0

    @classmethod
    def fresh(cls, spec):
        return cls(spec=spec, bess=spec.bess, generator=spec.generator)


@dataclass
class WorldState:
    sites: list
    haps: list
    haps_up: list
    fail_order: list
    failed_count: int = 0

    @property
    def haps_capacity(self):
        return sum(h.capacity_users for h, up in zip(self.haps, self.haps_up) if up)


def initial_state(sites, haps_fleet, seed):
    order = streams.generator(seed, _FAIL_ORDER_STREAM).permutation(len(sites)).tolist()
    return WorldState(
        sites=[SiteState.fresh(s) for s in sites],
        haps=list(haps_fleet),
        haps_up=[h.initially_up for h in haps_fleet],
        fail_order=order,
    )


def _site_ids(state, payload):
    ids = payload.get("sites", "all")
    if ids == "all":
        return range(len(state.sites))
    for i in ids:
        if not (isinstance(i, int) and 0 <= i < len(state.sites)):
            raise ConfigError(f"unknown site id {i!r}", "events.payload.sites")
    return ids


def _haps_ids(state, payload):
    ids = payload.get("haps", [0])
    for i in ids:
        if not (isinstance(i, int) and 0 <= i < len(state.haps)):
            raise ConfigError(f"unknown HAPS id {i!r}", "events.payload.haps")
    return ids


def apply_event(state, event):
    """Apply one event in place and return the state."""
    kind, payload = event.kind, event.payload
    if kind is EventKind.BS_FAIL_FRACTION:
        target = math.floor(payload["fraction"] * len(state.sites) + 0.5)
        for i in state.fail_order[state.failed_count:target]:
            state.sites[i].failed = True
        state.failed_count = max(state.failed_count, target)
    elif kind in (EventKind.GRID_OUTAGE, EventKind.GRID_RESTORE):
        for i in _site_ids(state, payload):
            state.sites[i].grid_ok = kind is EventKind.GRID_RESTORE
    elif kind is EventKind.BACKBONE_CUT:
        for i in _site_ids(state, payload):
            state.sites[i].backbone_ok = False
    elif kind is EventKind.SAT_UP:
        for i in _site_ids(state, payload):
            state.sites[i].satellite_available = True
    elif kind is EventKind.FUEL_DELIVERY:
        for i in _site_ids(state, payload):
            s = state.sites[i]
            s.generator = replace(s.generator, fuel_hours_remaining=s.generator.fuel_hours_remaining + payload["hours"])
    elif kind in (EventKind.HAPS_UP, EventKind.HAPS_DOWN):
        for j in _haps_ids(state, payload):
            state.haps_up[j] = kind is EventKind.HAPS_UP
    return state


@dataclass(frozen=True)
class TickRow:
    tick: int
    time_h: float
    coverage_ratio: float
    served: dict
    unserved: int
    failed_sites: int
    haps_up: int


@dataclass
class TimelineResult:
    rows: list
    soc: np.ndarray  # (ticks, sites), end of tick
    soc_start: np.ndarray  # (ticks, sites), start of tick
    actions: list  # per tick, per site action name
    decisions: list  # (tick, site, status dict, action, request_ev)
    ledger: list  # (tick, site, source, kWh)
    users_total: int
    dt_h: float
    methodology: str

    @property
    def coverage(self):
        return np.array([r.coverage_ratio for r in self.rows])

    @property
    def times(self):
        return np.array([r.time_h for r in self.rows])


def _bess_covers_tick(bess, floor, need_kwh, res_kwh, dt_h):
    above = max(0.0, (bess.soc - floor) * bess.capacity_kwh) * bess.discharge_efficiency
    return res_kwh + min(above, bess.max_discharge_kw * dt_h) >= need_kwh - 1e-9


def run_timeline(sites, haps_fleet, events, horizon_h, dt_h, seed, settings=SimSettings()):
    if dt_h <= 0:
        raise ValueError("dt_h must be > 0")
    times = [e.time_h for e in events]
    if times != sorted(times):
        raise ValueError("events must be sorted by time")
    state = initial_state(sites, haps_fleet, seed)
    n_sites = len(sites)
    users_total = sum(s.users for s in sites)
    n_ticks = int(round(horizon_h / dt_h))
    scales = 1.0 + settings.traffic.site_spread * (
        2 * streams.uniforms(seed, _TRAFFIC_STREAM, 0, n_sites)[:, 0] - 1
    )
    load_kw = settings.site_load

    rows, actions, decisions, ledger = [], [], [], []
    soc = np.empty((n_ticks, n_sites))
    soc_start = np.empty((n_ticks, n_sites))
    ev_idx = 0
    for k in range(n_ticks):
        t = k * dt_h
        while ev_idx < len(events) and events[ev_idx].time_h <= t + 1e-9:
            apply_event(state, events[ev_idx])
            ev_idx += 1
        hour = (settings.start_hour + t) % 24.0
        haps_up = any(state.haps_up)
        left = state.haps_capacity
        served = dict.fromkeys(SERVED_VIA, 0)
        tick_actions = []
        for i, site in enumerate(state.sites):
            soc_start[k, i] = site.bess.soc
            users = site.spec.users
            if site.failed:
                got = min(users, left)
                left -= got
                served["HAPS_RAN"] += got
                tick_actions.append(FAILED)
                soc[k, i] = site.bess.soc
                continue

            res_kw = res_generation(site.spec.res, hour)
            need_active = load_kw.active_kw * dt_h
            fits = left >= users
            load = settings.traffic.load(hour, scales[i]) if settings.methodology == "predisaster" else 0.5
            soc_view = site.bess.soc
            if soc_view > site.bess.reserve_soc and not _bess_covers_tick(
                site.bess, site.bess.reserve_soc, need_active, res_kw * dt_h, dt_h
            ):
                soc_view = site.bess.reserve_soc  # battery can no longer carry a full tick
            # backhaul through the HAPS uses no radio capacity
            backhaul_only = site.grid_ok and settings.methodology == "indisaster"
            status = GbsStatus(
                radio_on=site.radio_on,
                grid_ok=site.grid_ok,
                backbone_ok=site.backbone_ok,
                haps_available=haps_up and (fits or backhaul_only),
                satellite_available=site.satellite_available,
                load=load,
                soc=soc_view,
                generator_fuel_h=site.generator.fuel_hours_remaining,
                ev_inbound=site.ev_schedule is not None,
                reserve_soc=site.bess.reserve_soc,
            )

            demand = load_kw.active_kw
            kwargs = dict(backup=(), bess_floor_soc=site.bess.reserve_soc)
            via = {}
            if settings.methodology == "none":
                act = Action.SERVE_NORMALLY if site.grid_ok else Action.RUN_ON_BESS
                request_ev = False
                kwargs = dict(backup=("bess", "generator"), bess_floor_soc=0.0)
                gbs_users = users if site.backbone_ok else 0
            else:
                if settings.methodology == "predisaster" and site.grid_ok:
                    decision = decide_predisaster(status, settings.thresholds)
                else:
                    decision = decide_indisaster(status)
                act, request_ev = decision.action, decision.request_ev
                kwargs["hold_bess"] = decision.hold_bess
                gbs_users = users if site.backbone_ok else 0
                if act is Action.SLEEP_OFFLOAD_HAPS:
                    demand = load_kw.radio_off_kw
                    via["HAPS_RAN"] = users
                    gbs_users = 0
                elif act is Action.OFFLOAD_NEW_ARRIVALS:
                    keep = min(users, math.floor(users * settings.thresholds.rho_high / load))
                    via["HAPS_RAN"] = users - keep
                    gbs_users = keep
                elif act is Action.RADIO_OFF_SERVE_VIA_HAPS:
                    demand = load_kw.radio_off_kw
                    via["HAPS_RAN"] = users
                    gbs_users = 0
                elif act is Action.HAPS_BACKHAUL:
                    via["HAPS_BACKHAUL"] = users
                    gbs_users = 0
                elif act is Action.RUN_ON_BESS:
                    kwargs["backup"] = ("bess",)
                elif act is Action.RUN_ON_GENERATOR:
                    kwargs["backup"] = ("generator",)
                elif act is Action.SATELLITE_FALLBACK:
                    demand = 0.0
                    via["SATELLITE"] = math.floor(users * settings.satellite_fraction)
                    gbs_users = 0
                elif act in (Action.REQUEST_EV, Action.OUTAGE):
                    demand = 0.0
                    gbs_users = 0
                elif act in (Action.SERVE_NORMALLY, Action.WAKE) and load > 1.0:
                    gbs_users = math.floor(users / load)  # congested, no offload
                if act in (Action.SLEEP_OFFLOAD_HAPS, Action.RADIO_OFF_SERVE_VIA_HAPS):
                    site.radio_on = False
                elif act is not Action.SATELLITE_FALLBACK and demand > 0:
                    site.radio_on = True
            if request_ev and site.ev_schedule is None:
                sched = dispatch_ev(t, settings.ev)
                if not sched.empty:
                    site.ev_schedule = sched
                    site.ev_remaining_kwh = sched.energy_kwh

            ev_offer = 0.0
            if site.ev_schedule is not None and not kwargs.get("hold_bess"):
                ev_offer = min(site.ev_schedule.energy_between(t, t + dt_h), site.ev_remaining_kwh)
            out = dispatch_tick(
                demand,
                dt_h,
                bess=site.bess,
                generator=site.generator,
                res_kw=res_kw,
                grid_ok=site.grid_ok,
                ev_offer_kwh=ev_offer,
                **kwargs,
            )
            site.bess, site.generator = out.bess, out.generator
            if site.ev_schedule is not None and ev_offer > 0:
                site.ev_remaining_kwh -= out.ev_taken_kwh
                if out.ev_taken_kwh < ev_offer - 1e-9 or site.ev_remaining_kwh <= 1e-9 or t + dt_h >= site.ev_schedule.end_h:
                    site.ev_schedule, site.ev_remaining_kwh = None, 0.0

            if gbs_users and out.served and demand > 0:
                served["GBS"] += gbs_users
            for key, n in via.items():
                if key == "HAPS_RAN":
                    n = min(n, left)
                    left -= n
                served[key] += n
            for src in LEDGER_SOURCES:
                v = out.flows[src]
                if v != 0.0:
                    ledger.append((k, i, src, v))
            decisions.append((k, i, status, act.value, request_ev))
            tick_actions.append(act.value)
            soc[k, i] = site.bess.soc

        total_served = sum(served.values())
        rows.append(
            TickRow(
                tick=k,
                time_h=t,
                coverage_ratio=total_served / users_total if users_total else 1.0,
                served=served,
                unserved=users_total - total_served,
                failed_sites=state.failed_count,
                haps_up=sum(state.haps_up),
            )
        )
        actions.append(tick_actions)
    return TimelineResult(rows, soc, soc_start, actions, decisions, ledger, users_total, dt_h, settings.methodology)


def resilience_metrics(result):
    if not result.rows:
        raise ValueError("empty timeline")
    cov = result.coverage
    unserved_uh = float(np.sum((1.0 - cov) * result.users_total * result.dt_h))
    full = cov >= 1.0 - 1e-12
    if full.all():
        restore = 0.0
    elif full[-1]:
        last_gap = int(np.flatnonzero(~full)[-1])
        restore = float(result.rows[last_gap + 1].time_h)
    else:
        restore = None
    energy = dict.fromkeys(LEDGER_SOURCES, 0.0)
    for _, _, src, v in result.ledger:
        energy[src] += v
    return {
        "unserved_user_hours": unserved_uh,
        "time_to_full_restoration_h": restore,
        "min_coverage": float(cov.min()),
        "mean_coverage": float(cov.mean()),
        "energy_kwh_by_source": energy,
    }
