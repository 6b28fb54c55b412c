"""Run configuration: shipped defaults, overrides, validation, and builders.

A run is described by one JSON document.  ``load_config`` deep-merges a
user document over the shipped defaults and validates the result; the
``build_*`` helpers turn a validated config into simulator inputs.
"""

import copy
import json
import os
from importlib import resources
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .channel import ELEVATION_BINS_DEG, ChannelProfile, ChannelScenario
from .coverage import CoverageConfig
from .disaster import HapsSpec, ScenarioEvent, SimSettings, SiteSpec, TrafficProfile
from .energy import BessState, EvDispatch, GeneratorState, ResProfile, SiteLoad
from .errors import ConfigError
from .geometry import HAPS_ALTITUDE_RANGE_M, Region
from .link_budget import TerminalModel
from .policy import Thresholds

CONFIG_ENV_VAR = "HAPSIM_CONFIG"
MODES = ("coverage", "predisaster", "disaster")


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RegionCfg(_Model):
    width_m: float = Field(gt=0)
    height_m: float = Field(gt=0)


class BandPair(_Model):
    S: float
    Ka: float


class HapsCfg(_Model):
    count: int = Field(ge=1)
    altitude_m: float = Field(ge=HAPS_ALTITUDE_RANGE_M[0], le=HAPS_ALTITUDE_RANGE_M[1])
    eirp_dbm: BandPair
    capacity_users: int = Field(ge=0)


class BandCfg(_Model):
    freq_ghz: float = Field(gt=0)
    zenith_atmos_db: float = Field(ge=0)


class HandheldCfg(_Model):
    rx_gain_dbi: float
    noise_figure_db: float = Field(ge=0)
    bandwidth_hz: float = Field(gt=0)
    sensitivity_dbm: float = Field(lt=0)


class VsatCfg(_Model):
    dish_diameter_m: float = Field(gt=0)
    dish_efficiency: float = Field(gt=0, le=1)
    noise_figure_db: float = Field(ge=0)
    bandwidth_hz: float = Field(gt=0)
    sensitivity_dbm: float = Field(lt=0)


class SigmaCfg(_Model):
    los: float = Field(ge=0)
    nlos: float = Field(ge=0)


class ScenarioTables(_Model):
    los_probability: List[float]
    shadow_sigma_db: Dict[Literal["S", "Ka"], SigmaCfg]
    clutter_nlos_db: Dict[Literal["S", "Ka"], List[float]]


class ChannelCfg(_Model):
    elevation_bins_deg: List[float]
    min_elevation_deg: float = Field(ge=0, lt=10)
    scenarios: Dict[Literal["dense-urban", "urban", "suburban-rural"], ScenarioTables]

    @field_validator("elevation_bins_deg")
    @classmethod
    def _bins(cls, v):
        if tuple(v) != ELEVATION_BINS_DEG:
            raise ValueError(f"must be {list(ELEVATION_BINS_DEG)}")
        return v


class CoverageCfg(_Model):
    band: Literal["S", "Ka"]
    scenario: Literal["dense-urban", "urban", "suburban-rural"]
    n_users: int = Field(ge=1)
    keep_per_user: bool
    n_jobs: int = Field(ge=1)


class SiteLoadCfg(_Model):
    active: float = Field(ge=0)
    radio_off: float = Field(ge=0)
    down: float = Field(ge=0)


class BessCfg(_Model):
    capacity_kwh: float = Field(gt=0)
    soc: float = Field(ge=0, le=1)
    max_charge_kw: float = Field(ge=0)
    max_discharge_kw: float = Field(ge=0)
    reserve_soc: float = Field(ge=0, lt=1)
    charge_efficiency: float = Field(gt=0, le=1)
    discharge_efficiency: float = Field(gt=0, le=1)


class GeneratorCfg(_Model):
    output_kw: float = Field(ge=0)
    fuel_hours: float = Field(ge=0)


class ResCfg(_Model):
    pv_peak_kw: float = Field(ge=0)
    wind_mean_kw: float = Field(ge=0)
    sunrise_h: float = Field(ge=0, lt=24)
    sunset_h: float = Field(gt=0, le=24)

    @model_validator(mode="after")
    def _daylight(self):
        if not self.sunrise_h < self.sunset_h:
            raise ValueError("sunrise_h must be before sunset_h")
        return self


class EvCfg(_Model):
    travel_time_h: float = Field(ge=0)
    deliverable_kwh: float = Field(ge=0)
    delivery_rate_kw: float = Field(ge=0)


class EnergyCfg(_Model):
    site_load_kw: SiteLoadCfg
    bess: BessCfg
    generator: GeneratorCfg
    res: ResCfg
    ev: EvCfg


class PolicyCfg(_Model):
    rho_low: float = Field(ge=0, le=1.5)
    rho_wake: float = Field(ge=0, le=1.5)
    rho_high: float = Field(ge=0, le=1.5)
    satellite_fraction: float = Field(ge=0, le=1)

    @model_validator(mode="after")
    def _order(self):
        if not self.rho_low < self.rho_wake <= self.rho_high:
            raise ValueError("need rho_low < rho_wake <= rho_high")
        return self


class TrafficCfg(_Model):
    mean: float = Field(ge=0, le=1.5)
    amplitude: float = Field(ge=0, le=1.5)
    trough_hour: float = Field(ge=0, lt=24)
    site_spread: float = Field(ge=0, lt=1)


class TimelineCfg(_Model):
    name: str
    n_sites: int = Field(ge=1)
    users_total: int = Field(ge=0)
    haps_fleet: int = Field(ge=0)
    horizon_h: float = Field(gt=0)
    dt_h: float = Field(gt=0)
    start_hour: float = Field(ge=0, lt=24)
    methodology: Literal["none", "predisaster", "indisaster"]


class PredisasterCfg(_Model):
    horizon_h: float = Field(gt=0)
    haps_initially_up: bool


class EventCfg(_Model):
    time_h: float = Field(ge=0)
    kind: Literal[
        "BS_FAIL_FRACTION", "GRID_OUTAGE", "GRID_RESTORE", "BACKBONE_CUT",
        "FUEL_DELIVERY", "HAPS_UP", "HAPS_DOWN", "SAT_UP",
    ]
    payload: Dict[str, Union[float, int, str, List[int]]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _payload(self):
        if self.kind == "BS_FAIL_FRACTION":
            f = self.payload.get("fraction")
            if not isinstance(f, (int, float)) or not 0 <= f <= 1:
                raise ValueError("BS_FAIL_FRACTION needs payload.fraction in [0, 1]")
        if self.kind == "FUEL_DELIVERY":
            h = self.payload.get("hours")
            if not isinstance(h, (int, float)) or h < 0:
                raise ValueError("FUEL_DELIVERY needs payload.hours >= 0")
        sites = self.payload.get("sites", "all")
        if sites != "all" and not isinstance(sites, list):
            raise ValueError("payload.sites must be 'all' or a list of site ids")
        return self


class RunConfig(_Model):
    mode: Literal["coverage", "predisaster", "disaster"]
    seed: int
    region: RegionCfg
    haps: HapsCfg
    bands: Dict[Literal["S", "Ka"], BandCfg]
    terminals: Dict[str, Union[HandheldCfg, VsatCfg]]
    channel: ChannelCfg
    coverage: CoverageCfg
    energy: EnergyCfg
    policy: PolicyCfg
    traffic: TrafficCfg
    timeline: TimelineCfg
    predisaster: PredisasterCfg
    events: List[EventCfg]

    @model_validator(mode="after")
    def _complete(self):
        for key in ("S", "Ka"):
            if key not in self.bands:
                raise ValueError(f"bands.{key} missing")
        if not isinstance(self.terminals.get("S"), HandheldCfg):
            raise ValueError("terminals.S must be a handheld terminal")
        if not isinstance(self.terminals.get("Ka"), VsatCfg):
            raise ValueError("terminals.Ka must be a VSAT terminal")
        times = [e.time_h for e in self.events]
        if times != sorted(times):
            raise ValueError("events must be sorted by time_h")
        return self

    def to_dict(self):
        return self.model_dump(mode="json")


def default_document():
    """The shipped default configuration as a plain dict."""
    text = resources.files("hapsim").joinpath("data/defaults.json").read_text()
    return json.loads(text)


def deep_merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _read_document(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    if not text.strip():
        return {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return doc


def validate_document(doc):
    try:
        cfg = RunConfig.model_validate(doc)
    except ValidationError as exc:
        err = exc.errors()[0]
        where = ".".join(str(p) for p in err["loc"] if not str(p).startswith("function-after"))
        raise ConfigError(err["msg"], where or None) from exc
    # domain constructors enforce the table invariants
    for name in cfg.channel.scenarios:
        channel_profile(cfg, name)
    return cfg


def load_config(path=None, overrides=None):
    """Shipped defaults, then the document at ``path``, then ``overrides``.

    Without ``path`` the ``HAPSIM_CONFIG`` environment variable is consulted.
    """
    doc = default_document()
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path:
        doc = deep_merge(doc, _read_document(path))
    if overrides:
        doc = deep_merge(doc, overrides)
    return validate_document(doc)


def dump_config(cfg, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def channel_profile(cfg, scenario=None):
    name = scenario or cfg.coverage.scenario
    tables = cfg.channel.scenarios[name]
    return ChannelProfile(
        scenario=ChannelScenario(name),
        los_probability=tuple(tables.los_probability),
        shadow_sigma_db={b: (s.los, s.nlos) for b, s in tables.shadow_sigma_db.items()},
        clutter_db={b: tuple(t) for b, t in tables.clutter_nlos_db.items()},
        zenith_atmos_db={b: cfg.bands[b].zenith_atmos_db for b in tables.clutter_nlos_db},
        freq_ghz={b: cfg.bands[b].freq_ghz for b in tables.clutter_nlos_db},
        elevation_bins_deg=tuple(int(b) for b in cfg.channel.elevation_bins_deg),
        min_elevation_deg=cfg.channel.min_elevation_deg,
    )


def terminal_model(cfg, band):
    t = cfg.terminals[band]
    if band == "Ka":
        return TerminalModel.vsat(
            t.dish_diameter_m, t.dish_efficiency, cfg.bands["Ka"].freq_ghz,
            t.noise_figure_db, t.bandwidth_hz, t.sensitivity_dbm,
        )
    return TerminalModel("S", t.rx_gain_dbi, t.noise_figure_db, t.bandwidth_hz, t.sensitivity_dbm)


def build_coverage(cfg):
    c = cfg.coverage
    return CoverageConfig(
        region=Region(cfg.region.width_m, cfg.region.height_m),
        haps_count=cfg.haps.count,
        band=c.band,
        profile=channel_profile(cfg, c.scenario),
        terminal=terminal_model(cfg, c.band),
        eirp_dbm=getattr(cfg.haps.eirp_dbm, c.band),
        n_users=c.n_users,
        seed=cfg.seed,
        altitude_m=cfg.haps.altitude_m,
        keep_per_user=c.keep_per_user,
    )


def build_timeline(cfg, mode=None):
    """Inputs for :func:`hapsim.disaster.run_timeline` as a dict of keyword arguments."""
    mode = mode or cfg.mode
    e = cfg.energy
    tl = cfg.timeline
    bess = BessState(**e.bess.model_dump())
    gen = GeneratorState(fuel_hours_remaining=e.generator.fuel_hours, output_kw=e.generator.output_kw)
    res = ResProfile(**e.res.model_dump())
    base, extra = divmod(tl.users_total, tl.n_sites)
    sites = [SiteSpec(base + (1 if i < extra else 0), bess, gen, res) for i in range(tl.n_sites)]
    if mode == "predisaster":
        fleet = [HapsSpec(cfg.haps.capacity_users, cfg.predisaster.haps_initially_up) for _ in range(tl.haps_fleet)]
        events, horizon, methodology = [], cfg.predisaster.horizon_h, "predisaster"
    else:
        fleet = [HapsSpec(cfg.haps.capacity_users, False) for _ in range(tl.haps_fleet)]
        events = [ScenarioEvent(ev.time_h, ev.kind, dict(ev.payload)) for ev in cfg.events]
        horizon, methodology = tl.horizon_h, tl.methodology
    p = cfg.policy
    settings = SimSettings(
        methodology=methodology,
        thresholds=Thresholds(p.rho_low, p.rho_wake, p.rho_high),
        site_load=SiteLoad(e.site_load_kw.active, e.site_load_kw.radio_off, e.site_load_kw.down),
        ev=EvDispatch(**e.ev.model_dump()),
        traffic=TrafficProfile(**cfg.traffic.model_dump()),
        satellite_fraction=p.satellite_fraction,
        start_hour=tl.start_hour,
    )
    return dict(sites=sites, haps_fleet=fleet, events=events, horizon_h=horizon, dt_h=tl.dt_h, seed=cfg.seed, settings=settings)
