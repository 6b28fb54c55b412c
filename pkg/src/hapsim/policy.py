"""Per-site decision rules.

``decide_predisaster`` is the everyday sustainability loop: put lightly
loaded sites to sleep behind the HAPS, wake them when traffic returns, and
push new arrivals to the HAPS near congestion.  ``decide_indisaster`` is the
emergency loop, evaluated in strict priority order:

1. grid and backbone up             -> serve normally
2. grid up, backbone cut, HAPS      -> HAPS backhaul
3. grid down, HAPS                  -> radio off, users on HAPS, battery held
4. grid down, no HAPS, SOC > reserve -> run on battery
5. grid down, no HAPS, SOC <= reserve -> call an EV if none is inbound,
                                        run the generator while fuel lasts
6. no HAPS and no way to serve locally, satellite up -> satellite fallback
7. otherwise                        -> outage
"""

import enum
from dataclasses import dataclass

from .errors import ConfigError


class Action(str, enum.Enum):
    SERVE_NORMALLY = "SERVE_NORMALLY"
    SLEEP_OFFLOAD_HAPS = "SLEEP_OFFLOAD_HAPS"
    OFFLOAD_NEW_ARRIVALS = "OFFLOAD_NEW_ARRIVALS"
    WAKE = "WAKE"
    RADIO_OFF_SERVE_VIA_HAPS = "RADIO_OFF_SERVE_VIA_HAPS"
    RUN_ON_BESS = "RUN_ON_BESS"
    RUN_ON_GENERATOR = "RUN_ON_GENERATOR"
    REQUEST_EV = "REQUEST_EV"
    HAPS_BACKHAUL = "HAPS_BACKHAUL"
    SATELLITE_FALLBACK = "SATELLITE_FALLBACK"
    OUTAGE = "OUTAGE"


@dataclass(frozen=True)
class GbsStatus:
    radio_on: bool = True
    grid_ok: bool = True
    backbone_ok: bool = True
    haps_available: bool = False
    satellite_available: bool = False
    load: float = 0.5
    soc: float = 1.0
    generator_fuel_h: float = 0.0
    ev_inbound: bool = False
    reserve_soc: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.load <= 1.5:
            raise ValueError(f"load must lie in [0, 1.5], got {self.load}")
        if not 0.0 <= self.soc <= 1.0:
            raise ValueError(f"soc must lie in [0, 1], got {self.soc}")


@dataclass(frozen=True)
class PolicyAction:
    """One primary action plus energy-routing directives."""

    action: Action
    request_ev: bool = False
    charge_bess_from_res: bool = True
    hold_bess: bool = False


@dataclass(frozen=True)
class Thresholds:
    rho_low: float = 0.1
    rho_wake: float = 0.2
    rho_high: float = 0.9

    def __post_init__(self):
        if not self.rho_low < self.rho_wake <= self.rho_high:
            raise ConfigError(
                f"need rho_low < rho_wake <= rho_high, got {self.rho_low}, {self.rho_wake}, {self.rho_high}",
                "policy",
            )


def decide_predisaster(s, thresholds=Thresholds()):
    if not s.grid_ok:
        raise ValueError("pre-disaster rules assume a healthy grid")
    t = thresholds
    charge = s.soc < 1.0
    if not s.radio_on:
        # asleep: stay asleep until traffic crosses the wake threshold
        if s.load >= t.rho_wake or not s.haps_available:
            return PolicyAction(Action.WAKE, charge_bess_from_res=charge)
        return PolicyAction(Action.SLEEP_OFFLOAD_HAPS, charge_bess_from_res=charge)
    if s.load < t.rho_low and s.haps_available:
        return PolicyAction(Action.SLEEP_OFFLOAD_HAPS, charge_bess_from_res=charge)
    if s.load > t.rho_high and s.haps_available:
        return PolicyAction(Action.OFFLOAD_NEW_ARRIVALS, charge_bess_from_res=charge)
    return PolicyAction(Action.SERVE_NORMALLY, charge_bess_from_res=charge)


def decide_indisaster(s):
    if s.grid_ok and s.backbone_ok:
        return PolicyAction(Action.SERVE_NORMALLY)
    if s.grid_ok:
        if s.haps_available:
            return PolicyAction(Action.HAPS_BACKHAUL)
        # powered but cut off from the core: only a satellite link helps
        if s.satellite_available:
            return PolicyAction(Action.SATELLITE_FALLBACK)
        return PolicyAction(Action.OUTAGE)
    if s.haps_available:
        return PolicyAction(Action.RADIO_OFF_SERVE_VIA_HAPS, charge_bess_from_res=False, hold_bess=True)
    if s.soc > s.reserve_soc:
        return PolicyAction(Action.RUN_ON_BESS)
    request = not s.ev_inbound
    if s.generator_fuel_h > 0:
        return PolicyAction(Action.RUN_ON_GENERATOR, request_ev=request)
    if s.satellite_available:
        return PolicyAction(Action.SATELLITE_FALLBACK, request_ev=request)
    if request:
        return PolicyAction(Action.REQUEST_EV, request_ev=True)
    return PolicyAction(Action.OUTAGE)
