"""Site power: renewables, battery storage, diesel backup and EV deliveries.

Energies are in kWh, powers in kW, time in hours.  ``dispatch_tick`` settles
one site for one tick and returns an energy ledger that balances exactly::

    grid + res + generator + ev + bess_discharge
        - bess_charge - load - curtailment == 0
"""

import math
from dataclasses import dataclass, replace

LEDGER_SOURCES = ("grid", "res", "generator", "ev", "bess_discharge", "bess_charge", "load", "curtailment")
_EPS = 1e-12


@dataclass(frozen=True)
class SiteLoad:
    active_kw: float = 3.0
    radio_off_kw: float = 0.5
    down_kw: float = 0.0


@dataclass(frozen=True)
class BessState:
    capacity_kwh: float = 20.0
    soc: float = 1.0
    max_charge_kw: float = 10.0
    max_discharge_kw: float = 10.0
    reserve_soc: float = 0.1
    charge_efficiency: float = 0.95
    discharge_efficiency: float = 0.95

    def __post_init__(self):
        if self.capacity_kwh <= 0:
            raise ValueError("capacity_kwh must be > 0")
        if not 0.0 <= self.soc <= 1.0:
            raise ValueError(f"soc must lie in [0, 1], got {self.soc}")
        if not 0.0 <= self.reserve_soc < 1.0:
            raise ValueError(f"reserve_soc must lie in [0, 1), got {self.reserve_soc}")
        if not (0 < self.charge_efficiency <= 1 and 0 < self.discharge_efficiency <= 1):
            raise ValueError("efficiencies must lie in (0, 1]")

    @property
    def energy_kwh(self):
        return self.soc * self.capacity_kwh


@dataclass(frozen=True)
class BessStep:
    """Outcome of one battery step.

    ``absorbed_kwh``/``delivered_kwh`` are changes of stored energy;
    ``bus_in_kwh``/``bus_out_kwh`` are the matching energies on the site bus,
    i.e. before charge losses and after discharge losses.
    """

    state: BessState
    absorbed_kwh: float
    delivered_kwh: float
    bus_in_kwh: float
    bus_out_kwh: float


def step_bess(state, charge_kw, discharge_kw, dt_h):
    if charge_kw < 0 or discharge_kw < 0:
        raise ValueError("charge and discharge power must be non-negative")
    if charge_kw > state.max_charge_kw + _EPS:
        raise ValueError(f"charge {charge_kw} kW exceeds limit {state.max_charge_kw} kW")
    if discharge_kw > state.max_discharge_kw + _EPS:
        raise ValueError(f"discharge {discharge_kw} kW exceeds limit {state.max_discharge_kw} kW")
    if charge_kw > 0 and discharge_kw > 0:
        raise ValueError("cannot charge and discharge in the same step")
    cap = state.capacity_kwh
    stored = state.soc * cap
    if charge_kw > 0:
        absorbed = min(charge_kw * state.charge_efficiency * dt_h, cap - stored)
        soc = 1.0 if absorbed == cap - stored else state.soc + absorbed / cap
        return BessStep(replace(state, soc=min(soc, 1.0)), absorbed, 0.0, absorbed / state.charge_efficiency, 0.0)
    if discharge_kw > 0:
        delivered = min(discharge_kw / state.discharge_efficiency * dt_h, stored)
        soc = 0.0 if delivered == stored else state.soc - delivered / cap
        return BessStep(replace(state, soc=max(soc, 0.0)), 0.0, delivered, 0.0, delivered * state.discharge_efficiency)
    return BessStep(state, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class GeneratorState:
    fuel_hours_remaining: float = 3.5
    burn_active: bool = False
    output_kw: float = 5.0

    def __post_init__(self):
        if self.fuel_hours_remaining < 0:
            raise ValueError("fuel_hours_remaining must be >= 0")


def step_generator(state, demand_kw, dt_h):
    """Run the generator for one tick; returns ``(state, mean supplied kW)``.

    The set burns a full hour of fuel per running hour regardless of load and
    stays off at zero demand.  When fuel runs out inside the tick, supply is
    prorated over the part of the tick it could still run.
    """
    if dt_h <= 0:
        raise ValueError("dt_h must be > 0")
    if demand_kw <= 0 or state.fuel_hours_remaining <= 0:
        return replace(state, burn_active=False), 0.0
    run_h = min(dt_h, state.fuel_hours_remaining)
    fuel = state.fuel_hours_remaining - run_h
    supplied = min(demand_kw, state.output_kw) * run_h / dt_h
    return replace(state, fuel_hours_remaining=fuel if fuel > _EPS else 0.0, burn_active=True), supplied


@dataclass(frozen=True)
class ResProfile:
    pv_peak_kw: float = 4.0
    wind_mean_kw: float = 0.5
    sunrise_h: float = 7.0
    sunset_h: float = 17.5

    def __post_init__(self):
        if self.pv_peak_kw < 0 or self.wind_mean_kw < 0:
            raise ValueError("RES ratings must be >= 0")
        if not self.sunrise_h < self.sunset_h:
            raise ValueError("sunrise must precede sunset")


def res_generation(profile, hour_of_day):
    """Wind baseload plus a half-sine PV day."""
    if not 0 <= hour_of_day < 24:
        raise ValueError(f"hour_of_day must lie in [0, 24), got {hour_of_day}")
    day = (hour_of_day - profile.sunrise_h) / (profile.sunset_h - profile.sunrise_h)
    pv = profile.pv_peak_kw * max(0.0, math.sin(math.pi * day)) if 0 <= day <= 1 else 0.0
    return profile.wind_mean_kw + pv


@dataclass(frozen=True)
class EvDispatch:
    travel_time_h: float = 1.0
    deliverable_kwh: float = 40.0
    delivery_rate_kw: float = 10.0

    def __post_init__(self):
        if min(self.travel_time_h, self.deliverable_kwh, self.delivery_rate_kw) < 0:
            raise ValueError("EV dispatch parameters must be >= 0")


@dataclass(frozen=True)
class ChargeSchedule:
    """Constant-rate delivery over ``(start_h, end_h]``."""

    start_h: float
    end_h: float
    rate_kw: float

    @property
    def energy_kwh(self):
        return self.rate_kw * (self.end_h - self.start_h)

    @property
    def empty(self):
        return self.end_h <= self.start_h

    def energy_between(self, t0, t1):
        overlap = min(t1, self.end_h) - max(t0, self.start_h)
        return self.rate_kw * overlap if overlap > 0 else 0.0


def dispatch_ev(request_time_h, ev):
    start = request_time_h + ev.travel_time_h
    if ev.deliverable_kwh <= 0 or ev.delivery_rate_kw <= 0:
        return ChargeSchedule(start, start, 0.0)
    return ChargeSchedule(start, start + ev.deliverable_kwh / ev.delivery_rate_kw, ev.delivery_rate_kw)


@dataclass(frozen=True)
class TickEnergy:
    bess: BessState
    generator: GeneratorState
    served: bool
    flows: dict
    ev_taken_kwh: float
    unmet_kwh: float


def dispatch_tick(
    demand_kw,
    dt_h,
    *,
    bess,
    generator,
    res_kw=0.0,
    grid_ok=False,
    ev_offer_kwh=0.0,
    backup=("bess", "generator"),
    bess_floor_soc=0.0,
    hold_bess=False,
):
    """Settle one site for one tick.

    Demand is met from renewables, then EV energy, then the grid, then the
    ``backup`` sources in the given order.  If everything together cannot
    cover the full tick the site goes dark: no load is drawn, no backup is
    used, and renewable or EV surplus goes to the battery instead.  With
    ``hold_bess`` the battery neither charges nor discharges.
    """
    need = demand_kw * dt_h
    res = res_kw * dt_h
    res_used = min(res, need)
    ev_used = min(ev_offer_kwh, need - res_used)
    rest = need - res_used - ev_used
    grid = rest if grid_ok else 0.0
    rest -= grid

    # states are immutable: try the backups, keep the result only if it covers the tick
    new_bess, new_gen = bess, generator
    gen_e = dis_e = 0.0
    for src in backup:
        if rest <= 1e-12:
            break
        if src == "generator":
            new_gen, kw = step_generator(new_gen, rest / dt_h, dt_h)
            gen_e = kw * dt_h
            rest -= gen_e
        elif src == "bess" and not hold_bess:
            above_floor = max(0.0, (new_bess.soc - bess_floor_soc) * new_bess.capacity_kwh)
            out = min(rest, above_floor * new_bess.discharge_efficiency, new_bess.max_discharge_kw * dt_h)
            if out > 0:
                step = step_bess(new_bess, 0.0, out / dt_h, dt_h)
                new_bess = step.state
                dis_e = step.bus_out_kwh
                rest -= dis_e
    served = rest <= 1e-9
    if served:
        bess, generator = new_bess, replace(new_gen, burn_active=gen_e > 0)
        load = res_used + ev_used + grid + gen_e + dis_e
    else:
        res_used = ev_used = grid = gen_e = dis_e = 0.0
        load = 0.0
        generator = replace(generator, burn_active=False)

    # surplus renewables first, then EV, into the battery
    chg = 0.0
    res_spare = res - res_used
    ev_spare = ev_offer_kwh - ev_used
    ev_to_bess = 0.0
    if not hold_bess and dis_e == 0.0 and res_spare + ev_spare > 0 and bess.soc < 1.0:
        want = min(res_spare + ev_spare, bess.max_charge_kw * dt_h)
        step = step_bess(bess, want / dt_h, 0.0, dt_h)
        bess = step.state
        chg = step.bus_in_kwh
        ev_to_bess = max(0.0, chg - res_spare)
    curtail = res_spare - (chg - ev_to_bess)

    flows = {
        "grid": grid,
        "res": res,
        "generator": gen_e,
        "ev": ev_used + ev_to_bess,
        "bess_discharge": dis_e,
        "bess_charge": chg,
        "load": load,
        "curtailment": curtail,
    }
    return TickEnergy(bess, generator, served, flows, ev_used + ev_to_bess, 0.0 if served else need)


def ledger_residual(flows):
    return (
        flows["grid"] + flows["res"] + flows["generator"] + flows["ev"] + flows["bess_discharge"]
        - flows["bess_charge"] - flows["load"] - flows["curtailment"]
    )
