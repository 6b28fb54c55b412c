"""Receiver models and the downlink budget."""

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 2.998e8  # m/s
THERMAL_NOISE_DBM_HZ = -174.0


@dataclass(frozen=True)
class TerminalModel:
    band: str
    rx_gain_dbi: float
    noise_figure_db: float
    bandwidth_hz: float
    sensitivity_dbm: float
    dish_diameter_m: float = 0.0
    dish_efficiency: float = 0.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be > 0")
        if self.sensitivity_dbm >= 0:
            raise ValueError("sensitivity_dbm must be negative")
        if self.band == "Ka" and self.dish_diameter_m <= 0:
            raise ValueError("a Ka-band terminal needs a dish diameter")

    @classmethod
    def vsat(cls, diameter_m, efficiency, freq_ghz, noise_figure_db, bandwidth_hz, sensitivity_dbm):
        """Dish terminal whose gain follows from its aperture."""
        return cls(
            band="Ka",
            rx_gain_dbi=dish_gain(diameter_m, freq_ghz, efficiency),
            noise_figure_db=noise_figure_db,
            bandwidth_hz=bandwidth_hz,
            sensitivity_dbm=sensitivity_dbm,
            dish_diameter_m=diameter_m,
            dish_efficiency=efficiency,
        )

    @property
    def noise_dbm(self):
        return noise_power(self.bandwidth_hz, self.noise_figure_db)


@dataclass(frozen=True)
class LinkBudgetResult:
    p_rx_dbm: float
    snr_db: float
    meets_sensitivity: bool
    serving_haps: int
    elevation_deg: float
    is_los: bool


def dish_gain(diameter_m, freq_ghz, efficiency):
    """Parabolic aperture gain in dBi."""
    if diameter_m <= 0 or freq_ghz <= 0 or efficiency <= 0:
        raise ValueError("diameter, frequency and efficiency must be positive")
    if efficiency > 1:
        raise ValueError(f"efficiency must be <= 1, got {efficiency}")
    return 10 * math.log10(efficiency * (math.pi * diameter_m * freq_ghz * 1e9 / SPEED_OF_LIGHT) ** 2)


def received_power(eirp_dbm, rx_gain_dbi, total_pl_db):
    return eirp_dbm + rx_gain_dbi - total_pl_db


def noise_power(bandwidth_hz, noise_figure_db):
    if np.any(np.asarray(bandwidth_hz) <= 0):
        raise ValueError("bandwidth must be positive")
    return THERMAL_NOISE_DBM_HZ + 10 * np.log10(bandwidth_hz) + noise_figure_db


def snr(p_rx_dbm, noise_dbm):
    return p_rx_dbm - noise_dbm


def meets_sensitivity(p_rx_dbm, sensitivity_dbm):
    return p_rx_dbm >= sensitivity_dbm
