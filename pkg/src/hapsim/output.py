"""Deterministic CSV/JSON writers for coverage and timeline runs.

dBm values carry 2 decimals, fractions 6, energies 6; newlines are always
``\\n`` so identical results give byte-identical files.
"""

import csv
import json
import os

from .coverage import CoverageResult
from .disaster import SERVED_VIA, TimelineResult, resilience_metrics


def _dbm(x):
    return f"{x:.2f}"


def _frac(x):
    return f"{x:.6f}"


def _write_csv(path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _write_json(path, obj):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def coverage_summary(result, meta=None):
    summary = {
        "n_users": result.n_users,
        "median_p_rx_dbm": round(result.median_p_rx_dbm, 2),
        "p5_p_rx_dbm": round(result.p5_p_rx_dbm, 2),
        "mean_p_rx_dbm": round(result.mean_p_rx_dbm, 2),
        "below_sensitivity_fraction": round(result.below_sensitivity_fraction, 6),
        "sensitivity_dbm": result.sensitivity_dbm,
    }
    if meta:
        summary.update(meta)
    return summary


def timeline_summary(result, meta=None):
    m = resilience_metrics(result)
    summary = {
        "methodology": result.methodology,
        "users_total": result.users_total,
        "ticks": len(result.rows),
        "dt_h": result.dt_h,
        "unserved_user_hours": round(m["unserved_user_hours"], 6),
        "time_to_full_restoration_h": m["time_to_full_restoration_h"],
        "min_coverage": round(m["min_coverage"], 6),
        "mean_coverage": round(m["mean_coverage"], 6),
        "energy_kwh_by_source": {k: round(v, 6) for k, v in m["energy_kwh_by_source"].items()},
    }
    if meta:
        summary.update(meta)
    return summary


def emit_results(result, out_dir, meta=None):
    """Write the result files into ``out_dir`` and return their paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if isinstance(result, CoverageResult):
        paths["cdf"] = os.path.join(out_dir, "cdf.csv")
        _write_csv(paths["cdf"], ["p_rx_dbm", "fraction"], ((_dbm(p), _frac(f)) for p, f in result.cdf))
        paths["summary"] = os.path.join(out_dir, "summary.json")
        _write_json(paths["summary"], coverage_summary(result, meta))
        return paths
    if not isinstance(result, TimelineResult):
        raise TypeError(f"cannot emit {type(result).__name__}")
    paths["timeline"] = os.path.join(out_dir, "timeline.csv")
    header = ["tick", "time_h", "coverage_ratio"] + [f"served_{v.lower()}" for v in SERVED_VIA]
    header += ["unserved", "failed_sites", "haps_up"]
    _write_csv(
        paths["timeline"],
        header,
        (
            [r.tick, f"{r.time_h:.2f}", _frac(r.coverage_ratio)]
            + [r.served[v] for v in SERVED_VIA]
            + [r.unserved, r.failed_sites, r.haps_up]
            for r in result.rows
        ),
    )
    paths["ledger"] = os.path.join(out_dir, "ledger.csv")
    _write_csv(paths["ledger"], ["tick", "site", "source", "kwh"], ((k, i, s, f"{v:.6f}") for k, i, s, v in result.ledger))
    paths["decisions"] = os.path.join(out_dir, "decisions.csv")
    _write_csv(
        paths["decisions"],
        ["tick", "site", "grid_ok", "backbone_ok", "haps_available", "satellite_available",
         "radio_on", "load", "soc", "generator_fuel_h", "ev_inbound", "action", "request_ev", "soc_after"],
        (
            [k, i, int(s.grid_ok), int(s.backbone_ok), int(s.haps_available), int(s.satellite_available),
             int(s.radio_on), _frac(s.load), _frac(s.soc), f"{s.generator_fuel_h:.2f}", int(s.ev_inbound),
             action, int(req), _frac(result.soc[k, i])]
            for k, i, s, action, req in result.decisions
        ),
    )
    paths["summary"] = os.path.join(out_dir, "summary.json")
    _write_json(paths["summary"], timeline_summary(result, meta))
    return paths
