"""Transfer-characteristic sweeps of each analog stage and of the whole engine."""

from __future__ import annotations

import io

from .analog_chain import AnalogLevel, Pulse, int_accumulate, sac_transfer, vtc_transfer
from .mac_engine import (
    EngineConfig,
    finish,
    format_flags,
    ideal_int_volts,
    run_counts,
    trial_rng,
)

TARGETS = ("sac", "vtc", "int", "engine")


def sac_sweep(cfg: EngineConfig) -> tuple[list[str], list[tuple]]:
    cal = cfg.analog
    rows = [(n, sac_transfer(n, cal).volts, "") for n in range(cal.sac_count_max + 1)]
    return ["ones_count", "volts", "flags"], rows


def vtc_sweep(cfg: EngineConfig) -> tuple[list[str], list[tuple]]:
    cal = cfg.analog
    rows = []
    for mv in range(round(cal.vdd * 1000) + 1):
        p = vtc_transfer(AnalogLevel(mv / 1000), cal)
        rows.append((mv / 1000, p.width * 1e9, format_flags(p.flags)))
    return ["volts", "width_ns", "flags"], rows


def int_sweep(cfg: EngineConfig, points: int = 201) -> tuple[list[str], list[tuple]]:
    """Single accumulation from 0 V over pulse widths up to the full-scale pulse."""
    cal = cfg.analog
    full = cal.vtc_gain * cal.vdd
    rows = []
    for i in range(points):
        w = full * i / (points - 1)
        level = int_accumulate(AnalogLevel(0.0), Pulse(w), cal)
        rows.append((w * 1e9, level.volts, format_flags(level.flags)))
    return ["width_ns", "volts", "flags"], rows


def engine_sweep(cfg: EngineConfig, seed: int) -> tuple[list[str], list[tuple]]:
    """Drive one signed ones-count into the first feature map, the rest idle.

    The error column is the INT voltage minus the ideal-chain voltage.
    """
    n = cfg.analog.sac_count_max
    idle = [(0, 0)] * (cfg.feature_map_count - 1)
    rows = []
    for s in range(-n, n + 1):
        counts = [(s, 0) if s >= 0 else (0, -s)] + idle
        level, flags = run_counts(counts, cfg, trial_rng(seed, s + n))
        r = finish(level, flags, counts, s, cfg)
        error = level.volts - ideal_int_volts(counts, cfg.analog)
        rows.append((s, level.volts, error, r.adc_code, r.decoded_sum, r.analog_sum,
                     format_flags(r.flags)))
    header = ["signed_count", "int_volts", "error_volts", "adc_code", "decoded_sum",
              "analog_sum", "flags"]
    return header, rows


def sweep(target: str, cfg: EngineConfig, seed: int) -> tuple[list[str], list[tuple]]:
    if target == "sac":
        return sac_sweep(cfg)
    if target == "vtc":
        return vtc_sweep(cfg)
    if target == "int":
        return int_sweep(cfg)
    if target == "engine":
        return engine_sweep(cfg, seed)
    raise ValueError(f"unknown sweep target {target!r}; choose from {TARGETS}")


def to_csv(header: list[str], rows: list[tuple], seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# seed={seed}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()
