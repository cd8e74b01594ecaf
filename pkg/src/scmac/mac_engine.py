"""Mixed-signal MAC engine: encode, AND array, sign-split analog chain, INT, ADC.

One :func:`run_mac` call processes a job of ``feature_map_count`` feature maps,
each a 26-input dot product (25 kernel taps plus a bias tap).  Every map is
split by product sign into a POS and a NEG ones-count, driven through
SAC -> VTC twice, combined by PP against the zero-reference pulse and
integrated.  The final INT voltage is quantized and decoded back to a signed
integer sum, which :func:`exact_oracle` checks in plain integer arithmetic.
"""

from __future__ import annotations

import io
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .analog_chain import (
    INT_OVERFLOW,
    NO_FLAGS,
    OUT_OF_LINEAR_RANGE,
    PP_UNDERFLOW,
    AnalogCalibration,
    AnalogLevel,
    Pulse,
    int_accumulate,
    pp_combine,
    sac_transfer,
    vtc_transfer,
)
from .energy_model import EnergyLedger
from .sc_codec import CodecConfig, SignedMagnitude, encode, sc_multiply

ADC_SATURATED = "adc_saturated"
FLAG_ORDER = (OUT_OF_LINEAR_RANGE, PP_UNDERFLOW, INT_OVERFLOW, ADC_SATURATED)

# Per-map phase order; the second element is the energy event charged for the phase.
MAP_SCHEDULE = (
    ("decode", "decoder_per_input"),
    ("and", "and_array_per_map"),
    ("pos.reset", None),
    ("pos.charge", None),
    ("pos.share", "sac_per_stage"),
    ("vtc.pos", "vtc_per_conversion"),
    ("neg.reset", None),
    ("neg.charge", None),
    ("neg.share", "sac_per_stage"),
    ("vtc.neg", "vtc_per_conversion"),
    ("pp", "pp_per_map"),
    ("int", "int_per_map"),
)
JOB_SCHEDULE = (("adc", "adc_per_conversion"),)


@dataclass(frozen=True)
class AdcConfig:
    bits: int = 8
    v_lo: float = 0.0
    v_hi: float = 1.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError(f"bits must be >= 1, got {self.bits}")
        if not self.v_lo < self.v_hi:
            raise ValueError(f"v_lo must be below v_hi, got {self.v_lo}, {self.v_hi}")

    @property
    def step(self) -> float:
        return (self.v_hi - self.v_lo) / (1 << self.bits)

    @property
    def max_code(self) -> int:
        return (1 << self.bits) - 1


@dataclass(frozen=True)
class EngineConfig:
    codec: CodecConfig = field(default_factory=CodecConfig)
    analog: AnalogCalibration = field(default_factory=AnalogCalibration)
    adc: AdcConfig = field(default_factory=AdcConfig)
    feature_map_count: int = 6
    inputs_per_map: int = 26
    readout_error_v: float = 0.0  # bound of uniform error added to the INT readout
    bias_activation: int | None = None  # activation on the bias tap; full scale if unset
    renorm_scale: float = 0.0  # 0 disables next-layer renormalization

    def __post_init__(self):
        if self.feature_map_count < 1:
            raise ValueError(f"feature_map_count must be >= 1, got {self.feature_map_count}")
        if self.inputs_per_map < 1:
            raise ValueError(f"inputs_per_map must be >= 1, got {self.inputs_per_map}")
        need = self.inputs_per_map * self.codec.extended_length
        if self.analog.sac_count_max < need:
            raise ValueError(
                f"sac_count_max={self.analog.sac_count_max} is below the largest "
                f"possible stage ones-count {need}"
            )
        if self.readout_error_v < 0:
            raise ValueError(f"readout_error_v must be >= 0, got {self.readout_error_v}")
        if self.bias_activation is None:
            object.__setattr__(self, "bias_activation", self.codec.activation_levels)
        if not 0 <= self.bias_activation <= self.codec.activation_levels:
            raise ValueError(f"bias_activation must be in [0, {self.codec.activation_levels}]")
        if self.renorm_scale < 0:
            raise ValueError(f"renorm_scale must be >= 0, got {self.renorm_scale}")

    @property
    def is_ideal(self) -> bool:
        return self.analog.is_ideal and self.readout_error_v == 0


@dataclass(frozen=True)
class KernelInput:
    activations: tuple[SignedMagnitude, ...]
    weights: tuple[SignedMagnitude, ...]

    def __post_init__(self):
        object.__setattr__(self, "activations", tuple(self.activations))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.activations) != len(self.weights):
            raise ValueError(
                f"{len(self.activations)} activations vs {len(self.weights)} weights"
            )

    @classmethod
    def from_ints(
        cls, activations: Sequence[int], weights: Sequence[int], codec: CodecConfig = CodecConfig()
    ) -> "KernelInput":
        return cls(
            tuple(SignedMagnitude.from_int(a, codec.activation_levels) for a in activations),
            tuple(SignedMagnitude.from_int(w, codec.weight_levels) for w in weights),
        )


@dataclass(frozen=True)
class MacJob:
    maps: tuple[KernelInput, ...]

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))


class MapResult(NamedTuple):
    pulse: Pulse
    pos: int
    neg: int
    flags: frozenset[str]


@dataclass(frozen=True)
class MacResult:
    analog_volts: AnalogLevel
    adc_code: int
    decoded_sum: int  # from the ADC code
    analog_sum: int  # from the unquantized INT voltage
    oracle_sum: int
    abs_error_volts: float
    flags: frozenset[str]
    counts: tuple[tuple[int, int], ...] = ()


def validate_job(job: MacJob, cfg: EngineConfig) -> None:
    if len(job.maps) != cfg.feature_map_count:
        raise ValueError(f"job has {len(job.maps)} maps, expected {cfg.feature_map_count}")
    for i, k in enumerate(job.maps):
        if len(k.activations) != cfg.inputs_per_map:
            raise ValueError(
                f"map {i} has {len(k.activations)} inputs, expected {cfg.inputs_per_map}"
            )


def chain_from_counts(
    pos: int,
    neg: int,
    cal: AnalogCalibration,
    rng: np.random.Generator | None = None,
) -> tuple[Pulse, frozenset[str]]:
    """POS stage, NEG stage, zero reference and PP for one feature map."""
    t_pos = vtc_transfer(_clip(sac_transfer(pos, cal, rng)), cal)
    t_neg = vtc_transfer(_clip(sac_transfer(neg, cal, rng)), cal)
    # the reference pulse is a fixed input, not a noisy conversion
    t_ref = vtc_transfer(sac_transfer(0, cal), cal)
    pulse = pp_combine(t_pos, t_neg, t_ref)
    return pulse, t_pos.flags | t_neg.flags | pulse.flags


def _clip(level: AnalogLevel) -> AnalogLevel:
    return level if level.volts >= 0 else AnalogLevel(0.0, level.flags)


def product_counts(k: KernelInput, codec: CodecConfig) -> tuple[int, int]:
    pos = neg = 0
    for a, w in zip(k.activations, k.weights):
        p = sc_multiply(encode(a, codec), encode(w, codec))
        if p.sign > 0:
            pos += p.count_ones()
        else:
            neg += p.count_ones()
    return pos, neg


def run_feature_map(
    k: KernelInput,
    cfg: EngineConfig = EngineConfig(),
    rng: np.random.Generator | None = None,
) -> MapResult:
    pos, neg = product_counts(k, cfg.codec)
    pulse, flags = chain_from_counts(pos, neg, cfg.analog, rng)
    return MapResult(pulse, pos, neg, flags)


def record_job_events(ledger: EnergyLedger, cfg: EngineConfig, maps: int | None = None) -> None:
    maps = cfg.feature_map_count if maps is None else maps
    for _, component in MAP_SCHEDULE:
        if component == "decoder_per_input":
            ledger.record(component, 2 * cfg.inputs_per_map * maps)
        elif component is not None:
            ledger.record(component, maps)
    for _, component in JOB_SCHEDULE:
        ledger.record(component, 1)


def adc_quantize(v: AnalogLevel | float, adc: AdcConfig = AdcConfig()) -> int:
    volts = v.volts if isinstance(v, AnalogLevel) else v
    code = math.floor((volts - adc.v_lo) / adc.step)
    return min(max(code, 0), adc.max_code)


def adc_saturates(volts: float, adc: AdcConfig) -> bool:
    return not adc.v_lo <= volts < adc.v_hi


def volts_to_code(volts: float, adc: AdcConfig) -> float:
    """Unquantized position of ``volts`` on the ADC code axis."""
    return (volts - adc.v_lo) / adc.step


def baseline_code(cfg: EngineConfig) -> float:
    cal = cfg.analog
    v = cfg.feature_map_count * cal.int_gain * cal.zero_pulse_width
    return volts_to_code(v, cfg.adc)


def codes_per_count(cfg: EngineConfig) -> float:
    return cfg.analog.volts_per_count / cfg.adc.step


def digital_decode(code: float, cfg: EngineConfig = EngineConfig()) -> int:
    """Invert the calibrated chain: remove the zero-reference baseline and rescale.

    ``code`` is a position on the ADC code axis and may be fractional; an
    integer ADC output should be passed at its bin centre (``code + 0.5``).
    """
    return round((code - baseline_code(cfg)) / codes_per_count(cfg))


def adc_decode_bound(cfg: EngineConfig) -> int:
    """Worst-case |decoded - oracle| from quantization alone, in integer counts."""
    return math.ceil(0.5 / codes_per_count(cfg))


def renormalize(total: int, cfg: EngineConfig) -> int:
    """Map an accumulated sum back to a signed activation (affine, saturating)."""
    if cfg.renorm_scale == 0:
        return total
    lim = cfg.codec.activation_levels
    return max(-lim, min(lim, round(total * cfg.renorm_scale)))


def exact_oracle(job: MacJob) -> int:
    return sum(
        a.sign * w.sign * a.magnitude * w.magnitude
        for k in job.maps
        for a, w in zip(k.activations, k.weights)
    )


def ideal_int_volts(counts: Iterable[tuple[int, int]], cal: AnalogCalibration) -> float:
    ideal = cal.ideal()
    state = AnalogLevel(0.0)
    for pos, neg in counts:
        pulse, _ = chain_from_counts(pos, neg, ideal)
        state = int_accumulate(state, pulse, ideal)
    return state.volts


def run_counts(
    counts: Sequence[tuple[int, int]],
    cfg: EngineConfig = EngineConfig(),
    rng: np.random.Generator | None = None,
) -> tuple[AnalogLevel, frozenset[str]]:
    """Analog part of a job given per-map (pos, neg) ones-counts."""
    cal = cfg.analog
    state = AnalogLevel(0.0)
    flags: frozenset[str] = NO_FLAGS
    for pos, neg in counts:
        pulse, f = chain_from_counts(pos, neg, cal, rng)
        flags |= f
        state = int_accumulate(state, pulse, cal, rng)
    volts = state.volts
    if cfg.readout_error_v and rng is not None:
        volts = max(volts + float(rng.uniform(-cfg.readout_error_v, cfg.readout_error_v)), 0.0)
    return AnalogLevel(volts, state.flags), flags | state.flags


def finish(
    level: AnalogLevel,
    flags: frozenset[str],
    counts: Sequence[tuple[int, int]],
    oracle: int,
    cfg: EngineConfig,
) -> MacResult:
    code = adc_quantize(level, cfg.adc)
    if adc_saturates(level.volts, cfg.adc):
        flags = flags | {ADC_SATURATED}
    return MacResult(
        analog_volts=level,
        adc_code=code,
        decoded_sum=digital_decode(code + 0.5, cfg),
        analog_sum=digital_decode(volts_to_code(level.volts, cfg.adc), cfg),
        oracle_sum=oracle,
        abs_error_volts=abs(level.volts - ideal_int_volts(counts, cfg.analog)),
        flags=frozenset(flags),
        counts=tuple(counts),
    )


def run_mac(
    job: MacJob,
    cfg: EngineConfig = EngineConfig(),
    rng: np.random.Generator | None = None,
    ledger: EnergyLedger | None = None,
) -> MacResult:
    validate_job(job, cfg)
    counts = [product_counts(k, cfg.codec) for k in job.maps]
    level, flags = run_counts(counts, cfg, rng)
    if ledger is not None:
        record_job_events(ledger, cfg)
    return finish(level, flags, counts, exact_oracle(job), cfg)


@dataclass(frozen=True)
class ErrorSummary:
    trials: int
    max_abs_error_volts: float
    rms_error_volts: float
    max_int_error: int  # post-ADC
    max_int_error_pre_adc: int
    flag_counts: dict[str, int]


def error_metrics(results: Sequence[MacResult]) -> ErrorSummary:
    if not results:
        raise ValueError("error_metrics needs at least one result")
    errs = np.array([r.abs_error_volts for r in results])
    flags: Counter[str] = Counter()
    for r in results:
        flags.update(r.flags)
    return ErrorSummary(
        trials=len(results),
        max_abs_error_volts=float(errs.max()),
        rms_error_volts=float(np.sqrt(np.mean(errs**2))),
        max_int_error=max(abs(r.decoded_sum - r.oracle_sum) for r in results),
        max_int_error_pre_adc=max(abs(r.analog_sum - r.oracle_sum) for r in results),
        flag_counts={f: flags[f] for f in FLAG_ORDER},
    )


# randomized campaigns


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def random_job(rng: np.random.Generator, cfg: EngineConfig = EngineConfig()) -> MacJob:
    n, m = cfg.inputs_per_map, cfg.feature_map_count
    la, lw = cfg.codec.activation_levels, cfg.codec.weight_levels
    acts = rng.integers(-la, la + 1, size=(m, n))
    wts = rng.integers(-lw, lw + 1, size=(m, n))
    return MacJob(
        tuple(KernelInput.from_ints(a.tolist(), w.tolist(), cfg.codec) for a, w in zip(acts, wts))
    )


def _campaign_trial(args) -> tuple[MacJob, MacResult]:
    cfg, seed, i = args
    rng = trial_rng(seed, i)
    job = random_job(rng, cfg)
    return job, run_mac(job, cfg, rng)


def run_campaign(
    cfg: EngineConfig, trials: int, seed: int, workers: int = 1
) -> list[tuple[MacJob, MacResult]]:
    """Seeded random jobs; trial ``i`` depends only on ``(seed, i)``."""
    tasks = [(cfg, seed, i) for i in range(trials)]
    if workers <= 1:
        return [_campaign_trial(t) for t in tasks]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(_campaign_trial, tasks))


# text formats


def format_flags(flags: Iterable[str]) -> str:
    return ";".join(f for f in FLAG_ORDER if f in flags)


def parse_jobs(text: str, cfg: EngineConfig = EngineConfig()) -> list[MacJob]:
    """One feature map per line: activations ``|`` weights; maps group into jobs in order."""
    maps: list[KernelInput] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        left, sep, right = line.partition("|")
        if not sep:
            raise ValueError(f"line {lineno}: missing '|' between activations and weights")
        try:
            acts = [int(t) for t in left.split()]
            wts = [int(t) for t in right.split()]
            k = KernelInput.from_ints(acts, wts, cfg.codec)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        if len(acts) != cfg.inputs_per_map:
            raise ValueError(
                f"line {lineno}: {len(acts)} values per side, expected {cfg.inputs_per_map}"
            )
        maps.append(k)
    if len(maps) % cfg.feature_map_count:
        raise ValueError(
            f"{len(maps)} feature-map lines is not a multiple of {cfg.feature_map_count}"
        )
    m = cfg.feature_map_count
    return [MacJob(tuple(maps[i : i + m])) for i in range(0, len(maps), m)]


def format_jobs(jobs: Iterable[MacJob]) -> str:
    out = []
    for job in jobs:
        for k in job.maps:
            acts = " ".join(str(a.to_int()) for a in k.activations)
            wts = " ".join(str(w.to_int()) for w in k.weights)
            out.append(f"{acts} | {wts}")
    return "\n".join(out) + "\n"


RESULT_COLUMNS = (
    "job_id",
    "decoded_sum",
    "oracle_sum",
    "analog_volts",
    "adc_code",
    "abs_error_volts",
    "flags",
)


def format_results_csv(results: Iterable[MacResult], seed: int | None = None) -> str:
    buf = io.StringIO()
    if seed is not None:
        buf.write(f"# seed={seed}\n")
    buf.write(",".join(RESULT_COLUMNS) + "\n")
    for i, r in enumerate(results):
        buf.write(
            f"{i},{r.decoded_sum},{r.oracle_sum},{r.analog_volts.volts!r},"
            f"{r.adc_code},{r.abs_error_volts!r},{format_flags(r.flags)}\n"
        )
    return buf.getvalue()
