"""Invariant suites behind ``scmac verify``.

Each check counts cases and failures instead of raising, so one run reports
every broken invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analog_chain import PP_UNDERFLOW
from .mac_engine import (
    EngineConfig,
    KernelInput,
    MacJob,
    adc_decode_bound,
    error_metrics,
    run_campaign,
    run_counts,
    run_mac,
    trial_rng,
)
from .sc_codec import (
    Bitstream,
    SignedMagnitude,
    StochasticNumber,
    coverage_check,
    decode,
    encode,
    sc_multiply,
)


@dataclass
class Check:
    name: str
    cases: int = 0
    failures: int = 0
    note: str = ""

    def tally(self, ok: bool) -> None:
        self.cases += 1
        self.failures += not ok

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{status} {self.name}: {self.cases - self.failures}/{self.cases}{extra}"


def codec_checks(cfg: EngineConfig) -> list[Check]:
    codec = cfg.codec
    la, lw = codec.activation_levels, codec.weight_levels
    product = Check("codec.exact_product")
    for sa in (1, -1):
        for sw in (1, -1):
            for ma in range(la + 1):
                for mw in range(lw + 1):
                    a = encode(SignedMagnitude(sa, ma, la), codec)
                    b = encode(SignedMagnitude(sw, mw, lw), codec)
                    p = sc_multiply(a, b)
                    product.tally(p.count_ones() == ma * mw and p.sign == a.sign * b.sign)

    roundtrip = Check("codec.round_trip")
    periodic = Check("codec.periodicity")
    for levels in (la, lw):
        for sign in (1, -1):
            for m in range(levels + 1):
                v = SignedMagnitude(sign, m, levels)
                s = encode(v, codec)
                roundtrip.tally(decode(s) == v.canonical())
                periodic.tally(s.is_periodic())

    coverage = Check("codec.coverage")
    a = encode(SignedMagnitude(1, 1, la), codec)
    b = encode(SignedMagnitude(1, 1, lw), codec)
    coverage.tally(coverage_check(a, b))
    n4 = StochasticNumber(1, Bitstream.from_string("1100" * 3), 4)
    n3 = StochasticNumber(1, Bitstream.from_string("110" * 4), 3)
    coverage.tally(coverage_check(n4, n3))
    same = StochasticNumber(1, Bitstream.from_string("1100"), 4)
    coverage.tally(not coverage_check(same, same))
    return [product, roundtrip, periodic, coverage]


def single_tap_check(cfg: EngineConfig, seed: int) -> Check:
    """Every magnitude/sign pair as the lone nonzero input, at every tap of map 0."""
    codec = cfg.codec
    la, lw = codec.activation_levels, codec.weight_levels
    n = cfg.inputs_per_map
    check = Check("engine.single_tap_oracle")
    zero_a = SignedMagnitude(1, 0, la)
    zero_w = SignedMagnitude(1, 0, lw)
    idle = KernelInput((zero_a,) * n, (zero_w,) * n)
    trial = 0
    for tap in range(n):
        for sa in (1, -1):
            for sw in (1, -1):
                for ma in range(la + 1):
                    for mw in range(lw + 1):
                        acts = [zero_a] * n
                        wts = [zero_w] * n
                        acts[tap] = SignedMagnitude(sa, ma, la)
                        wts[tap] = SignedMagnitude(sw, mw, lw)
                        maps = (KernelInput(acts, wts),) + (idle,) * (cfg.feature_map_count - 1)
                        r = run_mac(MacJob(maps), cfg, trial_rng(seed, trial))
                        trial += 1
                        check.tally(r.analog_sum == r.oracle_sum)
    return check


def flag_soundness(cfg: EngineConfig, job: MacJob, result) -> bool:
    cal = cfg.analog
    expected = any(
        cal.pulse_per_count * (neg - pos) > cal.zero_pulse_width for pos, neg in result.counts
    )
    return expected == (PP_UNDERFLOW in result.flags)


def campaign_checks(cfg: EngineConfig, trials: int, seed: int, workers: int = 1):
    pairs = run_campaign(cfg, trials, seed, workers)
    results = [r for _, r in pairs]
    bound = adc_decode_bound(cfg)

    oracle = Check("engine.oracle_equivalence_pre_adc")
    adc = Check("engine.adc_consistency", note=f"|decoded - oracle| <= {bound}")
    flags = Check("engine.flag_soundness")
    for job, r in pairs:
        oracle.tally(r.analog_sum == r.oracle_sum)
        adc.tally(abs(r.decoded_sum - r.oracle_sum) <= bound)
        flags.tally(flag_soundness(cfg, job, r))
    return [oracle, adc, flags], results


def structural_checks(cfg: EngineConfig, seed: int) -> list[Check]:
    n, m = cfg.inputs_per_map, cfg.feature_map_count
    codec = cfg.codec
    zero = MacJob(tuple(KernelInput.from_ints([0] * n, [0] * n, codec) for _ in range(m)))

    baseline = Check("engine.baseline_cancellation")
    baseline.tally(run_mac(zero, cfg, trial_rng(seed, 0)).analog_sum == 0)

    underflow = Check("engine.underflow_flagged")
    full_neg = KernelInput.from_ints(
        [codec.activation_levels] * n, [-codec.weight_levels] * n, codec
    )
    r = run_mac(MacJob((full_neg,) + zero.maps[1:]), cfg, trial_rng(seed, 1))
    underflow.tally(PP_UNDERFLOW in r.flags)

    monotone = Check("engine.monotonicity")
    idle = [(0, 0)] * (m - 1)
    prev = None
    for pos in range(cfg.analog.sac_count_max + 1):
        level, _ = run_counts([(pos, 0)] + idle, cfg, trial_rng(seed, pos))
        monotone.tally(prev is None or level.volts >= prev)
        prev = level.volts
    return [baseline, underflow, monotone]


def run_verify(cfg: EngineConfig, trials: int, seed: int, workers: int = 1):
    """All suites; returns (checks, campaign results)."""
    checks = codec_checks(cfg)
    checks.append(single_tap_check(cfg, seed))
    checks.extend(structural_checks(cfg, seed))
    camp, results = campaign_checks(cfg, trials, seed, workers)
    checks.extend(camp)
    return checks, results


def format_verify_report(checks: list[Check], results, seed: int, trials: int) -> str:
    lines = [f"# seed={seed} trials={trials}"]
    lines.extend(c.line() for c in checks)
    s = error_metrics(results)
    lines.append(
        f"campaign: max |analog error| = {s.max_abs_error_volts:.6g} V, "
        f"rms = {s.rms_error_volts:.6g} V, max |decoded - oracle| = {s.max_int_error} "
        f"(pre-ADC {s.max_int_error_pre_adc})"
    )
    lines.append("flags: " + ", ".join(f"{k}={v}" for k, v in s.flag_counts.items()))
    failed = sum(not c.passed for c in checks)
    lines.append("OVERALL " + ("PASS" if failed == 0 else f"FAIL ({failed} checks)"))
    return "\n".join(lines) + "\n"
