"""Transfer-function models of the analog accumulate path.

SAC (charge-sharing summation) -> VTC (voltage to pulse width) -> PP (signed
pulse combination) -> INT (integrating accumulator).  Every stage is a pure
function of its inputs and an :class:`AnalogCalibration`; noise is drawn only
from an explicitly passed ``numpy.random.Generator``.

Out-of-range conditions are reported through string flags carried on the
returned value, never by silently clamping the physics away.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as P

OUT_OF_LINEAR_RANGE = "out_of_linear_range"
PP_UNDERFLOW = "pp_underflow"
INT_OVERFLOW = "int_overflow"

NO_FLAGS: frozenset[str] = frozenset()


@dataclass(frozen=True)
class AnalogLevel:
    volts: float
    flags: frozenset[str] = NO_FLAGS


@dataclass(frozen=True)
class Pulse:
    width: float  # seconds
    flags: frozenset[str] = NO_FLAGS


@dataclass(frozen=True)
class AnalogCalibration:
    """Calibration constants for the four analog stages.

    The SAC map is affine between ``sac_v_min`` (no ones) and ``sac_v_max``
    (``sac_count_max`` ones).  Default gains put a full-scale pulse at 20 ns
    and keep six full-scale accumulations just under ``vdd``.
    """

    vdd: float = 1.0
    sac_v_min: float = 0.41
    sac_v_max: float = 1.0
    sac_count_max: int = 1144
    vtc_gain: float = 20e-9  # s/V
    vtc_linear_lo: float = 0.35
    vtc_linear_hi: float = 1.0
    int_gain: float = 8.33e6  # V/s, i.e. 8.33 mV/ns
    noise_sigma_v: float = 0.0
    vtc_nonlin: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "vtc_nonlin", tuple(float(c) for c in self.vtc_nonlin))
        if not 0 < self.sac_v_min < self.sac_v_max <= self.vdd:
            raise ValueError(
                "sac_v_min/sac_v_max: need 0 < sac_v_min < sac_v_max <= vdd, got "
                f"{self.sac_v_min}, {self.sac_v_max}, vdd={self.vdd}"
            )
        if self.sac_count_max < 1:
            raise ValueError(f"sac_count_max must be >= 1, got {self.sac_count_max}")
        if not self.vtc_linear_lo < self.vtc_linear_hi:
            raise ValueError("vtc_linear_lo must be below vtc_linear_hi")
        if self.vtc_linear_lo > self.sac_v_min:
            raise ValueError(
                f"vtc_linear_lo={self.vtc_linear_lo} exceeds sac_v_min={self.sac_v_min}; "
                "SAC outputs would leave the VTC linear window"
            )
        for name in ("vtc_gain", "int_gain"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.noise_sigma_v < 0:
            raise ValueError(f"noise_sigma_v must be >= 0, got {self.noise_sigma_v}")

    @property
    def sac_slope(self) -> float:
        """Volts per ones-count."""
        return (self.sac_v_max - self.sac_v_min) / self.sac_count_max

    @property
    def zero_pulse_width(self) -> float:
        """Ideal reference pulse width, i.e. the width for a zero sum."""
        return self.vtc_gain * self.sac_v_min

    @property
    def pulse_per_count(self) -> float:
        """Ideal seconds of pulse width per ones-count."""
        return self.vtc_gain * self.sac_slope

    @property
    def volts_per_count(self) -> float:
        """End-to-end INT volts per unit of signed ones-count."""
        return self.int_gain * self.pulse_per_count

    @property
    def is_ideal(self) -> bool:
        return self.noise_sigma_v == 0 and not any(self.vtc_nonlin)

    def ideal(self) -> "AnalogCalibration":
        return replace(self, noise_sigma_v=0.0, vtc_nonlin=())


def _noise(cal: AnalogCalibration, rng: np.random.Generator | None) -> float:
    if rng is None or cal.noise_sigma_v == 0:
        return 0.0
    return float(rng.normal(0.0, cal.noise_sigma_v))


def sac_transfer(
    ones_count: int, cal: AnalogCalibration, rng: np.random.Generator | None = None
) -> AnalogLevel:
    """SAC output after one RESET/CHARGE/SHARE stage with ``ones_count`` charged capacitors."""
    if not 0 <= ones_count <= cal.sac_count_max:
        raise ValueError(f"ones_count {ones_count} outside [0, {cal.sac_count_max}]")
    frac = ones_count / cal.sac_count_max
    # lerp form keeps both endpoints exact in floating point
    volts = (1.0 - frac) * cal.sac_v_min + frac * cal.sac_v_max
    return AnalogLevel(volts + _noise(cal, rng))


def vtc_transfer(v: AnalogLevel, cal: AnalogCalibration) -> Pulse:
    if v.volts < 0:
        raise ValueError(f"VTC input must be >= 0 V, got {v.volts}")
    width = cal.vtc_gain * v.volts
    if cal.vtc_nonlin:
        width += float(P.polyval(v.volts, cal.vtc_nonlin))
    flags = NO_FLAGS
    if not cal.vtc_linear_lo <= v.volts <= cal.vtc_linear_hi or width < 0:
        flags = frozenset({OUT_OF_LINEAR_RANGE})
    return Pulse(max(width, 0.0), flags)


def pp_combine(t_pos: Pulse, t_neg: Pulse, t_ref: Pulse) -> Pulse:
    """Signed pulse combination: ``t_pos + t_ref - t_neg``, saturating at zero."""
    for p in (t_pos, t_neg, t_ref):
        if p.width < 0:
            raise ValueError(f"negative pulse width {p.width}")
    width = t_pos.width + (t_ref.width - t_neg.width)
    if width < 0:
        return Pulse(0.0, frozenset({PP_UNDERFLOW}))
    return Pulse(width)


def int_accumulate(
    state: AnalogLevel,
    t: Pulse,
    cal: AnalogCalibration,
    rng: np.random.Generator | None = None,
) -> AnalogLevel:
    if state.volts < 0:
        raise ValueError(f"INT state must be >= 0 V, got {state.volts}")
    # the integrating capacitor cannot discharge below ground
    volts = max(state.volts + cal.int_gain * t.width + _noise(cal, rng), 0.0)
    flags = state.flags
    if volts > cal.vdd:
        flags = flags | {INT_OVERFLOW}
    return AnalogLevel(volts, flags)
