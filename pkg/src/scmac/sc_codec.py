"""Deterministic stochastic-number codec.

Values are unary bitstreams whose fraction of ones is the magnitude.  Two
operands with coprime native lengths, both extended to the product of those
lengths, meet bit-for-bit in every combination, so a positionwise AND yields
the exact integer product of their magnitudes rather than an estimate.

Streams are stored as Python ints (position 0 is the most significant of
``length`` bits), which keeps them immutable, hashable and cheap to AND.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

PAIRING_SCHEMES = ("repeat", "clock_division")


class CodecError(ValueError):
    """Raised for malformed stochastic numbers or incompatible operands."""


@dataclass(frozen=True)
class SignedMagnitude:
    """A sign and a bounded integer magnitude, representing sign * magnitude / levels."""

    sign: int
    magnitude: int
    levels: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise CodecError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.levels < 1:
            raise CodecError(f"levels must be >= 1, got {self.levels}")
        if not 0 <= self.magnitude <= self.levels:
            raise CodecError(
                f"magnitude {self.magnitude} outside [0, {self.levels}]"
            )

    @classmethod
    def from_int(cls, n: int, levels: int) -> "SignedMagnitude":
        return cls(-1 if n < 0 else 1, abs(n), levels)

    def to_int(self) -> int:
        return self.sign * self.magnitude

    @property
    def value(self) -> Fraction:
        return Fraction(self.to_int(), self.levels)

    def canonical(self) -> "SignedMagnitude":
        """Same value with zero forced to the + sign."""
        if self.magnitude == 0 and self.sign < 0:
            return SignedMagnitude(1, 0, self.levels)
        return self


@dataclass(frozen=True)
class Bitstream:
    bits: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise CodecError(f"bitstream length must be >= 1, got {self.length}")
        if not 0 <= self.bits < (1 << self.length):
            raise CodecError(f"bit pattern does not fit in {self.length} positions")

    @classmethod
    def from_string(cls, text: str) -> "Bitstream":
        if not text or set(text) - {"0", "1"}:
            raise CodecError(f"not a 0/1 string: {text!r}")
        return cls(int(text, 2), len(text))

    @classmethod
    def from_bits(cls, bits) -> "Bitstream":
        return cls.from_string("".join("1" if b else "0" for b in bits))

    def __str__(self) -> str:
        return format(self.bits, f"0{self.length}b")

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, position: int) -> int:
        if not 0 <= position < self.length:
            raise IndexError(position)
        return (self.bits >> (self.length - 1 - position)) & 1

    def __and__(self, other: "Bitstream") -> "Bitstream":
        if self.length != other.length:
            raise CodecError(
                f"length mismatch: {self.length} vs {other.length}"
            )
        return Bitstream(self.bits & other.bits, self.length)

    def count_ones(self) -> int:
        return self.bits.bit_count()

    @property
    def value(self) -> Fraction:
        return Fraction(self.count_ones(), self.length)

    def window_count(self, start: int, size: int) -> int:
        """Number of ones in positions [start, start + size)."""
        shift = self.length - start - size
        return ((self.bits >> shift) & ((1 << size) - 1)).bit_count()


@dataclass(frozen=True)
class StochasticNumber:
    """A signed deterministic bitstream.

    ``hold`` is the number of consecutive positions each native bit occupies
    (1 for plain repetition, the partner's native length for clock division).
    Position ``p`` carries native bit ``(p // hold) % native_length``.
    """

    sign: int
    stream: Bitstream
    native_length: int
    hold: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise CodecError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.native_length < 1 or self.hold < 1:
            raise CodecError("native_length and hold must be >= 1")
        if self.stream.length % self.period:
            raise CodecError(
                f"stream length {self.stream.length} is not a multiple of "
                f"the period {self.period}"
            )

    @property
    def period(self) -> int:
        return self.native_length * self.hold

    @property
    def length(self) -> int:
        return self.stream.length

    def count_ones(self) -> int:
        return self.stream.count_ones()

    def native_index(self, position: int) -> int:
        return (position // self.hold) % self.native_length

    def is_periodic(self) -> bool:
        counts = {
            self.stream.window_count(start, self.period)
            for start in range(0, self.length, self.period)
        }
        return len(counts) == 1

    def to_string(self) -> str:
        return ("+" if self.sign > 0 else "-") + str(self.stream)

    @classmethod
    def from_string(cls, text: str, native_length: int, hold: int = 1) -> "StochasticNumber":
        """Parse ``+0101...``; the Unicode minus sign is accepted as well as ``-``."""
        if not text or text[0] not in "+-−":
            raise CodecError(f"missing sign character: {text!r}")
        sign = 1 if text[0] == "+" else -1
        return cls(sign, Bitstream.from_string(text[1:]), native_length, hold)


@dataclass(frozen=True)
class CodecConfig:
    activation_levels: int = 11
    weight_levels: int = 4
    extended_length: int | None = None
    pairing: str = "repeat"

    def __post_init__(self):
        if self.extended_length is None:
            object.__setattr__(
                self, "extended_length", self.activation_levels * self.weight_levels
            )
        if self.activation_levels < 1 or self.weight_levels < 1:
            raise CodecError("activation_levels and weight_levels must be >= 1")
        g = gcd(self.activation_levels, self.weight_levels)
        if g != 1:
            raise CodecError(
                f"activation_levels={self.activation_levels} and "
                f"weight_levels={self.weight_levels} are not coprime (gcd {g})"
            )
        if self.extended_length != self.activation_levels * self.weight_levels:
            raise CodecError(
                f"extended_length={self.extended_length} must equal "
                f"activation_levels * weight_levels = "
                f"{self.activation_levels * self.weight_levels}"
            )
        if self.pairing not in PAIRING_SCHEMES:
            raise CodecError(
                f"pairing must be one of {PAIRING_SCHEMES}, got {self.pairing!r}"
            )


def _unary(magnitude: int, levels: int, hold: int) -> int:
    # left-aligned: ones first
    return ((1 << (magnitude * hold)) - 1) << ((levels - magnitude) * hold)


@lru_cache(maxsize=4096)
def _encode_cached(sign: int, magnitude: int, levels: int, cfg: CodecConfig) -> StochasticNumber:
    length = cfg.extended_length
    hold = 1
    if cfg.pairing == "clock_division" and levels == cfg.weight_levels:
        hold = cfg.activation_levels
    period = levels * hold
    if length % period:
        raise CodecError(f"{levels} levels do not divide extended length {length}")
    pattern = _unary(magnitude, levels, hold)
    bits = 0
    for _ in range(length // period):
        bits = (bits << period) | pattern
    if magnitude == 0:
        sign = 1
    return StochasticNumber(sign, Bitstream(bits, length), levels, hold)


def encode(v: SignedMagnitude, cfg: CodecConfig = CodecConfig()) -> StochasticNumber:
    """Encode a signed magnitude as an extended deterministic stream.

    The unary pattern of ``v.magnitude`` ones followed by zeros is repeated
    up to ``cfg.extended_length``.  Under clock division the weight operand
    instead holds each of its bits for ``activation_levels`` positions.
    Zero is always encoded with the + sign.
    """
    if v.levels not in (cfg.activation_levels, cfg.weight_levels):
        raise CodecError(
            f"levels {v.levels} is neither the activation ({cfg.activation_levels}) "
            f"nor the weight ({cfg.weight_levels}) resolution"
        )
    return _encode_cached(v.sign, v.magnitude, v.levels, cfg)


def decode(s: StochasticNumber) -> SignedMagnitude:
    if not s.is_periodic():
        raise CodecError("stream is not periodic; window ones-counts differ")
    scaled = s.count_ones() * s.native_length
    if scaled % s.length:
        raise CodecError(
            f"{s.count_ones()} ones in {s.length} positions is not a whole "
            f"multiple of 1/{s.native_length}"
        )
    return SignedMagnitude(s.sign, scaled // s.length, s.native_length)


@lru_cache(maxsize=256)
def _covers(na: int, ha: int, nb: int, hb: int, length: int) -> bool:
    seen = {((p // ha) % na, (p // hb) % nb) for p in range(length)}
    return len(seen) == na * nb


def coverage_check(a: StochasticNumber, b: StochasticNumber) -> bool:
    """True iff every native bit of ``a`` meets every native bit of ``b``."""
    if a.length != b.length:
        return False
    return _covers(a.native_length, a.hold, b.native_length, b.hold, a.length)


def sc_multiply(a: StochasticNumber, b: StochasticNumber) -> StochasticNumber:
    """Parallel AND-array product of two extended streams.

    The output ones-count equals ``magnitude(a) * magnitude(b)`` exactly; the
    sign is the XOR of the operand sign bits.
    """
    if a.length != b.length:
        raise CodecError(f"length mismatch: {a.length} vs {b.length}")
    if a.native_length * b.native_length != a.length:
        raise CodecError(
            f"native lengths {a.native_length} x {b.native_length} do not "
            f"span the stream length {a.length}"
        )
    if not coverage_check(a, b):
        raise CodecError("operands do not cover every bit pair; product is not exact")
    return StochasticNumber(a.sign * b.sign, a.stream & b.stream, a.length)
