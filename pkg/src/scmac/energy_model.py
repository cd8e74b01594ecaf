"""Per-event energy ledger and the headline efficiency figures derived from it.

Energies are configured in joules but tallied in integer femtojoules so that
ledger totals are exact sums.  The default per-event split is a calibrated
assumption: only its total (5.03 pJ per 26-input MAC) is a reported figure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

FEMTO = 1e-15

COMPONENTS = (
    "decoder_per_input",
    "and_array_per_map",
    "sac_per_stage",
    "vtc_per_conversion",
    "pp_per_map",
    "int_per_map",
    "adc_per_conversion",
)

# Published headline figures the default configuration reproduces.
REPORTED_ENERGY_PER_MAC = 5.03e-12
REPORTED_POWER = 20.12e-6
REPORTED_TOPS_PER_WATT = 10.14


@dataclass(frozen=True)
class EnergyConfig:
    """Per-event energies (J) plus clocking.

    With 52 decoded inputs, 2 SAC stages, 2 VTC conversions and one each of
    AND/PP/INT per feature map and one ADC conversion per 6-map job, the
    defaults sum to exactly 30180 fJ per job, i.e. 5030 fJ per 26-input MAC.
    """

    decoder_per_input: float = 20e-15
    and_array_per_map: float = 150e-15
    sac_per_stage: float = 800e-15
    vtc_per_conversion: float = 400e-15
    pp_per_map: float = 100e-15
    int_per_map: float = 350e-15
    adc_per_conversion: float = 5940e-15
    clock_hz: float = 25e6
    cycles_per_mac: float = 6.25
    ops_per_mac: int = 51

    def __post_init__(self):
        for name in COMPONENTS:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.clock_hz <= 0:
            raise ValueError(f"clock_hz must be > 0, got {self.clock_hz}")
        if self.cycles_per_mac <= 0:
            raise ValueError(f"cycles_per_mac must be > 0, got {self.cycles_per_mac}")
        if self.ops_per_mac < 1:
            raise ValueError(f"ops_per_mac must be >= 1, got {self.ops_per_mac}")

    def femtojoules(self, component: str) -> int:
        if component not in COMPONENTS:
            raise KeyError(f"unknown energy component {component!r}")
        return round(getattr(self, component) / FEMTO)

    @property
    def mac_rate_hz(self) -> float:
        return self.clock_hz / self.cycles_per_mac

    @property
    def fractional_cycles(self) -> bool:
        """True when the cycles-per-MAC figure is not a whole number of clocks."""
        return not float(self.cycles_per_mac).is_integer()

    def scaled(self, c: float) -> "EnergyConfig":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        for name in COMPONENTS:
            kw[name] *= c
        return EnergyConfig(**kw)


@dataclass
class EnergyLedger:
    config: EnergyConfig = field(default_factory=EnergyConfig)
    tallies: dict[str, int] = field(default_factory=lambda: dict.fromkeys(COMPONENTS, 0))

    def record(self, component: str, count: int = 1) -> "EnergyLedger":
        if component not in COMPONENTS:
            raise KeyError(f"unknown energy component {component!r}")
        if count < 0:
            raise ValueError(f"event count must be >= 0, got {count}")
        self.tallies[component] += count
        return self

    def merged(self, other: "EnergyLedger") -> "EnergyLedger":
        if other.config != self.config:
            raise ValueError("cannot merge ledgers with different energy configs")
        out = EnergyLedger(self.config)
        for name in COMPONENTS:
            out.tallies[name] = self.tallies[name] + other.tallies[name]
        return out

    def component_femtojoules(self, component: str) -> int:
        return self.tallies[component] * self.config.femtojoules(component)

    @property
    def total_femtojoules(self) -> int:
        return sum(self.component_femtojoules(c) for c in COMPONENTS)

    @property
    def total_joules(self) -> float:
        return self.total_femtojoules * FEMTO


def energy_per_mac(ledger: EnergyLedger, mac_count: int) -> float:
    if mac_count < 1:
        raise ValueError(f"mac_count must be >= 1, got {mac_count}")
    return ledger.total_femtojoules / mac_count * FEMTO


def power_at_rate(e_per_mac: float, mac_rate_hz: float) -> float:
    if e_per_mac < 0 or mac_rate_hz < 0:
        raise ValueError("energy and rate must be non-negative")
    return e_per_mac * mac_rate_hz


def tops_per_watt(e_per_mac: float, ops_per_mac: int) -> float:
    """Operations per joule, in units of 1e12 (TOPS/W)."""
    if e_per_mac <= 0:
        raise ValueError(f"energy per MAC must be > 0, got {e_per_mac}")
    return ops_per_mac / e_per_mac / 1e12


@dataclass(frozen=True)
class Headline:
    energy_per_mac: float
    power: float
    tops_per_watt: float
    mac_rate_hz: float

    def deviations(self) -> dict[str, float]:
        """Relative deviation of each figure from its reported value."""
        return {
            "energy_per_mac": self.energy_per_mac / REPORTED_ENERGY_PER_MAC - 1,
            "power": self.power / REPORTED_POWER - 1,
            "tops_per_watt": self.tops_per_watt / REPORTED_TOPS_PER_WATT - 1,
        }


def headline(ledger: EnergyLedger, mac_count: int) -> Headline:
    e = energy_per_mac(ledger, mac_count)
    cfg = ledger.config
    return Headline(
        energy_per_mac=e,
        power=power_at_rate(e, cfg.mac_rate_hz),
        tops_per_watt=tops_per_watt(e, cfg.ops_per_mac) if e > 0 else 0.0,
        mac_rate_hz=cfg.mac_rate_hz,
    )


def breakdown_rows(ledger: EnergyLedger, mac_count: int) -> list[tuple[str, int, int, float]]:
    """(component, events, femtojoules, share of total) per component."""
    total = ledger.total_femtojoules
    rows = []
    for name in COMPONENTS:
        fj = ledger.component_femtojoules(name)
        rows.append((name, ledger.tallies[name], fj, fj / total if total else 0.0))
    return rows


def format_report(ledger: EnergyLedger, mac_count: int) -> str:
    rows = breakdown_rows(ledger, mac_count)
    h = headline(ledger, mac_count)
    dev = h.deviations()
    lines = [f"{'component':<22}{'events':>10}{'energy_fJ':>12}{'share':>9}"]
    for name, events, fj, share in rows:
        lines.append(f"{name:<22}{events:>10}{fj:>12}{share:>8.1%}")
    lines.append(f"{'total':<22}{'':>10}{ledger.total_femtojoules:>12}")
    lines.append("")
    lines.append(f"MACs (26-input)        {mac_count}")
    lines.append(
        f"energy per MAC         {h.energy_per_mac * 1e12:.4f} pJ"
        f"   (reported 5.03 pJ, {dev['energy_per_mac']:+.3%})"
    )
    lines.append(
        f"{f'power at {h.mac_rate_hz / 1e6:g} MHz':<23}{h.power * 1e6:.4f} uW"
        f"   (reported 20.12 uW, {dev['power']:+.3%})"
    )
    lines.append(
        f"efficiency             {h.tops_per_watt:.4f} TOPS/W"
        f"   (reported 10.14 TOPS/W, {dev['tops_per_watt']:+.3%})"
    )
    if ledger.config.fractional_cycles:
        lines.append(
            f"note: {ledger.config.cycles_per_mac:g} clock cycles per MAC is not an integer"
        )
    return "\n".join(lines) + "\n"
