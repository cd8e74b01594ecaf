"""Key-value run configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, ``[section]``
headers set a prefix.  Keys are flat-namespaced by module, so ``[adc]`` then
``bits = 8`` is the same as a bare ``adc.bits = 8``.  Unknown keys are errors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .analog_chain import AnalogCalibration
from .energy_model import EnergyConfig
from .mac_engine import AdcConfig, EngineConfig
from .sc_codec import CodecConfig

log = logging.getLogger(__name__)

DEFAULT_SEED = 2019


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunSettings:
    seed: int = DEFAULT_SEED
    trials: int = 10_000
    out: str = "out"
    workers: int = 1

    def __post_init__(self):
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class RunConfig:
    engine: EngineConfig = field(default_factory=EngineConfig)
    energy: EnergyConfig = field(default_factory=EnergyConfig)
    run: RunSettings = field(default_factory=RunSettings)
    provenance: dict[str, str] = field(default_factory=dict, compare=False, repr=False)

    @property
    def seed(self) -> int:
        return self.run.seed

    @property
    def trials(self) -> int:
        return self.run.trials

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if not kw:
            return self
        try:
            run = replace(self.run, **kw)
        except ValueError as exc:
            raise ConfigError(f"run: {exc}") from exc
        prov = dict(self.provenance)
        prov.update({f"run.{k}": "command line" for k in kw})
        return replace(self, run=run, provenance=prov)


_ENGINE_SCALARS = ("feature_map_count", "inputs_per_map", "readout_error_v",
                   "bias_activation", "renorm_scale")

SECTIONS: dict[str, tuple[type, tuple[str, ...]]] = {
    "codec": (CodecConfig, tuple(f.name for f in fields(CodecConfig))),
    "analog": (AnalogCalibration, tuple(f.name for f in fields(AnalogCalibration))),
    "adc": (AdcConfig, tuple(f.name for f in fields(AdcConfig))),
    "engine": (EngineConfig, _ENGINE_SCALARS),
    "energy": (EnergyConfig, tuple(f.name for f in fields(EnergyConfig))),
    "run": (RunSettings, tuple(f.name for f in fields(RunSettings))),
}


def _default(cls: type, name: str):
    return getattr(cls(), name)


def _coerce(raw: str, default, key: str):
    raw = raw.strip()
    try:
        if isinstance(default, tuple):
            return tuple(float(t) for t in raw.replace(",", " ").split())
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if isinstance(default, int) or default is None:
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw.strip("\"'")
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    values: dict[str, dict[str, object]] = {s: {} for s in SECTIONS}
    prov: dict[str, str] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{source} line {lineno}: malformed section header {raw.strip()!r}")
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"{source} line {lineno}: unknown section [{section}]")
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{source} line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        full = key if "." in key else f"{section}.{key}" if section else key
        sec, _, name = full.partition(".")
        if sec not in SECTIONS or name not in SECTIONS[sec][1]:
            raise ConfigError(f"{source} line {lineno}: unknown key {full!r}")
        if name in values[sec]:
            raise ConfigError(f"{source} line {lineno}: duplicate key {full!r}")
        values[sec][name] = _coerce(val, _default(SECTIONS[sec][0], name), full)
        prov[full] = f"{source}:{lineno}"

    for sec, (cls, names) in SECTIONS.items():
        for name in names:
            key = f"{sec}.{name}"
            if key not in prov:
                prov[key] = "default"
                log.info("default %s = %r", key, _default(cls, name))

    def build(sec: str, **extra):
        cls = SECTIONS[sec][0]
        try:
            return cls(**values[sec], **extra)
        except ValueError as exc:
            raise ConfigError(f"invalid [{sec}] setting: {exc}") from exc

    engine = build(
        "engine", codec=build("codec"), analog=build("analog"), adc=build("adc")
    )
    return RunConfig(engine=engine, energy=build("energy"), run=build("run"), provenance=prov)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return parse_config("", "<defaults>")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, str(p))


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(repr(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def dump_config(cfg: RunConfig) -> str:
    """Fully resolved config in the same format ``parse_config`` reads."""
    objs = {
        "codec": cfg.engine.codec,
        "analog": cfg.engine.analog,
        "adc": cfg.engine.adc,
        "engine": cfg.engine,
        "energy": cfg.energy,
        "run": cfg.run,
    }
    lines = []
    for sec, (_, names) in SECTIONS.items():
        lines.append(f"[{sec}]")
        lines.extend(f"{n} = {_fmt(getattr(objs[sec], n))}" for n in names)
        lines.append("")
    return "\n".join(lines)
