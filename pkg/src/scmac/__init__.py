"""Behavioral simulator of a stochastic-computing mixed-signal MAC engine."""

from .analog_chain import AnalogCalibration, AnalogLevel, Pulse
from .energy_model import EnergyConfig, EnergyLedger
from .mac_engine import AdcConfig, EngineConfig, KernelInput, MacJob, MacResult, run_mac
from .sc_codec import CodecConfig, SignedMagnitude, StochasticNumber, decode, encode, sc_multiply

__all__ = [
    "AdcConfig",
    "AnalogCalibration",
    "AnalogLevel",
    "CodecConfig",
    "EnergyConfig",
    "EnergyLedger",
    "EngineConfig",
    "KernelInput",
    "MacJob",
    "MacResult",
    "Pulse",
    "SignedMagnitude",
    "StochasticNumber",
    "decode",
    "encode",
    "run_mac",
    "sc_multiply",
]
