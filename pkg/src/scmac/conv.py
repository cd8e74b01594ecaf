"""Convolution demo: slide a 6-channel 5x5 kernel (+bias) over an image.

Each output pixel is one MAC job: channel ``c`` of the receptive field and
kernel ``c`` form feature map ``c``, with the bias weight on the 26th tap.

File format (both inputs): a header line of four integers, then rows of
whitespace-separated signed integers; ``#`` starts a comment.

* image:   ``channels height width levels``, then channels x height rows.
* weights: ``kernels kh kw levels``, then per kernel kh rows plus one bias line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .energy_model import EnergyConfig, EnergyLedger
from .mac_engine import EngineConfig, KernelInput, MacJob, MacResult, run_mac, trial_rng


def _rows(text: str) -> list[list[int]]:
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append([int(t) for t in line.split()])
    return out


def _check_levels(arr: np.ndarray, levels: int, what: str) -> None:
    bad = np.argwhere(np.abs(arr) > levels)
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise ValueError(f"{what}{list(idx)} = {int(arr[idx])} exceeds magnitude {levels}")


def parse_image(text: str) -> tuple[np.ndarray, int]:
    rows = _rows(text)
    if not rows or len(rows[0]) != 4:
        raise ValueError("image header must be 'channels height width levels'")
    c, h, w, levels = rows[0]
    body = rows[1:]
    if len(body) != c * h or any(len(r) != w for r in body):
        raise ValueError(f"image body must be {c * h} rows of {w} values")
    img = np.array(body, dtype=np.int64).reshape(c, h, w)
    _check_levels(img, levels, "image[c, y, x]")
    return img, levels


def parse_weights(text: str) -> tuple[np.ndarray, np.ndarray, int]:
    rows = _rows(text)
    if not rows or len(rows[0]) != 4:
        raise ValueError("weights header must be 'kernels kh kw levels'")
    k, kh, kw, levels = rows[0]
    body = rows[1:]
    if len(body) != k * (kh + 1):
        raise ValueError(f"weights body must be {k * (kh + 1)} rows (kernel rows + bias)")
    kernels, biases = [], []
    for i in range(k):
        block = body[i * (kh + 1) : (i + 1) * (kh + 1)]
        if any(len(r) != kw for r in block[:kh]) or len(block[kh]) != 1:
            raise ValueError(f"kernel {i}: expected {kh} rows of {kw} values and one bias")
        kernels.append(block[:kh])
        biases.append(block[kh][0])
    kern = np.array(kernels, dtype=np.int64)
    bias = np.array(biases, dtype=np.int64)
    _check_levels(kern, levels, "weights[k, y, x]")
    _check_levels(bias, levels, "bias[k]")
    return kern, bias, levels


def format_matrix(arr: np.ndarray, header: str) -> str:
    lines = [header]
    lines.extend(" ".join(str(int(v)) for v in row) for row in arr)
    return "\n".join(lines) + "\n"


@dataclass
class ConvOutput:
    decoded: np.ndarray  # post-ADC
    analog: np.ndarray  # decoded from the unquantized INT voltage
    oracle: np.ndarray
    results: list[MacResult]
    ledger: EnergyLedger
    mac_count: int  # 26-input MACs, i.e. jobs x feature maps

    def deviation(self, which: str = "decoded") -> tuple[int, float]:
        d = (getattr(self, which) - self.oracle).astype(float)
        return int(np.abs(d).max()), float(math.sqrt(np.mean(d**2)))


def convolve(
    image: np.ndarray,
    kernels: np.ndarray,
    biases: np.ndarray,
    cfg: EngineConfig,
    energy: EnergyConfig,
    seed: int,
) -> ConvOutput:
    channels, h, w = image.shape
    k, kh, kw = kernels.shape
    if channels != cfg.feature_map_count or k != cfg.feature_map_count:
        raise ValueError(
            f"image has {channels} channels and weights {k} kernels; "
            f"the engine expects {cfg.feature_map_count}"
        )
    if kh * kw + 1 != cfg.inputs_per_map:
        raise ValueError(f"{kh}x{kw} kernel plus bias is not {cfg.inputs_per_map} inputs")
    if h < kh or w < kw:
        raise ValueError(f"image {h}x{w} is smaller than the {kh}x{kw} kernel")
    oh, ow = h - kh + 1, w - kw + 1
    codec = cfg.codec
    ledger = EnergyLedger(energy)
    decoded = np.zeros((oh, ow), dtype=np.int64)
    analog = np.zeros_like(decoded)
    oracle = np.zeros_like(decoded)
    results = []
    for y in range(oh):
        for x in range(ow):
            maps = tuple(
                KernelInput.from_ints(
                    image[c, y : y + kh, x : x + kw].ravel().tolist() + [cfg.bias_activation],
                    kernels[c].ravel().tolist() + [int(biases[c])],
                    codec,
                )
                for c in range(k)
            )
            r = run_mac(MacJob(maps), cfg, trial_rng(seed, y * ow + x), ledger)
            decoded[y, x], analog[y, x], oracle[y, x] = r.decoded_sum, r.analog_sum, r.oracle_sum
            results.append(r)
    return ConvOutput(decoded, analog, oracle, results, ledger, len(results) * k)


def load_and_convolve(
    image_path: str | Path, weights_path: str | Path, cfg: EngineConfig, energy: EnergyConfig, seed: int
) -> ConvOutput:
    image, ilevels = parse_image(Path(image_path).read_text())
    kernels, biases, wlevels = parse_weights(Path(weights_path).read_text())
    if ilevels != cfg.codec.activation_levels:
        raise ValueError(f"image levels {ilevels} != activation levels {cfg.codec.activation_levels}")
    if wlevels != cfg.codec.weight_levels:
        raise ValueError(f"weight levels {wlevels} != weight levels {cfg.codec.weight_levels}")
    return convolve(image, kernels, biases, cfg, energy, seed)
