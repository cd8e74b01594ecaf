"""Command-line entry point: ``scmac {sweep,verify,conv,report}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import conv, sweeps
from .config import ConfigError, RunConfig, dump_config, load_config
from .energy_model import EnergyLedger, breakdown_rows, format_report, headline
from .mac_engine import format_results_csv, record_job_events
from .verification import format_verify_report, run_verify

log = logging.getLogger("scmac")


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def energy_csv(ledger: EnergyLedger, mac_count: int, seed: int) -> str:
    h = headline(ledger, mac_count)
    dev = h.deviations()
    lines = [f"# seed={seed}", "component,events,energy_fj,share"]
    for name, events, fj, share in breakdown_rows(ledger, mac_count):
        lines.append(f"{name},{events},{fj},{share!r}")
    lines.append(f"total,,{ledger.total_femtojoules},1.0")
    lines.append(f"energy_per_mac_pj,,{h.energy_per_mac * 1e12!r},{dev['energy_per_mac']!r}")
    lines.append(f"power_uw,,{h.power * 1e6!r},{dev['power']!r}")
    lines.append(f"tops_per_watt,,{h.tops_per_watt!r},{dev['tops_per_watt']!r}")
    return "\n".join(lines) + "\n"


def cmd_sweep(cfg: RunConfig, target: str, out: Path) -> int:
    header, rows = sweeps.sweep(target, cfg.engine, cfg.seed)
    path = _write(out, f"sweep_{target}.csv", sweeps.to_csv(header, rows, cfg.seed))
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    checks, results = run_verify(cfg.engine, cfg.trials, cfg.seed, cfg.run.workers)
    report = format_verify_report(checks, results, cfg.seed, cfg.trials)
    _write(out, "verify_report.txt", report)
    _write(out, "campaign.csv", format_results_csv(results, cfg.seed))
    sys.stdout.write(report)
    return 0 if all(c.passed for c in checks) else 1


def cmd_conv(cfg: RunConfig, image: str, weights: str, out: Path) -> int:
    res = conv.load_and_convolve(image, weights, cfg.engine, cfg.energy, cfg.seed)
    oh, ow = res.decoded.shape
    hdr = f"# seed={cfg.seed}\n{oh} {ow}"
    _write(out, "conv_decoded.txt", conv.format_matrix(res.decoded, hdr))
    _write(out, "conv_analog.txt", conv.format_matrix(res.analog, hdr))
    _write(out, "conv_oracle.txt", conv.format_matrix(res.oracle, hdr))
    dmax, drms = res.deviation("decoded")
    amax, arms = res.deviation("analog")
    report = (
        f"# seed={cfg.seed}\n"
        f"output {oh}x{ow}, {len(res.results)} jobs, {res.mac_count} MACs\n"
        f"post-ADC deviation from oracle: max {dmax}, rms {drms:.6g}\n"
        f"pre-ADC deviation from oracle:  max {amax}, rms {arms:.6g}\n\n"
        + format_report(res.ledger, res.mac_count)
    )
    _write(out, "conv_report.txt", report)
    _write(out, "conv_energy.csv", energy_csv(res.ledger, res.mac_count, cfg.seed))
    sys.stdout.write(report)
    return 0


def cmd_report(cfg: RunConfig, out: Path) -> int:
    """Energy breakdown for one job (feature_map_count MACs) under the configured energies."""
    ledger = EnergyLedger(cfg.energy)
    record_job_events(ledger, cfg.engine)
    macs = cfg.engine.feature_map_count
    text = format_report(ledger, macs)
    _write(out, "energy_report.txt", text)
    _write(out, "energy_report.csv", energy_csv(ledger, macs, cfg.seed))
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="output directory (default: run.out)")
    common.add_argument("--seed", type=int, help="campaign seed")
    common.add_argument("--trials", type=int, help="randomized trial count")
    common.add_argument("--workers", type=int, help="worker threads for campaigns")
    common.add_argument("-v", "--verbose", action="store_true", help="log applied defaults")

    parser = argparse.ArgumentParser(
        prog="scmac", description="Stochastic-computing mixed-signal MAC engine simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sweep", parents=[common], help="transfer-characteristic sweep to CSV")
    p.add_argument("target", choices=sweeps.TARGETS)
    sub.add_parser("verify", parents=[common], help="exhaustive and randomized invariant suites")
    p = sub.add_parser("conv", parents=[common], help="convolution demo with energy report")
    p.add_argument("image")
    p.add_argument("weights")
    sub.add_parser("report", parents=[common], help="energy breakdown and headline figures")
    sub.add_parser("config", parents=[common], help="print the fully resolved config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed, trials=args.trials, workers=args.workers
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or cfg.run.out)
    try:
        if args.command == "sweep":
            return cmd_sweep(cfg, args.target, out)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if args.command == "conv":
            return cmd_conv(cfg, args.image, args.weights, out)
        if args.command == "report":
            return cmd_report(cfg, out)
        sys.stdout.write(dump_config(cfg))
        return 0
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
