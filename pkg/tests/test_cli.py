import csv

import numpy as np
import pytest

from scmac import conv
from scmac.cli import main
from scmac.config import parse_config
from scmac.sweeps import sweep


def write_conv_inputs(tmp_path, seed=0, h=16, w=16, zero_image=False, zero_bias=False):
    rng = np.random.default_rng(seed)
    img = np.zeros((6, h, w), int) if zero_image else rng.integers(-11, 12, (6, h, w))
    kern = rng.integers(-4, 5, (6, 5, 5))
    bias = np.zeros(6, int) if zero_bias else rng.integers(-4, 5, 6)
    lines = [f"6 {h} {w} 11"] + [" ".join(map(str, row)) for c in img for row in c]
    (tmp_path / "image.txt").write_text("\n".join(lines) + "\n")
    lines = ["6 5 5 4"]
    for k in range(6):
        lines += [" ".join(map(str, row)) for row in kern[k]] + [str(bias[k])]
    (tmp_path / "weights.txt").write_text("\n".join(lines) + "\n")
    return img, kern, bias


def brute_conv(img, kern, bias):
    _, h, w = img.shape
    out = np.zeros((h - 4, w - 4), int)
    for y in range(h - 4):
        for x in range(w - 4):
            out[y, x] = int((img[:, y : y + 5, x : x + 5] * kern).sum() + 11 * bias.sum())
    return out


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# seed=")
    return list(csv.DictReader(lines[1:]))


def test_sac_sweep_endpoints(tmp_path):
    assert main(["sweep", "sac", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep_sac.csv")
    assert len(rows) == 1145
    assert (rows[0]["ones_count"], float(rows[0]["volts"])) == ("0", 0.41)
    assert (rows[-1]["ones_count"], float(rows[-1]["volts"])) == ("1144", 1.0)


def test_vtc_sweep_window(tmp_path):
    main(["sweep", "vtc", "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "sweep_vtc.csv")
    assert len(rows) == 1001
    first_clean = next(r for r in rows if not r["flags"])
    assert float(first_clean["volts"]) == 0.35
    assert all(r["flags"] == "" for r in rows if float(r["volts"]) >= 0.35)


def test_sweeps_monotone_inputs():
    cfg = parse_config("").engine
    for target in ("sac", "vtc", "int", "engine"):
        _, rows = sweep(target, cfg, 1)
        xs = [r[0] for r in rows]
        assert xs == sorted(xs) and len(set(xs)) == len(xs)


def test_engine_sweep_ideal_error_zero(tmp_path):
    main(["sweep", "engine", "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "sweep_engine.csv")
    assert len(rows) == 2 * 1144 + 1
    assert all(float(r["error_volts"]) == 0.0 for r in rows)
    clean = [r for r in rows if "pp_underflow" not in r["flags"]]
    assert all(int(r["analog_sum"]) == int(r["signed_count"]) for r in clean)
    assert int(clean[0]["signed_count"]) == -794


def test_verify_default_passes(tmp_path, capsys):
    assert main(["verify", "--trials", "300", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "PASS codec.exact_product: 240/240" in out
    assert "PASS engine.single_tap_oracle: 6240/6240" in out


def test_verify_noise_fails(tmp_path, capsys):
    cfgfile = tmp_path / "noisy.cfg"
    cfgfile.write_text("[analog]\nnoise_sigma_v = 0.05\n")
    assert main(["verify", "--config", str(cfgfile), "--trials", "100", "--out", str(tmp_path)]) == 1
    assert "FAIL engine.oracle_equivalence_pre_adc" in capsys.readouterr().out


def test_verify_rejects_zero_trials(tmp_path, capsys):
    assert main(["verify", "--trials", "0", "--out", str(tmp_path)]) == 2
    assert "trials" in capsys.readouterr().err


def test_conv_ideal_matches_oracle(tmp_path):
    img, kern, bias = write_conv_inputs(tmp_path)
    res = conv.load_and_convolve(
        tmp_path / "image.txt", tmp_path / "weights.txt",
        parse_config("").engine, parse_config("").energy, seed=1,
    )
    assert res.decoded.shape == (12, 12)
    assert np.array_equal(res.oracle, brute_conv(img, kern, bias))
    assert np.array_equal(res.analog, res.oracle)
    assert res.deviation("decoded")[0] <= 23


def test_conv_zero_image(tmp_path):
    write_conv_inputs(tmp_path, zero_image=True, zero_bias=True)
    out = tmp_path / "out"
    assert main(["conv", str(tmp_path / "image.txt"), str(tmp_path / "weights.txt"),
                 "--out", str(out)]) == 0
    body = (out / "conv_analog.txt").read_text().splitlines()[2:]
    assert all(v == "0" for line in body for v in line.split())
    assert "pre-ADC deviation from oracle:  max 0" in (out / "conv_report.txt").read_text()


def test_conv_energy_report(tmp_path, capsys):
    write_conv_inputs(tmp_path, h=6, w=6)
    main(["conv", str(tmp_path / "image.txt"), str(tmp_path / "weights.txt"),
          "--out", str(tmp_path / "o")])
    rows = {r["component"]: r for r in read_csv(tmp_path / "o" / "conv_energy.csv")}
    assert float(rows["energy_per_mac_pj"]["events"] or rows["energy_per_mac_pj"]["energy_fj"]) \
        == pytest.approx(5.03, rel=0.01)


def test_conv_rejects_out_of_range_pixel(tmp_path):
    write_conv_inputs(tmp_path, h=6, w=6)
    text = (tmp_path / "image.txt").read_text().splitlines()
    row = text[3].split()
    row[2] = "13"
    text[3] = " ".join(row)
    (tmp_path / "image.txt").write_text("\n".join(text) + "\n")
    with pytest.raises(ValueError, match=r"\[0, 2, 2\] = 13"):
        conv.parse_image((tmp_path / "image.txt").read_text())


def test_report_command(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "5.0300 pJ" in out and "10.1392 TOPS/W" in out


@pytest.mark.parametrize("cmd", ["verify", "conv"])
def test_determinism(tmp_path, cmd):
    write_conv_inputs(tmp_path, h=8, w=8)
    cfgfile = tmp_path / "n.cfg"
    cfgfile.write_text("analog.noise_sigma_v = 0.002\n")
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        args = ["--config", str(cfgfile), "--seed", "42", "--out", str(out)]
        if cmd == "verify":
            main(["verify", "--trials", "50"] + args)
        else:
            main(["conv", str(tmp_path / "image.txt"), str(tmp_path / "weights.txt")] + args)
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert len(outs[0]) >= 2
