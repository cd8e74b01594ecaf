import logging

import pytest

from scmac.config import ConfigError, dump_config, load_config, parse_config


def test_empty_file_gives_defaults(tmp_path, caplog):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    with caplog.at_level(logging.INFO, logger="scmac.config"):
        cfg = load_config(path)
    assert cfg.engine.analog.sac_v_min == 0.41
    assert cfg.engine.codec.extended_length == 44
    assert cfg.engine.adc.bits == 8
    assert cfg.trials == 10_000
    assert cfg.provenance["analog.sac_v_min"] == "default"
    assert "default analog.sac_v_min = 0.41" in caplog.text


def test_sections_and_dotted_keys():
    cfg = parse_config(
        """
        # comment
        adc.bits = 10
        [analog]
        noise_sigma_v = 0.005   # trailing comment
        vtc_nonlin = 0, 1e-12
        [run]
        seed = 7
        """,
        "t.cfg",
    )
    assert cfg.engine.adc.bits == 10
    assert cfg.engine.analog.noise_sigma_v == 0.005
    assert cfg.engine.analog.vtc_nonlin == (0.0, 1e-12)
    assert cfg.seed == 7
    assert cfg.provenance["adc.bits"] == "t.cfg:3"


def test_adc_bits_zero_rejected():
    with pytest.raises(ConfigError, match=r"\[adc\].*bits"):
        parse_config("adc.bits = 0")


def test_non_coprime_levels_rejected():
    with pytest.raises(ConfigError, match="gcd 2"):
        parse_config("codec.activation_levels = 6\ncodec.weight_levels = 4")


def test_trials_zero_rejected():
    with pytest.raises(ConfigError, match="trials"):
        parse_config("[run]\ntrials = 0")


@pytest.mark.parametrize(
    "text,match",
    [
        ("adc.bitz = 3", "unknown key 'adc.bitz'"),
        ("[nope]", "unknown section"),
        ("adc.bits 3", "line 1"),
        ("\n\nadc.bits = eight", "adc.bits"),
        ("adc.bits = 8\nadc.bits = 9", "duplicate"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_dump_round_trips():
    cfg = parse_config("analog.noise_sigma_v = 0.001\ncodec.pairing = clock_division")
    again = parse_config(dump_config(cfg))
    assert again == cfg


def test_smaller_codec_needs_no_extended_length():
    cfg = parse_config("codec.activation_levels = 3")
    assert cfg.engine.codec.extended_length == 12
