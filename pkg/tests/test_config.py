"""Configuration loading, validation, and dimension derivation."""

from __future__ import annotations

import dataclasses

import pytest

from relayjscc.config import (ConfigError, ExperimentConfig, attention_heads,
                              derive_dims, full_scale_config, load_config,
                              save_resolved_config, snr_points)


def test_defaults_validate():
    cfg = ExperimentConfig()
    cfg.validate()
    assert cfg.lambda_cls == 0.1
    assert cfg.path_loss_exp == 2.0
    assert cfg.seed == 0
    assert cfg.learning_rate == 1e-4


def test_derived_distances():
    cfg = ExperimentConfig(d_sr=0.3)
    assert cfg.d_rd == pytest.approx(0.7)
    assert cfg.d_sd == 1.0
    assert ExperimentConfig(d_sr=0.5).d_rd == pytest.approx(0.5)


@pytest.mark.parametrize("field,value", [
    ("d_sr", 0.0),
    ("d_sr", 1.0),
    ("d_sr", -0.2),
    ("cbr", 0.0),
    ("cbr", -1.0),
    ("image_size", 30),
    ("image_size", 0),
    ("lambda_cls", -0.5),
    ("fading", "rician"),
    ("dataset_name", "imagenet"),
    ("num_classes", 1),
    ("epochs_per_stage", [1, 2]),
    ("stage_blocks", [0, 2]),
    ("stage_widths", [8, 15]),
    ("learning_rate", 0.0),
    ("batch_size", 0),
    ("dest_decoder_input", "sd"),
    ("path_loss_exp", -1.0),
])
def test_invalid_field_rejected_by_name(field, value):
    with pytest.raises(ConfigError, match=field):
        dataclasses.replace(ExperimentConfig(), **{field: value})


def test_config_file_round_trip(tmp_path):
    cfg = ExperimentConfig(snr_db=15.0, fading="awgn", d_sr=0.4, seed=3)
    path = tmp_path / "cfg.yaml"
    save_resolved_config(cfg, path)
    loaded = load_config(path)
    assert loaded.to_dict() == cfg.to_dict()


def test_config_file_rejects_inconsistent_derived_distance(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("d_sr: 0.4\nd_rd: 0.4\n")
    with pytest.raises(ConfigError, match="d_rd"):
        load_config(path)


def test_config_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("snr_db: 15\nbanana: 3\n")
    with pytest.raises(ConfigError, match="banana"):
        load_config(path)


def test_config_file_missing(tmp_path):
    with pytest.raises(ConfigError, match="exist"):
        load_config(tmp_path / "nope.yaml")


def test_config_file_bad_yaml(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("snr_db: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_cbr_accepts_fraction_strings(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("cbr: 1/12\n")
    assert load_config(path).cbr == pytest.approx(1.0 / 12.0)


def test_invalid_config_value_surfaces_field(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("d_sr: 0.0\n")
    with pytest.raises(ConfigError, match="d_sr"):
        load_config(path).validate()


def test_dims_full_scale():
    cfg = ExperimentConfig(dataset_name="stl10", image_size=96, num_classes=10,
                           stage_widths=[128, 256])
    d = derive_dims(cfg)
    assert d.n_patches == 576
    assert d.patch_len_real == 8
    assert d.complex_per_patch == 4
    assert d.grid_side == 24
    assert d.total_complex == 2304
    assert d.residual == 0


def test_dims_desk_scale():
    d = derive_dims(ExperimentConfig(image_size=32))
    assert d.n_patches == 64
    assert d.patch_len_real == 8
    assert d.total_complex == 256


@pytest.mark.parametrize("size", [16, 32, 48, 64, 96])
@pytest.mark.parametrize("cbr", [1 / 12, 1 / 6, 1 / 8])
def test_dims_arithmetic_properties(size, cbr):
    cfg = ExperimentConfig(image_size=size, cbr=cbr)
    d = derive_dims(cfg)
    budget = round(cbr * 3 * size * size)
    assert d.patch_len_real % 2 == 0
    assert d.patch_len_real == 2 * d.complex_per_patch
    assert d.n_patches == (size // 4) ** 2
    assert d.total_complex + d.residual == budget
    assert abs(d.residual) <= d.n_patches // 2


def test_dims_rejects_starved_budget():
    with pytest.raises(ConfigError, match="cbr"):
        derive_dims(ExperimentConfig(image_size=32, cbr=1 / 1000))


def test_window_size_resolution():
    assert ExperimentConfig(image_size=96).resolved_window_size() == 8
    assert ExperimentConfig(image_size=32).resolved_window_size() == 4
    assert ExperimentConfig(image_size=16).resolved_window_size() == 2
    assert ExperimentConfig(window_size=3, image_size=48).resolved_window_size() == 3


def test_attention_heads():
    assert attention_heads(128) == 4
    assert attention_heads(256) == 8
    assert attention_heads(32) == 1
    assert attention_heads(8) == 1


def test_snr_points_parse():
    assert snr_points("-5,0,5,10,15") == [-5.0, 0.0, 5.0, 10.0, 15.0]
    assert snr_points("15") == [15.0]
    with pytest.raises(ConfigError):
        snr_points(",")


def test_with_updates_copies():
    cfg = ExperimentConfig()
    other = cfg.with_updates(snr_db=-5.0)
    assert other.snr_db == -5.0
    assert cfg.snr_db != -5.0


def test_full_scale_config_is_valid():
    cfg = full_scale_config()
    cfg.validate()
    assert cfg.image_size == 96
    assert cfg.num_classes == 10
    assert cfg.stage_widths == [128, 256]
    assert derive_dims(cfg).n_patches == 576
