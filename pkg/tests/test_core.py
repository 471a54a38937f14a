import math

import pytest
import torch

from core.checkpoint import CHECKPOINT_FORMAT_VERSION, load_container, save_container
from core.config import (
    DEFAULT_CONFIG_PATH,
    CameraIntrinsics,
    FusionConfig,
    RunConfig,
    load_run_config,
    parse_overrides,
    validate_model,
)
from core.errors import (
    CheckpointError,
    CheckpointVersionError,
    ConfigurationError,
    DivergenceError,
    FormatError,
    UndefinedMetricError,
)
from core.utils import get_cache_dir, seed_everything


def test_exit_codes_follow_the_stable_contract():
    assert ConfigurationError("x").exit_code == 2
    assert FormatError("x").exit_code == 1
    assert CheckpointError("x").exit_code == 1
    assert CheckpointVersionError("x").exit_code == 2
    assert UndefinedMetricError("x").exit_code == 3
    error = DivergenceError("spade-stage1", 3, 17, 0.25)
    assert error.exit_code == 3
    assert (error.stage, error.epoch, error.step, error.last_finite_loss) == ("spade-stage1", 3, 17, 0.25)
    assert "step 17" in str(error)


def test_default_yaml_mirrors_builtin_defaults():
    assert load_run_config(str(DEFAULT_CONFIG_PATH)) == RunConfig()


def test_documented_defaults():
    config = RunConfig()
    assert config.url.fusion == FusionConfig(tau=5.0, alpha=0.8, beta=0.0)
    assert config.spade.arch.levels == 4 and config.spade.arch.base_channels == 16
    assert config.spade.stage1.lr == 2e-4 and config.spade.stage1.epochs == 30
    assert config.spade.stage2.epochs == 55 and config.spade.stage2.milestones == [25, 40]
    assert config.url.crop == (544, 704)
    assert config.evaluation.max_depth == 80.0


def test_unknown_keys_are_rejected(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("spade:\n  arch:\n    depth: 3\n")
    with pytest.raises(ConfigurationError):
        load_run_config(str(path))


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("seed: 5\nurl:\n  fusion:\n    tau: 3.0\n")
    config = load_run_config(str(path), parse_overrides(["url.fusion.tau=4.5", "spade.stage1.epochs=2"]))
    assert config.seed == 5
    assert config.url.fusion.tau == 4.5
    assert config.spade.stage1.epochs == 2


def test_parse_overrides_keeps_yaml_types():
    assert parse_overrides(["a.b=1", "a.c=true", "d=[1, 2]", "e=null"]) == {
        "a": {"b": 1, "c": True}, "d": [1, 2], "e": None}
    with pytest.raises(ConfigurationError):
        parse_overrides(["no-equals-sign"])


@pytest.mark.parametrize("tau", [math.nan, math.inf])
def test_tau_must_not_be_nan_or_positive_infinity(tau):
    with pytest.raises(ConfigurationError):
        validate_model(FusionConfig, {"tau": tau})


def test_tau_may_be_negative_infinity():
    assert validate_model(FusionConfig, {"tau": -math.inf}).tau == -math.inf


def test_alpha_must_be_positive():
    with pytest.raises(ConfigurationError):
        validate_model(FusionConfig, {"alpha": 0.0})


def test_principal_point_outside_image_is_rejected():
    with pytest.raises(ConfigurationError):
        validate_model(CameraIntrinsics, {"cx": 800.0})


def test_digest_is_stable_and_sensitive():
    assert RunConfig().digest() == RunConfig().digest()
    assert RunConfig(seed=1).digest() != RunConfig().digest()
    tau_off = load_run_config(None, {"url": {"fusion": {"tau": -math.inf}}})
    assert tau_off.digest() != RunConfig().digest()


def test_cache_dir_follows_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SPADE_URL_CACHE", str(tmp_path / "ckpts"))
    assert get_cache_dir() == tmp_path / "ckpts"
    assert (tmp_path / "ckpts").is_dir()


def test_seed_everything_repeats_draws():
    seed_everything(7)
    first = torch.rand(3)
    seed_everything(7)
    assert torch.equal(first, torch.rand(3))


def test_container_round_trip(tmp_path):
    path = save_container(tmp_path / "c.pt", "spade", {"w": torch.arange(4.0)}, {"stage": 1})
    payload = load_container(path, "spade")
    assert payload["format_version"] == CHECKPOINT_FORMAT_VERSION
    assert torch.equal(payload["state_dict"]["w"], torch.arange(4.0))
    assert payload["metadata"] == {"stage": 1}
    assert not (tmp_path / "c.pt.tmp").exists()


def test_container_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_container(tmp_path / "missing.pt", "spade")

    path = save_container(tmp_path / "c.pt", "spade", {"w": torch.zeros(100)}, {})
    truncated = tmp_path / "truncated.pt"
    truncated.write_bytes(path.read_bytes()[:50])
    with pytest.raises(CheckpointError):
        load_container(truncated, "spade")

    with pytest.raises(CheckpointError):
        load_container(path, "backbone")

    payload = torch.load(path, weights_only=True)
    payload["format_version"] = CHECKPOINT_FORMAT_VERSION + 1
    torch.save(payload, tmp_path / "future.pt")
    with pytest.raises(CheckpointVersionError):
        load_container(tmp_path / "future.pt", "spade")
