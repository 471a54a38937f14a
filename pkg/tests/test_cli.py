import json
from io import StringIO

import numpy as np
import pandas as pd
import pytest
import torch
import yaml

from cli.main import build_parser, flag_overrides, main
from core.config import FusionConfig
from core.errors import EXIT_CONFIG, EXIT_IO, EXIT_OK
from depthmap.io import read_sparse_png16, write_depth_png16
from depthmap.manifest import load_manifest, load_sample
from fusion import merge_plug_and_play
from spade import load_checkpoint, spade_forward

TINY_CONFIG = {
    "dataset": {"n_scenes": 8, "night_ratio": 0.25, "heldout_fraction": 0.25},
    "scene": {
        "num_primitives": 3,
        "image_size": [48, 64],
        "intrinsics": {"fx": 40.0, "fy": 40.0, "cx": 32.0, "cy": 24.0, "width": 64, "height": 48},
    },
    "lidar": {"num_beams": 16, "azimuth_step": 1.0},
    "spade": {
        "arch": {"levels": 2, "base_channels": 4},
        "stage1": {"lr": 0.001, "epochs": 1, "batch_size": 2},
        "stage2": {"lr": 0.001, "epochs": 1, "batch_size": 2, "milestones": []},
    },
    "url": {
        "backbone": {"levels": 2, "base_channels": 4},
        "epochs": 1,
        "milestones": [],
        "batch_size": 2,
        "crop": [40, 56],
    },
}


def write_config(directory):
    path = directory / "tiny.yaml"
    path.write_text(yaml.safe_dump(TINY_CONFIG), encoding="utf-8")
    return str(path)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Dataset, SpaDe checkpoint and backbones produced through the command line."""
    root = tmp_path_factory.mktemp("pipeline")
    config = write_config(root)
    paths = {
        "config": config,
        "data": str(root / "data" / "manifest.json"),
        "spade": str(root / "spade.pt"),
        "baseline": str(root / "baseline.pt"),
        "url": str(root / "url.pt"),
        "root": root,
    }
    assert main(["--config", config, "generate-data", "--out", str(root / "data")]) == EXIT_OK
    assert main(["--config", config, "train-spade", "--data", paths["data"], "--ckpt", paths["spade"]]) == EXIT_OK
    assert main(["--config", config, "train-baseline", "--data", paths["data"], "--out", paths["baseline"]]) == EXIT_OK
    assert main(["--config", config, "train-url", "--data", paths["data"], "--spade-ckpt", paths["spade"],
                 "--out", paths["url"]]) == EXIT_OK
    return paths


class TestParser:
    def test_flags_become_overrides(self):
        args = build_parser().parse_args(["--seed", "3", "generate-data", "--out", "x", "--scenes", "5",
                                          "--night-ratio", "0.5"])
        assert flag_overrides(args) == {"seed": 3, "dataset": {"n_scenes": 5, "night_ratio": 0.5}}

    def test_seed_after_subcommand(self):
        args = build_parser().parse_args(["generate-data", "--out", "x", "--seed", "7"])
        assert flag_overrides(args) == {"seed": 7}

    def test_negative_infinite_threshold(self):
        args = build_parser().parse_args(["preprocess", "--data", "m", "--spade-ckpt", "c", "--out", "o",
                                          "--tau=-inf"])
        assert flag_overrides(args) == {"url": {"fusion": {"tau": float("-inf")}}}


class TestGenerateData:
    def test_zero_scenes(self, tmp_path):
        assert main(["generate-data", "--scenes", "0", "--out", str(tmp_path / "empty")]) == EXIT_OK
        assert load_manifest(tmp_path / "empty" / "manifest.json").records == []

    def test_rerun_is_identical(self, tmp_path):
        config = write_config(tmp_path)
        for name in ("a", "b"):
            assert main(["--config", config, "generate-data", "--scenes", "4", "--out", str(tmp_path / name)]) == 0
        first = (tmp_path / "a" / "manifest.json").read_bytes()
        assert first == (tmp_path / "b" / "manifest.json").read_bytes()
        for record in load_manifest(tmp_path / "a" / "manifest.json").records:
            assert (tmp_path / "a" / record.gt_path).read_bytes() == (tmp_path / "b" / record.gt_path).read_bytes()

    def test_night_fraction(self, tmp_path):
        config = write_config(tmp_path)
        assert main(["--config", config, "generate-data", "--scenes", "16", "--night-ratio", "0.125",
                     "--out", str(tmp_path / "data")]) == EXIT_OK
        tags = [record.tag for record in load_manifest(tmp_path / "data" / "manifest.json").records]
        assert tags.count("night") == 2

    def test_unknown_config_key(self, tmp_path):
        assert main(["--set", "dataset.frames=3", "generate-data", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_invalid_value(self, tmp_path):
        assert main(["--set", "url.fusion.alpha=0", "generate-data", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["--config", str(tmp_path / "absent.yaml"), "generate-data", "--out", str(tmp_path)]) \
            == EXIT_CONFIG


class TestTrainSpade:
    def test_stage_two_needs_checkpoint(self, tmp_path, pipeline):
        assert main(["--config", pipeline["config"], "train-spade", "--data", pipeline["data"], "--stage", "2",
                     "--ckpt", str(tmp_path / "absent.pt")]) == EXIT_CONFIG

    def test_stages_separately(self, tmp_path, pipeline):
        ckpt = str(tmp_path / "spade.pt")
        common = ["--config", pipeline["config"], "train-spade", "--data", pipeline["data"], "--ckpt", ckpt]
        assert main(common + ["--stage", "1"]) == EXIT_OK
        assert main(common + ["--stage", "2"]) == EXIT_OK
        curve = pd.read_csv(tmp_path / "spade.pt.loss.csv")
        assert set(curve["stage"]) == {2}

    def test_missing_manifest(self, tmp_path):
        assert main(["train-spade", "--data", str(tmp_path / "absent.json")]) == EXIT_IO

    def test_loss_curve_written(self, pipeline):
        curve = pd.read_csv(pipeline["spade"] + ".loss.csv")
        assert {"stage", "epoch", "step", "loss", "lr"} <= set(curve.columns)
        assert set(curve["stage"]) == {1, 2}

    @pytest.mark.parametrize("name", ["spade", "baseline", "url"])
    def test_loss_curve_records_config_digest(self, pipeline, name):
        digest = torch.load(pipeline[name], weights_only=True)["metadata"]["config_digest"]
        curve = pd.read_csv(pipeline[name] + ".loss.csv", dtype={"config_digest": str})
        assert len(digest) == 64
        assert set(curve["config_digest"]) == {digest}

    def test_both_stages_match_separate_runs(self, tmp_path, pipeline):
        common = ["--config", pipeline["config"], "train-spade", "--data", pipeline["data"]]
        together, separate = tmp_path / "both.pt", tmp_path / "separate.pt"
        assert main(common + ["--ckpt", str(together)]) == EXIT_OK
        assert main(common + ["--ckpt", str(separate), "--stage", "1"]) == EXIT_OK
        assert main(common + ["--ckpt", str(separate), "--stage", "2"]) == EXIT_OK

        first, second = load_checkpoint(together), load_checkpoint(separate)
        assert (first.stage, first.epoch, first.seed) == (second.stage, second.epoch, second.seed) == (2, 1, 0)
        first_params, second_params = first.model.state_dict(), second.model.state_dict()
        assert first_params.keys() == second_params.keys()
        assert all(torch.equal(first_params[name], second_params[name]) for name in first_params)


class TestPreprocess:
    def test_negative_infinite_threshold_copies_input(self, tmp_path, pipeline):
        out = tmp_path / "merged"
        assert main(["--config", pipeline["config"], "preprocess", "--data", pipeline["data"],
                     "--spade-ckpt", pipeline["spade"], "--tau=-inf", "--out", str(out)]) == EXIT_OK
        original = load_manifest(pipeline["data"])
        merged = load_manifest(out / "manifest.json")
        assert [r.id for r in merged.records] == [r.id for r in original.records]
        for before, after in zip(original.records, merged.records):
            assert np.array_equal(read_sparse_png16(original.root / before.sparse_path).values,
                                  read_sparse_png16(merged.root / after.sparse_path).values)
            assert (merged.root / after.gt_path).resolve() == (original.root / before.gt_path).resolve()

    def test_threshold_densifies(self, tmp_path, pipeline):
        out = tmp_path / "merged"
        assert main(["--config", pipeline["config"], "preprocess", "--data", pipeline["data"],
                     "--spade-ckpt", pipeline["spade"], "--tau", "10", "--out", str(out)]) == EXIT_OK
        merged = load_manifest(out / "manifest.json")
        sparse = read_sparse_png16(merged.root / merged.records[0].sparse_path)
        assert sparse.density == 1.0

    def test_matches_library_merge(self, tmp_path, pipeline):
        out = tmp_path / "merged"
        assert main(["--config", pipeline["config"], "preprocess", "--data", pipeline["data"],
                     "--spade-ckpt", pipeline["spade"], "--tau", "0", "--out", str(out)]) == EXIT_OK
        spade = load_checkpoint(pipeline["spade"]).model
        original = load_manifest(pipeline["data"])
        merged = load_manifest(out / "manifest.json")
        for before, after in zip(original.records, merged.records):
            sample = load_sample(before, original.root)
            output = spade_forward(sample.sparse, spade)
            expected = merge_plug_and_play(sample.sparse, output.zhat, output.sigma, FusionConfig(tau=0.0))
            write_depth_png16(expected, tmp_path / "expected.png")
            assert np.array_equal(read_sparse_png16(merged.root / after.sparse_path).values,
                                  read_sparse_png16(tmp_path / "expected.png").values)

    def test_missing_checkpoint(self, tmp_path, pipeline):
        assert main(["--config", pipeline["config"], "preprocess", "--data", pipeline["data"],
                     "--spade-ckpt", str(tmp_path / "absent.pt"), "--out", str(tmp_path / "out")]) == EXIT_CONFIG


class TestEvaluate:
    def _evaluate(self, pipeline, out, *extra):
        return main(["--config", pipeline["config"], "evaluate", "--data", pipeline["data"],
                     "--out", str(out), *extra])

    def test_groundtruth_is_perfect(self, tmp_path, pipeline):
        assert self._evaluate(pipeline, tmp_path, "--model", "groundtruth") == EXIT_OK
        frame = pd.read_csv(tmp_path / "report.csv")
        assert (frame[["mae_mm", "rmse_mm", "imae_inv_km", "irmse_inv_km"]] == 0).all().all()
        assert "groundtruth" in (tmp_path / "report.md").read_text()

    def test_every_method(self, tmp_path, pipeline):
        assert self._evaluate(pipeline, tmp_path, "--model", "spade", "--model", "baseline",
                              "--model", "plug-and-play", "--model", "url",
                              "--spade-ckpt", pipeline["spade"], "--baseline-ckpt", pipeline["baseline"],
                              "--url-ckpt", pipeline["url"]) == EXIT_OK
        frame = pd.read_csv(tmp_path / "report.csv")
        assert list(dict.fromkeys(frame["method"])) == ["spade", "baseline", "plug-and-play", "url"]
        sidecar = json.loads((tmp_path / "run.json").read_text())
        assert sidecar["split"] == "heldout"
        assert sidecar["dataset_config_digest"] == load_manifest(pipeline["data"]).config_digest

    def test_csv_and_markdown_agree(self, tmp_path, pipeline):
        assert self._evaluate(pipeline, tmp_path, "--model", "spade", "--spade-ckpt", pipeline["spade"]) == EXIT_OK
        frame = pd.read_csv(StringIO((tmp_path / "report.csv").read_text()), float_precision="round_trip")
        markdown = (tmp_path / "report.md").read_text()
        for value in frame["mae_mm"]:
            assert f"{value:.2f}" in markdown

    def test_rerun_is_byte_identical(self, tmp_path, pipeline):
        for name in ("a", "b"):
            assert self._evaluate(pipeline, tmp_path / name, "--model", "spade", "--model", "groundtruth",
                                  "--spade-ckpt", pipeline["spade"]) == EXIT_OK
        for name in ("report.csv", "report.md", "run.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_single_format(self, tmp_path, pipeline):
        assert self._evaluate(pipeline, tmp_path, "--model", "groundtruth", "--report", "markdown") == EXIT_OK
        assert (tmp_path / "report.md").exists()
        assert not (tmp_path / "report.csv").exists()

    def test_plots(self, tmp_path, pipeline):
        assert main(["--config", pipeline["config"], "--set", "evaluation.plots=true", "evaluate",
                     "--data", pipeline["data"], "--out", str(tmp_path), "--model", "spade",
                     "--spade-ckpt", pipeline["spade"]]) == EXIT_OK
        assert (tmp_path / "plots" / "spade_error.html").exists()
        assert (tmp_path / "plots" / "spade_uncertainty.html").exists()

    def test_model_needs_checkpoint(self, tmp_path, pipeline):
        assert self._evaluate(pipeline, tmp_path, "--model", "spade") == EXIT_CONFIG
        assert self._evaluate(pipeline, tmp_path, "--model", "url", "--spade-ckpt", pipeline["spade"]) \
            == EXIT_CONFIG

    def test_empty_split(self, tmp_path):
        config = write_config(tmp_path)
        assert main(["--config", config, "--set", "dataset.heldout_fraction=0.0", "generate-data",
                     "--scenes", "2", "--out", str(tmp_path / "data")]) == EXIT_OK
        assert main(["--config", config, "evaluate", "--data", str(tmp_path / "data" / "manifest.json"),
                     "--model", "groundtruth", "--out", str(tmp_path / "out")]) == EXIT_CONFIG
