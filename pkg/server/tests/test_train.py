import json
import math

import pytest
import torch

from splax_server.features import FeatureFileError, load_features
from splax_server.model import load_checkpoint
from splax_server.train import TrainConfig, TrainResult, _check_finite, train


class TestLoadFeatures:
    def test_tensors_and_labels(self, features_path):
        data = load_features(features_path)
        assert data["input_ids"].shape == (100, 48)
        assert data["start_positions"].shape == (100,)
        assert bool((data["start_positions"] <= data["end_positions"]).all())

    def test_missing_label_rejected_when_required(self, tmp_path, features_path):
        rows = [json.loads(line) for line in features_path.read_text().splitlines()]
        rows[3]["start_pos"] = None
        bad = tmp_path / "bad.jsonl"
        bad.write_text("\n".join(json.dumps(r) for r in rows))
        with pytest.raises(FeatureFileError, match="row 3"):
            load_features(bad)
        load_features(bad, require_labels=False)  # fine without labels

    def test_missing_key_rejected(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"qid": "x"}\n')
        with pytest.raises(FeatureFileError, match="missing keys"):
            load_features(bad)

    def test_empty_file_rejected(self, tmp_path):
        bad = tmp_path / "empty.jsonl"
        bad.write_text("")
        with pytest.raises(FeatureFileError, match="no features"):
            load_features(bad)


class TestFiniteGuard:
    def test_nan_loss_aborts(self):
        with pytest.raises(RuntimeError, match="non-finite"):
            _check_finite(torch.tensor(float("nan")), step=3, scale=1024.0)

    def test_inf_loss_aborts(self):
        with pytest.raises(RuntimeError, match="non-finite"):
            _check_finite(torch.tensor(float("inf")), step=0, scale=1.0)

    def test_finite_loss_passes(self):
        _check_finite(torch.tensor(2.5), step=0, scale=1.0)


class TestSmokeTrain:
    def test_one_epoch_mixed_precision_completes_with_finite_loss(
        self, features_path, tiny_config_dir, tmp_path
    ):
        cfg = TrainConfig(
            base_model=tiny_config_dir,
            epochs=1,
            mixed_precision=True,
            learning_rate=1e-3,
            batch_size=8,
        )
        result = train(features_path, cfg, tmp_path / "ckpt")
        assert isinstance(result, TrainResult)
        assert len(result.step_losses) == math.ceil(100 / 8)
        assert all(math.isfinite(v) for v in result.step_losses)

    def test_checkpoint_contents(self, features_path, tiny_config_dir, tmp_path):
        cfg = TrainConfig(
            base_model=tiny_config_dir, epochs=1, batch_size=16, max_steps=3,
            learning_rate=1e-3,
        )
        result = train(features_path, cfg, tmp_path / "ckpt")
        ckpt = result.checkpoint_dir
        assert (ckpt / "config.json").exists()
        assert (ckpt / "model.pt").exists()
        snapshot = json.loads((ckpt / "train_config.json").read_text())
        assert snapshot["base_model"] == tiny_config_dir
        assert snapshot["mixed_precision"] is True
        assert snapshot["steps_run"] == 3
        log = json.loads((ckpt / "train_log.json").read_text())
        assert len(log["step_losses"]) == 3

    def test_loss_decreases_over_50_steps(self, features_path, tiny_config_dir, tmp_path):
        cfg = TrainConfig(
            base_model=tiny_config_dir,
            epochs=10,
            mixed_precision=True,
            learning_rate=1e-3,
            batch_size=8,
            max_steps=60,
        )
        result = train(features_path, cfg, tmp_path / "ckpt")
        losses = result.step_losses
        assert len(losses) == 60
        first = sum(losses[:10]) / 10
        last = sum(losses[-10:]) / 10
        assert last < first, f"loss did not decrease: first10={first:.3f} last10={last:.3f}"

    def test_full_precision_also_trains(self, features_path, tiny_config_dir, tmp_path):
        cfg = TrainConfig(
            base_model=tiny_config_dir, epochs=1, mixed_precision=False,
            learning_rate=1e-3, batch_size=16, max_steps=4,
        )
        result = train(features_path, cfg, tmp_path / "ckpt")
        assert all(math.isfinite(v) for v in result.step_losses)

    def test_checkpoint_round_trip_preserves_logits(
        self, features_path, tiny_config_dir, tmp_path
    ):
        cfg = TrainConfig(
            base_model=tiny_config_dir, epochs=1, batch_size=16, max_steps=3,
            learning_rate=1e-3, highway_layer=True,
        )
        result = train(features_path, cfg, tmp_path / "ckpt")
        model, snapshot = load_checkpoint(result.checkpoint_dir)
        assert snapshot["highway_layer"] is True
        assert model.highway is not None
        data = load_features(features_path)
        with torch.no_grad():
            s1, e1 = model(
                data["input_ids"][:4], data["attention_mask"][:4], data["token_type_ids"][:4]
            )
            s2, e2 = model(
                data["input_ids"][:4], data["attention_mask"][:4], data["token_type_ids"][:4]
            )
        assert torch.equal(s1, s2) and torch.equal(e1, e2)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(base_model="x", epochs=0)
        with pytest.raises(ValueError):
            TrainConfig(base_model="x", learning_rate=-1)
