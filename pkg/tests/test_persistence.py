import json

import numpy as np
import pytest

from gpenhance.manifest import SchemaError, VersionMismatchError, load_manifest, save_manifest
from gpenhance.modelio import decode_array, encode_array, load_model, model_to_json, save_model
from gpenhance.traversal import predict_params_batch


@pytest.fixture
def manifest_doc(toy_data):
    return json.loads(toy_data["train_path"].read_text())


def _write(tmp_path, toy_data, doc, name="m.json"):
    # keep relative image paths resolvable
    path = toy_data["train_path"].parent / name
    path.write_text(json.dumps(doc, indent=2))
    return path


class TestManifest:
    def test_round_trip(self, toy_data, tmp_path):
        man = toy_data["train"]
        out = toy_data["train_path"].parent / "copy.json"
        save_manifest(man, out)
        again = load_manifest(out)
        assert again == man

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_manifest(tmp_path / "absent.json")

    def test_ragged_names_entry(self, toy_data, manifest_doc, tmp_path):
        manifest_doc["entries"][2]["poor"].pop()
        path = _write(tmp_path, toy_data, manifest_doc, "ragged.json")
        with pytest.raises(SchemaError, match=r"entries\[2\]\.poor \(id 'img_002'\).*line \d+"):
            load_manifest(path)

    def test_param_out_of_range(self, toy_data, manifest_doc, tmp_path):
        manifest_doc["entries"][0]["high"][1]["params"]["contrast"] = 0.7
        path = _write(tmp_path, toy_data, manifest_doc, "range.json")
        with pytest.raises(SchemaError, match=r"entries\[0\]\.high\[1\]\.params\.contrast"):
            load_manifest(path)

    def test_missing_image(self, toy_data, manifest_doc, tmp_path):
        manifest_doc["entries"][1]["low"]["path"] = "low/nope.png"
        path = _write(tmp_path, toy_data, manifest_doc, "nofile.json")
        with pytest.raises(SchemaError, match="file not found"):
            load_manifest(path)

    def test_unknown_field(self, toy_data, manifest_doc, tmp_path):
        manifest_doc["extras"] = 1
        with pytest.raises(VersionMismatchError, match="extras"):
            load_manifest(_write(tmp_path, toy_data, manifest_doc, "extra.json"))

    def test_future_version(self, toy_data, manifest_doc, tmp_path):
        manifest_doc["version"] = 2
        with pytest.raises(VersionMismatchError):
            load_manifest(_write(tmp_path, toy_data, manifest_doc, "v2.json"))

    def test_bad_json_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"format": "gpenhance-manifest",\n "version": 1,\n "p": }')
        with pytest.raises(SchemaError, match="line 3 column"):
            load_manifest(path)


class TestModelFile:
    def test_array_codec(self):
        a = np.random.default_rng(0).normal(size=(3, 4))
        enc = encode_array(a)
        assert enc["dtype"] == "<f8" and enc["shape"] == [3, 4]
        np.testing.assert_array_equal(decode_array(enc, "x"), a)

    def test_round_trip_predictions(self, toy_model, toy_data, tmp_path):
        path = tmp_path / "model.json"
        save_model(toy_model, path)
        loaded = load_model(path)
        F = toy_data["test_features"].low
        m0, s0 = predict_params_batch(toy_model, F)
        m1, s1 = predict_params_batch(loaded, F)
        np.testing.assert_array_equal(m0, m1)
        np.testing.assert_array_equal(s0, s1)
        np.testing.assert_array_equal(loaded.rank.alpha, toy_model.rank.alpha)
        assert loaded.traversal == toy_model.traversal
        assert json.dumps(model_to_json(loaded)) == json.dumps(model_to_json(toy_model))

    def test_truncated_file(self, toy_model, tmp_path):
        path = tmp_path / "model.json"
        save_model(toy_model, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(SchemaError, match="invalid JSON"):
            load_model(path)

    @pytest.mark.parametrize("mutate, field", [
        (lambda d: d["hyperparams"].pop("log_sigma_f2"), "hyperparams.log_sigma_f2"),
        (lambda d: d["heads"][1].__setitem__("weights", {"dtype": "<f8", "shape": [2], "data": "AAAA"}),
         r"heads\[1\]\.weights"),
        (lambda d: d["standardization"]["scale"].__setitem__("dtype", "<f4"), "standardization.scale.dtype"),
        (lambda d: d["ranking"].__setitem__("C", "one"), "ranking.C"),
        (lambda d: d.__setitem__("heads", d["heads"][:2]), "heads"),
        (lambda d: d.__setitem__("format", "other"), "format"),
    ])
    def test_schema_violations_name_field(self, toy_model, tmp_path, mutate, field):
        doc = model_to_json(toy_model)
        mutate(doc)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match=field):
            load_model(path)

    def test_version_mismatch(self, toy_model, tmp_path):
        doc = model_to_json(toy_model)
        doc["version"] = 99
        path = tmp_path / "v.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(VersionMismatchError):
            load_model(path)
        doc["version"] = 1
        doc["future_field"] = {}
        path.write_text(json.dumps(doc))
        with pytest.raises(VersionMismatchError, match="future_field"):
            load_model(path)

    def test_failed_save_leaves_old_file(self, toy_model, tmp_path, monkeypatch):
        path = tmp_path / "model.json"
        save_model(toy_model, path)
        before = path.read_bytes()

        def boom(*a, **k):
            raise OSError("disk full")
        monkeypatch.setattr("gpenhance.manifest.os.replace", boom)
        with pytest.raises(OSError):
            save_model(toy_model, path)
        assert path.read_bytes() == before
        assert [p.name for p in tmp_path.iterdir()] == ["model.json"]
