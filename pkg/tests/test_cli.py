import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from hashcube.cli import main
from hashcube.server import create_app


@pytest.fixture(scope="module")
def store_dir(small_store):
    return str(small_store.root)


def run_cli(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestDispatch:
    def test_help_exits_zero(self, capsys):
        code, out, _ = run_cli(capsys, ["--help"])
        assert code == 0
        assert "ingest" in out and "serve" in out

    def test_unknown_subcommand_exits_one(self, capsys):
        code, _, err = run_cli(capsys, ["teleport"])
        assert code == 1
        assert err

    def test_no_subcommand_exits_one(self, capsys):
        code, _, _ = run_cli(capsys, [])
        assert code == 1

    def test_unknown_flag_rejected(self, capsys, store_dir):
        code, _, err = run_cli(capsys, ["query", "--store", store_dir, "--frobnicate"])
        assert code == 1
        assert "frobnicate" in err

    def test_missing_store_is_validation_error(self, capsys, monkeypatch):
        monkeypatch.delenv("HASHCUBE_STORE", raising=False)
        code, _, err = run_cli(capsys, ["query", "--filter", "{}"])
        assert code == 1
        assert "store" in err

    def test_nonexistent_store_is_io_error(self, capsys):
        code, _, err = run_cli(capsys, ["query", "--store", "/nonexistent/store", "--filter", "{}"])
        assert code == 2

    def test_bad_filter_json_exits_one(self, capsys, store_dir):
        code, _, err = run_cli(capsys, ["query", "--store", store_dir, "--filter", "{oops"])
        assert code == 1

    def test_store_env_var_default(self, capsys, store_dir, monkeypatch):
        monkeypatch.setenv("HASHCUBE_STORE", store_dir)
        code, out, _ = run_cli(capsys, ["--output", "json", "query", "--filter", "{}"])
        assert code == 0
        assert json.loads(out)["total"] == 200


class TestEndpointEquivalence:
    def test_query_output_equals_endpoint_body(self, capsys, store_dir, small_store):
        payload = {"label_predicate": {"operator": "some", "selected": ["Forest"]},
                   "page_size": 10}
        code, out, _ = run_cli(
            capsys,
            ["--output", "json", "query", "--store", store_dir, "--filter", json.dumps(payload)],
        )
        assert code == 0
        client = TestClient(create_app(small_store))
        endpoint_body = client.post("/api/query", json=payload).content
        assert out.rstrip("\n").encode() == endpoint_body

    def test_similar_output_equals_endpoint_body(self, capsys, store_dir, small_store):
        name = sorted(small_store.code_table.names())[0]
        code, out, _ = run_cli(
            capsys,
            ["--output", "json", "similar", "--store", store_dir, "--name", name,
             "--radius", "3"],
        )
        assert code == 0
        client = TestClient(create_app(small_store))
        endpoint_body = client.post(
            "/api/similar", json={"patch_name": name, "radius": 3}
        ).content
        assert out.rstrip("\n").encode() == endpoint_body

    def test_stats_output_matches_query_stats(self, capsys, store_dir, small_store):
        payload = {"seasons": ["summer"]}
        code, out, _ = run_cli(
            capsys,
            ["--output", "json", "stats", "--store", store_dir, "--filter", json.dumps(payload)],
        )
        assert code == 0
        doc = json.loads(out)
        client = TestClient(create_app(small_store))
        endpoint = client.post("/api/query", json=payload).json()
        assert doc["stats"] == endpoint["stats"]
        assert doc["total"] == endpoint["total"]

    def test_json_mode_emits_single_document(self, capsys, store_dir):
        code, out, _ = run_cli(
            capsys, ["--output", "json", "query", "--store", store_dir, "--filter", "{}"]
        )
        assert code == 0
        json.loads(out)  # whole stdout is one parseable document


class TestIngestCommand:
    def test_synthetic_ingest_roundtrip(self, capsys, tmp_path):
        out_dir = tmp_path / "cli-store"
        code, out, _ = run_cli(
            capsys,
            ["--output", "json", "ingest", "--synthetic", "40", "--clusters", "2",
             "--dim", "8", "--out", str(out_dir), "--seed", "3"],
        )
        assert code == 0
        assert json.loads(out)["patches"] == 40
        code, out, _ = run_cli(
            capsys, ["--output", "json", "query", "--store", str(out_dir), "--filter", "{}"]
        )
        assert json.loads(out)["total"] == 40

    def test_manifest_ingest(self, capsys, tmp_path):
        from hashcube.ingest import generate_synthetic, save_manifest

        manifest = generate_synthetic(seed=4, n=20, clusters=2, dim=8)
        path = tmp_path / "m.jsonl"
        save_manifest(manifest, path)
        code, _, _ = run_cli(
            capsys, ["ingest", "--manifest", str(path), "--out", str(tmp_path / "store")]
        )
        assert code == 0

    def test_similar_by_features_file(self, capsys, tmp_path, store_dir, small_store):
        from hashcube.ingest import generate_synthetic

        manifest = generate_synthetic(seed=7, n=200, clusters=3, dim=32, with_bands=True)
        features = manifest.entries[0].features
        path = tmp_path / "query.npy"
        np.save(path, features)
        code, out, _ = run_cli(
            capsys,
            ["--output", "json", "similar", "--store", store_dir, "--features", str(path),
             "--k", "3"],
        )
        assert code == 0
        assert len(json.loads(out)["neighbors"]) == 3
