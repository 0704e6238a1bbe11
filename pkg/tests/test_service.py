"""HTTP service endpoints and CLI delegation parity."""

import socket
import threading
import time

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from consensus_rank import build_artifacts, load_manifest, RunOptions
from consensus_rank.cli import _dataset_payload, main
from consensus_rank.report import fit_artifacts, path_artifacts, taux_artifacts
from consensus_rank.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def payload(small_manifest):
    return _dataset_payload(small_manifest)


def disconnected_payload():
    return {
        "registry": {"csv_text": "item_id,label\nA,a\nB,b\nC,c\nD,d\n", "constraint_item": None},
        "rankings": [
            {"ranking_id": "r1", "year": 2020, "direction": "higher_is_better",
             "csv_text": "item_id,level\nA,2\nB,1\n", "grade_order": None},
            {"ranking_id": "r2", "year": 2020, "direction": "higher_is_better",
             "csv_text": "item_id,level\nC,2\nD,1\n", "grade_order": None},
        ],
    }


def test_healthz(client):
    got = client.get("/healthz")
    assert got.status_code == 200
    body = got.json()
    assert body["status"] == "ok" and body["version"]


def test_run_endpoint_matches_in_process(client, payload, small_dataset):
    req = {"dataset": payload, "seed": 42, "replicates": 50, "taux_replicates": 50,
           "grid_points": 10}
    got = client.post("/v1/run", json=req)
    assert got.status_code == 200, got.text
    body = got.json()
    assert body["meta"]["n_items"] == 10
    assert body["meta"]["total_comparisons"] == 164
    assert len(body["artifacts"]) == 11

    opts = RunOptions(seed=42, replicates=50, taux_replicates=50, grid_points=10)
    _, arts, _ = build_artifacts(small_dataset, 42, opts)
    for name, content in arts.items():
        if name != "run_meta.json":
            assert body["artifacts"][name] == content, name


def test_run_endpoint_year_filter(client, payload):
    req = {"dataset": payload, "seed": 1, "year_min": 2019, "replicates": 20,
           "taux_replicates": 20, "grid_points": 5}
    got = client.post("/v1/run", json=req)
    assert got.status_code == 200, got.text
    assert got.json()["meta"]["n_rankings"] == 4


def test_taux_endpoint(client, payload, small_dataset):
    got = client.post("/v1/taux", json={"dataset": payload, "replicates": 60, "seed": 3})
    assert got.status_code == 200
    expected = taux_artifacts(small_dataset, replicates=60, seed=3)
    assert got.json()["artifacts"] == expected


def test_fit_endpoint(client, payload, small_dataset):
    got = client.post("/v1/fit", json={"dataset": payload})
    assert got.status_code == 200
    assert got.json()["artifacts"] == fit_artifacts(small_dataset)


def test_fit_endpoint_constraint_item(client, payload):
    moved = {**payload, "registry": {**payload["registry"], "constraint_item": "J03"}}
    got = client.post("/v1/fit", json={"dataset": moved})
    assert got.status_code == 200
    assert "J03,0.000000" in got.json()["artifacts"]["mle.csv"]


def test_path_endpoint(client, payload, small_dataset):
    got = client.post("/v1/path", json={"dataset": payload, "grid_points": 8})
    assert got.status_code == 200
    assert got.json()["artifacts"] == path_artifacts(small_dataset, grid_points=8)


def test_bootstrap_endpoint(client, payload):
    got = client.post("/v1/bootstrap", json={
        "dataset": payload, "target": "mle", "replicates": 25, "seed": 2,
    })
    assert got.status_code == 200
    arts = got.json()["artifacts"]
    assert set(arts) == {"intervals_mle.csv"}
    assert arts["intervals_mle.csv"].startswith("item_id,point,lower,upper,failed_replicates\n")


def test_domain_error_maps_to_422(client):
    got = client.post("/v1/fit", json={"dataset": disconnected_payload()})
    assert got.status_code == 422
    body = got.json()
    assert body["type"] == "DisconnectedGraphError"
    assert "comparison path" in body["error"]


def test_pipeline_error_maps_to_500_with_stage(client):
    got = client.post("/v1/run", json={"dataset": disconnected_payload(), "seed": 0,
                                       "replicates": 10, "taux_replicates": 10,
                                       "grid_points": 5})
    assert got.status_code == 500
    body = got.json()
    assert body["type"] == "DisconnectedGraphError"
    assert body["stage"] == "mle"


def test_garbled_csv_maps_to_422(client, payload):
    broken = {**payload, "registry": {"csv_text": "who,what\nA,a\n", "constraint_item": None}}
    got = client.post("/v1/fit", json={"dataset": broken})
    assert got.status_code == 422
    assert got.json()["type"] == "MissingHeaderError"


def test_request_validation_is_422(client):
    assert client.post("/v1/fit", json={}).status_code == 422
    assert client.post("/v1/run", json={"dataset": disconnected_payload(),
                                        "replicates": 0}).status_code == 422


# --- live server + CLI delegation ---------------------------------------------------

@pytest.fixture(scope="module")
def live_server():
    import uvicorn

    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(create_app(), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("uvicorn failed to start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_cli_server_mode_parity(live_server, fixture_dir, tmp_path):
    runner = CliRunner()
    manifest = str(fixture_dir / "manifest.json")
    for args, names in (
        (["fit"], ["mle.csv"]),
        (["path", "--grid-points", "8"], ["path.csv", "alasso.csv"]),
        (["taux", "--replicates", "40"], ["taux_matrix.csv", "taux_pvalues.csv"]),
    ):
        local = tmp_path / f"local_{args[0]}"
        remote = tmp_path / f"remote_{args[0]}"
        r1 = runner.invoke(main, [*args, "--manifest", manifest, "--out", str(local)])
        r2 = runner.invoke(main, [*args, "--manifest", manifest, "--out", str(remote),
                                  "--server", live_server])
        assert r1.exit_code == 0, r1.output
        assert r2.exit_code == 0, r2.output
        for name in names:
            assert (local / name).read_bytes() == (remote / name).read_bytes(), name


def test_cli_server_mode_maps_error_codes(live_server, tmp_path):
    import json as _json

    (tmp_path / "registry.csv").write_text("item_id,label\nA,a\nB,b\nC,c\nD,d\n")
    (tmp_path / "r0.csv").write_text("item_id,level\nA,2\nB,1\n")
    (tmp_path / "r1.csv").write_text("item_id,level\nC,2\nD,1\n")
    manifest = tmp_path / "manifest.json"
    manifest.write_text(_json.dumps({"registry": "registry.csv", "rankings": [
        {"path": "r0.csv", "ranking_id": "r0", "year": 2020, "direction": "higher_is_better"},
        {"path": "r1.csv", "ranking_id": "r1", "year": 2020, "direction": "higher_is_better"},
    ]}))
    runner = CliRunner()
    result = runner.invoke(main, ["fit", "--manifest", str(manifest),
                                  "--out", str(tmp_path / "o"), "--server", live_server])
    assert result.exit_code == 3
    result = runner.invoke(main, ["fit", "--manifest", str(manifest),
                                  "--out", str(tmp_path / "o"),
                                  "--server", "http://127.0.0.1:1"])
    assert result.exit_code == 5
