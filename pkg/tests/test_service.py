"""HTTP endpoints over the in-process test client."""

import json
import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from coabox.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


MINI = {"scenario": {"name": "mini3"}}


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_optimize_endpoint(client):
    r = client.post("/optimize", json={
        **MINI, "n_platoons": 2, "seed": 0, "branch_budget": 8, "workers": 1})
    assert r.status_code == 200
    body = r.json()
    assert body["best_config"] == [1, 1]
    assert body["converged"] is True
    assert body["evaluations"] == 9
    names = [a["name"] for a in body["artifacts"]]
    assert names == ["manifest.json", "trace.csv", "population.csv",
                     "best.json"]
    manifest = json.loads(body["artifacts"][0]["content"])
    assert manifest["manifest_sha256"] == body["manifest_sha256"]


def test_simulate_endpoint(client):
    r = client.post("/simulate", json={
        **MINI, "config": [1, 1], "branch_budget": 16})
    assert r.status_code == 200
    body = r.json()
    assert body["x_value"] == pytest.approx(-0.020674342105263158)
    assert body["victories"] >= 1
    names = [a["name"] for a in body["artifacts"]]
    assert names == ["manifest.json", "simulation.json"]
    sim_doc = json.loads(body["artifacts"][1]["content"])
    assert sim_doc["x_value"] == body["x_value"]


def test_cluster_endpoint(client):
    opt = client.post("/optimize", json={
        **MINI, "n_platoons": 2, "seed": 0, "branch_budget": 8,
        "workers": 1}).json()
    pop_lines = [a for a in opt["artifacts"]
                 if a["name"] == "population.csv"][0]["content"].strip().split("\n")
    population = []
    for line in pop_lines[2:]:
        cells = line.split(",")
        population.append({"x": float(cells[1]),
                           "config": [int(v) for v in cells[2:]]})
    r = client.post("/cluster", json={
        **MINI, "n_platoons": 2, "population": population, "tau": 0.2,
        "top_k": 5})
    assert r.status_code == 200
    body = r.json()
    assert body["clusters"] >= 1
    assert body["best_config"] == [1, 1]
    names = [a["name"] for a in body["artifacts"]]
    assert names[0] == "manifest.json"
    assert "clusters.csv" in names
    assert "cluster_map.svg" in names


def test_cluster_endpoint_rejects_empty_population(client):
    r = client.post("/cluster", json={
        **MINI, "n_platoons": 2, "population": []})
    assert r.status_code == 400


def test_cluster_endpoint_rejects_wrong_arity(client):
    r = client.post("/cluster", json={
        **MINI, "n_platoons": 2,
        "population": [{"x": 0.0, "config": [1, 2, 3]}]})
    assert r.status_code == 400


def test_frames_endpoint(client):
    r = client.post("/frames", json={**MINI, "config": [1, 1],
                                     "branch_budget": 16})
    assert r.status_code == 200
    body = r.json()
    assert body["frames"] >= 2
    names = [a["name"] for a in body["artifacts"]]
    assert names[0] == "manifest.json"
    assert names[1] == "frame_000.svg"
    assert len(names) == 1 + body["frames"]
    assert body["artifacts"][1]["content"].startswith("<svg")


def test_sweep_endpoint(client):
    r = client.post("/sweep", json={
        **MINI, "counts": [1, 2], "repetitions": 2, "branch_budget": 8,
        "workers": 1})
    assert r.status_code == 200
    body = r.json()
    assert body["halt_threshold"] == 1
    names = [a["name"] for a in body["artifacts"]]
    assert names == ["manifest.json", "sweep.csv"]


def test_design_endpoint(client):
    r = client.post("/design", json={"n_platoons": 3, "seed": 0})
    assert r.status_code == 200
    body = r.json()
    assert body["rows"] == 256
    assert body["columns"] == 3
    assert body["max_abs_correlation"] <= 0.05 + 1e-12
    assert [a["name"] for a in body["artifacts"]] == ["manifest.json",
                                                      "design.csv"]


def test_unknown_scenario_is_400(client):
    r = client.post("/simulate", json={
        "scenario": {"name": "missing"}, "config": []})
    assert r.status_code == 400
    assert "invalid scenario" in r.json()["detail"]


def test_inline_scenario_document(client, mini):
    doc = json.loads(
        (__import__("coabox.model", fromlist=["bundled_scenario_path"])
         .bundled_scenario_path("mini3")).read_text())
    r = client.post("/simulate", json={
        "scenario": {"document": doc}, "config": [1, 1],
        "branch_budget": 16})
    assert r.status_code == 200
    assert r.json()["x_value"] == pytest.approx(-0.020674342105263158)


def test_scenario_payload_needs_exactly_one_source(client):
    r = client.post("/simulate", json={"scenario": {}, "config": []})
    assert r.status_code == 422
    r = client.post("/simulate", json={
        "scenario": {"name": "mini3", "document": {"name": "x"}},
        "config": []})
    assert r.status_code == 422


def test_validation_errors_are_422(client):
    r = client.post("/optimize", json={**MINI, "n_platoons": 0})
    assert r.status_code == 422
    r = client.post("/cluster", json={
        **MINI, "n_platoons": 2, "population": [{"x": 0, "config": [1, 1]}],
        "tau": 1.5})
    assert r.status_code == 422


def test_deterministic_artifacts_across_calls(client):
    req = {**MINI, "n_platoons": 2, "seed": 4, "branch_budget": 8,
           "workers": 1}
    a = client.post("/optimize", json=req).json()
    b = client.post("/optimize", json=req).json()
    for art_a, art_b in zip(a["artifacts"], b["artifacts"]):
        if art_a["name"] == "manifest.json":
            continue  # carries a wall-clock timestamp
        assert art_a == art_b
