"""Artifact generation: manifests, CSV/JSON shapes, SVG rendering."""

import json
import xml.etree.ElementTree as ET

import pytest

from coabox.cluster import cluster_all, cluster_stats, rank_clusters
from coabox.frames import replay
from coabox.model import blue_slots
from coabox.optimizer import Candidate, OptimizeResult, optimize, sweep
from coabox.report import (
    allocation_rows,
    best_artifact,
    best_config_lines,
    build_manifest,
    canonical_json,
    cluster_artifacts,
    cluster_map_artifact,
    cluster_report_artifact,
    design_artifact,
    frame_artifact,
    manifest_artifact,
    platoon_label,
    population_artifact,
    scenario_digest,
    simulate_artifact,
    sweep_artifact,
    trace_artifact,
    value_color,
)
from coabox.sim import simulate

DOC = {"name": "x", "boxes": [{"id": 1}]}


def _manifest(**kw):
    args = dict(command="optimize", scenario_name="x", scenario_doc=DOC,
                seed=3, settings={"branch_budget": 8}, n_platoons=2)
    args.update(kw)
    return build_manifest(**args)


def test_canonical_json_is_order_insensitive():
    assert canonical_json({"b": 1, "a": 2}) == canonical_json({"a": 2, "b": 1})
    assert canonical_json({"a": 2, "b": 1}) == '{"a":2,"b":1}'


def test_manifest_hash_ignores_timestamp_and_outdir():
    a = _manifest(timestamp="2024-01-01T00:00:00+00:00", out_dir="/tmp/a")
    b = _manifest(timestamp="2030-12-31T23:59:59+00:00", out_dir="/else")
    assert a["manifest_sha256"] == b["manifest_sha256"]
    assert a["created_utc"] != b["created_utc"]


def test_manifest_hash_tracks_inputs():
    base = _manifest()
    assert _manifest(seed=4)["manifest_sha256"] != base["manifest_sha256"]
    assert _manifest(command="sweep")["manifest_sha256"] != base["manifest_sha256"]
    assert (_manifest(settings={"branch_budget": 9})["manifest_sha256"]
            != base["manifest_sha256"])
    other_doc = {"name": "x", "boxes": [{"id": 2}]}
    assert (_manifest(scenario_doc=other_doc)["manifest_sha256"]
            != base["manifest_sha256"])
    # the scenario participates through its digest
    assert scenario_digest(DOC) != scenario_digest(other_doc)


def test_manifest_artifact_parses_back():
    art = manifest_artifact(_manifest())
    assert art["name"] == "manifest.json"
    doc = json.loads(art["content"])
    assert doc["command"] == "optimize"
    assert doc["n_platoons"] == 2
    assert len(doc["manifest_sha256"]) == 64


def _small_result(mini):
    return optimize(mini, 2, seed=0, branch_budget=8, workers=1)


def test_trace_and_population_csv(mini):
    res = _small_result(mini)
    man = _manifest()
    trace = trace_artifact(man, res)
    lines = trace["content"].strip().split("\n")
    assert lines[0] == f"# manifest={man['manifest_sha256']}"
    assert lines[1] == "iteration,best_x"
    assert len(lines) == 2 + len(res.trace)
    # repr round trip: the printed floats parse back exactly
    assert float(lines[2].split(",")[1]) == res.trace[0]

    pop = population_artifact(man, res)
    plines = pop["content"].strip().split("\n")
    assert plines[1] == "rank,x_value,slot01,slot02"
    assert len(plines) == 2 + len(res.population)
    first = plines[2].split(",")
    assert first[0] == "1"
    assert float(first[1]) == res.best.x
    assert tuple(int(v) for v in first[2:]) == res.best.config


def test_best_artifact_fields(mini):
    res = _small_result(mini)
    man = _manifest()
    doc = json.loads(best_artifact(man, res)["content"])
    assert doc["config"] == list(res.best.config)
    assert doc["x_value"] == res.best.x
    assert doc["converged"] is True
    assert doc["manifest_sha256"] == man["manifest_sha256"]


def test_simulate_artifact_fields(mini):
    res = simulate(mini, (1, 1), branch_budget=16, record_log=True)
    doc = json.loads(simulate_artifact(_manifest(), res)["content"])
    assert doc["x_value"] == res.x
    assert doc["x_value_cost_form"] == res.x_cost
    assert doc["config"] == [1, 1]
    assert doc["battle_log"], "log requested but missing"


def test_sweep_artifact_rows(mini):
    res = sweep(mini, [1, 2], repetitions=2, seed=0, branch_budget=8,
                workers=1)
    art = sweep_artifact(_manifest(), res)
    lines = art["content"].strip().split("\n")
    assert lines[1] == "n_platoons,repetitions,mean_best_x,sdom_best_x,best_x"
    assert len(lines) == 4
    assert lines[2].split(",")[0] == "1"


def test_design_artifact_shape():
    import numpy as np
    m = np.array([[1, 2], [3, 4], [5, 6]])
    lines = design_artifact(_manifest(), m)["content"].strip().split("\n")
    assert lines[1] == "row,col01,col02"
    assert lines[2] == "1,1,2"
    assert lines[4] == "3,5,6"


def test_platoon_labels():
    assert platoon_label(2) == "AIP"    # mechanized infantry
    assert platoon_label(8) == "TP"     # armor battalion
    assert platoon_label(13) == "CAV"


def test_allocation_rows_sorted_two_decimals():
    from coabox.cluster import Cluster
    members = [Candidate((1, 2), 0.0), Candidate((1, 3), 0.1)]
    cl = cluster_stats(Cluster(members=members, best=members[0]),
                       slot_types=(2, 8))
    rows = allocation_rows(cl)
    assert rows[0] == ("AIP", 2, 1, "1.00")
    assert {r[3] for r in rows[1:]} == {"0.50"}
    means = [float(r[3]) for r in rows]
    assert means == sorted(means, reverse=True)


def test_best_config_lines_grouping():
    lines = best_config_lines((9, 9, 9, 10, 14), (2, 2, 2, 2, 8))
    assert lines == ["AIP×3→box 9", "AIP×1→box 10", "TP×1→box 14"]


def test_value_color_endpoints():
    assert value_color(0.0, -1.0, 1.0) == "rgb(255,255,255)"
    assert value_color(-1.0, -1.0, 1.0) == "rgb(0,0,255)"
    assert value_color(1.0, -1.0, 1.0) == "rgb(255,0,0)"
    assert value_color(-0.5, -1.0, 1.0) == "rgb(128,128,255)"
    # out-of-range values clip instead of wrapping
    assert value_color(-9.0, -1.0, 1.0) == "rgb(0,0,255)"
    assert value_color(9.0, -1.0, 1.0) == "rgb(255,0,0)"
    # an all-positive population never divides by a zero negative limit
    assert value_color(0.5, 0.2, 1.0) == value_color(0.5, -0.0, 1.0)


def _clusters(mini, res):
    cands = res.population
    slot_types = blue_slots(mini, 2)
    return rank_clusters([
        cluster_stats(c, slot_types=slot_types)
        for c in cluster_all(cands, tau=0.2)
    ])


def test_cluster_report_and_map(mini):
    res = _small_result(mini)
    man = _manifest()
    clusters = _clusters(mini, res)
    v_min = min(c.x for c in res.population)
    v_max = max(c.x for c in res.population)

    rep = cluster_report_artifact(man, clusters)
    lines = rep["content"].strip().split("\n")
    assert lines[1] == "cluster_id,size,best_value,min,median,max"
    assert len(lines) == 2 + len(clusters)

    svg = cluster_map_artifact(man, clusters, 5, v_min, v_max)
    assert svg["name"] == "cluster_map.svg"
    assert f"manifest={man['manifest_sha256']}" in svg["content"]
    root = ET.fromstring(svg["content"])
    assert root.tag.endswith("svg")
    ns = {"s": "http://www.w3.org/2000/svg"}
    circles = root.findall(".//s:circle", ns)
    assert len(circles) == min(5, len(clusters))
    radii = [float(c.get("r")) for c in circles]
    assert all(r >= 4.0 for r in radii)


def test_cluster_artifacts_bundle(mini):
    res = _small_result(mini)
    man = _manifest()
    clusters = _clusters(mini, res)
    v_min = min(c.x for c in res.population)
    v_max = max(c.x for c in res.population)
    arts = cluster_artifacts(man, mini, 2, clusters, 3, v_min, v_max)
    names = [a["name"] for a in arts]
    assert names[0] == "clusters.csv"
    assert "best_config.txt" in names
    assert "cluster_map.svg" in names
    shown = min(3, len(clusters))
    assert sum(1 for n in names if n.endswith("_allocation.csv")) == shown
    for art in arts:
        assert man["manifest_sha256"] in art["content"]


def test_frame_artifact_renders(mini):
    frames, _ = replay(mini, (1, 1), branch_budget=16)
    man = _manifest()
    art = frame_artifact(man, mini, frames[0])
    assert art["name"] == "frame_000.svg"
    root = ET.fromstring(art["content"])
    ns = {"s": "http://www.w3.org/2000/svg"}
    rects = root.findall(".//s:rect", ns)
    assert len(rects) >= len(mini.boxes)
    # a mid-battle frame paints fighting boxes and the caption text
    mid = max(frames, key=lambda f: len(f.combats))
    art2 = frame_artifact(man, mini, mid)
    assert mid.caption.split()[0] in art2["content"] or mid.caption in art2["content"]
    assert ET.fromstring(art2["content"]) is not None
