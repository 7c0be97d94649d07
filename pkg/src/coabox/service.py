"""HTTP service exposing the engine.

Each endpoint resolves the scenario, stamps a manifest, runs the
corresponding engine call, and returns the artifacts inline.  The service
holds no state between requests; identical requests produce identical
artifact bytes (timestamps live only inside manifest.json).
"""

from __future__ import annotations

import json

import numpy as np
from fastapi import FastAPI, HTTPException

from . import report
from .cluster import cluster_all, cluster_stats, rank_clusters
from .design import build_design
from .frames import replay
from .model import (Scenario, ScenarioError, blue_slots, bundled_scenario_path,
                    load_scenario)
from .optimizer import Candidate, optimize, sweep
from .schemas import (ClusterRequest, ClusterResponse, DesignRequest,
                      DesignResponse, FramesRequest, FramesResponse,
                      OptimizeRequest, OptimizeResponse, ScenarioPayload,
                      SimulateRequest, SimulateResponse, SweepRequest,
                      SweepResponse)
from .sim import simulate

app = FastAPI(title="coabox", version="0.1.0")


def _resolve(payload: ScenarioPayload) -> tuple[str, dict, Scenario]:
    try:
        if payload.name is not None:
            path = bundled_scenario_path(payload.name)
            doc = json.loads(path.read_text())
            name = payload.name
        else:
            doc = payload.document
            name = doc.get("name", "inline")
        return name, doc, load_scenario(doc)
    except (ScenarioError, FileNotFoundError, ValueError, KeyError) as exc:
        raise HTTPException(status_code=400, detail=f"invalid scenario: {exc}")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/optimize", response_model=OptimizeResponse)
def run_optimize(req: OptimizeRequest) -> OptimizeResponse:
    name, doc, scn = _resolve(req.scenario)
    settings = {"p_method": req.p_method, "batch_size": req.batch_size,
                "branch_budget": req.branch_budget}
    manifest = report.build_manifest(
        command="optimize", scenario_name=name, scenario_doc=doc,
        seed=req.seed, settings=settings, n_platoons=req.n_platoons)
    try:
        result = optimize(scn, req.n_platoons, seed=req.seed,
                          p_method=req.p_method, batch_size=req.batch_size,
                          branch_budget=req.branch_budget, workers=req.workers)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    artifacts = [
        report.manifest_artifact(manifest),
        report.trace_artifact(manifest, result),
        report.population_artifact(manifest, result),
        report.best_artifact(manifest, result),
    ]
    return OptimizeResponse(
        best_x=result.best.x, best_config=list(result.best.config),
        iterations=result.iterations, evaluations=result.evaluations,
        converged=result.converged,
        manifest_sha256=manifest["manifest_sha256"], artifacts=artifacts)


@app.post("/simulate", response_model=SimulateResponse)
def run_simulate(req: SimulateRequest) -> SimulateResponse:
    name, doc, scn = _resolve(req.scenario)
    settings = {"branch_budget": req.branch_budget, "config": list(req.config)}
    manifest = report.build_manifest(
        command="simulate", scenario_name=name, scenario_doc=doc,
        seed=req.seed, settings=settings, n_platoons=len(req.config))
    try:
        result = simulate(scn, tuple(req.config), base_seed=req.seed,
                          branch_budget=req.branch_budget,
                          record_log=req.record_log)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    artifacts = [
        report.manifest_artifact(manifest),
        report.simulate_artifact(manifest, result),
    ]
    return SimulateResponse(
        x_value=result.x, blue_final=result.blue_final,
        red_final=result.red_final, illegal_moves=result.illegal_moves,
        victories=result.victories, truncated=result.truncated,
        manifest_sha256=manifest["manifest_sha256"], artifacts=artifacts)


@app.post("/cluster", response_model=ClusterResponse)
def run_cluster(req: ClusterRequest) -> ClusterResponse:
    if not req.population:
        raise HTTPException(status_code=400, detail="empty population")
    name, doc, scn = _resolve(req.scenario)
    settings = {"tau": req.tau, "top_k": req.top_k,
                "population_size": len(req.population)}
    manifest = report.build_manifest(
        command="cluster", scenario_name=name, scenario_doc=doc,
        seed=req.seed, settings=settings, n_platoons=req.n_platoons)
    try:
        slot_types = blue_slots(scn, req.n_platoons)
        cands = []
        for entry in req.population:
            if len(entry.config) != req.n_platoons:
                raise ValueError("population entry length != n_platoons")
            cands.append(Candidate(tuple(entry.config), entry.x))
        v_min = min(c.x for c in cands)
        v_max = max(c.x for c in cands)
        clusters = rank_clusters([
            cluster_stats(c, slot_types)
            for c in cluster_all(cands, tau=req.tau)
        ])
        artifacts = [report.manifest_artifact(manifest)]
        artifacts += report.cluster_artifacts(
            manifest, scn, req.n_platoons, clusters, req.top_k, v_min, v_max)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return ClusterResponse(
        clusters=len(clusters), best_x=clusters[0].best.x,
        best_config=list(clusters[0].best.config),
        manifest_sha256=manifest["manifest_sha256"], artifacts=artifacts)


@app.post("/frames", response_model=FramesResponse)
def run_frames(req: FramesRequest) -> FramesResponse:
    name, doc, scn = _resolve(req.scenario)
    settings = {"branch_budget": req.branch_budget, "config": list(req.config)}
    manifest = report.build_manifest(
        command="frames", scenario_name=name, scenario_doc=doc,
        seed=req.seed, settings=settings, n_platoons=len(req.config))
    try:
        frames, result = replay(scn, tuple(req.config), base_seed=req.seed,
                                branch_budget=req.branch_budget)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    artifacts = [report.manifest_artifact(manifest)]
    artifacts += [report.frame_artifact(manifest, scn, f) for f in frames]
    return FramesResponse(
        frames=len(frames), x_value=result.x,
        manifest_sha256=manifest["manifest_sha256"], artifacts=artifacts)


@app.post("/sweep", response_model=SweepResponse)
def run_sweep(req: SweepRequest) -> SweepResponse:
    name, doc, scn = _resolve(req.scenario)
    settings = {"counts": list(req.counts), "repetitions": req.repetitions,
                "branch_budget": req.branch_budget, "p_method": req.p_method,
                "batch_size": req.batch_size}
    manifest = report.build_manifest(
        command="sweep", scenario_name=name, scenario_doc=doc,
        seed=req.seed, settings=settings)
    try:
        result = sweep(scn, req.counts, repetitions=req.repetitions,
                       seed=req.seed, branch_budget=req.branch_budget,
                       p_method=req.p_method, batch_size=req.batch_size,
                       workers=req.workers)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    artifacts = [
        report.manifest_artifact(manifest),
        report.sweep_artifact(manifest, result),
    ]
    return SweepResponse(
        halt_threshold=result.halt_threshold,
        manifest_sha256=manifest["manifest_sha256"], artifacts=artifacts)


@app.post("/design", response_model=DesignResponse)
def run_design(req: DesignRequest) -> DesignResponse:
    manifest = report.build_manifest(
        command="design", scenario_name="-", scenario_doc={},
        seed=req.seed, settings={}, n_platoons=req.n_platoons)
    try:
        matrix = build_design(req.n_platoons, seed=req.seed)
    except (ValueError, RuntimeError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    if matrix.shape[1] > 1:
        corr = np.corrcoef(matrix.T)
        off = corr[~np.eye(matrix.shape[1], dtype=bool)]
        max_corr = float(np.abs(off).max())
    else:
        max_corr = 0.0
    artifacts = [
        report.manifest_artifact(manifest),
        report.design_artifact(manifest, matrix),
    ]
    return DesignResponse(
        rows=int(matrix.shape[0]), columns=int(matrix.shape[1]),
        max_abs_correlation=max_corr,
        manifest_sha256=manifest["manifest_sha256"], artifacts=artifacts)
