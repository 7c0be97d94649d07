"""Artifact emission: run manifests, CSV tables, and SVG plots.

Every run is described by a manifest whose hash covers only the inputs that
determine the outputs (command, scenario content, seed, settings).  The hash
is embedded in every artifact, so re-running the same manifest reproduces
files byte for byte while timestamps stay out of the contract.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

from . import combat, tables
from .cluster import Cluster, layout_topk
from .frames import Frame
from .model import Scenario, blue_slots
from .optimizer import OptimizeResult, SweepResult
from .sim import SimResult

Artifact = dict  # {"name": str, "content": str}


# ---------------------------------------------------------------------------
# manifest

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def scenario_digest(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def build_manifest(*, command: str, scenario_name: str, scenario_doc: dict,
                   seed: int, settings: Optional[dict] = None,
                   n_platoons: Optional[int] = None,
                   out_dir: Optional[str] = None,
                   timestamp: Optional[str] = None) -> dict:
    repro = {
        "command": command,
        "scenario_sha256": scenario_digest(scenario_doc),
        "seed": int(seed),
        "settings": settings or {},
    }
    if n_platoons is not None:
        repro["n_platoons"] = int(n_platoons)
    manifest_hash = hashlib.sha256(canonical_json(repro).encode()).hexdigest()
    doc = dict(repro)
    doc["scenario_name"] = scenario_name
    doc["manifest_sha256"] = manifest_hash
    doc["created_utc"] = timestamp if timestamp is not None else (
        datetime.now(timezone.utc).isoformat(timespec="seconds"))
    if out_dir is not None:
        doc["output_dir"] = out_dir
    return doc


def manifest_artifact(manifest: dict) -> Artifact:
    return {"name": "manifest.json",
            "content": json.dumps(manifest, indent=2, sort_keys=True) + "\n"}


# ---------------------------------------------------------------------------
# CSV

def _csv(manifest: dict, header: Sequence[str],
         rows: Iterable[Sequence]) -> str:
    lines = [f"# manifest={manifest['manifest_sha256']}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def trace_artifact(manifest: dict, result: OptimizeResult) -> Artifact:
    rows = [(i, x) for i, x in enumerate(result.trace)]
    return {"name": "trace.csv",
            "content": _csv(manifest, ["iteration", "best_x"], rows)}


def population_artifact(manifest: dict, result: OptimizeResult) -> Artifact:
    n = result.n_platoons
    header = ["rank", "x_value"] + [f"slot{i + 1:02d}" for i in range(n)]
    rows = [(r + 1, c.x) + c.config for r, c in enumerate(result.population)]
    return {"name": "population.csv", "content": _csv(manifest, header, rows)}


def best_artifact(manifest: dict, result: OptimizeResult) -> Artifact:
    best = result.best
    doc = {
        "manifest_sha256": manifest["manifest_sha256"],
        "n_platoons": result.n_platoons,
        "seed": result.seed,
        "x_value": best.x,
        "config": list(best.config),
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "converged": result.converged,
    }
    return {"name": "best.json",
            "content": json.dumps(doc, indent=2, sort_keys=True) + "\n"}


def simulate_artifact(manifest: dict, result: SimResult) -> Artifact:
    doc = {
        "manifest_sha256": manifest["manifest_sha256"],
        "config": list(result.config),
        "x_value": result.x,
        "x_value_cost_form": result.x_cost,
        "blue_initial": result.blue_initial,
        "blue_final": result.blue_final,
        "red_final": result.red_final,
        "illegal_moves": result.illegal_moves,
        "victories": result.victories,
        "rollouts_explored": result.rollouts_explored,
        "truncated": result.truncated,
        "end_time_s": result.end_time,
        "decisions": result.decisions,
        "battle_log": result.log,
    }
    return {"name": "simulation.json",
            "content": json.dumps(doc, indent=2, sort_keys=True) + "\n"}


def sweep_artifact(manifest: dict, result: SweepResult) -> Artifact:
    rows = [(r.n_platoons, r.repetitions, r.mean_best_x, r.sdom_best_x, r.best_x)
            for r in result.rows]
    header = ["n_platoons", "repetitions", "mean_best_x", "sdom_best_x", "best_x"]
    return {"name": "sweep.csv", "content": _csv(manifest, header, rows)}


def design_artifact(manifest: dict, matrix) -> Artifact:
    n = matrix.shape[1]
    header = ["row"] + [f"col{i + 1:02d}" for i in range(n)]
    rows = [(r + 1,) + tuple(int(v) for v in matrix[r]) for r in range(matrix.shape[0])]
    return {"name": "design.csv", "content": _csv(manifest, header, rows)}


# ---------------------------------------------------------------------------
# cluster reports

def platoon_label(type_id: int) -> str:
    """Short platoon label: tank platoons TP, cavalry CAV, the rest AIP."""
    mob = combat.unit_mobility("blue", type_id)
    if mob == "armored":
        return "TP"
    if mob == "cavalry":
        return "CAV"
    return "AIP"


def cluster_report_artifact(manifest: dict, clusters: Sequence[Cluster]) -> Artifact:
    header = ["cluster_id", "size", "best_value", "min", "median", "max"]
    rows = [(i + 1, c.size, c.best.x, c.x_min, c.x_median, c.x_max)
            for i, c in enumerate(clusters)]
    return {"name": "clusters.csv", "content": _csv(manifest, header, rows)}


def allocation_rows(cluster: Cluster) -> list[tuple[str, int, int, str]]:
    """Mean platoon count per (type, box), two decimals, highest mean first."""
    rows = []
    for (type_id, box), mean in cluster.avg_allocation.items():
        rows.append((platoon_label(type_id), type_id, box, f"{mean:.2f}"))
    rows.sort(key=lambda r: (-float(r[3]), r[2], r[1]))
    return rows


def allocation_artifact(manifest: dict, rank: int, cluster: Cluster) -> Artifact:
    header = ["type", "type_id", "box", "mean_count"]
    return {"name": f"cluster_{rank:02d}_allocation.csv",
            "content": _csv(manifest, header, allocation_rows(cluster))}


def best_config_lines(config: tuple[int, ...], slot_types: Sequence[int]) -> list[str]:
    """Table-style distribution of the best member, e.g. ``AIP×5→box 12``."""
    counts: dict[tuple[str, int], int] = {}
    for type_id, box in zip(slot_types, config):
        key = (platoon_label(type_id), box)
        counts[key] = counts.get(key, 0) + 1
    lines = [f"{label}×{count}→box {box}"
             for (label, box), count in sorted(counts.items(),
                                               key=lambda kv: (kv[0][1], kv[0][0]))]
    return lines


def best_config_artifact(manifest: dict, cluster: Cluster,
                         slot_types: Sequence[int]) -> Artifact:
    lines = [f"# manifest={manifest['manifest_sha256']}"]
    lines += best_config_lines(cluster.best.config, slot_types)
    return {"name": "best_config.txt", "content": "\n".join(lines) + "\n"}


# ---------------------------------------------------------------------------
# SVG

def _svg_doc(manifest: dict, width: int, height: int,
             elements: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">')
    comment = f"<!-- manifest={manifest['manifest_sha256']} -->"
    return "\n".join([head, comment] + elements + ["</svg>"]) + "\n"


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def value_color(x: float, v_min: float, v_max: float) -> str:
    """White at zero, toward blue for negatives and red for positives."""
    if x < 0.0:
        lim = min(v_min, 0.0)
        t = 0.0 if lim == 0.0 else min(1.0, x / lim)
        c = int(round(255 * (1.0 - t)))
        return f"rgb({c},{c},255)"
    lim = max(v_max, 0.0)
    t = 0.0 if lim == 0.0 else min(1.0, x / lim)
    c = int(round(255 * (1.0 - t)))
    return f"rgb(255,{c},{c})"


def cluster_map_artifact(manifest: dict, clusters: Sequence[Cluster], k: int,
                         v_min: float, v_max: float) -> Artifact:
    """Top-k clusters as circles: position from the stress layout, radius
    from member count, fill from best value, with allocation text boxes."""
    shown = clusters[:k]
    coords = layout_topk(shown, len(shown), v_min, v_max)
    width, height = 960, 760
    plot_w, plot_h, margin = 600, 600, 80

    span = max(float(abs(coords).max()), 1e-9)
    scale = (plot_w / 2 - 20) / span
    max_size = max(c.size for c in shown)
    elements = [f'<rect x="0" y="0" width="{width}" height="{height}" '
                'fill="white" stroke="none"/>']
    elements.append(
        f'<text x="{margin}" y="40" font-size="20" font-family="sans-serif">'
        f'{_esc("Top clusters by best value (lower is better)")}</text>')
    cx0, cy0 = margin + plot_w / 2, 60 + plot_h / 2
    for i, cl in enumerate(shown):
        x = cx0 + coords[i, 0] * scale
        y = cy0 + coords[i, 1] * scale
        radius = max(4.0, 40.0 * cl.size / max_size)
        fill = value_color(cl.best.x, v_min, v_max)
        elements.append(
            f'<circle cx="{x:.1f}" cy="{y:.1f}" r="{radius:.1f}" fill="{fill}" '
            'stroke="black" stroke-width="1"/>')
        elements.append(
            f'<text x="{x:.1f}" y="{y - radius - 4:.1f}" font-size="13" '
            f'text-anchor="middle" font-family="sans-serif">C{i + 1} '
            f'n={cl.size} x={_fmt(cl.best.x)}</text>')
    # allocation text boxes down the right margin
    tx = margin + plot_w + 30
    ty = 70
    for i, cl in enumerate(shown):
        lines = [f"C{i + 1}:"]
        for label, _tid, box, mean in allocation_rows(cl)[:6]:
            lines.append(f"{label} {mean} {box}")
        elements.append(
            f'<rect x="{tx - 6}" y="{ty - 14}" width="210" '
            f'height="{14 * len(lines) + 10}" fill="none" stroke="gray"/>')
        for line in lines:
            elements.append(
                f'<text x="{tx}" y="{ty}" font-size="12" '
                f'font-family="monospace">{_esc(line)}</text>')
            ty += 14
        ty += 16
        if ty > height - 40:
            break
    return {"name": "cluster_map.svg",
            "content": _svg_doc(manifest, width, height, elements)}


# ---------------------------------------------------------------------------
# timeline frames

def _geometry(scn: Scenario):
    xs = [b.x_m for b in scn.boxes.values()]
    ys = [b.y_m for b in scn.boxes.values()]
    for ep in scn.entry_points.values():
        xs.append(ep.x_m)
        ys.append(ep.y_m)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    plot_w, plot_h, margin = 880, 420, 50
    sx = plot_w / max(x1 - x0, 1.0)
    sy = plot_h / max(y1 - y0, 1.0)

    def to_px(x: float, y: float) -> tuple[float, float]:
        # flip y so north stays up
        return margin + (x - x0) * sx, margin + (y1 - y) * sy

    return to_px, plot_w + 2 * margin, plot_h + 2 * margin


def frame_artifact(manifest: dict, scn: Scenario, frame: Frame,
                   name: Optional[str] = None) -> Artifact:
    to_px, width, map_h = _geometry(scn)
    height = map_h + 150
    el = [f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']
    el.append(f'<text x="20" y="28" font-size="16" font-family="sans-serif">'
              f'frame {frame.index}  t={frame.t:.0f}s  {_esc(frame.caption)}</text>')
    for edge in scn.edges:
        ax, ay = to_px(scn.boxes[edge.a].x_m, scn.boxes[edge.a].y_m)
        bx, by = to_px(scn.boxes[edge.b].x_m, scn.boxes[edge.b].y_m)
        el.append(f'<line x1="{ax:.0f}" y1="{ay:.0f}" x2="{bx:.0f}" y2="{by:.0f}" '
                  'stroke="#bbbbbb" stroke-width="2"/>')
    for box in scn.boxes.values():
        x, y = to_px(box.x_m, box.y_m)
        stroke = "black"
        sw = 1
        if box.id in frame.combats:
            stroke, sw = "#cc0000", 3
        el.append(f'<rect x="{x - 22:.0f}" y="{y - 15:.0f}" width="44" height="30" '
                  f'fill="#f4f4f4" stroke="{stroke}" stroke-width="{sw}"/>')
        el.append(f'<text x="{x:.0f}" y="{y + 4:.0f}" font-size="12" '
                  f'text-anchor="middle" font-family="sans-serif">{box.id}</text>')
        if box.id in frame.combats:
            bt, rt = frame.combats[box.id]
            short = {"meeting": "ME", "hasty_defense": "HD", "hasty_attack": "HA",
                     "deliberate_defense": "DD", "deliberate_attack": "DA"}
            el.append(f'<text x="{x:.0f}" y="{y - 20:.0f}" font-size="11" '
                      f'text-anchor="middle" fill="#cc0000" font-family="sans-serif">'
                      f'{short.get(bt, bt)}/{short.get(rt, rt)}</text>')
    for ep in scn.entry_points.values():
        x, y = to_px(ep.x_m, ep.y_m)
        el.append(f'<polygon points="{x:.0f},{y - 8:.0f} {x + 8:.0f},{y:.0f} '
                  f'{x:.0f},{y + 8:.0f} {x - 8:.0f},{y:.0f}" fill="#888888"/>')
        el.append(f'<text x="{x:.0f}" y="{y + 22:.0f}" font-size="10" '
                  f'text-anchor="middle" font-family="sans-serif">{_esc(ep.name)}</text>')

    # unit markers: blue circles west of the box, red triangles east
    stacks: dict[tuple[str, int], int] = {}

    def place(side: str, key: int) -> tuple[float, float, int]:
        idx = stacks.get((side, key), 0)
        stacks[(side, key)] = idx + 1
        return idx % 4, idx // 4, idx

    for u in frame.blue.values():
        if u.status == "eliminated":
            continue
        if u.box is not None:
            bx, by = to_px(scn.boxes[u.box].x_m, scn.boxes[u.box].y_m)
            col, row, _ = place("b", u.box)
            x, y = bx - 32 - 9 * col, by - 12 + 9 * row
        elif u.entry is not None:
            ep = scn.entry_points[u.entry]
            bx, by = to_px(ep.x_m, ep.y_m)
            col, row, _ = place("b", -1)
            x, y = bx - 16 - 9 * col, by - 12 + 9 * row
        else:
            continue
        el.append(f'<circle cx="{x:.0f}" cy="{y:.0f}" r="4" fill="#3355dd" '
                  'stroke="white" stroke-width="0.6"/>')
    for u in frame.red.values():
        if u.status in ("eliminated", "exited") or u.box is None:
            continue
        bx, by = to_px(scn.boxes[u.box].x_m, scn.boxes[u.box].y_m)
        col, row, _ = place("r", u.box)
        x, y = bx + 32 + 9 * col, by - 12 + 9 * row
        el.append(f'<polygon points="{x:.0f},{y - 5:.0f} {x + 5:.0f},{y + 4:.0f} '
                  f'{x - 5:.0f},{y + 4:.0f}" fill="#cc2222" '
                  'stroke="white" stroke-width="0.6"/>')

    ty = map_h + 24
    exited = sum(1 for u in frame.red.values() if u.status == "exited")
    el.append(f'<text x="20" y="{ty}" font-size="14" fill="#223399" '
              f'font-family="sans-serif">blue: value {frame.blue_total:.4f}, '
              f'{frame.blue_count} platoons</text>')
    el.append(f'<text x="20" y="{ty + 22}" font-size="14" fill="#992222" '
              f'font-family="sans-serif">red: value {frame.red_total:.4f}, '
              f'{frame.red_count} platoons ({exited} exited)</text>')
    frame_name = name if name is not None else f"frame_{frame.index:03d}.svg"
    return {"name": frame_name,
            "content": _svg_doc(manifest, width, height, el)}


def cluster_artifacts(manifest: dict, scn: Scenario, n_platoons: int,
                      clusters: Sequence[Cluster], k: int,
                      v_min: float, v_max: float) -> list[Artifact]:
    """Report CSV, per-cluster allocations for the rendered top-k, the best
    configuration distribution, and the cluster map."""
    arts = [cluster_report_artifact(manifest, clusters)]
    slot_types = blue_slots(scn, n_platoons)
    for i, cl in enumerate(clusters[:k]):
        arts.append(allocation_artifact(manifest, i + 1, cl))
    if clusters:
        arts.append(best_config_artifact(manifest, clusters[0], slot_types))
        arts.append(cluster_map_artifact(manifest, clusters, k, v_min, v_max))
    return arts
