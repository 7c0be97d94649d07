"""Command line front end.

The CLI is a thin client of the HTTP service: it builds a request, posts it
(in process by default, or to ``--server`` for a remote run), and writes the
returned artifacts under ``--out`` in the order the service produced them,
manifest first.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _parse_config(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError("config must be comma-separated box ids")


def _parse_counts(text: str) -> list[int]:
    text = text.replace(" ", "")
    for sep in ("-", ".."):
        if sep in text and "," not in text:
            lo, hi = text.split(sep, 1)
            return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok]


def _scenario_payload(spec: str) -> dict:
    path = Path(spec)
    if path.exists():
        return {"document": json.loads(path.read_text())}
    return {"name": spec}


def _post(server: str | None, route: str, payload: dict) -> dict:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            resp = client.post(route, json=payload)
    else:
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            from fastapi.testclient import TestClient

        from .service import app
        with TestClient(app) as client:
            resp = client.post(route, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        print(f"error: {detail}", file=sys.stderr)
        raise SystemExit(1)
    return resp.json()


def _write_artifacts(out: str, artifacts: list[dict]) -> None:
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for art in artifacts:
        target = out_dir / art["name"]
        target.write_bytes(art["content"].encode("utf-8"))
        print(f"wrote {target}")


def _population_entries(path: str) -> tuple[int, list[dict]]:
    """Read a population CSV back into (n_platoons, entries)."""
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln and not ln.startswith("#")]
    if not lines:
        raise SystemExit("error: empty population file")
    header = lines[0].split(",")
    slots = [i for i, h in enumerate(header) if h.startswith("slot")]
    xi = header.index("x_value")
    entries = []
    for ln in lines[1:]:
        cells = ln.split(",")
        entries.append({"config": [int(cells[i]) for i in slots],
                        "x": float(cells[xi])})
    return len(slots), entries


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coa",
        description="Course-of-action search over a box-graph ground combat model")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, scenario: bool = True) -> None:
        if scenario:
            p.add_argument("--scenario", default="scenario14",
                           help="scenario file path or bundled name")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("optimize", help="search initial blue groupings")
    common(p)
    p.add_argument("--platoons", type=_positive_int, required=True)
    p.add_argument("--p-method", type=float, default=0.4)
    p.add_argument("--batch", type=_positive_int, default=12)
    p.add_argument("--budget", type=_nonneg_int, default=64,
                   help="rollout budget per evaluation")
    p.add_argument("--workers", type=_positive_int, default=None)

    p = sub.add_parser("simulate", help="roll out one grouping in depth")
    common(p)
    p.add_argument("--config", type=_parse_config, required=True,
                   help="comma-separated destination box per platoon")
    p.add_argument("--budget", type=_nonneg_int, default=10000)

    p = sub.add_parser("cluster", help="cluster an optimized population")
    common(p)
    p.add_argument("--population", default=None,
                   help="population CSV (default <out>/population.csv)")
    p.add_argument("--tau", type=float, default=0.2)
    p.add_argument("--top-k", type=_positive_int, default=10)

    p = sub.add_parser("frames", help="render a simulation as SVG frames")
    common(p)
    p.add_argument("--config", type=_parse_config, required=True)
    p.add_argument("--budget", type=_nonneg_int, default=64)

    p = sub.add_parser("sweep", help="mean best value vs platoon count")
    common(p)
    p.add_argument("--counts", type=_parse_counts, default=list(range(1, 17)),
                   help="range like 1-16 or list like 4,7,10")
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--budget", type=_nonneg_int, default=64)
    p.add_argument("--p-method", type=float, default=0.4)
    p.add_argument("--batch", type=_positive_int, default=12)
    p.add_argument("--workers", type=_positive_int, default=None)

    p = sub.add_parser("design", help="emit the space-filling start design")
    common(p, scenario=False)
    p.add_argument("--platoons", type=_positive_int, required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "optimize":
        data = _post(args.server, "/optimize", {
            "scenario": _scenario_payload(args.scenario),
            "n_platoons": args.platoons, "seed": args.seed,
            "p_method": args.p_method, "batch_size": args.batch,
            "branch_budget": args.budget, "workers": args.workers,
        })
        _write_artifacts(args.out, data["artifacts"])
        print(f"best x={data['best_x']:.6f} config={data['best_config']} "
              f"iterations={data['iterations']} converged={data['converged']}")
    elif args.command == "simulate":
        data = _post(args.server, "/simulate", {
            "scenario": _scenario_payload(args.scenario),
            "config": args.config, "seed": args.seed,
            "branch_budget": args.budget,
        })
        _write_artifacts(args.out, data["artifacts"])
        print(f"x={data['x_value']:.6f} blue_final={data['blue_final']:.6f} "
              f"red_final={data['red_final']:.6f} "
              f"illegal={data['illegal_moves']} truncated={data['truncated']}")
    elif args.command == "cluster":
        pop_path = args.population or str(Path(args.out) / "population.csv")
        n_platoons, entries = _population_entries(pop_path)
        data = _post(args.server, "/cluster", {
            "scenario": _scenario_payload(args.scenario),
            "n_platoons": n_platoons, "population": entries,
            "tau": args.tau, "top_k": args.top_k, "seed": args.seed,
        })
        _write_artifacts(args.out, data["artifacts"])
        print(f"clusters={data['clusters']} best x={data['best_x']:.6f} "
              f"config={data['best_config']}")
    elif args.command == "frames":
        data = _post(args.server, "/frames", {
            "scenario": _scenario_payload(args.scenario),
            "config": args.config, "seed": args.seed,
            "branch_budget": args.budget,
        })
        _write_artifacts(args.out, data["artifacts"])
        print(f"frames={data['frames']} x={data['x_value']:.6f}")
    elif args.command == "sweep":
        data = _post(args.server, "/sweep", {
            "scenario": _scenario_payload(args.scenario),
            "counts": args.counts, "repetitions": args.reps,
            "seed": args.seed, "branch_budget": args.budget,
            "p_method": args.p_method, "batch_size": args.batch,
            "workers": args.workers,
        })
        _write_artifacts(args.out, data["artifacts"])
        halt = data["halt_threshold"]
        print("halt threshold: "
              + (f"{halt} platoons" if halt is not None else "not reached"))
    elif args.command == "design":
        data = _post(args.server, "/design", {
            "n_platoons": args.platoons, "seed": args.seed,
        })
        _write_artifacts(args.out, data["artifacts"])
        print(f"design {data['rows']}x{data['columns']} "
              f"max|corr|={data['max_abs_correlation']:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
