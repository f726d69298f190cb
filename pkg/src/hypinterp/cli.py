"""Command-line surface: instance generation, checking, construction, audits.

Exit codes: 0 success, 1 mathematical failure (with a witness in the report),
2 I/O or schema errors.  All randomness flows from the single --seed; reports
are plain JSON with sorted keys, so identical (instance, config, seed) runs
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from .builder import ANCHOR, PipelineError
from .conditions import (
    DensityParams,
    InterpolationInstance,
    analyze,
    density_check,
    necessity_witness,
    pick_matrix_psd,
)
from .correction import GridFunction, grid_dbar_residual
from .dyadic import DyadicInterval, box_center
from .geometry import LN2, Model, beta_halfplane, disc_geodesic
from .pipeline import ConstructionResult, RunConfig, construct

VERIFY_MIN_ROW = 8


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# generators


def _lipschitz_values(points: list[complex], scale: float) -> list[complex]:
    """Values on a fixed geodesic with gaps `scale` times the point distances."""
    base = points[0]
    out = []
    for z in points:
        d = beta_halfplane(base, z)
        s = min(scale * d / (2.0 * math.atanh(0.9) / LN2), 1.0)
        out.append(disc_geodesic(0.0 + 0.0j, 0.9 + 0.0j, s))
    return out


def generate_instance(kind: str, params: dict, seed: int) -> InterpolationInstance:
    rng = np.random.default_rng(seed)
    if kind == "column":
        count = int(params.get("count", 10))
        pts = tuple(1j * 2.0**-k for k in range(count + 1))
        return InterpolationInstance(pts, (0.0 + 0.0j,) * len(pts), float(params.get("epsilon", 0.1)), Model.HALFPLANE)
    if kind == "cluster":
        count = int(params.get("count", 3))
        spread = float(params.get("spread", 5e-4))
        base = complex(params.get("x", 0.4), params.get("y", 0.25))
        step = spread * base.imag * LN2  # euclidean offset giving ~spread in beta
        pts = tuple(base + k * step / max(count - 1, 1) for k in range(count))
        return InterpolationInstance(pts, (0.0 + 0.0j,) * count, float(params.get("epsilon", 0.1)), Model.HALFPLANE)
    if kind == "witness":
        n = int(params.get("n", 8))
        gamma = float(params.get("gamma", 0.5))
        epsilon = float(params.get("epsilon", 0.1))
        count = int(params.get("count", 6))
        beta = n - 0.5
        r = (2.0**beta - 1.0) / (2.0**beta + 1.0)
        window = math.pi / 2.0 - 2.0 ** (-n * gamma)
        angles = list(rng.uniform(-0.9 * window, 0.9 * window, (count + 1) // 2))
        angles += list(math.pi + rng.uniform(-0.9 * window, 0.9 * window, count // 2))
        host = [r * complex(math.cos(a), math.sin(a)) for a in angles]
        wit = necessity_witness(host, n, gamma, epsilon)
        if wit.instance is None:
            raise ValueError("witness generation degenerated; adjust parameters")
        return wit.instance
    if kind == "lattice":
        alpha = float(params.get("alpha", 0.5))
        depth = int(params.get("depth", 10))
        epsilon = float(params.get("epsilon", 0.05))
        separated = bool(params.get("separated", False))
        if separated:
            # construct-ready: deep single-generation box centers, pairwise and
            # anchor clearance above the thinning separation, Lipschitz values
            count = int(params.get("count", 6))
            sep = float(params.get("separation", 6.0))
            # anchor clearance beta(anchor, center) ~ (1 + g)/2 needs g >= 2 sep
            g = max(depth, int(math.ceil(2.0 * sep)), 12)
            width = 1 << g
            # same-height clearance: beta = log2(d / y), so d >= y 2^{sep + margin}
            y = 0.75 * 2.0**-g
            min_dx = y * 2.0 ** (sep + 0.5)
            min_slots = max(1, int(math.ceil(min_dx * width)))
            max_count = max(1, (width - 2) // min_slots)
            if count > max_count:
                raise ValueError(f"at most {max_count} points fit at depth {g} with separation {sep}")
            slots = np.linspace(1, width - 2, count).astype(np.int64)
            jitter = rng.integers(0, max(1, min_slots // 8), count)
            pts = [box_center(DyadicInterval(g, int(j + dj))) for j, dj in zip(slots, jitter)]
            scale = float(params.get("value_scale", 0.8)) * epsilon
            values = (
                [0.0 + 0.0j] * count
                if params.get("values") == "zeros"
                else _lipschitz_values(pts, scale)
            )
            return InterpolationInstance(tuple(pts), tuple(values), epsilon, Model.HALFPLANE)
        pts: list[complex] = []
        for g in range(2, depth + 1):
            count = max(1, int(2.0 ** (alpha * g) / 2.0))
            idx = rng.choice(1 << g, size=min(count, 1 << g), replace=False)
            pts.extend(box_center(DyadicInterval(g, int(j))) for j in sorted(idx))
        pts = list(dict.fromkeys(pts))
        inst = InterpolationInstance(tuple(pts), (0.0 + 0.0j,) * len(pts), epsilon, Model.HALFPLANE)
        report = density_check(pts, Model.HALFPLANE, DensityParams(4.0, min(alpha + 0.1, 0.95)), "dyadic_generation", depth)
        if not report.holds:
            raise ValueError(f"lattice draw failed its density certificate: {report.worst}")
        return inst
    raise ValueError(f"unknown generator kind {kind!r}")


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    params = json.loads(args.params) if args.params else {}
    if args.epsilon_override is not None:
        params["epsilon"] = args.epsilon_override
    try:
        inst = generate_instance(args.kind, params, args.seed)
    except ValueError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    inst.dump(out)
    print(f"wrote {out}")
    return 0


def _load_instance(path: str) -> InterpolationInstance:
    return InterpolationInstance.load(path)


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = RunConfig.from_json(json.loads(Path(args.config).read_text()))
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "max_generation", None) is not None:
        updates["max_generation"] = args.max_generation
    if getattr(args, "t_samples", None) is not None:
        updates["t_samples"] = args.t_samples
    if getattr(args, "epsilon_override", None) is not None:
        updates["epsilon_override"] = args.epsilon_override
    return replace(cfg, **updates) if updates else cfg


def cmd_check(args) -> int:
    try:
        inst = _load_instance(args.instance)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"cannot read instance: {exc}", file=sys.stderr)
        return 2
    cfg = _config_from_args(args)
    report = analyze(
        inst,
        DensityParams(cfg.density_m, cfg.density_alpha),
        cfg.max_generation,
        cfg.min_split_separation,
        cfg.tol_eig,
    )
    payload = {
        "command": "check",
        "analysis": report.to_json(),
        "config_digest": cfg.digest(),
        "seed": cfg.seed,
    }
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(out_dir / "check_report.json", payload)
    print(json.dumps(payload, sort_keys=True, indent=1))
    return 0 if report.condition_a_ok and report.condition_b_ok else 1


def cmd_oracle(args) -> int:
    try:
        inst = _load_instance(args.instance)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"cannot read instance: {exc}", file=sys.stderr)
        return 2
    cfg = _config_from_args(args)
    pick = pick_matrix_psd(inst, cfg.tol_eig)
    payload = {
        "command": "oracle",
        "min_eigenvalue": pick.min_eigenvalue,
        "feasible": pick.feasible,
        "verdict": pick.verdict,
        "config_digest": cfg.digest(),
        "seed": cfg.seed,
    }
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "oracle_report.json", payload)
    print(json.dumps(payload, sort_keys=True, indent=1))
    return 0 if pick.feasible else 1


def write_construction(result: ConstructionResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "f_grid.csv").write_text(result.f_grid.to_csv(), encoding="utf-8")
    lines = ["x,re,im"]
    for x, v in zip(result.boundary_x, result.boundary_f):
        lines.append(f"{float(x)!r},{float(v.real)!r},{float(v.imag)!r}")
    (out_dir / "f_boundary.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    nodes = {
        "points": [[z.real, z.imag] for z in result.node_points],
        "values": [[v.real, v.imag] for v in result.node_values],
    }
    _write_json(out_dir / "f_nodes.json", nodes)
    meta = {
        "grid": result.f_grid.metadata(),
        "config": result.config.to_json(),
        "config_digest": result.config.digest(),
        "verify_min_row": VERIFY_MIN_ROW,
        "instance": result.instance.to_json(),
    }
    _write_json(out_dir / "f_meta.json", meta)
    _write_json(out_dir / "construct_report.json", result.report())


def cmd_construct(args) -> int:
    try:
        inst = _load_instance(args.instance)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"cannot read instance: {exc}", file=sys.stderr)
        return 2
    cfg = _config_from_args(args)
    try:
        result = construct(inst, cfg)
    except PipelineError as exc:
        payload = {"command": "construct", "stage": exc.stage, "error": str(exc), "witness": exc.witness}
        print(json.dumps(payload, sort_keys=True, indent=1))
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            _write_json(out / "construct_report.json", payload)
        return 1
    if args.out_dir:
        write_construction(result, Path(args.out_dir))
    print(json.dumps(result.report(), sort_keys=True, indent=1))
    return 0 if result.ok else 1


def verify_dump(out_dir: Path, instance: InterpolationInstance) -> dict:
    meta = json.loads((out_dir / "f_meta.json").read_text())
    if meta["instance"] != instance.to_json():
        raise ValueError("dump metadata does not match the instance")
    grid = GridFunction.from_csv((out_dir / "f_grid.csv").read_text(), meta["grid"])
    nodes = json.loads((out_dir / "f_nodes.json").read_text())
    node_pts = [complex(p[0], p[1]) for p in nodes["points"]]
    node_vals = [complex(v[0], v[1]) for v in nodes["values"]]
    if [complex(z) for z in instance.points] != node_pts:
        raise ValueError("node dump does not match the instance points")
    cfg = RunConfig.from_json(meta["config"])
    node_res = max(
        (abs(v - w) for v, w in zip(node_vals, instance.values)), default=0.0
    )
    boundary_rows = (out_dir / "f_boundary.csv").read_text().strip().splitlines()[1:]
    boundary_sup = 0.0
    for row in boundary_rows:
        _x, re_s, im_s = row.split(",")
        boundary_sup = max(boundary_sup, abs(complex(float(re_s), float(im_s))))
    res_field = grid_dbar_residual(grid, min_row=int(meta["verify_min_row"]))
    pts = grid.points()
    with np.errstate(invalid="ignore", divide="ignore"):
        budget_field = np.abs(res_field) * pts.imag / (1.0 - np.abs(grid.values) ** 2)
    dbar_budget = float(np.nanmax(budget_field))
    return {
        "command": "verify",
        "node_residual_max": node_res,
        "boundary_sup": boundary_sup,
        "dbar_budget_max": dbar_budget,
        "ok_nodes": node_res <= 1e-10,
        "ok_boundary": boundary_sup <= 1.0 + cfg.boundary_tol,
        "ok_dbar": dbar_budget <= cfg.residual_budget,
        "config_digest": meta["config_digest"],
    }


def cmd_verify(args) -> int:
    try:
        inst = _load_instance(args.instance)
        payload = verify_dump(Path(args.dump), inst)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"verification input error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(payload, sort_keys=True, indent=1))
    ok = payload["ok_nodes"] and payload["ok_boundary"] and payload["ok_dbar"]
    return 0 if ok else 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="hypinterp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, instance=True):
        if instance:
            p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--config", help="RunConfig JSON file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out-dir", default=None)
        p.add_argument("--max-generation", type=int, default=None)
        p.add_argument("--t-samples", type=int, default=None)
        p.add_argument("--epsilon-override", type=float, default=None)

    p_gen = sub.add_parser("gen", help="generate a deterministic instance file")
    p_gen.add_argument("--kind", required=True, choices=["lattice", "column", "cluster", "witness"])
    p_gen.add_argument("--params", help="JSON object of generator parameters")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--epsilon-override", type=float, default=None)
    p_gen.set_defaults(func=cmd_gen)

    p_check = sub.add_parser("check", help="admissibility analysis")
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_oracle = sub.add_parser("oracle", help="positive-semidefiniteness oracle")
    common(p_oracle)
    p_oracle.set_defaults(func=cmd_oracle)

    p_con = sub.add_parser("construct", help="run the full construction")
    common(p_con)
    p_con.set_defaults(func=cmd_construct)

    p_ver = sub.add_parser("verify", help="re-audit an emitted construction")
    common(p_ver)
    p_ver.add_argument("--dump", required=True, help="directory written by construct")
    p_ver.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:  # pragma: no cover
        return 2


if __name__ == "__main__":
    sys.exit(main())
