"""Command-line surface: a thin client over the tubekit service.

Subcommands cover the whole pipeline (gen / divide / mask / targets / loss /
stats) plus the self-check suites (verify / gradcheck) and `serve` to run the
HTTP service.  Exit codes: 0 ok, 1 computation error, 2 usage error.

Paths accept `-` for stdin/stdout on binary payloads, so stages pipe:

    tubekit gen --kind raise -o - | tubekit targets - -o - | tubekit stats -
"""

from __future__ import annotations

import argparse
import base64
import concurrent.futures
import json
import os
import sys
from pathlib import Path

from .bundle import parse_config_text
from .client import ServiceClient, ServiceError
from .errors import TubekitError
from .pipeline import PipelineConfig
from .synth import KINDS

_CONFIG_FLAGS = {
    # flag dest -> config field
    "seed": "seed",
    "mask_ratio": "mask_ratio",
    "sections": "sections",
    "stride": "stride",
    "recon_mode": "recon_mode",
    "radius": "radius",
    "tube_frames": "l",
    "neighbors": "n",
    "spatial_downsample": "spatial_downsample",
    "temporal_downsample": "temporal_downsample",
    "motion_weight": "motion_weight",
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="canonical text config file; flags override it")
    p.add_argument("--seed", type=int, help="pipeline seed (default 0)")
    p.add_argument("--mask-ratio", type=float, help="fraction of tubes to mask (default 0.75)")
    p.add_argument("--sections", help="direction sections: 4, 8, 16, or 'custom' with --codebook")
    p.add_argument("--codebook", metavar="PATH", help="JSON [[x,y,z],...] custom direction centers")
    p.add_argument("--no-interp", action="store_true", help="disable angular interpolation")
    p.add_argument("--stride", type=int, help="temporal stride for cardinality differences")
    p.add_argument("--recon-mode", choices=["decoupled", "coupled", "middle"])
    p.add_argument("--radius", type=float, help="spherical query radius in meters")
    p.add_argument("--tube-frames", type=int, help="frames per tube (l)")
    p.add_argument("--neighbors", type=int, help="points per tube frame (n)")
    p.add_argument("--spatial-downsample", type=int)
    p.add_argument("--temporal-downsample", type=int)
    p.add_argument("--no-motion", action="store_true", help="disable the motion stream")
    p.add_argument("--normalize-cd", action="store_true", help="divide CD counts by n")
    p.add_argument("--motion-weight", type=float)


def _resolve_config(args: argparse.Namespace) -> dict:
    """Defaults <- --config file <- explicit flags, as a service payload."""
    config = PipelineConfig()
    if getattr(args, "config", None):
        config = parse_config_text(Path(args.config).read_text())
    overrides = {}
    for dest, field in _CONFIG_FLAGS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if field == "sections" and value == "custom":
            continue  # sections come from the codebook file
        overrides[field] = int(value) if field == "sections" else value
    if getattr(args, "no_interp", False):
        overrides["interpolate"] = False
    if getattr(args, "no_motion", False):
        overrides["motion_stream"] = False
    if getattr(args, "normalize_cd", False):
        overrides["normalize_cd"] = True
    config = config.with_overrides(**overrides)
    payload = {f: getattr(config, f) for f in (
        "l", "n", "radius", "spatial_downsample", "temporal_downsample", "mask_ratio",
        "recon_mode", "seed", "sections", "interpolate", "stride", "normalize_cd",
        "motion_stream", "motion_weight",
    )}
    if getattr(args, "codebook", None):
        centers = json.loads(Path(args.codebook).read_text())
        payload["codebook"] = centers
        payload["sections"] = len(centers)
    return payload


def _read_binary(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_binary(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _emit(args: argparse.Namespace, result, human: str | None = None) -> None:
    if getattr(args, "json", False):
        print(json.dumps(result))
    else:
        print(human if human is not None else json.dumps(result, indent=2))


def _pool_size() -> int:
    env = os.environ.get("TUBEKIT_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _map_inputs(args, paths: list[str], work) -> list:
    """Run per-input work in a worker pool, results in input order."""
    if len(paths) <= 1:
        return [work(p) for p in paths]
    with concurrent.futures.ThreadPoolExecutor(max_workers=_pool_size()) as pool:
        return list(pool.map(work, paths))


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("tubekit.service:app", host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_gen(args) -> int:
    with ServiceClient(args.server) as client:
        result = client.post("/v1/gen", {
            "kind": args.kind, "frames": args.frames, "points": args.points, "seed": args.seed,
        })
    _write_binary(args.output, base64.b64decode(result["pcv_b64"]))
    if args.output != "-":
        _emit(args, {"output": args.output, "frames": result["frames"], "points": result["points"][0]},
              f"wrote {args.output}: {result['frames']} frames x {result['points'][0]} points")
    return 0


def _cmd_divide(args) -> int:
    config = _resolve_config(args)

    def work(path: str) -> dict:
        with ServiceClient(args.server) as client:
            pcv = base64.b64encode(_read_binary(path)).decode("ascii")
            stats = client.post("/v1/divide", {"pcv_b64": pcv, "config": config})
        stats["input"] = path
        return stats

    results = _map_inputs(args, args.videos, work)
    for stats in results:
        _emit(args, stats,
              f"{stats['input']}: {stats['num_tubes']} tubes over {len(stats['anchor_frames'])} anchors "
              f"(shape {stats['tube_shape']})")
    return 0


def _cmd_mask(args) -> int:
    config = _resolve_config(args)
    payload = {"mask_ratio": config["mask_ratio"], "seed": config["seed"], "config": config}
    if args.num_tubes is not None:
        payload["num_tubes"] = args.num_tubes
    elif args.video is not None:
        payload["pcv_b64"] = base64.b64encode(_read_binary(args.video)).decode("ascii")
    else:
        raise TubekitError("mask needs a video path or --num-tubes", code="usage")
    with ServiceClient(args.server) as client:
        result = client.post("/v1/mask", payload)
    _emit(args, result,
          f"{result['num_masked']} of {result['num_tubes']} tubes masked "
          f"(ratio {result['mask_ratio']}, seed {result['seed']})\n"
          + "".join(str(f) for f in result["flags"]))
    return 0


def _cmd_targets(args) -> int:
    config = _resolve_config(args)
    outputs = _target_outputs(args)

    def work(item: tuple[str, str]) -> dict:
        path, out = item
        with ServiceClient(args.server) as client:
            pcv = base64.b64encode(_read_binary(path)).decode("ascii")
            result = client.post("/v1/targets", {"pcv_b64": pcv, "config": config})
        _write_binary(out, base64.b64decode(result["bundle_b64"]))
        return {"input": path, "output": out, "num_tubes": result["num_tubes"],
                "num_masked": result["num_masked"], "bytes": result["bytes"]}

    results = _map_inputs(args, list(zip(args.videos, outputs)), work)
    for r in results:
        if r["output"] == "-":
            continue
        _emit(args, r, f"{r['input']}: {r['num_masked']}/{r['num_tubes']} masked tubes -> {r['output']} "
              f"({r['bytes']} bytes)")
    return 0


def _target_outputs(args) -> list[str]:
    if len(args.videos) == 1:
        out = args.output or (str(Path(args.videos[0]).with_suffix(".tbnd")) if args.videos[0] != "-" else "-")
        return [out]
    if not args.output:
        raise TubekitError("multiple inputs require -o OUTPUT_DIR", code="usage")
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [str(out_dir / (Path(p).stem + ".tbnd")) for p in args.videos]


def _cmd_loss(args) -> int:
    with ServiceClient(args.server) as client:
        result = client.post("/v1/loss", {
            "pred_bundle_b64": base64.b64encode(_read_binary(args.pred)).decode("ascii"),
            "gt_bundle_b64": base64.b64encode(_read_binary(args.gt)).decode("ascii"),
            "recon_mode": args.recon_mode,
            "include_gradients": args.gradients,
        })
    _emit(args, result,
          f"app {result['app_loss']:.9g}  motion {result['motion_loss']:.9g}  "
          f"total {result['total_loss']:.9g}  ({result['num_tubes']} tubes, {result['recon_mode']})")
    return 0


def _cmd_stats(args) -> int:
    def work(path: str) -> dict:
        with ServiceClient(args.server) as client:
            result = client.post("/v1/stats", {
                "bundle_b64": base64.b64encode(_read_binary(path)).decode("ascii"),
                "per_tube": args.per_tube,
            })
        result["input"] = path
        return result

    for result in _map_inputs(args, args.bundles, work):
        if getattr(args, "json", False):
            print(json.dumps(result))
            continue
        lines = [
            f"{result['input']}: {result['num_masked']}/{result['num_tubes']} masked tubes, "
            f"{result['sections']} sections, {result['cd_rows']} CD rows, "
            f"max |CD| {result['max_abs_cd']:.6g}",
            "per-(row, section) CD sums over tubes:",
        ]
        for t, row in enumerate(result["bin_row_sums"]):
            lines.append(f"  row {t}: " + "  ".join(f"{v:+9.3f}" for v in row))
        lines.append("  total: " + "  ".join(f"{v:+9.3f}" for v in result["bin_totals"]))
        print("\n".join(lines))
    return 0


def _cmd_gradcheck(args) -> int:
    with ServiceClient(args.server) as client:
        result = client.post("/v1/gradcheck", {"trials": args.trials, "seed": args.seed or 0})
    _emit(args, result,
          f"gradcheck {'ok' if result['ok'] else 'FAILED'}: chamfer max rel err "
          f"{result['chamfer_max_rel_error']:.3g}, smooth-L1 max rel err "
          f"{result['smooth_l1_max_rel_error']:.3g} (tolerance {result['tolerance']:g}, "
          f"{result['trials']} trials)")
    return 0 if result["ok"] else 1


def _cmd_verify(args) -> int:
    with ServiceClient(args.server) as client:
        result = client.post("/v1/verify", {"cases": args.cases, "seed": args.seed or 0})
    _emit(args, result,
          f"verify {'ok' if result['ok'] else 'FAILED'}: fps mismatches {result['fps_mismatches']}, "
          f"chamfer max err {result['chamfer_max_abs_error']:.3g}, "
          f"cd max err {result['cd_max_abs_error']:.3g} ({result['cases']} cases)")
    return 0 if result["ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tubekit",
        description="Point-tube pretext targets for point cloud videos.",
    )
    parser.add_argument("--server", metavar="URL", help="remote service URL (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=_cmd_serve)

    p = sub.add_parser("gen", help="generate a synthetic video")
    p.add_argument("--kind", choices=KINDS, default="static")
    p.add_argument("--frames", type=int, default=24)
    p.add_argument("--points", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output .pcv path or -")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("divide", help="divide videos into point tubes (stats only)")
    p.add_argument("videos", nargs="+", help=".pcv paths or -")
    _add_config_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_divide)

    p = sub.add_parser("mask", help="report mask flags for a seed")
    p.add_argument("video", nargs="?", help=".pcv path or -")
    p.add_argument("--num-tubes", type=int, help="skip division; mask this many tubes")
    _add_config_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_mask)

    p = sub.add_parser("targets", help="compute masked-tube target bundles")
    p.add_argument("videos", nargs="+", help=".pcv paths or -")
    p.add_argument("-o", "--output", help="output .tbnd path (single input) or directory")
    _add_config_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_targets)

    p = sub.add_parser("loss", help="two-stream losses between prediction and target bundles")
    p.add_argument("--pred", required=True, help="prediction .tbnd path or -")
    p.add_argument("--gt", required=True, help="ground-truth .tbnd path")
    p.add_argument("--recon-mode", choices=["decoupled", "coupled", "middle"])
    p.add_argument("--gradients", action="store_true", help="include gradient buffers in JSON")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_loss)

    p = sub.add_parser("stats", help="CD summaries from target bundles")
    p.add_argument("bundles", nargs="+", help=".tbnd paths or -")
    p.add_argument("--per-tube", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_gradcheck)

    p = sub.add_parser("verify", help="oracle-equivalence suite")
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (TubekitError, ServiceError) as exc:
        code = getattr(exc, "code", "error")
        if code == "usage":
            print(f"usage error: {exc}", file=sys.stderr)
            return 2
        print(f"error [{code}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
