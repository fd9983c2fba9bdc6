"""Command-line interface.

Subcommands: render (synthetic image + sidecars), trial (one end-to-end
trial), sweep (Monte-Carlo parameter sweep to CSV), reconstruct (user-supplied
calibrated image), selftest (analytic invariant suite).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .extract import DEFAULT_BLUR_SIGMA, RegionOfInterest
from .harness import (DEFAULT_GRIDS, SweepSpec, emit_sweep_csv,
                      reconstruct_image, run_sweep, run_trial, trial_seed)
from .image import read_image, write_pgm, write_png
from .simulate import (SimParams, add_noise, brightest_point,
                       build_view_homography, params_from_dict, perturb_light,
                       render_texture, warp_image, write_sidecars)


def _load_config(path) -> dict:
    return json.loads(Path(path).read_text()) if path else {}


def _build_params(args) -> SimParams:
    cfg = _load_config(getattr(args, "config", None))
    cfg = dict(cfg.get("params", cfg))
    for name, attr in [("size", "size"), ("camera_height", "camera_height"),
                       ("roughness", "roughness"), ("noise_sigma", "sigma"),
                       ("light_offset", "epsilon"), ("isovalue", "isovalue")]:
        v = getattr(args, attr, None)
        if v is not None:
            cfg[name] = v
    theta = getattr(args, "theta", None)
    if theta is not None:
        cfg["slant"] = math.radians(theta)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    return params_from_dict(cfg)


def _parse_values(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file with simulation parameters")
    p.add_argument("--size", type=int, help="image side in pixels")
    p.add_argument("--camera-height", dest="camera_height", type=float,
                   help="camera-to-plane distance (mm)")
    p.add_argument("--roughness", type=float, help="specular exponent")
    p.add_argument("--theta", type=float, help="plane slant (degrees)")
    p.add_argument("--sigma", type=float, help="noise std as fraction of range")
    p.add_argument("--epsilon", type=float, help="light/camera offset (mm)")
    p.add_argument("--isovalue", type=float, help="extraction level in (0,1)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--blur", type=float, default=None,
                   help="smoothing sigma in px (default: noise-adaptive)")


def _cmd_render(args) -> int:
    params = _build_params(args)
    rng = np.random.default_rng(params.seed)
    light = perturb_light(params.view, params.light_offset, rng)
    bp = brightest_point(params.view, light)
    texture = render_texture(params, light, bp)
    H, gt = build_view_homography(params, bp)
    img = warp_image(texture, H, (params.size, params.size))
    img = add_noise(img, params.noise_sigma, rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = args.name
    write_pgm(img, out / f"{stem}.pgm", bits=args.bits)
    write_png(img, out / f"{stem}.png", bits=8)
    write_sidecars(out, stem, params, gt)
    print(f"wrote {out / stem}.pgm/.png with params and ground-truth sidecars")
    return 0


def _cmd_trial(args) -> int:
    params = _build_params(args)
    seed = trial_seed(params.seed, 0.0, 0)
    record = run_trial(params, seed, score_mode=args.score_mode,
                       blur_sigma=args.blur)
    out = {"params": asdict(params), "success": record.success,
           "error_deg": record.error_deg, "reason": record.reason,
           "warnings": list(record.warnings)}
    if record.diagnostics:
        out["diagnostics"] = asdict(record.diagnostics)
    json.dump(out, sys.stdout, indent=2)
    print()
    return 0 if record.success else 1


def _cmd_sweep(args) -> int:
    params = _build_params(args)
    values = _parse_values(args.values) if args.values else DEFAULT_GRIDS[args.param]
    trials = args.trials if args.trials else (100 if args.fast else 1000)
    spec = SweepSpec(param=args.param, values=tuple(values), trials=trials,
                     base=params, master_seed=params.seed)
    records, summary = run_sweep(spec, score_mode=args.score_mode,
                                 blur_sigma=args.blur, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_path = out / f"sweep_{args.param}.csv"
    summary_path = emit_sweep_csv(records, data_path)
    print(f"wrote {data_path} and {summary_path}")
    for s in summary:
        print(f"  {args.param}={s.value:g}: mean={s.mean:.4f} deg "
              f"std={s.std:.4f} min={s.min:.4f} max={s.max:.4f} "
              f"fail={s.n_fail}/{trials}")
    return 0


def _parse_roi(text: str) -> RegionOfInterest:
    x0, y0, w, h = (int(v) for v in text.replace(",", " ").split())
    return RegionOfInterest(x0, y0, w, h)


def _cmd_reconstruct(args) -> int:
    rois = [_parse_roi(r) for r in args.roi]
    results = reconstruct_image(args.image, args.intrinsics, rois,
                                t=args.isovalue, blur_sigma=args.blur)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        out_path = Path(args.out) / (Path(args.image).stem + ".results.json")
        out_path.write_text(json.dumps(results, indent=2) + "\n")
        print(f"wrote {out_path}")
        if args.overlay:
            from .viz import draw_overlay
            overlay_path = Path(args.out) / (Path(args.image).stem + ".overlay.png")
            draw_overlay(read_image(args.image), results, overlay_path)
            print(f"wrote {overlay_path}")
    else:
        json.dump(results, sys.stdout, indent=2)
        print()
    return 0 if any(r.get("success") for r in results) else 1


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return run_selftest(fast=args.fast)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specnorm",
        description="Surface-normal reconstruction from specular isophotes")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="emit a synthetic image with sidecars")
    _add_param_flags(p)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--name", default="synthetic", help="output file stem")
    p.add_argument("--bits", type=int, default=8, choices=[8, 16])
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("trial", help="one end-to-end trial, JSON to stdout")
    _add_param_flags(p)
    p.add_argument("--score-mode", choices=["min", "oracle-sign"], default="min")
    p.set_defaults(func=_cmd_trial)

    p = sub.add_parser("sweep", help="Monte-Carlo parameter sweep to CSV")
    _add_param_flags(p)
    p.add_argument("--param", required=True, choices=list(DEFAULT_GRIDS))
    p.add_argument("--values", help="space/comma-separated swept values")
    p.add_argument("--trials", type=int, help="trials per value (default 1000)")
    p.add_argument("--fast", action="store_true", help="100 trials per value")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--score-mode", choices=["min", "oracle-sign"], default="min")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("reconstruct", help="reconstruct normals in an image")
    p.add_argument("image", help="grayscale or color image file")
    p.add_argument("intrinsics", help="JSON calibration file (fx, fy, cx, cy)")
    p.add_argument("--roi", action="append", required=True,
                   help="x0,y0,width,height (repeatable)")
    p.add_argument("--isovalue", type=float, default=0.1)
    p.add_argument("--blur", type=float, default=DEFAULT_BLUR_SIGMA)
    p.add_argument("--out", help="output directory (default: stdout)")
    p.add_argument("--overlay", action="store_true",
                   help="emit annotated overlay PNG")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("selftest", help="run the analytic invariant suite")
    p.add_argument("--fast", action="store_true")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
