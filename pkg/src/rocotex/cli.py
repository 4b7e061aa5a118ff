"""Command-line entry point.

Options may also come from a JSON config file (--config) using the same
keys as the long flags (dashes as underscores); explicit command-line
flags override file values.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from rocotex.pipeline import ConfigError, PipelineConfig, run
from rocotex.prompting import PromptSpec


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rocotex",
        description="Generate a seamless texture for a UV-unwrapped OBJ mesh "
        "from a text prompt.",
    )
    p.add_argument("--config", help="JSON config file; CLI flags override it")
    p.add_argument("--mesh", help="input OBJ mesh (must carry UVs)")
    p.add_argument("--prompt", help="base text prompt")
    p.add_argument("--negative", help="negative prompt")
    p.add_argument("--backend", choices=["mock", "http"], help="generation backend")
    p.add_argument("--endpoint", help="http backend URL (or $ROCOTEX_BACKEND_URL)")
    p.add_argument("--seed", type=int, help="generation seed")
    p.add_argument("--pairs", type=int, help="number of symmetric view pairs")
    p.add_argument(
        "--view-size", type=int, nargs=2, metavar=("W", "H"), help="per-view resolution"
    )
    p.add_argument("--atlas", type=int, help="texture atlas resolution")
    p.add_argument("--dilate", type=float, help="mask dilation radius, pixels")
    p.add_argument("--blur-sigma", type=float, help="soft-mask blur sigma, pixels")
    p.add_argument("--alpha", type=float, help="confidence exponent")
    p.add_argument("--keep-thresh", type=float, help="confidence keep threshold")
    p.add_argument(
        "--weights", type=float, nargs=3, metavar=("D", "N", "E"),
        help="depth/normal/edge control weights",
    )
    p.add_argument("--steps", type=int, help="diffusion steps requested from the backend")
    p.add_argument("--guidance", type=float, help="guidance scale")
    p.add_argument(
        "--hard-mask", action="store_true", default=None,
        help="send the binary mask as the strength mask (disable soft inpainting)",
    )
    p.add_argument(
        "--desk", action="store_true", default=None,
        help="desk-scale defaults: 512x512 views and a 512 atlas",
    )
    p.add_argument("--debug-dir", help="write per-iteration debug images here")
    p.add_argument("--out", help="output directory")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress output")
    return p


def _merge_options(args: argparse.Namespace) -> dict:
    options: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            options.update(json.load(fh))
    for key, value in vars(args).items():
        if key in ("config", "quiet") or value is None:
            continue
        options[key] = value
    return options


def config_from_options(options: dict) -> tuple[str, PromptSpec, PipelineConfig]:
    for required in ("mesh", "prompt", "out"):
        if not options.get(required):
            raise ConfigError(f"--{required} is required")

    kwargs: dict = {}
    if options.get("desk"):
        kwargs.update(view_width=512, view_height=512, atlas_resolution=512)
    if "view_size" in options:
        kwargs["view_width"], kwargs["view_height"] = options["view_size"]
    if "atlas" in options:
        kwargs["atlas_resolution"] = options["atlas"]
    simple = {
        "backend": "backend",
        "endpoint": "endpoint",
        "seed": "seed",
        "pairs": "pair_count",
        "dilate": "dilation_radius",
        "blur_sigma": "blur_sigma",
        "alpha": "alpha",
        "keep_thresh": "keep_threshold",
        "steps": "steps",
        "guidance": "guidance",
        "debug_dir": "debug_dir",
        "out": "out_dir",
    }
    for opt, name in simple.items():
        if opt in options:
            kwargs[name] = options[opt]
    if "weights" in options:
        kwargs["weights"] = tuple(options["weights"])
    if options.get("hard_mask"):
        kwargs["soft_inpainting"] = False

    config = PipelineConfig(**kwargs)
    config.validate()
    prompt = PromptSpec(base=options["prompt"], negative=options.get("negative", ""))
    return options["mesh"], prompt, config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(message)s",
    )
    try:
        mesh_path, prompt, config = config_from_options(_merge_options(args))
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        paths, report = run(mesh_path, prompt, config)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"textured mesh: {paths['obj']}")
    print(f"texture:       {paths['texture']}")
    print(f"report:        {paths['report']}")
    print(f"coverage:      {report.final_coverage:.1%}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
