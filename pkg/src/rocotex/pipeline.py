"""End-to-end texture generation: config, run loop, export, reporting.

One run owns all mutable state.  Each iteration renders a symmetric view
pair from the current texture, derives inpainting masks and control maps,
asks the backend to generate the pair jointly under regional prompts,
then bakes and blends both halves back into the atlas.  After the last
pair the atlas is extrapolated and exported as OBJ + MTL + PNG.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image

from rocotex import confidence as conf_mod
from rocotex import raster, texture
from rocotex.generator import (
    GenerationBackend,
    GenerationRequest,
    HttpBackend,
    MockBackend,
    to_uint8,
)
from rocotex.geometry import ViewPair, load_mesh, normalize_mesh, view_schedule, write_obj
from rocotex.prompting import PromptSpec, compose_regional

log = logging.getLogger("rocotex")

ENDPOINT_ENV_VAR = "ROCOTEX_BACKEND_URL"


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of one texture-generation run."""

    view_width: int = 1024
    view_height: int = 1024
    atlas_resolution: int = 1024
    pair_count: int = 2
    camera_radius: float = 2.5
    camera_fov: float = 40.0
    camera_elevation: float = 0.0
    extra_pair_elevation: float = 45.0
    dilation_radius: float | None = None   # None: 24 px at 1024, scaled
    blur_sigma: float | None = None        # None: dilation radius / 3
    alpha: float = 1.0
    confidence_mode: str = "cosine"
    keep_threshold: float = 0.1
    blend_eps: float = 1e-8
    weights: tuple[float, float, float] = (0.5, 0.5, 0.5)
    backend: str = "mock"
    endpoint: str | None = None
    seed: int = 0
    steps: int = 30
    guidance: float = 7.5
    soft_inpainting: bool = True
    depth_bias: float | None = None        # None: 1e-3 x scene radius
    edge_depth_threshold: float = 0.02
    edge_normal_threshold_deg: float = 20.0
    depth_near_bright: bool = True
    neutral_color: float = 0.5
    out_dir: str = "."
    debug_dir: str | None = None

    def validate(self) -> None:
        if min(self.view_width, self.view_height, self.atlas_resolution) < 16:
            raise ConfigError("all resolutions must be >= 16")
        if self.pair_count < 1:
            raise ConfigError("pair count must be >= 1")
        if not 0.0 < self.keep_threshold < 1.0:
            raise ConfigError("keep threshold must lie in (0, 1)")
        if any(not 0.0 <= w <= 2.0 for w in self.weights):
            raise ConfigError("control weights must lie in [0, 2]")
        if self.backend not in ("mock", "http"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.blend_eps <= 0.0:
            raise ConfigError("blend eps must be > 0")
        if self.alpha < 0.0:
            raise ConfigError("confidence exponent must be >= 0")
        if self.confidence_mode not in ("cosine", "linear"):
            raise ConfigError(f"unknown confidence mode {self.confidence_mode!r}")
        if self.dilation_radius is not None and self.dilation_radius < 0.0:
            raise ConfigError("dilation radius must be >= 0")
        if self.blur_sigma is not None and self.blur_sigma <= 0.0:
            raise ConfigError("blur sigma must be > 0")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")

    def dilation_radius_px(self) -> float:
        if self.dilation_radius is not None:
            return self.dilation_radius
        return conf_mod.default_dilation_radius(self.view_width)

    def blur_sigma_px(self) -> float:
        if self.blur_sigma is not None:
            return self.blur_sigma
        return self.dilation_radius_px() / 3.0

    def desk(self) -> "PipelineConfig":
        """Desk-scale variant: 512 px views and atlas, for fast offline runs."""
        return replace(self, view_width=512, view_height=512, atlas_resolution=512)


def make_backend(config: PipelineConfig) -> GenerationBackend:
    if config.backend == "mock":
        return MockBackend()
    endpoint = config.endpoint or os.environ.get(ENDPOINT_ENV_VAR)
    if not endpoint:
        raise ConfigError(
            f"http backend needs --endpoint or ${ENDPOINT_ENV_VAR}"
        )
    return HttpBackend(endpoint)


@dataclass
class IterationRecord:
    pair_label: str
    untextured_before: float
    untextured_after: float
    coverage: float
    seam_energy: float
    backend_latency_ms: float


@dataclass
class RunReport:
    iterations: list[IterationRecord] = field(default_factory=list)
    final_coverage: float = 0.0
    total_latency_ms: float = 0.0
    seam_energy_total: float = 0.0

    def add(self, record: IterationRecord) -> None:
        if self.iterations and record.coverage < self.iterations[-1].coverage - 1e-12:
            raise PipelineError("coverage fraction decreased across iterations")
        self.iterations.append(record)
        self.total_latency_ms += record.backend_latency_ms
        self.seam_energy_total += record.seam_energy

    def write_jsonl(self, path: Path) -> None:
        lines = []
        for i, rec in enumerate(self.iterations):
            lines.append(
                json.dumps(
                    {
                        "type": "iteration",
                        "index": i,
                        "pair": rec.pair_label,
                        "untextured_before": rec.untextured_before,
                        "untextured_after": rec.untextured_after,
                        "coverage": rec.coverage,
                        "seam_energy": rec.seam_energy,
                        "backend_latency_ms": rec.backend_latency_ms,
                    },
                    sort_keys=True,
                )
            )
        lines.append(
            json.dumps(
                {
                    "type": "summary",
                    "iterations": len(self.iterations),
                    "final_coverage": self.final_coverage,
                    "seam_energy_total": self.seam_energy_total,
                    "total_latency_ms": self.total_latency_ms,
                },
                sort_keys=True,
            )
        )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_png(path: Path, array: np.ndarray) -> Path:
    mode = "RGB" if array.ndim == 3 else "L"
    Image.fromarray(to_uint8(array), mode=mode).save(path)
    return path


def export_mesh(mesh, texture_rgb: np.ndarray, out_dir: str | Path) -> dict[str, Path]:
    """Write model.obj + model.mtl + texture.png into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    obj_path = write_obj(mesh, out / "model.obj", mtllib="model.mtl", material="textured")
    mtl_path = out / "model.mtl"
    mtl_path.write_text(
        "newmtl textured\n"
        "Ka 1.0 1.0 1.0\n"
        "Kd 1.0 1.0 1.0\n"
        "Ks 0.0 0.0 0.0\n"
        "d 1.0\n"
        "illum 1\n"
        "map_Kd texture.png\n",
        encoding="utf-8",
    )
    tex_path = save_png(out / "texture.png", texture_rgb)
    return {"obj": obj_path, "mtl": mtl_path, "texture": tex_path}


def _dilate8(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    out[1:, 1:] |= mask[:-1, :-1]
    out[1:, :-1] |= mask[:-1, 1:]
    out[:-1, 1:] |= mask[1:, :-1]
    out[:-1, :-1] |= mask[1:, 1:]
    return out


def _blend_boundary(baked: np.ndarray, old_kept: np.ndarray) -> np.ndarray:
    """Texels on either side of the interface between this iteration's baked
    region and previously textured texels the generation left untouched."""
    return (_dilate8(baked) & old_kept) | (_dilate8(old_kept) & baked)


def _untextured_fraction(mask: np.ndarray, covered: np.ndarray) -> float:
    denom = int(covered.sum())
    return float(mask.sum() / denom) if denom else 0.0


def run(
    mesh_path: str | Path,
    prompt: PromptSpec,
    config: PipelineConfig,
    backend: GenerationBackend | None = None,
) -> tuple[dict[str, Path], RunReport]:
    """Execute the full loop and export the textured mesh.

    Fully deterministic with the mock backend and a fixed seed.  On
    failure mid-loop, the partial atlas is dumped to the output directory
    before the error is re-raised with iteration context.
    """
    config.validate()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    debug_dir = Path(config.debug_dir) if config.debug_dir else None
    if debug_dir:
        debug_dir.mkdir(parents=True, exist_ok=True)

    mesh = normalize_mesh(load_mesh(mesh_path))
    if backend is None:
        backend = make_backend(config)

    pairs = view_schedule(
        pair_count=config.pair_count,
        radius=config.camera_radius,
        fov_deg=config.camera_fov,
        elevation=config.camera_elevation,
        extra_elevation=config.extra_pair_elevation,
        width=config.view_width,
        height=config.view_height,
    )

    atlas = texture.TextureAtlas.zeros(config.atlas_resolution)
    chart = texture.chart_mask(mesh, config.atlas_resolution)
    chart_total = int(chart.sum())
    depth_bias = (
        config.depth_bias
        if config.depth_bias is not None
        else 1e-3 * mesh.bounding_radius()
    )
    report = RunReport()
    tau = config.keep_threshold

    for index, pair in enumerate(pairs):
        try:
            atlas = _run_pair(
                index, pair, mesh, atlas, chart, chart_total, depth_bias,
                prompt, config, backend, report, debug_dir,
            )
        except Exception as exc:
            save_png(out_dir / "texture_partial.png", atlas.texture)
            save_png(out_dir / "confidence_partial.png", atlas.confidence)
            raise PipelineError(
                f"iteration {index} ({pair.label}) failed: {exc}"
            ) from exc

    final = texture.extrapolate(atlas, mesh, keep_threshold=tau)
    report.final_coverage = float((chart & (final.confidence >= tau)).sum() / chart_total)

    paths = export_mesh(mesh, final.texture, out_dir)
    paths["confidence"] = save_png(out_dir / "confidence.png", final.confidence)
    report.write_jsonl(out_dir / "report.jsonl")
    paths["report"] = out_dir / "report.jsonl"
    log.info(
        "run complete: %d iteration(s), coverage %.1f%%, outputs in %s",
        len(report.iterations), 100.0 * report.final_coverage, out_dir,
    )
    return paths, report


def _run_pair(
    index: int,
    pair: ViewPair,
    mesh,
    atlas: texture.TextureAtlas,
    chart: np.ndarray,
    chart_total: int,
    depth_bias: float,
    prompt: PromptSpec,
    config: PipelineConfig,
    backend: GenerationBackend,
    report: RunReport,
    debug_dir: Path | None,
) -> texture.TextureAtlas:
    tau = config.keep_threshold
    views = (pair.view_i, pair.view_j)

    gbuffers = [raster.rasterize(mesh, v) for v in views]
    renders = [
        raster.render_color(g, mesh, atlas, keep_threshold=tau, neutral=config.neutral_color)
        for g in gbuffers
    ]
    masks = [conf_mod.untextured_mask(atlas, g, mesh, keep_threshold=tau) for g in gbuffers]
    untextured_before = _untextured_fraction(
        np.concatenate(masks, axis=1),
        np.concatenate([g.coverage for g in gbuffers], axis=1),
    )

    radius = config.dilation_radius_px()
    dilated = [conf_mod.dilate(m, radius) for m in masks]
    if config.soft_inpainting:
        strengths = [conf_mod.soft_mask(m, config.blur_sigma_px()) for m in dilated]
    else:
        strengths = [m.astype(np.float64) for m in dilated]

    controls = [
        raster.control_maps(
            g,
            depth_edge_threshold=config.edge_depth_threshold,
            normal_edge_threshold_deg=config.edge_normal_threshold_deg,
            depth_near_bright=config.depth_near_bright,
        )
        for g in gbuffers
    ]

    image_cat = raster.concat_views(*renders)
    mask_cat = raster.concat_views(*dilated)
    strength_cat = raster.concat_views(*strengths)
    control_cat = raster.ControlMaps(
        depth=raster.concat_views(controls[0].depth, controls[1].depth),
        normal=raster.concat_views(controls[0].normal, controls[1].normal),
        edge=raster.concat_views(controls[0].edge, controls[1].edge),
    )
    regional = compose_regional(
        prompt, pair, image_cat.shape[1], image_cat.shape[0]
    )
    request = GenerationRequest(
        image=image_cat,
        mask=mask_cat,
        soft_mask=strength_cat,
        control=control_cat,
        prompt=regional,
        weights=config.weights,
        seed=config.seed,
        steps=config.steps,
        guidance=config.guidance,
    )

    started = time.perf_counter()
    response = backend.generate(request)
    latency_ms = (time.perf_counter() - started) * 1000.0

    generated = np.clip(response.image, 0.0, 1.0)
    halves = raster.split_views(generated)

    prev_textured = atlas.confidence >= tau
    baked = np.zeros_like(prev_textured)
    for g, view, half, strength in zip(gbuffers, views, halves, strengths):
        bake = texture.bake_view(
            mesh,
            view,
            g,
            half,
            config.atlas_resolution,
            alpha=config.alpha,
            depth_bias=depth_bias,
            mode=config.confidence_mode,
            strength_image=strength,
        )
        updated = texture.blend(atlas, bake, eps=config.blend_eps)
        if (updated.confidence < atlas.confidence - 1e-12).any():
            raise PipelineError("confidence decreased during blending")
        atlas = updated
        baked[bake.rows, bake.cols] = True

    boundary = _blend_boundary(baked, prev_textured & ~baked)
    seam = texture.seam_energy(atlas, boundary)

    masks_after = [conf_mod.untextured_mask(atlas, g, mesh, keep_threshold=tau) for g in gbuffers]
    untextured_after = _untextured_fraction(
        np.concatenate(masks_after, axis=1),
        np.concatenate([g.coverage for g in gbuffers], axis=1),
    )
    coverage = float((chart & (atlas.confidence >= tau)).sum() / chart_total)

    if debug_dir:
        save_png(debug_dir / f"iter{index:02d}_input.png", image_cat)
        save_png(debug_dir / f"iter{index:02d}_mask.png", mask_cat)
        save_png(debug_dir / f"iter{index:02d}_strength.png", strength_cat)
        save_png(debug_dir / f"iter{index:02d}_output.png", generated)

    report.add(
        IterationRecord(
            pair_label=pair.label,
            untextured_before=untextured_before,
            untextured_after=untextured_after,
            coverage=coverage,
            seam_energy=seam,
            backend_latency_ms=latency_ms,
        )
    )
    log.info(
        "iter %d (%s): untextured %.3f -> %.3f, coverage %.3f, seam %.4f, %.0f ms",
        index, pair.label, untextured_before, untextured_after, coverage, seam, latency_ms,
    )
    return atlas
