"""View confidence maps and inpainting-mask morphology.

Confidence weights how reliably a view observes a surface point: 1 when
the surface faces the camera head-on, falling to 0 as it turns edge-on.
Binary untextured masks mark pixels whose atlas confidence is still below
the keep threshold; dilation and Gaussian blurring turn them into the
inpainting mask and its per-pixel-strength variant.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from scipy import ndimage

from rocotex.geometry import CameraView, TriangleMesh
from rocotex.raster import GBuffer, interpolate_vertex_attribute, sample_bilinear, uv_to_pixel

if TYPE_CHECKING:
    from rocotex.texture import TextureAtlas


def facing_term(normals: np.ndarray, to_camera: np.ndarray, mode: str = "cosine") -> np.ndarray:
    """Angle falloff in [0, 1] between unit normals and unit view directions.

    mode "cosine": max(0, n.v); mode "linear": max(0, 1 - theta/90deg).
    """
    d = np.clip((normals * to_camera).sum(axis=-1), -1.0, 1.0)
    if mode == "cosine":
        return np.maximum(0.0, d)
    if mode == "linear":
        theta = np.degrees(np.arccos(d))
        return np.maximum(0.0, 1.0 - theta / 90.0)
    raise ValueError(f"unknown confidence mode {mode!r}")


def view_confidence(
    gbuffer: GBuffer,
    view: CameraView,
    exponent: float = 1.0,
    mode: str = "cosine",
) -> np.ndarray:
    """Per-pixel confidence (facing term ** exponent); 0 off-surface."""
    if exponent < 0.0:
        raise ValueError("confidence exponent must be >= 0")
    out = np.zeros((gbuffer.height, gbuffer.width))
    covered = gbuffer.coverage
    if not covered.any():
        return out
    to_cam = view.eye() - gbuffer.world_pos[covered]
    to_cam /= np.linalg.norm(to_cam, axis=1, keepdims=True)
    c = facing_term(gbuffer.world_normal[covered], to_cam, mode)
    out[covered] = c if exponent == 1.0 else c**exponent
    return out


def untextured_mask(
    atlas: "TextureAtlas",
    gbuffer: GBuffer,
    mesh: TriangleMesh,
    keep_threshold: float = 0.1,
) -> np.ndarray:
    """Binary mask of covered pixels whose sampled atlas confidence < threshold.

    Background pixels are always 0: they are never regenerated.
    """
    mask = np.zeros((gbuffer.height, gbuffer.width))
    covered = gbuffer.coverage
    if not covered.any():
        return mask
    uv = interpolate_vertex_attribute(gbuffer, mesh, mesh.uvs)
    ah, aw = atlas.confidence.shape[:2]
    px, py = uv_to_pixel(uv, aw, ah)
    conf = sample_bilinear(atlas.confidence, px, py)
    mask[covered] = (conf < keep_threshold).astype(np.float64)
    return mask


def dilate(mask: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean dilation: 1 wherever a 1-pixel lies within ``radius``.

    Computed with an exact distance transform, so the structuring element
    is a true disk at any radius.
    """
    if radius < 0:
        raise ValueError("dilation radius must be >= 0")
    binary = np.asarray(mask) > 0.5
    if radius == 0 or not binary.any():
        return binary.astype(np.float64)
    dist = ndimage.distance_transform_edt(~binary)
    return (dist <= radius).astype(np.float64)


def soft_mask(mask: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian-blurred mask giving each pixel its own generation strength.

    Normalized kernel truncated at 3*sigma with clamped edges; output
    stays within [0, 1].
    """
    if sigma <= 0:
        raise ValueError("blur sigma must be > 0")
    blurred = ndimage.gaussian_filter(
        np.asarray(mask, dtype=np.float64), sigma=sigma, mode="nearest", truncate=3.0
    )
    return np.clip(blurred, 0.0, 1.0)


def default_dilation_radius(view_width: int, reference: float = 24.0) -> float:
    """Dilation radius scaled proportionally with view width (24 px at 1024)."""
    return reference * view_width / 1024.0
