"""Global texture atlas: back-projection baking, confidence blending, fill.

Blending follows two per-texel update rules.  Colors average weighted by
confidence,

    T* <- (T* . C* + Tk . Ck) / (C* + Ck + eps)

and confidences accumulate like independent probabilities,

    C* <- C* + Ck - C* . Ck

which keeps C* in [0, 1] and monotone non-decreasing over iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from rocotex import kernels
from rocotex.confidence import facing_term
from rocotex.geometry import CameraView, TriangleMesh
from rocotex.raster import GBuffer, sample_bilinear, uv_to_pixel

_FAR_DEPTH = 1e30  # stands in for +inf so bilinear depth lookups stay finite


class TextureError(RuntimeError):
    pass


@dataclass(eq=False)
class TextureAtlas:
    """Global texture and confidence in UV space, evolving across iterations."""

    texture: np.ndarray     # (H, W, 3) in [0, 1]
    confidence: np.ndarray  # (H, W) in [0, 1]

    def __post_init__(self):
        if self.texture.shape[:2] != self.confidence.shape[:2]:
            raise ValueError("texture and confidence must share a resolution")

    @classmethod
    def zeros(cls, resolution: int) -> "TextureAtlas":
        return cls(
            texture=np.zeros((resolution, resolution, 3)),
            confidence=np.zeros((resolution, resolution)),
        )

    def copy(self) -> "TextureAtlas":
        return TextureAtlas(self.texture.copy(), self.confidence.copy())


@dataclass(eq=False)
class LocalBake:
    """Sparse per-texel colors and confidences from one baked view."""

    rows: np.ndarray        # (K,) int
    cols: np.ndarray        # (K,) int
    colors: np.ndarray      # (K, 3) in [0, 1]
    confidence: np.ndarray  # (K,) in (0, 1]

    def __len__(self) -> int:
        return int(self.rows.shape[0])


def rasterize_uv(mesh: TriangleMesh, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Rasterize every triangle in UV space at atlas resolution.

    Returns (tri_id, bary) arrays; orientation in UV space is arbitrary so
    no culling is applied.
    """
    px, py = uv_to_pixel(mesh.uvs, resolution, resolution)
    pts = np.ascontiguousarray(np.stack([px, py], axis=-1)[mesh.triangles])
    ones = np.ones((pts.shape[0], 3))
    tri_id, bary, _ = kernels.rasterize_triangles(
        pts, ones, ones, resolution, resolution, cull_backfaces=False
    )
    return tri_id, bary


def chart_mask(mesh: TriangleMesh, resolution: int) -> np.ndarray:
    """Boolean mask of texels inside any UV chart."""
    tri_id, _ = rasterize_uv(mesh, resolution)
    return tri_id >= 0


def bake_view(
    mesh: TriangleMesh,
    view: CameraView,
    gbuffer: GBuffer,
    image: np.ndarray,
    atlas_resolution: int,
    alpha: float = 1.0,
    depth_bias: float | None = None,
    mode: str = "cosine",
    strength_image: np.ndarray | None = None,
    min_confidence: float = 1e-5,
) -> LocalBake:
    """Gather view-image colors into atlas texels (texel-space bake).

    Every UV-covered texel is reconstructed in world space, projected into
    the view, and kept when it lands inside the frustum, faces the camera,
    and passes a biased depth test against the G-buffer.  Kept texels
    sample the image bilinearly; confidence is the facing term raised to
    ``alpha``.  When ``strength_image`` is given (the transmitted per-pixel
    generation strength), confidence is scaled by its sampled value, so
    pixels the generator left untouched contribute nothing.
    """
    if depth_bias is None:
        depth_bias = 1e-3 * mesh.bounding_radius()

    tri_id, bary = rasterize_uv(mesh, atlas_resolution)
    covered = tri_id >= 0
    if not covered.any():
        return LocalBake(
            rows=np.zeros(0, dtype=np.intp),
            cols=np.zeros(0, dtype=np.intp),
            colors=np.zeros((0, 3)),
            confidence=np.zeros(0),
        )

    rows, cols = np.nonzero(covered)
    idx = mesh.triangles[tri_id[covered]]
    b = bary[covered][:, :, None]
    pos = (mesh.positions[idx] * b).sum(axis=1)
    normal = (mesh.normals[idx] * b).sum(axis=1)
    nlen = np.linalg.norm(normal, axis=1, keepdims=True)
    nlen[nlen == 0.0] = 1.0
    normal /= nlen

    px, py, wdepth = view.project_points(pos)
    keep = (
        (wdepth > view.radius * 1e-6)
        & (px >= 0.0)
        & (px <= view.width)
        & (py >= 0.0)
        & (py <= view.height)
    )

    to_cam = view.eye() - pos
    to_cam /= np.linalg.norm(to_cam, axis=1, keepdims=True)
    facing = facing_term(normal, to_cam, mode)
    keep &= facing > 0.0

    depth_img = np.where(np.isinf(gbuffer.depth), _FAR_DEPTH, gbuffer.depth)
    seen_depth = sample_bilinear(depth_img, px, py)
    keep &= wdepth <= seen_depth + depth_bias

    conf = facing**alpha if alpha != 1.0 else facing
    if strength_image is not None:
        conf = conf * sample_bilinear(strength_image, px, py)
    # confidence within ~1e3 eps of zero carries no signal but would store
    # a visibly eps-skewed color through the blend's stabilizer
    keep &= conf > min_confidence
    if not keep.any():
        return LocalBake(
            rows=np.zeros(0, dtype=np.intp),
            cols=np.zeros(0, dtype=np.intp),
            colors=np.zeros((0, 3)),
            confidence=np.zeros(0),
        )

    colors = sample_bilinear(image, px[keep], py[keep])
    return LocalBake(
        rows=rows[keep],
        cols=cols[keep],
        colors=colors,
        confidence=np.minimum(conf[keep], 1.0),
    )


def blend(atlas: TextureAtlas, bake: LocalBake, eps: float = 1e-8) -> TextureAtlas:
    """Fold a local bake into the atlas under the confidence-weighted rules.

    Unbaked texels are untouched; baked texels update color by the
    weighted average and confidence by the probabilistic union.
    """
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    out = atlas.copy()
    if len(bake) == 0:
        return out
    h, w = atlas.confidence.shape
    if bake.rows.min() < 0 or bake.rows.max() >= h or bake.cols.min() < 0 or bake.cols.max() >= w:
        raise ValueError("bake texels outside atlas bounds")

    t_old = atlas.texture[bake.rows, bake.cols]
    c_old = atlas.confidence[bake.rows, bake.cols]
    ck = bake.confidence
    out.texture[bake.rows, bake.cols] = (
        t_old * c_old[:, None] + bake.colors * ck[:, None]
    ) / (c_old + ck + eps)[:, None]
    out.confidence[bake.rows, bake.cols] = c_old + ck - c_old * ck
    return out


def _shift(arr: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """Shift with zero fill (no wraparound)."""
    out = np.zeros_like(arr)
    h, w = arr.shape[:2]
    rs = slice(max(dr, 0), h + min(dr, 0))
    cs = slice(max(dc, 0), w + min(dc, 0))
    rs_src = slice(max(-dr, 0), h + min(-dr, 0))
    cs_src = slice(max(-dc, 0), w + min(-dc, 0))
    out[rs, cs] = arr[rs_src, cs_src]
    return out


_NEIGHBORS = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]


def _fill_pass(
    tex: np.ndarray, conf: np.ndarray, textured: np.ndarray, target: np.ndarray, tau: float
) -> int:
    """One double-buffered diffusion pass; returns the number of texels filled."""
    weight = np.where(textured, conf, 0.0)
    wsum = np.zeros_like(conf)
    csum = np.zeros_like(tex)
    for dr, dc in _NEIGHBORS:
        wn = _shift(weight, dr, dc)
        wsum += wn
        csum += _shift(tex * weight[..., None], dr, dc)
    cand = target & ~textured & (wsum > 0.0)
    n = int(cand.sum())
    if n:
        tex[cand] = csum[cand] / wsum[cand][:, None]
        conf[cand] = tau
        textured |= cand
    return n


def extrapolate(
    atlas: TextureAtlas,
    mesh: TriangleMesh,
    keep_threshold: float = 0.1,
    gutter: int = 4,
) -> TextureAtlas:
    """Fill texels never observed by any view, plus a chart-edge gutter.

    In-chart holes take the confidence-weighted mean of their textured
    8-neighbors (confidence set to the keep threshold), pass after pass,
    until none remain; charts that contain no textured texel at all are
    then filled from the nearest textured texel anywhere in the atlas.
    Finally the fill grows ``gutter`` texels past chart boundaries so
    bilinear lookups at render time never mix in void texels.

    Raises TextureError("empty texture") when nothing is textured.
    """
    tau = keep_threshold
    conf = atlas.confidence.copy()
    tex = atlas.texture.copy()
    textured = conf >= tau
    if not textured.any():
        raise TextureError("empty texture")

    h, w = conf.shape
    if h != w:
        raise ValueError("atlas must be square")
    chart = chart_mask(mesh, w)

    for _ in range(h + w):
        if not (chart & ~textured).any():
            break
        if _fill_pass(tex, conf, textured, chart, tau) == 0:
            break

    remaining = chart & ~textured
    if remaining.any():
        # charts with no textured texel cannot fill from within; copy from
        # the nearest textured texel anywhere in the atlas
        _, (ir, ic) = ndimage.distance_transform_edt(~textured, return_indices=True)
        tex[remaining] = tex[ir[remaining], ic[remaining]]
        conf[remaining] = tau
        textured |= remaining

    everywhere = np.ones_like(chart)
    for _ in range(gutter):
        _fill_pass(tex, conf, textured, everywhere, tau)

    return TextureAtlas(texture=tex, confidence=conf)


def seam_energy(atlas: TextureAtlas, boundary: np.ndarray) -> float:
    """Mean RGB gradient magnitude (central differences) over boundary texels."""
    sel = np.asarray(boundary) > 0
    if not sel.any():
        return 0.0
    total = np.zeros(atlas.texture.shape[:2])
    for ch in range(3):
        gy, gx = np.gradient(atlas.texture[..., ch])
        total += gx * gx + gy * gy
    return float(np.sqrt(total[sel]).mean())
