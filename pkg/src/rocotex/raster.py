"""Software rasterizer: G-buffers, color renders, control maps, view concat.

Image conventions used throughout the package: float64 arrays in [0, 1],
shape (H, W) for single-channel data and (H, W, 3) for RGB; row 0 is the
top of the image.  Continuous sample coordinates put the center of pixel
(row r, col c) at (c + 0.5, r + 0.5).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from rocotex import kernels
from rocotex.geometry import CameraView, TriangleMesh

if TYPE_CHECKING:
    from rocotex.texture import TextureAtlas

# Triangles with any vertex closer than this (in view depth) are discarded
# rather than clipped; cameras produced by view_schedule keep the whole
# mesh far in front of the near plane.
_MIN_VERTEX_DEPTH_FRAC = 1e-6


@dataclass(eq=False)
class GBuffer:
    """Per-pixel geometry attributes for one rendered view.

    tri_id is -1 and depth +inf on uncovered pixels; barycentrics are
    perspective-correct and sum to 1 where covered.  cam_rot/eye replicate
    the camera pose so downstream maps need no extra context.
    """

    width: int
    height: int
    tri_id: np.ndarray       # (H, W) int32
    bary: np.ndarray         # (H, W, 3) float64
    depth: np.ndarray        # (H, W) float64, view-space units
    world_pos: np.ndarray    # (H, W, 3) float64
    world_normal: np.ndarray  # (H, W, 3) float64, unit where covered
    cam_rot: np.ndarray      # (3, 3) world->camera rotation
    eye: np.ndarray          # (3,) camera position

    @property
    def coverage(self) -> np.ndarray:
        return self.tri_id >= 0


@dataclass(eq=False)
class ControlMaps:
    """Depth / normal / edge conditioning maps derived from a G-buffer."""

    depth: np.ndarray   # (H, W) in [0, 1]; near bright, background 0
    normal: np.ndarray  # (H, W, 3); camera-space normals encoded (n+1)/2
    edge: np.ndarray    # (H, W) binary {0, 1}


def rasterize(mesh: TriangleMesh, view: CameraView) -> GBuffer:
    """Z-buffered, back-face-culled, perspective-correct G-buffer render."""
    if view.width < 1 or view.height < 1:
        raise ValueError("zero-resolution view")

    px, py, w = view.project_points(mesh.positions)
    pts = np.stack([px, py], axis=-1)[mesh.triangles]       # (T, 3, 2)
    wtri = w[mesh.triangles]                                 # (T, 3)

    ok = (wtri > view.radius * _MIN_VERTEX_DEPTH_FRAC).all(axis=1)
    pts = np.ascontiguousarray(pts[ok])
    wtri = np.ascontiguousarray(wtri[ok])
    kept = np.flatnonzero(ok).astype(np.int32)

    if kept.size:
        invw = 1.0 / wtri
        tri_id, bary, depth = kernels.rasterize_triangles(
            pts, invw, wtri, view.width, view.height, cull_backfaces=True
        )
    else:
        tri_id = np.full((view.height, view.width), -1, dtype=np.int32)
        bary = np.zeros((view.height, view.width, 3))
        depth = np.full((view.height, view.width), np.inf)
    # map kernel-local triangle indices back to mesh triangle ids
    covered = tri_id >= 0
    if covered.any():
        tri_id = np.where(covered, kept[np.where(covered, tri_id, 0)], np.int32(-1))

    world_pos = np.zeros((view.height, view.width, 3))
    world_normal = np.zeros((view.height, view.width, 3))
    if covered.any():
        idx = mesh.triangles[tri_id[covered]]                # (K, 3)
        b = bary[covered][:, :, None]                        # (K, 3, 1)
        world_pos[covered] = (mesh.positions[idx] * b).sum(axis=1)
        n = (mesh.normals[idx] * b).sum(axis=1)
        length = np.linalg.norm(n, axis=1, keepdims=True)
        length[length == 0.0] = 1.0
        world_normal[covered] = n / length

    return GBuffer(
        width=view.width,
        height=view.height,
        tri_id=tri_id,
        bary=bary,
        depth=depth,
        world_pos=world_pos,
        world_normal=world_normal,
        cam_rot=view.rotation(),
        eye=view.eye(),
    )


def interpolate_vertex_attribute(
    gbuffer: GBuffer, mesh: TriangleMesh, attr: np.ndarray
) -> np.ndarray:
    """Barycentric interpolation of a per-vertex attribute over covered pixels.

    Returns a (K, D) array aligned with gbuffer.coverage in row-major order.
    """
    covered = gbuffer.coverage
    idx = mesh.triangles[gbuffer.tri_id[covered]]
    b = gbuffer.bary[covered][:, :, None]
    return (attr[idx] * b).sum(axis=1)


def sample_bilinear(img: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Clamp-to-edge bilinear lookup at continuous pixel coordinates."""
    h, w = img.shape[:2]
    fx = np.clip(np.asarray(px, dtype=np.float64) - 0.5, 0.0, w - 1.0)
    fy = np.clip(np.asarray(py, dtype=np.float64) - 0.5, 0.0, h - 1.0)
    x0 = np.floor(fx).astype(np.intp)
    y0 = np.floor(fy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    tx = fx - x0
    ty = fy - y0
    if img.ndim == 3:
        tx = tx[..., None]
        ty = ty[..., None]
    top = img[y0, x0] * (1.0 - tx) + img[y0, x1] * tx
    bottom = img[y1, x0] * (1.0 - tx) + img[y1, x1] * tx
    return top * (1.0 - ty) + bottom * ty


def uv_to_pixel(uv: np.ndarray, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Map UVs (v up) to continuous pixel coordinates (row 0 at v = 1)."""
    uv = np.asarray(uv, dtype=np.float64)
    return uv[..., 0] * width, (1.0 - uv[..., 1]) * height


def render_color(
    gbuffer: GBuffer,
    mesh: TriangleMesh,
    atlas: "TextureAtlas",
    keep_threshold: float = 0.1,
    neutral: float = 0.5,
) -> np.ndarray:
    """Render the current texture state from a G-buffer.

    Covered pixels sample the atlas bilinearly at their interpolated UV;
    pixels whose sampled confidence falls below keep_threshold, and all
    background pixels, get the neutral color.  The color lookup weights
    texels by their confidence so never-baked texels (which hold no
    content) cannot bleed into the sample; with uniform confidence this
    reduces to plain bilinear filtering.
    """
    if atlas.texture.shape[0] < 1 or atlas.texture.shape[1] < 1:
        raise ValueError("atlas resolution must be >= 1")
    image = np.full((gbuffer.height, gbuffer.width, 3), float(neutral))
    covered = gbuffer.coverage
    if not covered.any():
        return image
    uv = interpolate_vertex_attribute(gbuffer, mesh, mesh.uvs)
    ah, aw = atlas.texture.shape[:2]
    px, py = uv_to_pixel(uv, aw, ah)
    conf = sample_bilinear(atlas.confidence, px, py)
    weighted = sample_bilinear(atlas.texture * atlas.confidence[..., None], px, py)
    color = weighted / np.maximum(conf, 1e-12)[..., None]
    color = np.clip(color, 0.0, 1.0)
    color[conf < keep_threshold] = neutral
    image[covered] = color
    return image


_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]) / 8.0
_SOBEL_Y = _SOBEL_X.T


def _convolve3x3(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img)
    for dy in range(3):
        for dx in range(3):
            out += kernel[dy, dx] * padded[dy:dy + img.shape[0], dx:dx + img.shape[1]]
    return out


def control_maps(
    gbuffer: GBuffer,
    depth_edge_threshold: float = 0.02,
    normal_edge_threshold_deg: float = 20.0,
    depth_near_bright: bool = True,
) -> ControlMaps:
    """Derive depth / normal / edge conditioning maps from geometry.

    Depth remaps covered view depths to [0.05 (far), 1.0 (near)] with
    background 0 (flip with depth_near_bright=False for backends that
    expect the opposite convention).  Edges mark geometric discontinuities:
    Sobel depth gradient above depth_edge_threshold or normal direction
    changes between touching pixels above normal_edge_threshold_deg.
    """
    covered = gbuffer.coverage
    depth = np.zeros((gbuffer.height, gbuffer.width))
    if covered.any():
        dvals = gbuffer.depth[covered]
        dnear, dfar = float(dvals.min()), float(dvals.max())
        if dfar - dnear < 1e-12:
            shade = np.ones_like(dvals)
        else:
            shade = 0.05 + 0.95 * (dfar - dvals) / (dfar - dnear)
        if not depth_near_bright:
            shade = 1.05 - shade
        depth[covered] = shade

    normal = np.full((gbuffer.height, gbuffer.width, 3), 0.5)
    if covered.any():
        n_cam = gbuffer.world_normal[covered] @ gbuffer.cam_rot.T
        normal[covered] = (n_cam + 1.0) / 2.0

    gx = _convolve3x3(depth, _SOBEL_X)
    gy = _convolve3x3(depth, _SOBEL_Y)
    edge = np.sqrt(gx * gx + gy * gy) > depth_edge_threshold

    cos_limit = np.cos(np.radians(normal_edge_threshold_deg))
    n = gbuffer.world_normal
    for axis, shift in ((0, 1), (1, 1)):
        ndot = (n * np.roll(n, shift, axis=axis)).sum(axis=-1)
        both = covered & np.roll(covered, shift, axis=axis)
        if axis == 0:
            both[:shift, :] = False
        else:
            both[:, :shift] = False
        bend = both & (ndot < cos_limit)
        edge |= bend
        edge |= np.roll(bend, -shift, axis=axis)

    return ControlMaps(depth=depth, normal=normal, edge=edge.astype(np.float64))


def concat_views(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Horizontally concatenate two equally sized views (images or masks)."""
    if a.shape != b.shape:
        raise ValueError(f"cannot concat views of shapes {a.shape} and {b.shape}")
    return np.concatenate([a, b], axis=1)


def split_views(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact inverse of concat_views."""
    width = img.shape[1]
    if width % 2 != 0:
        raise ValueError("concatenated image width must be even")
    half = width // 2
    return img[:, :half].copy(), img[:, half:].copy()
