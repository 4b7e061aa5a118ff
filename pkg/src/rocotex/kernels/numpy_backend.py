"""Pure-NumPy triangle fill, used when the compiled core is unavailable.

Implements the exact same arithmetic (same expressions, same evaluation
order) as ``_core.pyx`` so both backends produce identical buffers.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def rasterize_triangles(pts, invw, depth, width, height, cull_backfaces=True):
    """Z-buffered scanline fill over pixel centers.

    pts:   (T, 3, 2) float64 screen-space vertex positions, pixels.
           Pixel (row r, col c) has its center at (c + 0.5, r + 0.5).
    invw:  (T, 3) float64 reciprocal clip-space w per vertex; pass ones
           for affine (e.g. UV-space) rasterization.
    depth: (T, 3) float64 per-vertex depth used for the z-test.
    cull_backfaces: skip triangles with non-negative signed screen area
           (front faces wind negatively in y-down pixel coordinates).

    Returns (tri_id, bary, zbuf): int32 (H, W) with -1 where empty,
    float64 (H, W, 3) perspective-corrected barycentrics, and float64
    (H, W) depth with +inf where empty.  Depth ties keep the earlier
    triangle, so output is deterministic for a fixed triangle order.
    """
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    invw = np.ascontiguousarray(invw, dtype=np.float64)
    depth = np.ascontiguousarray(depth, dtype=np.float64)

    tri_id = np.full((height, width), -1, dtype=np.int32)
    bary = np.zeros((height, width, 3), dtype=np.float64)
    zbuf = np.full((height, width), np.inf, dtype=np.float64)

    for t in range(pts.shape[0]):
        x0, y0 = pts[t, 0]
        x1, y1 = pts[t, 1]
        x2, y2 = pts[t, 2]

        area2 = (y1 - y2) * (x0 - x2) + (x2 - x1) * (y0 - y2)
        if cull_backfaces:
            if area2 >= 0.0:
                continue
        elif area2 == 0.0:
            continue

        c0 = max(0, int(np.floor(min(x0, x1, x2) - 0.5)))
        c1 = min(width - 1, int(np.ceil(max(x0, x1, x2) - 0.5)))
        r0 = max(0, int(np.floor(min(y0, y1, y2) - 0.5)))
        r1 = min(height - 1, int(np.ceil(max(y0, y1, y2) - 0.5)))
        if c0 > c1 or r0 > r1:
            continue

        px = np.arange(c0, c1 + 1, dtype=np.float64)[None, :] + 0.5
        py = np.arange(r0, r1 + 1, dtype=np.float64)[:, None] + 0.5

        inv_area = 1.0 / area2
        l0 = ((y1 - y2) * (px - x2) + (x2 - x1) * (py - y2)) * inv_area
        l1 = ((y2 - y0) * (px - x2) + (x0 - x2) * (py - y2)) * inv_area
        l2 = 1.0 - l0 - l1
        inside = (l0 >= 0.0) & (l1 >= 0.0) & (l2 >= 0.0)
        if not inside.any():
            continue

        w0 = l0 * invw[t, 0]
        w1 = l1 * invw[t, 1]
        w2 = l2 * invw[t, 2]
        s = w0 + w1 + w2
        b0 = w0 / s
        b1 = w1 / s
        b2 = w2 / s
        d = b0 * depth[t, 0] + b1 * depth[t, 1] + b2 * depth[t, 2]

        zwin = zbuf[r0:r1 + 1, c0:c1 + 1]
        upd = inside & (d < zwin)
        if not upd.any():
            continue
        zwin[upd] = d[upd]
        tri_id[r0:r1 + 1, c0:c1 + 1][upd] = t
        bwin = bary[r0:r1 + 1, c0:c1 + 1]
        bwin[upd, 0] = b0[upd]
        bwin[upd, 1] = b1[upd]
        bwin[upd, 2] = b2[upd]

    return tri_id, bary, zbuf
