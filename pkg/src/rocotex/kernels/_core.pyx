# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled triangle-fill core; mirrors numpy_backend.rasterize_triangles."""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor

NAME = "compiled"


def rasterize_triangles(pts_in, invw_in, depth_in, int width, int height,
                        bint cull_backfaces=True):
    """Z-buffered scanline fill over pixel centers.

    Same contract as the NumPy backend: pts (T, 3, 2) screen coords,
    invw (T, 3) reciprocal w, depth (T, 3); returns (tri_id, bary, zbuf).
    """
    cdef double[:, :, ::1] pts = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef double[:, ::1] invw = np.ascontiguousarray(invw_in, dtype=np.float64)
    cdef double[:, ::1] depth = np.ascontiguousarray(depth_in, dtype=np.float64)

    tri_np = np.full((height, width), -1, dtype=np.int32)
    bary_np = np.zeros((height, width, 3), dtype=np.float64)
    z_np = np.full((height, width), np.inf, dtype=np.float64)
    cdef cnp.int32_t[:, ::1] tri_id = tri_np
    cdef double[:, :, ::1] bary = bary_np
    cdef double[:, ::1] zbuf = z_np

    cdef Py_ssize_t t, T = pts.shape[0]
    cdef int c, r, c0, c1, r0, r1
    cdef double x0, y0, x1, y1, x2, y2
    cdef double area2, inv_area, px, py
    cdef double l0, l1, l2, w0, w1, w2, s, b0, b1, b2, d
    cdef double d0, d1, d2, iw0, iw1, iw2
    cdef double xmin, xmax, ymin, ymax

    with nogil:
        for t in range(T):
            x0 = pts[t, 0, 0]; y0 = pts[t, 0, 1]
            x1 = pts[t, 1, 0]; y1 = pts[t, 1, 1]
            x2 = pts[t, 2, 0]; y2 = pts[t, 2, 1]

            area2 = (y1 - y2) * (x0 - x2) + (x2 - x1) * (y0 - y2)
            if cull_backfaces:
                if area2 >= 0.0:
                    continue
            elif area2 == 0.0:
                continue

            xmin = min(x0, min(x1, x2)); xmax = max(x0, max(x1, x2))
            ymin = min(y0, min(y1, y2)); ymax = max(y0, max(y1, y2))
            c0 = <int>floor(xmin - 0.5)
            c1 = <int>ceil(xmax - 0.5)
            r0 = <int>floor(ymin - 0.5)
            r1 = <int>ceil(ymax - 0.5)
            if c0 < 0: c0 = 0
            if r0 < 0: r0 = 0
            if c1 > width - 1: c1 = width - 1
            if r1 > height - 1: r1 = height - 1
            if c0 > c1 or r0 > r1:
                continue

            inv_area = 1.0 / area2
            iw0 = invw[t, 0]; iw1 = invw[t, 1]; iw2 = invw[t, 2]
            d0 = depth[t, 0]; d1 = depth[t, 1]; d2 = depth[t, 2]

            for r in range(r0, r1 + 1):
                py = r + 0.5
                for c in range(c0, c1 + 1):
                    px = c + 0.5
                    l0 = ((y1 - y2) * (px - x2) + (x2 - x1) * (py - y2)) * inv_area
                    if l0 < 0.0:
                        continue
                    l1 = ((y2 - y0) * (px - x2) + (x0 - x2) * (py - y2)) * inv_area
                    if l1 < 0.0:
                        continue
                    l2 = 1.0 - l0 - l1
                    if l2 < 0.0:
                        continue
                    w0 = l0 * iw0
                    w1 = l1 * iw1
                    w2 = l2 * iw2
                    s = w0 + w1 + w2
                    b0 = w0 / s
                    b1 = w1 / s
                    b2 = w2 / s
                    d = b0 * d0 + b1 * d1 + b2 * d2
                    if d < zbuf[r, c]:
                        zbuf[r, c] = d
                        tri_id[r, c] = <cnp.int32_t>t
                        bary[r, c, 0] = b0
                        bary[r, c, 1] = b1
                        bary[r, c, 2] = b2

    return tri_np, bary_np, z_np
