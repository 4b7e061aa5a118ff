"""Procedural UV-unwrapped test meshes (sphere, cube, quads, tetrahedron)."""

from __future__ import annotations

import math

import numpy as np

from rocotex.geometry import TriangleMesh, validate_mesh


def quad(
    half_width: float = 1.0,
    half_height: float | None = None,
    z: float = 0.0,
    uv_min: tuple[float, float] = (0.0, 0.0),
    uv_max: tuple[float, float] = (1.0, 1.0),
) -> TriangleMesh:
    """Camera-facing quad in the z = const plane, normal +Z, CCW winding."""
    hw = half_width
    hh = half_width if half_height is None else half_height
    u0, v0 = uv_min
    u1, v1 = uv_max
    positions = np.array(
        [[-hw, -hh, z], [hw, -hh, z], [hw, hh, z], [-hw, hh, z]], dtype=np.float64
    )
    uvs = np.array([[u0, v0], [u1, v0], [u1, v1], [u0, v1]], dtype=np.float64)
    normals = np.tile([0.0, 0.0, 1.0], (4, 1))
    triangles = np.array([[0, 1, 2], [0, 2, 3]], dtype=np.int32)
    return validate_mesh(positions, normals, uvs, triangles)


def two_parallel_quads(front_half: float = 0.35, rear_half: float = 0.8, gap: float = 0.6) -> TriangleMesh:
    """Small front quad at z=+gap/2 partially occluding a larger rear quad.

    UV charts sit side by side so both quads own distinct texels.
    """
    front = quad(front_half, z=gap / 2.0, uv_min=(0.02, 0.02), uv_max=(0.47, 0.98))
    rear = quad(rear_half, z=-gap / 2.0, uv_min=(0.53, 0.02), uv_max=(0.98, 0.98))
    positions = np.vstack([front.positions, rear.positions])
    normals = np.vstack([front.normals, rear.normals])
    uvs = np.vstack([front.uvs, rear.uvs])
    triangles = np.vstack([front.triangles, rear.triangles + 4]).astype(np.int32)
    return validate_mesh(positions, normals, uvs, triangles)


_CUBE_FACES = (
    # (normal, tangent-u, tangent-v)
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((0, 0, -1), (-1, 0, 0), (0, 1, 0)),
    ((1, 0, 0), (0, 0, -1), (0, 1, 0)),
    ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
    ((0, 1, 0), (1, 0, 0), (0, 0, -1)),
    ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
)


def cube(half_extent: float = 1.0, uv_inset: float = 0.02) -> TriangleMesh:
    """Axis-aligned cube, 24 vertices / 12 triangles, one UV chart per face.

    Charts are packed on a 3x2 grid with an inset so bilinear lookups do
    not bleed across faces.
    """
    positions, normals, uvs, triangles = [], [], [], []
    for f, (n, tu, tv) in enumerate(_CUBE_FACES):
        n = np.array(n, dtype=np.float64)
        tu = np.array(tu, dtype=np.float64)
        tv = np.array(tv, dtype=np.float64)
        cell_u, cell_v = f % 3, f // 3
        u0 = (cell_u + uv_inset) / 3.0
        u1 = (cell_u + 1 - uv_inset) / 3.0
        v0 = (cell_v + uv_inset) / 2.0
        v1 = (cell_v + 1 - uv_inset) / 2.0
        base = len(positions)
        for su, sv, u, v in ((-1, -1, u0, v0), (1, -1, u1, v0), (1, 1, u1, v1), (-1, 1, u0, v1)):
            positions.append(half_extent * (n + su * tu + sv * tv))
            normals.append(n)
            uvs.append([u, v])
        triangles.append([base, base + 1, base + 2])
        triangles.append([base, base + 2, base + 3])
    return validate_mesh(
        np.array(positions), np.array(normals), np.array(uvs), np.array(triangles, dtype=np.int32)
    )


def uv_sphere(rings: int = 16, segments: int = 32, radius: float = 1.0) -> TriangleMesh:
    """Lat-long sphere with an equirectangular UV chart.

    The seam column is duplicated and the poles are triangle fans whose
    apex vertices sit at segment midpoints, so every triangle has nonzero
    area in both position and UV space.
    """
    if rings < 3 or segments < 3:
        raise ValueError("need rings >= 3 and segments >= 3")

    positions, normals, uvs = [], [], []

    def ring_vertex(i: int, j: int) -> None:
        theta = math.pi * i / rings  # 0 at +Y pole
        phi = 2.0 * math.pi * j / segments
        direction = np.array(
            [
                math.sin(theta) * math.cos(phi),
                math.cos(theta),
                math.sin(theta) * math.sin(phi),
            ]
        )
        positions.append(radius * direction)
        normals.append(direction)
        uvs.append([j / segments, 1.0 - i / rings])

    for i in range(1, rings):
        for j in range(segments + 1):
            ring_vertex(i, j)

    def rv(i: int, j: int) -> int:
        return (i - 1) * (segments + 1) + j

    triangles: list[list[int]] = []
    for i in range(1, rings - 1):
        for j in range(segments):
            a, b = rv(i, j), rv(i, j + 1)
            c, d = rv(i + 1, j), rv(i + 1, j + 1)
            triangles.append([a, b, c])
            triangles.append([b, d, c])

    # pole fans; apex uv.u at the segment midpoint keeps UV area nonzero
    for j in range(segments):
        apex = len(positions)
        positions.append(np.array([0.0, radius, 0.0]))
        normals.append(np.array([0.0, 1.0, 0.0]))
        uvs.append([(j + 0.5) / segments, 1.0])
        triangles.append([apex, rv(1, j + 1), rv(1, j)])
    for j in range(segments):
        apex = len(positions)
        positions.append(np.array([0.0, -radius, 0.0]))
        normals.append(np.array([0.0, -1.0, 0.0]))
        uvs.append([(j + 0.5) / segments, 0.0])
        triangles.append([apex, rv(rings - 1, j), rv(rings - 1, j + 1)])

    return validate_mesh(
        np.array(positions), np.array(normals), np.array(uvs), np.array(triangles, dtype=np.int32)
    )


def tetrahedron(scale: float = 1.0) -> TriangleMesh:
    """Regular tetrahedron with four separate UV chart triangles."""
    corners = np.array(
        [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64
    ) * (scale / math.sqrt(3.0))
    faces = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    cells = [(0, 0), (1, 0), (0, 1), (1, 1)]

    positions, normals, uvs, triangles = [], [], [], []
    for face, (cx, cy) in zip(faces, cells):
        pts = corners[list(face)]
        n = np.cross(pts[1] - pts[0], pts[2] - pts[0])
        n = n / np.linalg.norm(n)
        base = len(positions)
        chart = np.array(
            [
                [cx * 0.5 + 0.05, cy * 0.5 + 0.05],
                [cx * 0.5 + 0.45, cy * 0.5 + 0.05],
                [cx * 0.5 + 0.25, cy * 0.5 + 0.45],
            ]
        )
        for p, uv in zip(pts, chart):
            positions.append(p)
            normals.append(n)
            uvs.append(uv)
        triangles.append([base, base + 1, base + 2])
    return validate_mesh(
        np.array(positions), np.array(normals), np.array(uvs), np.array(triangles, dtype=np.int32)
    )
