"""UV-unwrapped triangle meshes, cameras, and the symmetric view schedule."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_AREA_EPS = 1e-12
_UV_SLACK = 1e-6


class MeshError(ValueError):
    """Raised for unloadable, malformed, or invalid mesh data."""


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Indexed triangle mesh with unified position/normal/uv vertex streams.

    positions: (V, 3) float64, model units.
    normals:   (V, 3) float64 unit vectors.
    uvs:       (V, 2) float64 in [0, 1].
    triangles: (T, 3) int32 indices into the three streams.
    """

    positions: np.ndarray
    normals: np.ndarray
    uvs: np.ndarray
    triangles: np.ndarray

    @property
    def num_vertices(self) -> int:
        return int(self.positions.shape[0])

    @property
    def num_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def bbox_center(self) -> np.ndarray:
        lo = self.positions.min(axis=0)
        hi = self.positions.max(axis=0)
        return (lo + hi) / 2.0

    def bounding_radius(self) -> float:
        """Radius of the bounding sphere centered at the bbox center."""
        d = self.positions - self.bbox_center()
        return float(np.sqrt((d * d).sum(axis=1)).max())


def _freeze(mesh: TriangleMesh) -> TriangleMesh:
    for arr in (mesh.positions, mesh.normals, mesh.uvs, mesh.triangles):
        arr.setflags(write=False)
    return mesh


def triangle_areas(points: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Triangle areas for 2D or 3D vertex data, one per triangle."""
    a = points[triangles[:, 0]]
    b = points[triangles[:, 1]]
    c = points[triangles[:, 2]]
    if points.shape[1] == 2:
        return 0.5 * np.abs(
            (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
            - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
        )
    cr = np.cross(b - a, c - a)
    return 0.5 * np.sqrt((cr * cr).sum(axis=1))


def compute_vertex_normals(positions: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted average of incident face normals, normalized per vertex."""
    normals = np.zeros_like(positions)
    a = positions[triangles[:, 0]]
    b = positions[triangles[:, 1]]
    c = positions[triangles[:, 2]]
    face = np.cross(b - a, c - a)  # length = 2 * area, so weighting is built in
    for k in range(3):
        np.add.at(normals, triangles[:, k], face)
    length = np.sqrt((normals * normals).sum(axis=1, keepdims=True))
    length[length == 0.0] = 1.0
    return normals / length


def validate_mesh(
    positions: np.ndarray,
    normals: np.ndarray | None,
    uvs: np.ndarray,
    triangles: np.ndarray,
) -> TriangleMesh:
    """Check invariants, synthesize missing normals, drop degenerate triangles.

    Raises MeshError for out-of-range indices or UVs; zero-area triangles
    (in position or UV space) are removed with a warning.
    """
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    uvs = np.asarray(uvs, dtype=np.float64).reshape(-1, 2)
    triangles = np.asarray(triangles, dtype=np.int32).reshape(-1, 3)

    nv = positions.shape[0]
    if uvs.shape[0] != nv:
        raise MeshError(f"uv count {uvs.shape[0]} != vertex count {nv}")
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        raise MeshError("triangle index out of range")

    if uvs.size:
        if uvs.min() < -_UV_SLACK or uvs.max() > 1.0 + _UV_SLACK:
            raise MeshError("uv coordinates must lie in [0, 1]")
        uvs = np.clip(uvs, 0.0, 1.0)

    if normals is None:
        normals = compute_vertex_normals(positions, triangles)
    else:
        normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
        if normals.shape[0] != nv:
            raise MeshError(f"normal count {normals.shape[0]} != vertex count {nv}")
        length = np.sqrt((normals * normals).sum(axis=1, keepdims=True))
        if (length < 1e-8).any():
            raise MeshError("zero-length vertex normal")
        normals = normals / length

    if triangles.size:
        keep = (triangle_areas(positions, triangles) > _AREA_EPS) & (
            triangle_areas(uvs, triangles) > _AREA_EPS
        )
        if not keep.all():
            warnings.warn(
                f"dropped {int((~keep).sum())} degenerate triangle(s) "
                "(zero area in position or UV space)",
                stacklevel=2,
            )
            triangles = triangles[keep]

    return _freeze(TriangleMesh(positions, normals, uvs, np.ascontiguousarray(triangles)))


# ---------------------------------------------------------------------------
# Wavefront OBJ input / output
# ---------------------------------------------------------------------------

def _resolve_index(raw: str, count: int, lineno: int) -> int:
    try:
        idx = int(raw)
    except ValueError:
        raise MeshError(f"line {lineno}: bad index {raw!r}") from None
    if idx > 0:
        idx -= 1
    elif idx < 0:
        idx += count
    else:
        raise MeshError(f"line {lineno}: OBJ indices are 1-based, got 0")
    if not 0 <= idx < count:
        raise MeshError(f"line {lineno}: index {raw} out of range")
    return idx


def load_mesh(path: str | Path) -> TriangleMesh:
    """Load a UV-unwrapped mesh from a Wavefront OBJ file.

    Supports ``v``, ``vt``, ``vn`` and ``f v/vt[/vn]`` records; faces with
    more than three corners are fan-triangulated; other record types are
    skipped with a warning.  Missing ``vn`` data is synthesized as
    area-weighted vertex normals; faces without ``vt`` references are
    rejected because the pipeline needs a UV atlas.

    Raises MeshError with the offending line number for malformed records.
    """
    path = Path(path)
    v: list[list[float]] = []
    vt: list[list[float]] = []
    vn: list[list[float]] = []
    corners: list[list[tuple[int, int, int]]] = []  # per-face (vi, ti, ni)
    ignored: set[str] = set()

    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            if "#" in line:
                line = line.split("#", 1)[0]
            parts = line.split()
            if not parts:
                continue
            tag, args = parts[0], parts[1:]
            if tag == "v":
                if len(args) < 3:
                    raise MeshError(f"line {lineno}: 'v' needs 3 coordinates")
                try:
                    v.append([float(x) for x in args[:3]])
                except ValueError:
                    raise MeshError(f"line {lineno}: bad vertex coordinate") from None
            elif tag == "vt":
                if len(args) < 2:
                    raise MeshError(f"line {lineno}: 'vt' needs 2 coordinates")
                try:
                    vt.append([float(x) for x in args[:2]])
                except ValueError:
                    raise MeshError(f"line {lineno}: bad uv coordinate") from None
            elif tag == "vn":
                if len(args) < 3:
                    raise MeshError(f"line {lineno}: 'vn' needs 3 coordinates")
                try:
                    vn.append([float(x) for x in args[:3]])
                except ValueError:
                    raise MeshError(f"line {lineno}: bad normal coordinate") from None
            elif tag == "f":
                if len(args) < 3:
                    raise MeshError(f"line {lineno}: face needs at least 3 corners")
                face = []
                for ref in args:
                    fields = ref.split("/")
                    vi = _resolve_index(fields[0], len(v), lineno)
                    if len(fields) < 2 or fields[1] == "":
                        raise MeshError(
                            f"line {lineno}: face corner {ref!r} has no uv index; "
                            "mesh must be UV-unwrapped"
                        )
                    ti = _resolve_index(fields[1], len(vt), lineno)
                    ni = -1
                    if len(fields) >= 3 and fields[2] != "":
                        ni = _resolve_index(fields[2], len(vn), lineno)
                    face.append((vi, ti, ni))
                corners.append(face)
            else:
                ignored.add(tag)

    if ignored:
        warnings.warn(
            f"ignored OBJ record type(s): {', '.join(sorted(ignored))}", stacklevel=2
        )
    if not corners:
        raise MeshError(f"{path}: no faces found")

    # Weld (vi, ti, ni) triples into a unified vertex stream.
    remap: dict[tuple[int, int, int], int] = {}
    tri_list: list[tuple[int, int, int]] = []

    def unified(key: tuple[int, int, int]) -> int:
        idx = remap.get(key)
        if idx is None:
            idx = len(remap)
            remap[key] = idx
        return idx

    for face in corners:
        first = unified(face[0])
        for a, b in zip(face[1:-1], face[2:]):
            tri_list.append((first, unified(a), unified(b)))

    keys = list(remap.keys())
    positions = np.array([v[vi] for vi, _, _ in keys], dtype=np.float64)
    uvs = np.array([vt[ti] for _, ti, _ in keys], dtype=np.float64)
    has_normals = all(ni >= 0 for _, _, ni in keys) and len(vn) > 0
    normals = (
        np.array([vn[ni] for _, _, ni in keys], dtype=np.float64)
        if has_normals
        else None
    )
    triangles = np.array(tri_list, dtype=np.int32)
    return validate_mesh(positions, normals, uvs, triangles)


def write_obj(
    mesh: TriangleMesh,
    path: str | Path,
    mtllib: str | None = None,
    material: str | None = None,
) -> Path:
    """Write the mesh as ASCII OBJ (v/vt/vn streams share one index)."""
    path = Path(path)
    lines = []
    if mtllib:
        lines.append(f"mtllib {mtllib}")
    for x, y, z in mesh.positions:
        lines.append(f"v {x:.8f} {y:.8f} {z:.8f}")
    for u, vv in mesh.uvs:
        lines.append(f"vt {u:.8f} {vv:.8f}")
    for x, y, z in mesh.normals:
        lines.append(f"vn {x:.8f} {y:.8f} {z:.8f}")
    if material:
        lines.append(f"usemtl {material}")
    for a, b, c in mesh.triangles:
        lines.append(
            f"f {a + 1}/{a + 1}/{a + 1} {b + 1}/{b + 1}/{b + 1} {c + 1}/{c + 1}/{c + 1}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def normalize_mesh(mesh: TriangleMesh) -> TriangleMesh:
    """Center the bbox at the origin and scale the bounding sphere to radius 1."""
    if mesh.num_vertices == 0:
        raise MeshError("empty mesh")
    center = mesh.bbox_center()
    positions = mesh.positions - center
    radius = float(np.sqrt((positions * positions).sum(axis=1)).max())
    if radius < 1e-12:
        raise MeshError("degenerate mesh: all points coincident")
    positions = positions / radius
    return _freeze(
        TriangleMesh(positions, mesh.normals.copy(), mesh.uvs.copy(), mesh.triangles.copy())
    )


# ---------------------------------------------------------------------------
# Cameras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CameraView:
    """Perspective camera orbiting a target point, up = world +Y.

    azimuth/elevation in degrees; azimuth 0 puts the camera on +Z (the
    "front" side), 90 on +X.  fov_deg is the vertical field of view.
    """

    azimuth: float
    elevation: float
    radius: float
    fov_deg: float = 40.0
    width: int = 1024
    height: int = 1024
    target: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("camera resolution must be at least 1x1")
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov must be in (0, 180) degrees")
        if self.radius <= 0.0:
            raise ValueError("camera radius must be positive")
        if abs(self.elevation) >= 90.0:
            raise ValueError("elevation must be strictly inside (-90, 90)")

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def eye(self) -> np.ndarray:
        az = math.radians(self.azimuth)
        el = math.radians(self.elevation)
        direction = np.array(
            [math.sin(az) * math.cos(el), math.sin(el), math.cos(az) * math.cos(el)]
        )
        return np.asarray(self.target, dtype=np.float64) + self.radius * direction

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (right, up, forward); forward points at the target."""
        eye = self.eye()
        forward = np.asarray(self.target, dtype=np.float64) - eye
        forward = forward / np.linalg.norm(forward)
        world_up = np.array([0.0, 1.0, 0.0])
        right = np.cross(forward, world_up)
        right = right / np.linalg.norm(right)
        up = np.cross(right, forward)
        return right, up, forward

    def rotation(self) -> np.ndarray:
        """World->camera rotation; camera space is x=right, y=up, z=toward viewer."""
        right, up, forward = self.basis()
        return np.stack([right, up, -forward])

    def view_matrix(self) -> np.ndarray:
        rot = self.rotation()
        m = np.eye(4)
        m[:3, :3] = rot
        m[:3, 3] = -rot @ self.eye()
        return m

    def projection_matrix(self, znear: float | None = None, zfar: float | None = None) -> np.ndarray:
        zn = self.radius * 0.05 if znear is None else znear
        zf = self.radius * 4.0 if zfar is None else zfar
        f = 1.0 / math.tan(math.radians(self.fov_deg) / 2.0)
        m = np.zeros((4, 4))
        m[0, 0] = f / self.aspect
        m[1, 1] = f
        m[2, 2] = (zf + zn) / (zn - zf)
        m[2, 3] = 2.0 * zf * zn / (zn - zf)
        m[3, 2] = -1.0
        return m

    def project_points(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Project world points to pixel coordinates.

        Returns (px, py, w): continuous pixel coordinates (pixel centers at
        half-integers, y down) and the positive view-space depth w.  Points
        with w <= 0 are behind the camera; their px/py are meaningless.
        """
        points = np.asarray(points, dtype=np.float64)
        cam = (points - self.eye()) @ self.rotation().T
        w = -cam[..., 2]
        f = 1.0 / math.tan(math.radians(self.fov_deg) / 2.0)
        safe_w = np.where(w > 0.0, w, 1.0)
        ndc_x = (f / self.aspect) * cam[..., 0] / safe_w
        ndc_y = f * cam[..., 1] / safe_w
        px = (ndc_x + 1.0) * 0.5 * self.width
        py = (1.0 - ndc_y) * 0.5 * self.height
        return px, py, w


@dataclass(frozen=True)
class ViewPair:
    """Two cameras 180 degrees apart in azimuth, rendered and generated jointly."""

    view_i: CameraView
    view_j: CameraView
    label: str = ""

    def __post_init__(self):
        delta = (self.view_j.azimuth - self.view_i.azimuth) % 360.0
        if abs(delta - 180.0) > 1e-6:
            raise ValueError("paired views must be 180 degrees apart in azimuth")
        same = (
            self.view_i.elevation == self.view_j.elevation
            and self.view_i.radius == self.view_j.radius
            and self.view_i.fov_deg == self.view_j.fov_deg
            and self.view_i.width == self.view_j.width
            and self.view_i.height == self.view_j.height
        )
        if not same:
            raise ValueError("paired views must share elevation/radius/fov/resolution")


_BASE_PAIRS = ((0.0, "front-back"), (90.0, "right-left"))


def view_schedule(
    pair_count: int = 2,
    radius: float = 2.5,
    fov_deg: float = 40.0,
    elevation: float = 0.0,
    extra_elevation: float = 45.0,
    width: int = 1024,
    height: int = 1024,
) -> list[ViewPair]:
    """Deterministic symmetric-pair schedule.

    Pairs 1 and 2 are (0, 180) and (90, 270) at the base elevation; further
    pairs repeat those azimuths at ``extra_elevation``.
    """
    if pair_count < 1:
        raise ValueError("pair count must be at least 1")

    pairs: list[ViewPair] = []
    for k in range(pair_count):
        azimuth, label = _BASE_PAIRS[k % 2]
        elev = elevation if k < 2 else extra_elevation
        if k >= 2:
            label = f"{label}-elev{elev:g}"
        if k >= 4:
            label += f"-{k // 2}"
        make = lambda az: CameraView(  # noqa: E731
            azimuth=az % 360.0,
            elevation=elev,
            radius=radius,
            fov_deg=fov_deg,
            width=width,
            height=height,
        )
        pairs.append(ViewPair(make(azimuth), make(azimuth + 180.0), label))
    return pairs
