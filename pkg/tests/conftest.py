"""Shared fixtures and independent oracles for the test suite.

The oracle implementations here (ray casting, dense convolution,
brute-force dilation) deliberately share no code with the package paths
they validate.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from rocotex.geometry import CameraView
from rocotex.primitives import cube, quad, tetrahedron, two_parallel_quads, uv_sphere

CUBE_OBJ = """\
# axis-aligned unit cube, one uv chart per face
v -0.5 -0.5 0.5
v 0.5 -0.5 0.5
v 0.5 0.5 0.5
v -0.5 0.5 0.5
v 0.5 -0.5 -0.5
v -0.5 -0.5 -0.5
v -0.5 0.5 -0.5
v 0.5 0.5 -0.5
v 0.5 -0.5 0.5
v 0.5 -0.5 -0.5
v 0.5 0.5 -0.5
v 0.5 0.5 0.5
v -0.5 -0.5 -0.5
v -0.5 -0.5 0.5
v -0.5 0.5 0.5
v -0.5 0.5 -0.5
v -0.5 0.5 0.5
v 0.5 0.5 0.5
v 0.5 0.5 -0.5
v -0.5 0.5 -0.5
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v 0.5 -0.5 0.5
v -0.5 -0.5 0.5
vt 0.02 0.02
vt 0.3133 0.02
vt 0.3133 0.48
vt 0.02 0.48
vt 0.3533 0.02
vt 0.6466 0.02
vt 0.6466 0.48
vt 0.3533 0.48
vt 0.6866 0.02
vt 0.98 0.02
vt 0.98 0.48
vt 0.6866 0.48
vt 0.02 0.52
vt 0.3133 0.52
vt 0.3133 0.98
vt 0.02 0.98
vt 0.3533 0.52
vt 0.6466 0.52
vt 0.6466 0.98
vt 0.3533 0.98
vt 0.6866 0.52
vt 0.98 0.52
vt 0.98 0.98
vt 0.6866 0.98
f 1/1 2/2 3/3
f 1/1 3/3 4/4
f 5/5 6/6 7/7
f 5/5 7/7 8/8
f 9/9 10/10 11/11
f 9/9 11/11 12/12
f 13/13 14/14 15/15
f 13/13 15/15 16/16
f 17/17 18/18 19/19
f 17/17 19/19 20/20
f 21/21 22/22 23/23
f 21/21 23/23 24/24
"""


@pytest.fixture
def cube_obj(tmp_path):
    path = tmp_path / "cube.obj"
    path.write_text(CUBE_OBJ, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def sphere_mesh():
    return uv_sphere(rings=16, segments=32)


@pytest.fixture(scope="session")
def small_sphere_mesh():
    return uv_sphere(rings=4, segments=6)  # 36 triangles


@pytest.fixture(scope="session")
def cube_mesh():
    return cube(1.0)


@pytest.fixture(scope="session")
def tetra_mesh():
    return tetrahedron()


@pytest.fixture(scope="session")
def parallel_quads_mesh():
    return two_parallel_quads()


@pytest.fixture(scope="session")
def quad_mesh():
    return quad(0.9)


def front_view(width=64, height=64, radius=2.5, fov=40.0, azimuth=0.0, elevation=0.0):
    return CameraView(
        azimuth=azimuth, elevation=elevation, radius=radius,
        fov_deg=fov, width=width, height=height,
    )


def aligned_quad_view(resolution, radius=2.5, fov=40.0):
    """View whose frustum face at z=0 is exactly spanned by aligned_quad()."""
    return CameraView(azimuth=0.0, elevation=0.0, radius=radius, fov_deg=fov,
                      width=resolution, height=resolution)


def aligned_quad(view):
    """Quad that exactly fills ``view``'s viewport at the target plane."""
    half = view.radius * np.tan(np.radians(view.fov_deg) / 2.0)
    return quad(half)


# ---------------------------------------------------------------------------
# Ray-casting oracle (Moller-Trumbore)
# ---------------------------------------------------------------------------

def ray_triangle_hits(origins, directions, v0, v1, v2, eps=1e-12):
    """Hit distances for N rays against T triangles; +inf where missed.

    origins/directions: (N, 3); v0/v1/v2: (T, 3).  Returns (N, T).
    """
    e1 = v1 - v0
    e2 = v2 - v0
    d = directions[:, None, :]
    p = np.cross(d, e2[None, :, :])
    det = (e1[None, :, :] * p).sum(-1)
    ok = np.abs(det) > eps
    inv = np.where(ok, det, 1.0)
    s = origins[:, None, :] - v0[None, :, :]
    u = (s * p).sum(-1) / inv
    q = np.cross(s, e1[None, :, :])
    v = (d * q).sum(-1) / inv
    t = (e2[None, :, :] * q).sum(-1) / inv
    hit = ok & (u >= -1e-9) & (v >= -1e-9) & (u + v <= 1 + 1e-9) & (t > eps)
    return np.where(hit, t, np.inf)


def raycast_pixel_ids(mesh, view):
    """Per-pixel nearest front-facing triangle by ray casting; -1 where empty."""
    h, w = view.height, view.width
    f = 1.0 / np.tan(np.radians(view.fov_deg) / 2.0)
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    ndc_x = (cols + 0.5) / w * 2.0 - 1.0
    ndc_y = 1.0 - (rows + 0.5) / h * 2.0
    cam_dirs = np.stack(
        [ndc_x * view.aspect / f, ndc_y / f, -np.ones_like(ndc_x)], axis=-1
    ).reshape(-1, 3)
    rot = view.rotation()
    dirs = cam_dirs @ rot  # camera->world for row-vector dirs
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    eye = view.eye()
    origins = np.broadcast_to(eye, dirs.shape).copy()

    tri = mesh.triangles
    pos = mesh.positions
    # only front-facing triangles compete (the rasterizer culls back faces)
    n = np.cross(pos[tri[:, 1]] - pos[tri[:, 0]], pos[tri[:, 2]] - pos[tri[:, 0]])
    center = (pos[tri[:, 0]] + pos[tri[:, 1]] + pos[tri[:, 2]]) / 3.0
    facing = ((eye - center) * n).sum(-1) > 0
    front = np.flatnonzero(facing)
    hits = ray_triangle_hits(
        origins, dirs, pos[tri[front, 0]], pos[tri[front, 1]], pos[tri[front, 2]]
    )
    best = hits.argmin(axis=1)
    ids = np.where(np.isfinite(hits.min(axis=1)), front[best], -1)
    return ids.reshape(h, w).astype(np.int32)


def point_visibility_oracle(mesh, view, points, owner_tris, pullback=1e-4):
    """True where a surface point is visible from the camera.

    Casts eye->point rays against every triangle except the owner and
    checks nothing sits strictly in between (small pullback absorbs
    shared-edge grazes).
    """
    eye = view.eye()
    to_point = points - eye
    dist = np.linalg.norm(to_point, axis=1)
    dirs = to_point / dist[:, None]
    tri = mesh.triangles
    pos = mesh.positions
    hits = ray_triangle_hits(
        eye + np.zeros_like(points), dirs, pos[tri[:, 0]], pos[tri[:, 1]], pos[tri[:, 2]]
    )
    hits[np.arange(len(points)), owner_tris] = np.inf
    scale = mesh.bounding_radius()
    return hits.min(axis=1) >= dist - pullback * scale


# ---------------------------------------------------------------------------
# Image-morphology oracles
# ---------------------------------------------------------------------------

def dense_gaussian_oracle(mask, sigma):
    """Direct dense convolution with a normalized 2D Gaussian kernel,
    truncated at 3 sigma, with clamped (replicated) edges."""
    radius = int(3.0 * sigma + 0.5)
    ax = np.arange(-radius, radius + 1)
    xx, yy = np.meshgrid(ax, ax)
    kernel = np.exp(-(xx**2 + yy**2) / (2.0 * sigma**2))
    kernel /= kernel.sum()
    padded = np.pad(np.asarray(mask, dtype=np.float64), radius, mode="edge")
    h, w = mask.shape
    out = np.zeros((h, w))
    for dy in range(kernel.shape[0]):
        for dx in range(kernel.shape[1]):
            out += kernel[dy, dx] * padded[dy:dy + h, dx:dx + w]
    return out


def disk_dilate_oracle(mask, radius):
    """Set-definition dilation: OR of the mask over every offset in the disk."""
    binary = np.asarray(mask) > 0.5
    out = np.zeros_like(binary)
    r = int(np.ceil(radius))
    h, w = binary.shape
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dy * dy + dx * dx > radius * radius:
                continue
            ys = slice(max(dy, 0), h + min(dy, 0))
            xs = slice(max(dx, 0), w + min(dx, 0))
            ys_src = slice(max(-dy, 0), h + min(-dy, 0))
            xs_src = slice(max(-dx, 0), w + min(-dx, 0))
            out[ys, xs] |= binary[ys_src, xs_src]
    return out.astype(np.float64)


# ---------------------------------------------------------------------------
# Local HTTP stub standing in for a generation service
# ---------------------------------------------------------------------------

class StubState:
    def __init__(self, behavior="echo", failures=0):
        self.behavior = behavior
        self.failures_left = failures
        self.requests = []


def make_stub_handler(state: StubState):
    from rocotex.generator import encode_png_b64

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def do_POST(self):
            length = int(self.headers["Content-Length"])
            body = json.loads(self.rfile.read(length))
            state.requests.append(body)
            if state.failures_left > 0:
                state.failures_left -= 1
                self.send_response(503)
                self.end_headers()
                self.wfile.write(b"temporarily overloaded")
                return
            if state.behavior == "not_found":
                self.send_response(404)
                self.end_headers()
                self.wfile.write(b"no such model")
                return
            if state.behavior == "garbage":
                data = b"<html>not json</html>"
                self.send_response(200)
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
                return
            if state.behavior == "wrong_resolution":
                payload = {"image": encode_png_b64(np.zeros((8, 8, 3))), "metadata": "stub"}
            else:  # echo
                payload = {"image": body["images"]["init"], "metadata": "echo"}
            data = json.dumps(payload).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

    return Handler


@pytest.fixture
def stub_server():
    servers = []

    def start(behavior="echo", failures=0):
        state = StubState(behavior, failures)
        server = ThreadingHTTPServer(("127.0.0.1", 0), make_stub_handler(state))
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        servers.append(server)
        return f"http://127.0.0.1:{server.server_address[1]}/generate", state

    yield start
    for server in servers:
        server.shutdown()
        server.server_close()
