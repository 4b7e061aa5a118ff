#!/usr/bin/env python3
"""Benchmark the compiled rasterization core against the NumPy fallback.

Times screen-space G-buffer rasterization and UV-space atlas rasterization
over a range of mesh densities and resolutions:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 512 1024 --repeats 5
"""

import argparse
import time

import numpy as np

from rocotex.geometry import CameraView
from rocotex.kernels import compiled_backend, numpy_backend
from rocotex.primitives import uv_sphere
from rocotex.raster import uv_to_pixel


def screen_inputs(mesh, size):
    view = CameraView(azimuth=30.0, elevation=15.0, radius=3.0, width=size, height=size)
    px, py, w = view.project_points(mesh.positions)
    pts = np.ascontiguousarray(np.stack([px, py], -1)[mesh.triangles])
    wt = np.ascontiguousarray(w[mesh.triangles])
    return pts, 1.0 / wt, wt, size, size, True


def uv_inputs(mesh, size):
    px, py = uv_to_pixel(mesh.uvs, size, size)
    pts = np.ascontiguousarray(np.stack([px, py], -1)[mesh.triangles])
    ones = np.ones((pts.shape[0], 3))
    return pts, ones, ones, size, size, False


def best_of(fn, args, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    parser.add_argument("--rings", type=int, nargs="+", default=[16, 64],
                        help="sphere tessellation (segments = 2x rings)")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = [("numpy", numpy_backend)]
    if compiled_backend is not None:
        backends.append(("compiled", compiled_backend))
    else:
        print("note: compiled core not built; timing the fallback only\n")

    header = f"{'case':<34}" + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for rings in args.rings:
        mesh = uv_sphere(rings, 2 * rings)
        for size in args.sizes:
            for label, make_inputs in (("screen", screen_inputs), ("uv", uv_inputs)):
                inputs = make_inputs(mesh, size)
                case = f"{label} {mesh.num_triangles} tris @ {size}^2"
                times = [
                    best_of(backend.rasterize_triangles, inputs, args.repeats)
                    for _, backend in backends
                ]
                row = f"{case:<34}" + "".join(f"{t * 1000:>10.1f}ms" for t in times)
                if len(times) == 2:
                    row += f"{times[0] / times[1]:>9.1f}x"
                print(row)


if __name__ == "__main__":
    main()
