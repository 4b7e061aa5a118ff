"""Pluggable image-generation backends and their wire protocol.

A backend receives the concatenated render, the binary inpainting mask,
the soft (per-pixel strength) mask, three conditioning maps with scalar
weights, and the regional prompt; it returns a same-resolution image.
The one hard contract every backend must honor: pixels whose soft-mask
value is 0 come back unchanged (within 8-bit quantization, 1/255).

HTTP wire format (protocol version 1), JSON over POST:

    {
      "protocol": 1,
      "width": W, "height": H,
      "images": {"init": <b64 PNG RGB>, "mask": <b64 PNG L>,
                 "soft_mask": <b64 PNG L>, "depth": <b64 PNG L>,
                 "normal": <b64 PNG RGB>, "edge": <b64 PNG L>},
      "prompt": {"base": ..., "negative": ..., "regions": [...]},
      "weights": {"depth": f, "normal": f, "edge": f},
      "seed": int, "steps": int, "guidance": float
    }

Response: {"image": <b64 PNG RGB>, "metadata": str?}.  Backends without
per-pixel-strength support may threshold the soft mask; that degradation
is theirs to document.
"""

from __future__ import annotations

import base64
import hashlib
import io
import time
from dataclasses import dataclass, field

import numpy as np
import requests
from PIL import Image

from rocotex.prompting import RegionalPrompt
from rocotex.raster import ControlMaps

PROTOCOL_VERSION = 1


class BackendError(RuntimeError):
    """Generation backend failed fatally (bad request, retries exhausted)."""


class ProtocolError(BackendError):
    """Backend response violates the wire contract (e.g. wrong resolution)."""


class TransportError(BackendError):
    """Retryable transport failure that exhausted its retry budget."""


@dataclass(frozen=True, eq=False)
class GenerationRequest:
    """Wire-level bundle sent to a generation backend (one symmetric pair)."""

    image: np.ndarray        # (H, W, 3) in [0, 1]
    mask: np.ndarray         # (H, W) binary inpainting mask
    soft_mask: np.ndarray    # (H, W) per-pixel strength in [0, 1]
    control: ControlMaps
    prompt: RegionalPrompt
    weights: tuple[float, float, float] = (0.5, 0.5, 0.5)
    seed: int = 0
    steps: int = 30
    guidance: float = 7.5

    def __post_init__(self):
        h, w = self.image.shape[:2]
        shapes = {
            "image": self.image.shape[:2],
            "mask": self.mask.shape[:2],
            "soft_mask": self.soft_mask.shape[:2],
            "depth": self.control.depth.shape[:2],
            "normal": self.control.normal.shape[:2],
            "edge": self.control.edge.shape[:2],
        }
        bad = {k: s for k, s in shapes.items() if s != (h, w)}
        if bad:
            raise ValueError(f"rasters must share one resolution, got {bad}")
        if (self.prompt.width, self.prompt.height) != (w, h):
            raise ValueError("regional prompt dimensions must match the image")
        if not set(np.unique(self.mask)) <= {0.0, 1.0}:
            raise ValueError("mask must be binary")
        if self.soft_mask.min() < 0.0 or self.soft_mask.max() > 1.0:
            raise ValueError("soft mask values must lie in [0, 1]")
        if any(not 0.0 <= wt <= 2.0 for wt in self.weights):
            raise ValueError("control weights must lie in [0, 2]")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    @property
    def width(self) -> int:
        return int(self.image.shape[1])

    @property
    def height(self) -> int:
        return int(self.image.shape[0])


@dataclass(frozen=True, eq=False)
class GenerationResponse:
    image: np.ndarray
    metadata: str = ""


class GenerationBackend:
    """Interface for generation services; stateless request/response."""

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# PNG codecs (the 8-bit boundary shared by disk and wire serialization)
# ---------------------------------------------------------------------------

def to_uint8(arr: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(np.asarray(arr) * 255.0), 0, 255).astype(np.uint8)


def from_uint8(arr: np.ndarray) -> np.ndarray:
    return np.asarray(arr, dtype=np.float64) / 255.0


def encode_png_b64(arr: np.ndarray) -> str:
    mode = "RGB" if arr.ndim == 3 else "L"
    buf = io.BytesIO()
    Image.fromarray(to_uint8(arr), mode=mode).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_png_b64(data: str) -> np.ndarray:
    img = Image.open(io.BytesIO(base64.b64decode(data)))
    return from_uint8(np.asarray(img))


def encode_request(request: GenerationRequest) -> dict:
    return {
        "protocol": PROTOCOL_VERSION,
        "width": request.width,
        "height": request.height,
        "images": {
            "init": encode_png_b64(request.image),
            "mask": encode_png_b64(request.mask),
            "soft_mask": encode_png_b64(request.soft_mask),
            "depth": encode_png_b64(request.control.depth),
            "normal": encode_png_b64(request.control.normal),
            "edge": encode_png_b64(request.control.edge),
        },
        "prompt": request.prompt.to_dict(),
        "weights": {
            "depth": request.weights[0],
            "normal": request.weights[1],
            "edge": request.weights[2],
        },
        "seed": int(request.seed),
        "steps": int(request.steps),
        "guidance": float(request.guidance),
    }


# ---------------------------------------------------------------------------
# Deterministic mock backend
# ---------------------------------------------------------------------------

def _region_seed(seed: int, text: str) -> int:
    digest = hashlib.blake2b(f"{seed}|{text}".encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


def _value_noise(height: int, width: int, seed: int, cell: int = 32) -> np.ndarray:
    """Bilinear value noise in [0, 1]; two octaves, fixed-seed deterministic."""
    rng = np.random.default_rng(seed)

    def octave(cell_size: int) -> np.ndarray:
        gh = height // cell_size + 2
        gw = width // cell_size + 2
        lattice = rng.random((gh, gw))
        y = np.arange(height)[:, None] / cell_size
        x = np.arange(width)[None, :] / cell_size
        y0 = y.astype(np.intp)
        x0 = x.astype(np.intp)
        ty = y - y0
        tx = x - x0
        top = lattice[y0, x0] * (1 - tx) + lattice[y0, x0 + 1] * tx
        bot = lattice[y0 + 1, x0] * (1 - tx) + lattice[y0 + 1, x0 + 1] * tx
        return top * (1 - ty) + bot * ty

    return 0.75 * octave(cell) + 0.25 * octave(max(cell // 2, 1))


def mock_generate(request: GenerationRequest, cell: int = 32) -> GenerationResponse:
    """Procedural stand-in for a diffusion service.

    Per pixel: output = input * (1 - m) + pattern * m, with m the soft
    mask.  The pattern is value noise evaluated in region-local
    coordinates, seeded from (seed, region text), so identical region
    texts produce identical patterns and distinct texts diverge.
    Bit-deterministic for a fixed request.
    """
    h, w = request.height, request.width
    pattern = np.zeros((h, w, 3))
    for region in request.prompt.regions:
        base = _region_seed(request.seed, region.text)
        channels = [
            _value_noise(region.h, region.w, base + k, cell=cell) for k in range(3)
        ]
        pattern[region.y:region.y + region.h, region.x:region.x + region.w] = np.stack(
            channels, axis=-1
        )
    m = request.soft_mask[..., None]
    out = request.image * (1.0 - m) + pattern * m
    return GenerationResponse(image=out, metadata="mock")


class MockBackend(GenerationBackend):
    def __init__(self, cell: int = 32):
        self.cell = cell

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        return mock_generate(request, cell=self.cell)


# ---------------------------------------------------------------------------
# HTTP backend
# ---------------------------------------------------------------------------

def http_generate(
    request: GenerationRequest,
    endpoint: str,
    timeout: float = 120.0,
    retries: int = 3,
    backoff_base: float = 1.0,
    backoff_factor: float = 2.0,
    sleep=time.sleep,
    session=None,
) -> GenerationResponse:
    """POST the request to a generation service, retrying transport failures.

    ``retries`` caps the total number of attempts.  Transport errors and
    5xx responses retry with exponential backoff (backoff_base, then
    doubled each time by backoff_factor); other non-2xx responses fail
    immediately with a body excerpt.  A response whose image resolution
    differs from the request raises ProtocolError.
    """
    if retries < 1:
        raise ValueError("retries must allow at least one attempt")
    post = (session or requests).post
    body = encode_request(request)
    delay = backoff_base
    last_failure = "no attempt made"

    for attempt in range(1, retries + 1):
        try:
            resp = post(endpoint, json=body, timeout=timeout)
        except requests.RequestException as exc:
            last_failure = f"transport failure: {exc}"
        else:
            if 200 <= resp.status_code < 300:
                try:
                    payload = resp.json()
                except ValueError as exc:
                    raise ProtocolError(f"response body is not JSON: {exc}") from exc
                if "image" not in payload:
                    raise ProtocolError("response is missing the 'image' field")
                try:
                    image = decode_png_b64(payload["image"])
                except Exception as exc:
                    raise ProtocolError(f"response image is not decodable PNG: {exc}") from exc
                if image.ndim != 3 or image.shape[:2] != (request.height, request.width):
                    raise ProtocolError(
                        f"backend returned resolution {image.shape[1]}x{image.shape[0]}, "
                        f"expected {request.width}x{request.height}"
                    )
                return GenerationResponse(
                    image=image, metadata=str(payload.get("metadata", ""))
                )
            excerpt = resp.text[:200]
            if resp.status_code >= 500:
                last_failure = f"HTTP {resp.status_code}: {excerpt}"
            else:
                raise BackendError(f"HTTP {resp.status_code}: {excerpt}")
        if attempt < retries:
            sleep(delay)
            delay *= backoff_factor
    raise TransportError(f"giving up after {retries} attempt(s); last: {last_failure}")


class HttpBackend(GenerationBackend):
    def __init__(
        self,
        endpoint: str,
        timeout: float = 120.0,
        retries: int = 3,
        backoff_base: float = 1.0,
        backoff_factor: float = 2.0,
    ):
        if not endpoint:
            raise ValueError("http backend needs an endpoint URL")
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        return http_generate(
            request,
            self.endpoint,
            timeout=self.timeout,
            retries=self.retries,
            backoff_base=self.backoff_base,
            backoff_factor=self.backoff_factor,
        )
