"""Regional prompt composition for concatenated symmetric views.

The canonical payload is structured (rectangles plus texts); backend
adapters may flatten it to whatever syntax their composition tool expects.
Serialized form: {"base": str, "negative": str,
"regions": [{"x", "y", "w", "h", "text"}]}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from rocotex.geometry import CameraView, ViewPair

_PHRASES = {
    "front": "front view, (from front, front view focus)",
    "back": "back view, (from back, back view focus)",
    "right": "right side view, (from right side, right side view focus)",
    "left": "left side view, (from left side, left side view focus)",
    "top": "top view, (from top, top view focus)",
}

_AZIMUTH_BUCKETS = ((0.0, "front"), (90.0, "right"), (180.0, "back"), (270.0, "left"))


@dataclass(frozen=True)
class PromptSpec:
    """Base text prompt plus optional per-direction phrase overrides."""

    base: str
    negative: str = ""
    overrides: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.base.strip():
            raise ValueError("base prompt must be non-empty")


@dataclass(frozen=True)
class Region:
    x: int
    y: int
    w: int
    h: int
    text: str


@dataclass(frozen=True)
class RegionalPrompt:
    """Per-rectangle prompts over one generated image; regions tile it exactly."""

    base: str
    negative: str
    regions: tuple[Region, ...]
    width: int
    height: int

    def __post_init__(self):
        area = sum(r.w * r.h for r in self.regions)
        if area != self.width * self.height:
            raise ValueError("regions must tile the image exactly")
        for a in self.regions:
            for b in self.regions:
                if a is b:
                    continue
                if (
                    a.x < b.x + b.w
                    and b.x < a.x + a.w
                    and a.y < b.y + b.h
                    and b.y < a.y + a.h
                ):
                    raise ValueError("regions must not overlap")

    def region_at(self, x: int, y: int) -> Region:
        for r in self.regions:
            if r.x <= x < r.x + r.w and r.y <= y < r.y + r.h:
                return r
        raise ValueError(f"no region contains ({x}, {y})")

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "negative": self.negative,
            "regions": [
                {"x": r.x, "y": r.y, "w": r.w, "h": r.h, "text": r.text}
                for r in self.regions
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict, width: int, height: int) -> "RegionalPrompt":
        return cls(
            base=data["base"],
            negative=data.get("negative", ""),
            regions=tuple(
                Region(r["x"], r["y"], r["w"], r["h"], r["text"])
                for r in data["regions"]
            ),
            width=width,
            height=height,
        )


def direction_label(view: CameraView) -> str:
    """Bucket a camera to front/back/right/left, or top above 60deg elevation."""
    if view.elevation > 60.0:
        return "top"
    azimuth = view.azimuth % 360.0
    best = min(
        _AZIMUTH_BUCKETS,
        key=lambda item: min(abs(azimuth - item[0]), 360.0 - abs(azimuth - item[0])),
    )
    return best[1]


def direction_phrase(view: CameraView) -> str:
    """Directional region phrase for a camera, e.g. the front-view phrase."""
    return _PHRASES[direction_label(view)]


def compose_regional(
    spec: PromptSpec, pair: ViewPair, image_width: int, image_height: int
) -> RegionalPrompt:
    """Left/right half regions for a symmetric pair.

    Each region's effective prompt prefixes the base prompt so direction
    text augments rather than replaces the subject description.
    """
    if image_width % 2 != 0:
        raise ValueError("concatenated image width must be even")
    half = image_width // 2

    def text_for(view: CameraView) -> str:
        label = direction_label(view)
        phrase = spec.overrides.get(label, _PHRASES[label])
        return f"{spec.base}, {phrase}"

    regions = (
        Region(0, 0, half, image_height, text_for(pair.view_i)),
        Region(half, 0, half, image_height, text_for(pair.view_j)),
    )
    return RegionalPrompt(
        base=spec.base,
        negative=spec.negative,
        regions=regions,
        width=image_width,
        height=image_height,
    )
