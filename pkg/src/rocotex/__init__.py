"""rocotex: iterative text-to-texture generation for UV-unwrapped meshes.

Renders symmetric view pairs of an untextured mesh, asks a pluggable
image-generation backend to inpaint the untextured regions under regional
prompts, and blends the results back into a global UV texture weighted by
per-texel confidence.
"""

from rocotex.generator import (
    GenerationBackend,
    GenerationRequest,
    GenerationResponse,
    HttpBackend,
    MockBackend,
)
from rocotex.geometry import (
    CameraView,
    TriangleMesh,
    ViewPair,
    load_mesh,
    normalize_mesh,
    view_schedule,
)
from rocotex.pipeline import PipelineConfig, RunReport, export_mesh, run
from rocotex.prompting import PromptSpec, RegionalPrompt, compose_regional
from rocotex.texture import TextureAtlas, bake_view, blend, extrapolate, seam_energy

__version__ = "0.1.0"

__all__ = [
    "CameraView",
    "GenerationBackend",
    "GenerationRequest",
    "GenerationResponse",
    "HttpBackend",
    "MockBackend",
    "PipelineConfig",
    "PromptSpec",
    "RegionalPrompt",
    "RunReport",
    "TextureAtlas",
    "TriangleMesh",
    "ViewPair",
    "bake_view",
    "blend",
    "compose_regional",
    "export_mesh",
    "extrapolate",
    "load_mesh",
    "normalize_mesh",
    "run",
    "seam_energy",
    "view_schedule",
    "__version__",
]
