"""Request and response schemas for the HTTP service.

Inputs carry file contents inline (OFF/OBJ text, word files, curve
files) so the service needs no shared filesystem with its clients.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

MeshFormat = Literal["off", "obj"]


# --------------------------------------------------------------------------
# reduce


class ReduceRequest(BaseModel):
    words: str = Field(description="word-file text, one cable word per line")


class CableResult(BaseModel):
    cable_id: str
    coefficient: int
    source: str
    target: str
    n_symbols: int
    simple: bool
    violations: list[str] = []


class ReduceResponse(BaseModel):
    cables: list[CableResult]
    all_simple: bool
    missing_words: list[str] = []
    notes: list[str] = []


# --------------------------------------------------------------------------
# geometry commons


class MeshReportModel(BaseModel):
    closed: bool
    oriented: bool
    ok: bool
    n_vertices: int
    n_triangles: int
    n_components: int
    open_edges: list[list[int]] = []
    nonmanifold_edges: list[list[int]] = []
    misoriented_edges: list[list[int]] = []
    degenerate_triangles: list[int] = []
    bbox_min: list[float]
    bbox_max: list[float]
    notes: list[str] = []


class RegionModel(BaseModel):
    label: str
    index: int
    volume: float
    voxel_count: int
    interior_count: int
    representative: list[float]


class RegionsRequest(BaseModel):
    mesh: str = Field(description="mesh file text")
    mesh_format: MeshFormat = "off"
    resolution: int = Field(default=64, ge=8)
    include_labels: bool = Field(
        default=False, description="attach the raw voxel-label dump, base64"
    )


class RegionsResponse(BaseModel):
    origin: list[float]
    voxel_size: float
    shape: list[int]
    regions: list[RegionModel]
    unassigned_count: int
    notes: list[str] = []
    mesh_report: MeshReportModel
    labels_base64: Optional[str] = None


# --------------------------------------------------------------------------
# vdeg


class VdegRequest(BaseModel):
    mesh: str
    mesh_format: MeshFormat = "off"
    resolution: int = Field(default=64, ge=8)


class VdegResponse(BaseModel):
    degree: float
    vdeg: float
    regions: list[RegionModel]


# --------------------------------------------------------------------------
# index


class IndexRequest(BaseModel):
    mesh: str
    mesh_format: MeshFormat = "off"
    point: list[float] = Field(min_length=3, max_length=3)
    seed: int = 0
    retries: int = Field(default=12, ge=1)


class IndexResponse(BaseModel):
    index: int
    winding: float
    oracle_index: int
    oracle_agrees: bool


# --------------------------------------------------------------------------
# sweep


class SweepRequest(BaseModel):
    mesh: Optional[str] = Field(
        default=None, description="initial mesh for a built-in homotopy"
    )
    mesh_format: MeshFormat = "off"
    homotopy: Literal["radial", "translate-return", "wobble"] = "radial"
    n_frames: int = Field(default=64, ge=2)
    seed: int = 0
    amplitude: float = 0.3
    frames: Optional[list[str]] = Field(
        default=None, description="explicit frame meshes (same format), overrides built-ins"
    )
    resolution: int = Field(default=64, ge=8)


class SenseModel(BaseModel):
    sense_preserving: bool
    degenerate: bool
    dominant_sign: int
    n_positive: int
    n_negative: int
    n_zero: int
    min_cosine: float
    max_cosine: float


class SweepResponse(BaseModel):
    swept_volume: float
    degree: float
    vdeg: float
    margin_degree: float
    margin_vdeg: float
    tolerance: float
    violation: bool
    sense: SenseModel
    stationary_prisms: int
    mixed_sign_prisms: int
    n_frames: int


# --------------------------------------------------------------------------
# planar


class PlanarRequest(BaseModel):
    curve: str = Field(description="curve file text, one 'x y' vertex per line")
    resolution: int = Field(default=128, ge=8)
    include_labels: bool = False


class PlanarRegionModel(BaseModel):
    label: str
    winding: int
    area: float
    pixel_count: int
    representative: list[float]


class PlanarResponse(BaseModel):
    weighted_area: float
    signed_area: float
    origin: list[float]
    pixel_size: float
    shape: list[int]
    regions: list[PlanarRegionModel]
    notes: list[str] = []
    labels_base64: Optional[str] = None


# --------------------------------------------------------------------------
# misc


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    error: str
    message: str
