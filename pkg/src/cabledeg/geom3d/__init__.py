from .mesh import MeshReport, TriangleMesh, load_mesh, save_off, validate_mesh
from .primitives import flip, icosphere, merge, nested_icospheres, overlapping_icospheres
from .crossings import (
    Cable,
    CrossingEvent,
    cable_crossings,
    cable_index,
    load_cable,
    round_winding,
    solid_angle_winding,
    solid_angle_winding_many,
    straight_cable,
)
from .regions import RegionMap, TotalDegree, build_cable_word, total_degree, voxel_regions

__all__ = [
    "Cable",
    "CrossingEvent",
    "MeshReport",
    "RegionMap",
    "TotalDegree",
    "TriangleMesh",
    "build_cable_word",
    "cable_crossings",
    "cable_index",
    "flip",
    "icosphere",
    "load_cable",
    "load_mesh",
    "merge",
    "nested_icospheres",
    "overlapping_icospheres",
    "round_winding",
    "save_off",
    "solid_angle_winding",
    "solid_angle_winding_many",
    "straight_cable",
    "total_degree",
    "validate_mesh",
    "voxel_regions",
]
