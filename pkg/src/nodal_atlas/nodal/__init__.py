"""Grid sampling, nodal domain counting, nodal-set components and singular points."""

from .grid import GridField, default_resolution, grid_coordinates, resolution_floor, sample_grid
from .singular import SingularPoint, find_singular_points, nodal_directions, vanishing_order
from .topology import (
    NodalCensus,
    NodalStructure,
    analyze,
    count_nodal_domains,
    extract_nodal_components,
)

__all__ = [
    "GridField",
    "NodalCensus",
    "NodalStructure",
    "SingularPoint",
    "analyze",
    "count_nodal_domains",
    "default_resolution",
    "extract_nodal_components",
    "find_singular_points",
    "grid_coordinates",
    "nodal_directions",
    "resolution_floor",
    "sample_grid",
    "vanishing_order",
]
