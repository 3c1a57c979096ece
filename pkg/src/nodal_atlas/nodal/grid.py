"""Sampling eigenfunctions on regular grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NodalAtlasError, ResolutionTooCoarse
from ..spectra import SQUARE, TORUS, evaluate_grid

NODES = "nodes"
OFFSET = "offset"

# Irrational sub-cell offsets for the fallback layout.  They keep samples off
# rational nodal lines and off the diagonals x = y and x + y = 1.
OFFSETS = (
    (0.5 + (math.sqrt(2.0) - 1.0) / 10.0, 0.5 - (math.sqrt(5.0) - 2.0) / 10.0),
    (0.5 - (math.sqrt(3.0) - 1.5) / 7.0, 0.5 + (math.sqrt(7.0) - 2.5) / 3.0),
    (0.5 + (math.sqrt(11.0) - 3.0) / 9.0, 0.5 - (math.sqrt(13.0) - 3.5) / 5.0),
)

ZERO_TOL = 1e-12


def default_resolution(f) -> int:
    """Sixteen samples per unit of ``sqrt(lambda)/pi`` (at least 32)."""
    k = max(1, math.ceil(f.wavenumber - 1e-9))
    if f.domain == SQUARE:
        return max(33, 16 * k + 1)
    return max(32, 16 * k)


def resolution_floor(f) -> int:
    return 8 * max(1, math.ceil(f.wavenumber - 1e-9))


@dataclass
class GridField:
    """Sampled values of an eigenfunction.

    ``values[i, j]`` is the sample at ``(xs[i], ys[j])``.  With the default
    ``nodes`` layout the square grid includes the boundary ring (exactly
    zero) at spacing ``1/(resolution-1)`` and the torus grid has spacing
    ``1/resolution``.  The ``offset`` layout samples interior points shifted
    by an irrational fraction of a cell.
    """

    domain: str
    resolution: int
    values: np.ndarray
    func: object = None
    layout: str = NODES
    offset: tuple = (0.0, 0.0)
    overridden: bool = False
    refined_cells: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def spacing(self) -> float:
        return 1.0 / (self.resolution - 1) if self.domain == SQUARE else 1.0 / self.resolution

    @property
    def periodic(self) -> bool:
        return self.domain == TORUS

    def coordinates(self):
        return grid_coordinates(self.domain, self.resolution, self.layout, self.offset)

    @property
    def amplitude(self) -> float:
        if self.func is not None:
            return self.func.amplitude
        return float(np.abs(self.values).max())


def grid_coordinates(domain, resolution, layout=NODES, offset=(0.0, 0.0)):
    if domain == SQUARE:
        h = 1.0 / (resolution - 1)
        if layout == NODES:
            xs = np.arange(resolution) * h
            xs[-1] = 1.0
            return xs, xs.copy()
        idx = np.arange(resolution - 1)
    elif domain == TORUS:
        h = 1.0 / resolution
        idx = np.arange(resolution)
        if layout == NODES:
            xs = idx * h
            return xs, xs.copy()
    else:
        raise NodalAtlasError(f"unknown domain {domain!r}")
    return (idx + offset[0]) * h, (idx + offset[1]) * h


def sample_grid(f, resolution: int | None = None, *, override: bool = False,
                layout: str = NODES, offset_index: int = 0) -> GridField:
    """Sample ``f`` on a regular grid.

    Raises :class:`ResolutionTooCoarse` below eight samples per unit of
    ``sqrt(lambda)/pi`` unless ``override`` is set; 16 is a hard minimum.
    """
    res = default_resolution(f) if resolution is None else int(resolution)
    if res < 16:
        raise NodalAtlasError(f"resolution must be at least 16, got {res}")
    floor = resolution_floor(f)
    if res < floor and not override:
        raise ResolutionTooCoarse(f"resolution {res} is below the floor {floor} for lambda={f.lam:.6g}")
    offset = OFFSETS[offset_index] if layout == OFFSET else (0.0, 0.0)
    xs, ys = grid_coordinates(f.domain, res, layout, offset)
    values = evaluate_grid(f, xs, ys)
    if f.domain == SQUARE and layout == NODES:
        values[0, :] = values[-1, :] = 0.0
        values[:, 0] = values[:, -1] = 0.0
    return GridField(f.domain, res, values, f, layout, offset, override or res < floor)
