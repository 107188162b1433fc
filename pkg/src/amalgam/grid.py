"""Uniform grids, gridded functions, and axis-aligned regions.

The computational domain is the box [-L, L]^dim sampled at N nodes per
axis, x_i = -L + i*h with h = 2L/N.  All functions live on the flat node
array; 2d arrays are flattened in C order with the second coordinate
varying fastest.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .errors import ConfigurationError, EmptyRegionWarning

__all__ = [
    "Grid",
    "make_grid",
    "DiscreteFunction",
    "Region",
    "RegionFamily",
    "region_family",
    "covering_region",
    "sample",
    "integrate",
    "write_function_csv",
    "read_function_csv",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform node grid on [-L, L]^dim.

    points_per_axis must be a power of two so that refinement and
    coarsening stay exact and dyadic radii land on node boundaries.
    """

    dim: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2, got {self.dim}")
        if not (self.half_width > 0):
            raise ConfigurationError("half_width must be positive")
        if not _is_power_of_two(self.points_per_axis) or self.points_per_axis < 8:
            raise ConfigurationError(
                "points_per_axis must be a power of two >= 8, "
                f"got {self.points_per_axis}"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def n_nodes(self) -> int:
        return self.points_per_axis**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        # exact dyadic nodes when half_width is a power of two
        ax = -self.half_width + np.arange(self.points_per_axis) * self.spacing
        ax.flags.writeable = False
        return ax

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape (n_nodes, dim)."""
        if self.dim == 1:
            out = self.axis[:, None].copy()
        else:
            X, Y = np.meshgrid(self.axis, self.axis, indexing="ij")
            out = np.column_stack([X.ravel(), Y.ravel()])
        out.flags.writeable = False
        return out

    def refined(self) -> "Grid":
        return Grid(self.dim, self.half_width, 2 * self.points_per_axis)

    def coarsened(self) -> "Grid":
        return Grid(self.dim, self.half_width, self.points_per_axis // 2)

    def node_index(self, point: Sequence[float]) -> int:
        """Flat index of the node nearest to a point."""
        h = self.spacing
        idx = 0
        for k in range(self.dim):
            i = int(round((point[k] + self.half_width) / h))
            i = min(max(i, 0), self.points_per_axis - 1)
            idx = idx * self.points_per_axis + i
        return idx


def make_grid(dim: int = 1, half_width: float = 4.0, points_per_axis: int = 4096) -> Grid:
    return Grid(dim, half_width, points_per_axis)


@dataclass(frozen=True)
class DiscreteFunction:
    """A real-valued function sampled on the nodes of a grid.

    Values are stored as a read-only float64 array of length n_nodes and
    must be finite.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True).ravel()
        if vals.shape != (self.grid.n_nodes,):
            raise ConfigurationError(
                f"expected {self.grid.n_nodes} values, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("function values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, fn(self.values))

    def abs(self) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, np.abs(self.values))

    __abs__ = abs

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, DiscreteFunction):
            if other.grid != self.grid:
                raise ConfigurationError("grids do not match")
            return other.values
        return np.asarray(other, dtype=np.float64)

    def __add__(self, other) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, self.values + self._coerce(other))

    def __sub__(self, other) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, self.values - self._coerce(other))

    def __mul__(self, other) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> "DiscreteFunction":
        return DiscreteFunction(self.grid, -self.values)


@functools.lru_cache(maxsize=16384)
def _region_indices(shape: str, center: tuple, size: float, grid: Grid) -> np.ndarray:
    ax = grid.axis
    n = grid.points_per_axis
    if grid.dim == 1:
        c = center[0]
        lo = np.searchsorted(ax, c - size, side="right")
        hi = np.searchsorted(ax, c + size, side="left")
        out = np.arange(lo, hi, dtype=np.intp)
    elif shape == "cube":
        ranges = []
        for c in center:
            lo = np.searchsorted(ax, c - size, side="right")
            hi = np.searchsorted(ax, c + size, side="left")
            ranges.append(np.arange(lo, hi, dtype=np.intp))
        out = (ranges[0][:, None] * n + ranges[1][None, :]).ravel()
    else:
        dx = ax - center[0]
        dy = ax - center[1]
        mask = (dx[:, None] ** 2 + dy[None, :] ** 2) < size**2
        out = np.flatnonzero(mask.ravel()).astype(np.intp)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Region:
    """A ball or cube, membership by strict inequality.

    size is the radius of a ball or the half side of a cube.  In one
    dimension the two shapes coincide.
    """

    shape: str
    center: tuple
    size: float

    def __post_init__(self):
        if self.shape not in ("ball", "cube"):
            raise ConfigurationError(f"shape must be 'ball' or 'cube', got {self.shape!r}")
        if not (self.size > 0):
            raise ConfigurationError("region size must be positive")
        if len(self.center) not in (1, 2):
            raise ConfigurationError("center must have 1 or 2 coordinates")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def dilate(self, factor: float) -> "Region":
        return Region(self.shape, self.center, self.size * factor)

    def node_indices(self, grid: Grid) -> np.ndarray:
        if len(self.center) != grid.dim:
            raise ConfigurationError("region and grid dimensions do not match")
        return _region_indices(self.shape, self.center, self.size, grid)

    def node_count(self, grid: Grid) -> int:
        return int(self.node_indices(grid).size)

    def fits_box(self, grid: Grid) -> bool:
        """True when the region does not spill past the box (touching is fine)."""
        L = grid.half_width
        tol = 1e-12 * max(L, 1.0)
        return all(abs(c) + self.size <= L + tol for c in self.center)


@dataclass(frozen=True)
class RegionFamily:
    """A centers-by-sizes family of congruent regions."""

    shape: str
    centers: tuple
    sizes: tuple

    def __post_init__(self):
        if not self.centers or not self.sizes:
            raise ConfigurationError("family needs at least one center and one size")
        object.__setattr__(
            self, "centers", tuple(tuple(float(x) for x in c) for c in self.centers)
        )
        object.__setattr__(self, "sizes", tuple(float(s) for s in self.sizes))

    def __len__(self) -> int:
        return len(self.centers) * len(self.sizes)

    def __iter__(self) -> Iterator[Region]:
        for s in self.sizes:
            for c in self.centers:
                yield Region(self.shape, c, s)

    def at_size(self, size: float) -> Iterator[Region]:
        for c in self.centers:
            yield Region(self.shape, c, size)

    def with_extra(self, regions: Sequence[Region]) -> list:
        """Flat region list with extras appended (used by maximal operators)."""
        return list(self) + list(regions)


def region_family(
    grid: Grid,
    sizes: Sequence[float],
    shape: str = "ball",
    center_stride: int = 1,
    centers: Optional[Sequence] = None,
) -> RegionFamily:
    """Family with centers on the node lattice and the given sizes.

    center_stride thins the centers to every stride-th node per axis.
    """
    if centers is None:
        if center_stride < 1:
            raise ConfigurationError("center_stride must be >= 1")
        ax = grid.axis[::center_stride]
        if grid.dim == 1:
            centers = [(float(c),) for c in ax]
        else:
            centers = [(float(cx), float(cy)) for cx in ax for cy in ax]
    else:
        centers = [tuple(float(x) for x in np.atleast_1d(c)) for c in centers]
    return RegionFamily(shape, tuple(centers), tuple(float(s) for s in sizes))


def covering_region(grid: Grid) -> Region:
    """A cube that strictly contains every node of the box."""
    return Region("cube", (0.0,) * grid.dim, grid.half_width + grid.spacing)


def sample(expression: str, grid: Grid) -> DiscreteFunction:
    """Evaluate an expression string on the grid nodes."""
    from .expressions import evaluate

    return DiscreteFunction(grid, evaluate(expression, grid))


def _weight_values(weight, grid: Grid) -> Optional[np.ndarray]:
    if weight is None:
        return None
    vals = getattr(weight, "values", weight)
    arr = np.asarray(vals, dtype=np.float64)
    if arr.shape != (grid.n_nodes,):
        raise ConfigurationError("weight does not match the grid")
    return arr


def integrate(
    f: DiscreteFunction,
    region: Optional[Region] = None,
    weight=None,
) -> float:
    """Midpoint quadrature of f (times an optional weight) over a region.

    With no region the integral runs over the whole box.  An empty region
    warns and contributes zero.
    """
    grid = f.grid
    w = _weight_values(weight, grid)
    if region is None:
        vals = f.values if w is None else f.values * w
        return float(grid.cell_volume * np.sum(vals))
    idx = region.node_indices(grid)
    if idx.size == 0:
        warnings.warn("region contains no grid nodes", EmptyRegionWarning, stacklevel=2)
        return 0.0
    vals = f.values[idx]
    if w is not None:
        vals = vals * w[idx]
    return float(grid.cell_volume * np.sum(vals))


def write_function_csv(f: DiscreteFunction, path: str) -> None:
    """Write nodes and values with a header that pins the grid parameters."""
    g = f.grid
    with open(path, "w", newline="") as fh:
        fh.write(f"# dim={g.dim} half_width={g.half_width!r} points_per_axis={g.points_per_axis}\n")
        if g.dim == 1:
            fh.write("x,value\n")
            for x, v in zip(g.axis, f.values):
                fh.write(f"{float(x)!r},{float(v)!r}\n")
        else:
            fh.write("x,y,value\n")
            for (x, y), v in zip(g.coords, f.values):
                fh.write(f"{float(x)!r},{float(y)!r},{float(v)!r}\n")


def read_function_csv(path: str) -> DiscreteFunction:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise ConfigurationError("missing grid header line")
        fields = dict(tok.split("=") for tok in header[1:].split())
        grid = Grid(int(fields["dim"]), float(fields["half_width"]), int(fields["points_per_axis"]))
        fh.readline()  # column names
        vals = [float(line.rsplit(",", 1)[1]) for line in fh if line.strip()]
    return DiscreteFunction(grid, np.asarray(vals))
