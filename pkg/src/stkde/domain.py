"""Core value types shared by every module.

Rasters are stored as numpy arrays indexed ``[i, j]`` (2-D) or ``[i, j, k]``
(3-D), where ``i`` is the column (easting) index, ``j`` the row (northing)
index counted from the south edge and ``k`` the time bin.  Cell membership
uses half-open intervals so that the cells partition the grid extent.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np


class StkdeError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(StkdeError, ValueError):
    """Invalid argument or inconsistent input data."""


class EmptyDataError(ValidationError):
    """An estimator was asked to work on zero incidents."""


OUT_OF_GRID = None


@dataclass(frozen=True)
class Incident:
    id: str
    x: float
    y: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.t)):
            raise ValidationError(f"incident {self.id!r} has non-finite coordinates")


@dataclass(frozen=True)
class TimeWindow:
    """Half-open interval ``[start, end)`` on the day axis."""

    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValidationError(f"time window start {self.start} must precede end {self.end}")

    @property
    def length(self) -> float:
        return self.end - self.start

    def contains(self, t):
        t = np.asarray(t)
        return (t >= self.start) & (t < self.end)


@dataclass(frozen=True)
class Bandwidths:
    h_x: float
    h_y: float
    h_t: float

    def __post_init__(self):
        for name in ("h_x", "h_y", "h_t"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"bandwidth {name} must be positive and finite, got {v}")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.h_x, self.h_y, self.h_t)

    @property
    def spatial_max(self) -> float:
        """Single spatial bandwidth used by the planar baseline."""
        return max(self.h_x, self.h_y)


@dataclass(frozen=True)
class GridSpec2D:
    x_origin: float
    y_origin: float
    cell_size: float
    n_cols: int
    n_rows: int

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValidationError("cell_size must be positive")
        if self.n_cols < 1 or self.n_rows < 1:
            raise ValidationError("grid must have at least one column and one row")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_cols, self.n_rows)

    @property
    def n_cells(self) -> int:
        return self.n_cols * self.n_rows

    @property
    def x_centers(self) -> np.ndarray:
        return self.x_origin + (np.arange(self.n_cols) + 0.5) * self.cell_size

    @property
    def y_centers(self) -> np.ndarray:
        return self.y_origin + (np.arange(self.n_rows) + 0.5) * self.cell_size

    def cell_of(self, x, y):
        """Vectorised (i, j, inside) lookup for planar points."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        i = np.floor((x - self.x_origin) / self.cell_size).astype(np.int64)
        j = np.floor((y - self.y_origin) / self.cell_size).astype(np.int64)
        inside = (i >= 0) & (i < self.n_cols) & (j >= 0) & (j < self.n_rows)
        return i, j, inside

    def row_major_index(self, i, j):
        """Flat cell index counting along rows from the south-west corner."""
        return np.asarray(j) * self.n_cols + np.asarray(i)

    def aligned_with(self, other: "GridSpec2D") -> bool:
        return self == other


@dataclass(frozen=True)
class GridSpec3D:
    x_origin: float
    y_origin: float
    cell_size: float
    n_cols: int
    n_rows: int
    t_start: float
    t_bin: float
    n_bins: int

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValidationError("cell_size must be positive")
        if not self.t_bin > 0:
            raise ValidationError("t_bin must be positive")
        if self.n_cols < 1 or self.n_rows < 1 or self.n_bins < 1:
            raise ValidationError("grid dimensions must be positive")

    @classmethod
    def from_spatial(cls, spatial: GridSpec2D, t_start: float, t_bin: float, n_bins: int) -> "GridSpec3D":
        return cls(spatial.x_origin, spatial.y_origin, spatial.cell_size,
                   spatial.n_cols, spatial.n_rows, t_start, t_bin, n_bins)

    @property
    def spatial(self) -> GridSpec2D:
        return GridSpec2D(self.x_origin, self.y_origin, self.cell_size, self.n_cols, self.n_rows)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.n_cols, self.n_rows, self.n_bins)

    @property
    def t_centers(self) -> np.ndarray:
        return self.t_start + (np.arange(self.n_bins) + 0.5) * self.t_bin

    @property
    def voxel_volume(self) -> float:
        return self.cell_size * self.cell_size * self.t_bin

    @property
    def t_end(self) -> float:
        return self.t_start + self.n_bins * self.t_bin


def world_to_voxel(p: Sequence[float], spec: GridSpec3D) -> Optional[Tuple[int, int, int]]:
    """Voxel containing ``p = (x, y, t)``, or ``OUT_OF_GRID`` (None)."""
    x, y, t = p
    i = math.floor((x - spec.x_origin) / spec.cell_size)
    j = math.floor((y - spec.y_origin) / spec.cell_size)
    k = math.floor((t - spec.t_start) / spec.t_bin)
    if 0 <= i < spec.n_cols and 0 <= j < spec.n_rows and 0 <= k < spec.n_bins:
        return (i, j, k)
    return OUT_OF_GRID


def voxel_centroid(i: int, j: int, k: int, spec: GridSpec3D) -> Tuple[float, float, float]:
    if not (0 <= i < spec.n_cols and 0 <= j < spec.n_rows and 0 <= k < spec.n_bins):
        raise IndexError(f"voxel ({i}, {j}, {k}) outside grid of shape {spec.shape}")
    return (spec.x_origin + (i + 0.5) * spec.cell_size,
            spec.y_origin + (j + 0.5) * spec.cell_size,
            spec.t_start + (k + 0.5) * spec.t_bin)


def _check_raster(values: np.ndarray, shape) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != tuple(shape):
        raise ValidationError(f"raster shape {values.shape} does not match grid {tuple(shape)}")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValidationError("density values must be finite and non-negative")
    return values


@dataclass(frozen=True, eq=False)
class DensityVolume:
    spec: GridSpec3D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_raster(self.values, self.spec.shape))

    def total_mass(self) -> float:
        return float(self.values.sum() * self.spec.voxel_volume)


@dataclass(frozen=True, eq=False)
class DensitySurface:
    spec: GridSpec2D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_raster(self.values, self.spec.shape))


class LandUse(enum.IntEnum):
    OUTSIDE = -1
    IN_STUDY_NON_ELIGIBLE = 0
    ELIGIBLE = 1


@dataclass(frozen=True, eq=False)
class LandUseGrid:
    spec: GridSpec2D
    classes: np.ndarray = field(repr=False)

    def __post_init__(self):
        classes = np.asarray(self.classes, dtype=np.int8)
        if classes.shape != self.spec.shape:
            raise ValidationError(f"land-use raster shape {classes.shape} does not match grid {self.spec.shape}")
        if not np.isin(classes, [c.value for c in LandUse]).all():
            raise ValidationError("land-use raster contains unknown class codes")
        if not (classes == LandUse.ELIGIBLE).any():
            raise ValidationError("land-use raster has no ELIGIBLE cell")
        object.__setattr__(self, "classes", classes)

    @property
    def eligible(self) -> np.ndarray:
        return self.classes == LandUse.ELIGIBLE

    @property
    def in_study(self) -> np.ndarray:
        return self.classes != LandUse.OUTSIDE

    @property
    def study_cell_count(self) -> int:
        return int(self.in_study.sum())

    @property
    def study_area(self) -> float:
        return self.study_cell_count * self.spec.cell_size ** 2


IncidentsLike = Union[Sequence[Incident], np.ndarray]


def incidents_to_array(incidents: Iterable[Incident]) -> np.ndarray:
    return np.array([(inc.x, inc.y, inc.t) for inc in incidents], dtype=float).reshape(-1, 3)


def as_points(incidents: IncidentsLike) -> np.ndarray:
    """``(n, 3)`` float array of (x, y, t) in canonical order.

    Canonical order sorts by t, then x, then y.  Incidents that tie on all
    three coordinates contribute identical terms, so the id component of the
    ordering never changes a floating-point result.
    """
    if isinstance(incidents, np.ndarray):
        pts = np.asarray(incidents, dtype=float).reshape(-1, 3)
    else:
        pts = incidents_to_array(incidents)
    if len(pts) == 0:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0], pts[:, 2]))
    return np.ascontiguousarray(pts[order])


def select_window(incidents: Sequence[Incident], window: TimeWindow) -> list:
    return [inc for inc in incidents if window.start <= inc.t < window.end]
