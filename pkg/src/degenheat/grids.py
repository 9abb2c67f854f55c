"""Spatial grids, nodal fields, and initial-data profiles.

The solver works on a uniform 1-D grid: either a truncated line [-L, L] with a
node exactly at the degeneracy point x = 0, or a radial interval [0, R] that
represents a radially symmetric function in N dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError
from .weight import _sphere_area


class Geometry(Enum):
    LINE = "line"
    RADIAL = "radial"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-extent, extent] (line) or [0, extent] (radial)."""

    geometry: Geometry
    extent: float
    nodes: int
    dim: int = 1

    def __post_init__(self):
        if self.extent <= 0.0:
            raise ConfigError(f"extent must be positive, got {self.extent}")
        if self.nodes < 3:
            raise ConfigError(f"need at least 3 nodes, got {self.nodes}")
        if self.geometry is Geometry.LINE:
            if self.dim != 1:
                raise ConfigError("line geometry is one-dimensional")
            if self.nodes % 2 == 0:
                raise ConfigError("line geometry needs an odd node count so x=0 is a node")
        elif self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")

    @property
    def spacing(self) -> float:
        if self.geometry is Geometry.LINE:
            return 2.0 * self.extent / (self.nodes - 1)
        return self.extent / (self.nodes - 1)

    def positions(self) -> np.ndarray:
        if self.geometry is Geometry.LINE:
            return np.linspace(-self.extent, self.extent, self.nodes)
        return np.linspace(0.0, self.extent, self.nodes)

    def radii(self) -> np.ndarray:
        """Distance of each node from the degeneracy center."""
        return np.abs(self.positions())

    def node_volumes(self) -> np.ndarray:
        """Quadrature weights turning nodal values into integrals over R^N."""
        dx = self.spacing
        if self.geometry is Geometry.LINE:
            vol = np.full(self.nodes, dx)
            vol[0] = vol[-1] = dx / 2.0
            return vol
        n = self.dim
        r = self.positions()
        faces_out = np.minimum(r + dx / 2.0, self.extent)
        faces_in = np.maximum(r - dx / 2.0, 0.0)
        return _sphere_area(n) / n * (faces_out ** n - faces_in ** n)

    def refined(self) -> "GridSpec":
        """One refinement notch: halve the spacing, keep the extent."""
        return GridSpec(self.geometry, self.extent, 2 * self.nodes - 1, self.dim)


@dataclass
class Field:
    """A nodal function on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nodes,):
            raise ConfigError(
                f"field has {self.values.shape} values for a {self.grid.nodes}-node grid"
            )
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("field values must be finite")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mass(self) -> float:
        return float(self.values @ self.grid.node_volumes())

    def window_mass(self, radius: float) -> float:
        """Mass restricted to nodes within ``radius`` of the degeneracy center."""
        inside = self.grid.radii() <= radius
        return float(self.values[inside] @ self.grid.node_volumes()[inside])

    def lq_norm(self, q: float) -> float:
        if q == math.inf:
            return self.sup()
        if q < 1:
            raise ConfigError(f"Lq norm needs q >= 1, got {q}")
        w = self.grid.node_volumes()
        return float((np.abs(self.values) ** q @ w) ** (1.0 / q))


@dataclass(frozen=True)
class InitialProfile:
    """Recipe for initial data, realizable on any grid.

    Kinds: ``gaussian`` (amplitude, sigma), ``constant`` (amplitude),
    ``power_tail`` amplitude*(1+|x|)^(-rho).
    """

    kind: str
    amplitude: float = 1.0
    sigma: float = 1.0
    rho: float = 0.5
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("gaussian", "constant", "power_tail"):
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.amplitude < 0:
            raise ConfigError("amplitude must be nonnegative")

    def scaled(self, factor: float) -> "InitialProfile":
        return InitialProfile(self.kind, self.amplitude * factor, self.sigma,
                              self.rho, dict(self.params))

    def realize(self, grid: GridSpec) -> Field:
        r = grid.radii()
        if self.kind == "gaussian":
            vals = self.amplitude * np.exp(-(r ** 2) / (2.0 * self.sigma ** 2))
        elif self.kind == "constant":
            vals = np.full(grid.nodes, self.amplitude)
        else:
            vals = self.amplitude * (1.0 + r) ** (-self.rho)
        return Field(grid, vals)


def gaussian_field(grid: GridSpec, amplitude=1.0, sigma=1.0) -> Field:
    return InitialProfile("gaussian", amplitude, sigma).realize(grid)


def constant_field(grid: GridSpec, value: float) -> Field:
    return InitialProfile("constant", value).realize(grid)


def power_tail_field(grid: GridSpec, rho: float, amplitude=1.0) -> Field:
    return InitialProfile("power_tail", amplitude, rho=rho).realize(grid)
