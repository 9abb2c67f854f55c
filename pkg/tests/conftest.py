"""Shared builders for the test suite."""

import math

import pytest

from degenheat.grids import Geometry, GridSpec
from degenheat.weight import WeightCase, WeightSpec


def line_grid(extent: float, nodes: int) -> GridSpec:
    return GridSpec(Geometry.LINE, extent, nodes)


def radial_grid(extent: float, nodes: int, dim: int) -> GridSpec:
    return GridSpec(Geometry.RADIAL, extent, nodes, dim)


def axis_weight(alpha: float, dim: int = 1) -> WeightSpec:
    return WeightSpec(WeightCase.AXIS_POWER, alpha, dim)


def radial_weight(alpha: float, dim: int = 1) -> WeightSpec:
    return WeightSpec(WeightCase.RADIAL_POWER, alpha, dim)


@pytest.fixture
def rel():
    """Relative-error helper."""

    def _rel(a: float, b: float) -> float:
        return abs(a - b) / max(abs(b), 1e-300)

    return _rel


def assert_close(a: float, b: float, tol: float):
    assert math.isfinite(a)
    assert abs(a - b) <= tol * max(abs(b), 1e-300), f"{a} vs {b} (tol {tol})"
