"""Filled-interior geometry with compiled/pure-Python backend selection.

The compiled extension is used when it imports; setting the environment
variable ``LOOPSOUP_PURE_PYTHON=1`` forces the pure-Python kernels.
"""
from __future__ import annotations

import os

import numpy as np

if os.environ.get("LOOPSOUP_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _k

    BACKEND = "python"
else:
    try:
        from . import _kernels as _k

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as _k

        BACKEND = "python"

__all__ = [
    "BACKEND",
    "OnPathError",
    "outer_boundary",
    "fill_contains",
    "fill_contains_many",
    "winding_number",
    "flood_fill_contains",
    "filled_area",
    "default_cell",
]


class OnPathError(ValueError):
    """Query point lies on the discretized path."""


def _xy(path):
    p = np.asarray(path, dtype=complex)
    return np.ascontiguousarray(p.real), np.ascontiguousarray(p.imag)


def default_cell(path) -> float:
    """Spatial-hash cell size: 1.5 times the mean step length."""
    p = np.asarray(path, dtype=complex)
    step = float(np.mean(np.abs(np.diff(p))))
    return 1.5 * step if step > 0 else 1.0


def outer_boundary(path) -> np.ndarray:
    """Closed polygon (complex vertices) bounding the filled interior."""
    xs, ys = _xy(path)
    bx, by = _k.outer_boundary(xs, ys, default_cell(path))
    return np.asarray(bx) + 1j * np.asarray(by)


def winding_number(path, z: complex) -> int:
    xs, ys = _xy(path)
    return int(_k.winding_number(xs, ys, float(z.real), float(z.imag)))


def fill_contains_many(path, points, cell: float | None = None) -> np.ndarray:
    """Boolean membership of each point in the filled interior of ``path``."""
    xs, ys = _xy(path)
    pts = np.asarray(points, dtype=complex).ravel()
    cell = default_cell(path) if cell is None else cell
    res = _k.fill_contains_many(
        xs, ys, np.ascontiguousarray(pts.real), np.ascontiguousarray(pts.imag), cell
    )
    return np.asarray(res, dtype=bool)


def fill_contains(path, z: complex) -> bool:
    """True iff ``z`` lies in the filled interior of the closed polyline.

    Raises :class:`OnPathError` when ``z`` sits on the path itself.
    """
    z = complex(z)
    xs, ys = _xy(path)
    if _k.min_distance_to_path(xs, ys, z.real, z.imag) == 0.0:
        raise OnPathError(f"point {z} lies on the path")
    return bool(fill_contains_many(path, [z])[0])


def flood_fill_contains(path, z: complex, resolution: int = 256) -> bool:
    """Grid flood-fill variant of :func:`fill_contains`.

    The path is rasterized on a ``resolution``-wide grid over its bounding
    box (plus a one-cell margin) and the exterior is flooded from a corner.
    Pockets narrower than a grid cell are lost, so this is an approximation.
    """
    z = complex(z)
    xs, ys = _xy(path)
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    if not (x0 < z.real < x1 and y0 < z.imag < y1):
        return False
    h = max(x1 - x0, y1 - y0) / resolution
    gx0, gy0 = x0 - 2 * h, y0 - 2 * h
    nx = int((x1 - gx0) / h) + 3
    ny = int((y1 - gy0) / h) + 3
    g = np.asarray(_k.flood_fill_grid(xs, ys, gx0, gy0, h, nx, ny))
    i = int((z.real - gx0) / h)
    j = int((z.imag - gy0) / h)
    return bool(g[i, j] != 2)


def filled_area(path) -> float:
    b = outer_boundary(path)
    return abs(float(_k.polygon_area(np.ascontiguousarray(b.real), np.ascontiguousarray(b.imag))))
