"""Basins of attraction of the phase-difference map over the square.

Every interior point off the main diagonal converges to one of the two
splay attractors; the boundary of the square and the diagonal form the
invariant leftover set.  Rasterization classifies the forward orbit of
each cell center:

* ``upper`` / ``lower``: the orbit came within ``tol`` (max-norm) of the
  corresponding attractor,
* ``boundary``: the point sits on the invariant set (an edge, or within
  1e-13 of the diagonal), which the orbit can never leave,
* ``unresolved``: the iteration budget ran out; reported, never coerced.

Cell centers are sampled (not corners) so lattice points avoid the
invariant lines except for the deliberate diagonal band.  Classification
is elementwise and order-free, so chunked multi-worker runs return
bit-identical grids.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO

import numpy as np

from .core import TWO_PI, CouplingParams, in_square, three_clock_step

__all__ = [
    "LABEL_NAMES",
    "ATTRACTOR_UPPER",
    "ATTRACTOR_LOWER",
    "BasinGrid",
    "classify_point",
    "rasterize",
    "orbit",
    "default_max_iter",
    "write_grid_csv",
    "write_grid_binary",
    "read_grid_binary",
]

_UPPER, _LOWER, _BOUNDARY, _UNRESOLVED = 0, 1, 2, 3
LABEL_NAMES = ("upper", "lower", "boundary", "unresolved")

ATTRACTOR_UPPER = np.array([2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0])
ATTRACTOR_LOWER = np.array([4.0 * math.pi / 3.0, 2.0 * math.pi / 3.0])

_DIAGONAL_BAND = 1e-13


@dataclass(frozen=True)
class BasinGrid:
    """Rasterized attractor labels and iteration counts over the square.

    ``labels[row, col]`` covers the cell centered at
    ``((col + 0.5) * h, (row + 0.5) * h)`` with ``h = 2*pi / resolution``;
    row 0 is the bottom of the square.
    """

    resolution: int
    labels: np.ndarray  # uint8 codes into LABEL_NAMES, shape (res, res)
    iterations: np.ndarray  # int32, shape (res, res)
    params: CouplingParams
    tol: float
    max_iter: int | None

    def label_counts(self) -> dict[str, int]:
        return {
            name: int(np.count_nonzero(self.labels == code))
            for code, name in enumerate(LABEL_NAMES)
        }

    def cell_centers(self) -> np.ndarray:
        h = TWO_PI / self.resolution
        c = (np.arange(self.resolution) + 0.5) * h
        gx, gy = np.meshgrid(c, c)
        return np.stack((gx, gy), axis=-1)


def default_max_iter(params: CouplingParams) -> int:
    """ceil(60/eps): linear contraction near the attractors covers the tail."""
    return math.ceil(60.0 / params.epsilon)


def _on_invariant_boundary(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (
        (x == 0.0)
        | (x == TWO_PI)
        | (y == 0.0)
        | (y == TWO_PI)
        | (np.abs(x - y) < _DIAGONAL_BAND)
    )


def _classify_batch(
    points: np.ndarray, params: CouplingParams, tol: float, max_iter: int
) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=float)
    m = pts.shape[0]
    labels = np.full(m, _UNRESOLVED, dtype=np.uint8)
    iters = np.full(m, max_iter, dtype=np.int32)
    p = pts.copy()
    alive = np.arange(m)
    for k in range(max_iter + 1):
        x = p[:, 0]
        y = p[:, 1]
        done_b = _on_invariant_boundary(x, y)
        done_u = np.maximum(np.abs(x - ATTRACTOR_UPPER[0]), np.abs(y - ATTRACTOR_UPPER[1])) <= tol
        done_l = np.maximum(np.abs(x - ATTRACTOR_LOWER[0]), np.abs(y - ATTRACTOR_LOWER[1])) <= tol
        done = done_b | done_u | done_l
        if done.any():
            idx = alive[done]
            labels[idx] = np.where(
                done_b[done], _BOUNDARY, np.where(done_u[done], _UPPER, _LOWER)
            )
            iters[idx] = k
            keep = ~done
            p = p[keep]
            alive = alive[keep]
        if alive.size == 0 or k == max_iter:
            break
        p = three_clock_step(p, params)
    return labels, iters


def classify_point(
    p,
    params: CouplingParams,
    tol: float = 1e-6,
    max_iter: int | None = None,
) -> tuple[str, int]:
    """Label a single point and report the iterations spent deciding it."""
    params.require_analysis_range()
    point = np.asarray(p, dtype=float).reshape(1, 2)
    if not bool(in_square(point[0])):
        raise ValueError(f"point {p} outside the square")
    if max_iter is None:
        max_iter = default_max_iter(params)
    labels, iters = _classify_batch(point, params, tol, max_iter)
    return LABEL_NAMES[int(labels[0])], int(iters[0])


def rasterize(
    resolution: int,
    params: CouplingParams,
    tol: float = 1e-6,
    max_iter: int | None = None,
    workers: int = 1,
) -> BasinGrid:
    """Classify the cell-center lattice; deterministic for fixed inputs.

    ``workers`` only chunks the lattice row-wise across threads; any worker
    count produces the identical grid.
    """
    params.require_analysis_range()
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if max_iter is None:
        max_iter = default_max_iter(params)
    h = TWO_PI / resolution
    c = (np.arange(resolution) + 0.5) * h
    gx, gy = np.meshgrid(c, c)
    flat = np.column_stack((gx.ravel(), gy.ravel()))

    if workers == 1:
        labels, iters = _classify_batch(flat, params, tol, max_iter)
    else:
        chunks = np.array_split(flat, workers * 4)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ch: _classify_batch(ch, params, tol, max_iter), chunks))
        labels = np.concatenate([p[0] for p in parts])
        iters = np.concatenate([p[1] for p in parts])

    return BasinGrid(
        resolution=resolution,
        labels=labels.reshape(resolution, resolution),
        iterations=iters.reshape(resolution, resolution),
        params=params,
        tol=tol,
        max_iter=max_iter,
    )


def orbit(p, params: CouplingParams, n: int) -> np.ndarray:
    """Forward orbit polyline (p, F(p), ..., F^n(p)), shape (n + 1, 2)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = np.empty((n + 1, 2), dtype=float)
    out[0] = np.asarray(p, dtype=float)
    for k in range(n):
        out[k + 1] = three_clock_step(out[k], params)
    return out


def write_grid_csv(grid: BasinGrid, stream: IO[str]) -> None:
    """Row-major label matrix, a blank line, then the iteration matrix."""
    for row in grid.labels:
        stream.write(",".join(LABEL_NAMES[int(v)] for v in row) + "\n")
    stream.write("\n")
    for row in grid.iterations:
        stream.write(",".join(str(int(v)) for v in row) + "\n")


_HEADER = struct.Struct("<qdd")  # resolution, epsilon, tol


def write_grid_binary(grid: BasinGrid, stream: IO[bytes]) -> None:
    """Compact layout: little-endian header, one label byte per cell, then
    32-bit iteration counts, both row-major."""
    stream.write(_HEADER.pack(grid.resolution, grid.params.epsilon, grid.tol))
    stream.write(np.ascontiguousarray(grid.labels, dtype=np.uint8).tobytes())
    stream.write(np.ascontiguousarray(grid.iterations, dtype="<i4").tobytes())


def read_grid_binary(stream: IO[bytes]) -> BasinGrid:
    resolution, epsilon, tol = _HEADER.unpack(stream.read(_HEADER.size))
    n = resolution * resolution
    labels = np.frombuffer(stream.read(n), dtype=np.uint8).reshape(resolution, resolution)
    iters = np.frombuffer(stream.read(4 * n), dtype="<i4").reshape(resolution, resolution)
    return BasinGrid(
        resolution=int(resolution),
        labels=labels.copy(),
        iterations=iters.astype(np.int32),
        params=CouplingParams(epsilon=float(epsilon)),
        tol=float(tol),
        max_iter=None,
    )
