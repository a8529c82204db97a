"""Scalar measures of collective state: cohesion, oscillation, shape.

All functions are pure and operate on immutable snapshots, so they are
safe to evaluate concurrently with the simulation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

# Blobs whose closest cells are farther apart than sensor coupling can
# reach (3 cells) count as distinct components.
DEFAULT_GAP_TOLERANCE = 2

_MOORE = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class ComponentReport:
    count: int
    sizes: tuple[int, ...]  # particle counts, largest first
    gap_tolerance: int


def centroid(px: np.ndarray, py: np.ndarray) -> tuple[float, float]:
    """Arithmetic mean of the particle positions."""
    if len(px) == 0:
        raise ValueError("centroid of an empty population is undefined")
    return float(np.mean(px)), float(np.mean(py))


def _occupied_grid(px, py, shape) -> np.ndarray:
    grid = np.zeros(shape, dtype=bool)
    grid[py, px] = True
    return grid


def connected_components(
    px: np.ndarray,
    py: np.ndarray,
    shape: tuple[int, int],
    gap_tolerance: int = DEFAULT_GAP_TOLERANCE,
) -> ComponentReport:
    """Group particles whose cells lie within Chebyshev distance
    1 + gap_tolerance of each other, transitively.

    Even link distances fall back to a breadth-first search; odd ones
    (including the defaults 1 and 3) use dilation + Moore labelling,
    which is exact for that adjacency.
    """
    if gap_tolerance < 0:
        raise ValueError(f"gap_tolerance must be >= 0, got {gap_tolerance}")
    n = len(px)
    if n == 0:
        return ComponentReport(0, (), gap_tolerance)
    link = 1 + gap_tolerance
    if link % 2 == 1:
        grid = _occupied_grid(px, py, shape)
        radius = (link - 1) // 2
        if radius:
            footprint = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
            grid = ndimage.binary_dilation(grid, structure=footprint)
        labels, count = ndimage.label(grid, structure=_MOORE)
        particle_labels = labels[py, px]
        sizes = np.bincount(particle_labels, minlength=count + 1)[1:]
        sizes = tuple(sorted((int(s) for s in sizes if s > 0), reverse=True))
        return ComponentReport(len(sizes), sizes, gap_tolerance)
    return _components_bfs(px, py, link, gap_tolerance)


def _components_bfs(px, py, link: int, gap_tolerance: int) -> ComponentReport:
    cells = {}
    for i in range(len(px)):
        cells.setdefault((int(px[i]), int(py[i])), []).append(i)
    unvisited = set(cells)
    sizes = []
    while unvisited:
        start = unvisited.pop()
        queue = deque([start])
        size = len(cells[start])
        while queue:
            x, y = queue.popleft()
            for dy in range(-link, link + 1):
                for dx in range(-link, link + 1):
                    c = (x + dx, y + dy)
                    if c in unvisited:
                        unvisited.remove(c)
                        queue.append(c)
                        size += len(cells[c])
        sizes.append(size)
    sizes = tuple(sorted(sizes, reverse=True))
    return ComponentReport(len(sizes), sizes, gap_tolerance)


def oscillation_strength(moved_counts, population: int, window: int) -> float:
    """Standard deviation of the moved fraction over the trailing window."""
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    series = np.asarray(moved_counts, dtype=np.float64)
    if series.shape[0] < window:
        raise ValueError(f"series length {series.shape[0]} is shorter than window {window}")
    if population <= 0:
        raise ValueError("population must be positive")
    fractions = series[-window:] / float(population)
    return float(np.std(fractions))


def circularity(px: np.ndarray, py: np.ndarray, shape: tuple[int, int]) -> float:
    """Shape compactness 4*pi*A / P^2, clamped into (0, 1].

    A is the occupied cell count; P counts occupied cells with at least
    one non-occupied 4-neighbor (cells beyond the grid edge count as
    non-occupied).
    """
    if len(px) < 3:
        raise ValueError(f"circularity needs at least 3 occupied cells, got {len(px)}")
    grid = _occupied_grid(px, py, shape)
    area = int(np.count_nonzero(grid))
    padded = np.zeros((shape[0] + 2, shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = grid
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    perimeter = area - int(np.count_nonzero(grid & interior))
    if perimeter == 0:
        return 1.0
    value = 4.0 * np.pi * area / perimeter**2
    return float(min(1.0, value))
