"""Lattice state: habitat grid, trail field, stimuli, diffusion and sampling.

The habitat is an immutable wall/vacant classification. The trail field is
a float64 concentration grid coupled to it: wall cells always hold exactly
0 and everything outside the bounds behaves as wall.

Axes: ``x`` is the column index, ``y`` the row index (y grows downward);
arrays are indexed ``[y, x]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import pgm

# Pixel values below this threshold classify as wall when loading a map.
WALL_THRESHOLD = 128

DEFAULT_DAMPING = 0.07


class StimulusError(ValueError):
    pass


@dataclass(frozen=True)
class Habitat:
    """Wall/vacant cell classification. ``wall[y, x]`` is True on walls."""

    wall: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        if self.wall.ndim != 2 or self.wall.size < 1:
            raise ValueError(f"habitat grid must be 2D and non-empty, got shape {self.wall.shape}")
        self.wall.setflags(write=False)

    @property
    def height(self) -> int:
        return self.wall.shape[0]

    @property
    def width(self) -> int:
        return self.wall.shape[1]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_wall(self, x: int, y: int) -> bool:
        """Out-of-bounds coordinates count as wall."""
        return not self.in_bounds(x, y) or bool(self.wall[y, x])

    def vacant_count(self) -> int:
        return int(self.wall.size - np.count_nonzero(self.wall))

    @classmethod
    def open_arena(cls, width: int, height: int) -> "Habitat":
        return cls(np.zeros((height, width), dtype=bool))


def load_habitat(data: bytes) -> Habitat:
    """Build a habitat from P5 PGM bytes: pixel < 128 is wall, else vacant."""
    pixels = pgm.read_pgm(data)
    return Habitat(pixels < WALL_THRESHOLD)


def load_habitat_file(path) -> Habitat:
    with open(path, "rb") as f:
        return load_habitat(f.read())


def new_trail(habitat: Habitat) -> np.ndarray:
    return np.zeros((habitat.height, habitat.width), dtype=np.float64)


@dataclass
class Attractant:
    """A chemoattractant source projected into the field every step.

    ``budget`` is the remaining consumable amount (None = unlimited); it is
    drained by ``consumption_rate`` on every step a particle covers the
    source, and the source disappears when it reaches 0.
    """

    id: str
    x: int
    y: int
    magnitude: float
    budget: float | None = None
    consumption_rate: float = 1.0

    def validate(self, habitat: Habitat | None = None) -> None:
        if self.magnitude <= 0:
            raise StimulusError(f"attractant {self.id!r}: magnitude must be > 0")
        if self.budget is not None and self.budget < 0:
            raise StimulusError(f"attractant {self.id!r}: budget must be >= 0 or unlimited")
        if self.consumption_rate < 0:
            raise StimulusError(f"attractant {self.id!r}: consumption rate must be >= 0")
        if habitat is not None and habitat.is_wall(self.x, self.y):
            raise StimulusError(f"attractant {self.id!r}: position not vacant")


@dataclass
class IrradiationRegion:
    """Inclusive cell rectangle whose sampled concentrations are damped."""

    id: str
    x0: int
    y0: int
    x1: int
    y1: int
    weight: float

    def validate(self) -> None:
        if not (0 < self.weight <= 1):
            raise StimulusError(f"irradiation {self.id!r}: weight must lie in (0, 1]")
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise StimulusError(f"irradiation {self.id!r}: empty rectangle")

    def contains(self, x: int, y: int) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


@dataclass
class StimulusSet:
    attractants: list[Attractant] = field(default_factory=list)
    irradiation: list[IrradiationRegion] = field(default_factory=list)

    def copy(self) -> "StimulusSet":
        return StimulusSet(
            [replace(a) for a in self.attractants],
            [replace(r) for r in self.irradiation],
        )

    def irradiation_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Rectangles and weights as flat arrays for the step kernels."""
        k = len(self.irradiation)
        rects = np.empty((k, 4), dtype=np.int64)
        weights = np.empty(k, dtype=np.float64)
        for i, r in enumerate(self.irradiation):
            rects[i] = (r.x0, r.y0, r.x1, r.y1)
            weights[i] = r.weight
        return rects, weights


def diffuse(trail: np.ndarray, habitat: Habitat, damping: float = DEFAULT_DAMPING) -> np.ndarray:
    """One 3x3 mean-filter pass damped by (1 - damping).

    Every vacant cell becomes the sum of its 3x3 neighborhood divided by a
    fixed 9, times (1 - damping); wall and out-of-bounds neighbors
    contribute 0 (absorbing boundary) and wall cells stay at exactly 0.
    Pure function: the input array is not modified.
    """
    if not 0 <= damping < 1:
        raise ValueError(f"damping must lie in [0, 1), got {damping}")
    h, w = trail.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = trail
    padded[1:-1, 1:-1][habitat.wall] = 0.0
    # Fixed row-major neighbor order; the compiled kernel accumulates in the
    # same order so both produce bit-identical sums.
    acc = padded[0:-2, 0:-2].copy()
    acc += padded[0:-2, 1:-1]
    acc += padded[0:-2, 2:]
    acc += padded[1:-1, 0:-2]
    acc += padded[1:-1, 1:-1]
    acc += padded[1:-1, 2:]
    acc += padded[2:, 0:-2]
    acc += padded[2:, 1:-1]
    acc += padded[2:, 2:]
    out = acc / 9.0 * (1.0 - damping)
    out[habitat.wall] = 0.0
    return out


def sample(
    trail: np.ndarray,
    habitat: Habitat,
    stimuli: StimulusSet | None,
    x: int,
    y: int,
) -> float:
    """Concentration perceived at a cell.

    0 outside the bounds and on walls; otherwise the field value scaled by
    the product of the weights of every irradiation region covering the
    cell (1 if none).
    """
    if habitat.is_wall(x, y):
        return 0.0
    w = 1.0
    if stimuli is not None:
        for region in stimuli.irradiation:
            if region.contains(x, y):
                w *= region.weight
    return float(trail[y, x]) * w


def project_stimuli(
    trail: np.ndarray,
    stimuli: StimulusSet,
    occupancy: np.ndarray,
    in_place: bool = False,
) -> tuple[np.ndarray, StimulusSet]:
    """Add every live attractant into the field and drain covered sources.

    Each source with remaining budget projects min(magnitude, budget) at
    its position. A source covered by a particle has its budget reduced by
    its consumption rate (floored at 0); exhausted sources are dropped.
    Irradiation regions are untouched (they act at sampling time).
    """
    if not in_place:
        trail = trail.copy()
        stimuli = stimuli.copy()
    kept = []
    for a in stimuli.attractants:
        amount = a.magnitude if a.budget is None else min(a.magnitude, a.budget)
        trail[a.y, a.x] += amount
        if a.budget is not None and occupancy[a.y, a.x] >= 0:
            a.budget = max(0.0, a.budget - a.consumption_rate)
        if a.budget is None or a.budget > 0:
            kept.append(a)
    stimuli.attractants[:] = kept
    return trail, stimuli
