"""Particle state and the two-stage behaviour.

Headings are continuous degrees in [0, 360) with 0 pointing along +x and
positive angles rotating from +x toward +y (y grows downward). Positions
are integer cells; a move rounds pos + unit(heading), so diagonal headings
advance on both axes. Rounding is to the nearest integer with ties away
from zero.

The functions here are the single-particle reference semantics. The array
backends (`_pure`, `_core`) implement the same arithmetic step for step;
keep them in sync with any change made here.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

log = logging.getLogger(__name__)

DEG2RAD = math.pi / 180.0

# Sensor offsets below this give only weak coupling between neighbors.
MIN_COUPLING_OFFSET = 3


@dataclass(frozen=True)
class SensorParams:
    """Offset-sensor geometry: angular spread, per-decision turn, reach."""

    sa: float = 90.0  # sensor angle, degrees from forward
    ra: float = 45.0  # rotation angle, degrees per decision
    so: float = 15.0  # sensor offset distance, cells

    def __post_init__(self):
        if not 0 <= self.sa < 180:
            raise ValueError(f"sa must lie in [0, 180), got {self.sa}")
        if not 0 < self.ra < 180:
            raise ValueError(f"ra must lie in (0, 180), got {self.ra}")
        if self.so < 1:
            raise ValueError(f"so must be >= 1, got {self.so}")
        if self.so < MIN_COUPLING_OFFSET:
            log.warning(
                "sensor offset %s is below %d cells; local coupling will be weak",
                self.so,
                MIN_COUPLING_OFFSET,
            )


@dataclass(frozen=True)
class MotorMode:
    """Motor stage selection plus its parameters."""

    oscillatory: bool = False
    pid: float = 0.05  # probability a blocked oscillatory particle resets
    deposit: float = 5.0  # concentration deposited per successful move

    def __post_init__(self):
        if not 0 <= self.pid <= 1:
            raise ValueError(f"pid must lie in [0, 1], got {self.pid}")
        if self.deposit <= 0:
            raise ValueError(f"deposit must be > 0, got {self.deposit}")


@dataclass
class Particle:
    """One swarm unit: cell position, heading, blocked-motion accumulator."""

    x: int
    y: int
    heading: float
    off_x: float = 0.0
    off_y: float = 0.0


def round_half_away(v: float) -> int:
    """Nearest integer, ties away from zero (matches the compiled kernel)."""
    f = math.floor(v)
    diff = v - f
    if diff > 0.5:
        return int(f) + 1
    if diff < 0.5:
        return int(f)
    return int(f) + 1 if v > 0 else int(f)


def normalize_heading(h: float) -> float:
    h = math.fmod(h, 360.0)
    if h < 0.0:
        h += 360.0
    if h >= 360.0:
        h = 0.0
    return h


def sensor_positions(
    x: int, y: int, heading: float, params: SensorParams
) -> tuple[tuple[int, int], tuple[int, int], tuple[int, int]]:
    """Cells of the left, front and right sensors (FL, F, FR)."""
    fl_a = (heading - params.sa) * DEG2RAD
    f_a = heading * DEG2RAD
    fr_a = (heading + params.sa) * DEG2RAD
    so = params.so
    fl = (round_half_away(x + so * math.cos(fl_a)), round_half_away(y + so * math.sin(fl_a)))
    f = (round_half_away(x + so * math.cos(f_a)), round_half_away(y + so * math.sin(f_a)))
    fr = (round_half_away(x + so * math.cos(fr_a)), round_half_away(y + so * math.sin(fr_a)))
    return fl, f, fr


def sensory_decision(fl: float, f: float, fr: float, heading: float, ra: float, rng) -> float:
    """New heading after aligning toward the strongest sampled source.

    Forward strongest keeps the heading; forward weakest rotates by RA to a
    uniformly random side (one draw, < 0.5 means +RA); otherwise rotate
    toward the stronger offset sensor. Exact ties keep the heading.
    """
    if f > fl and f > fr:
        return heading
    if f < fl and f < fr:
        if rng.random() < 0.5:
            return normalize_heading(heading + ra)
        return normalize_heading(heading - ra)
    if fl < fr:
        return normalize_heading(heading + ra)
    if fr < fl:
        return normalize_heading(heading - ra)
    return heading


def motor_target(x: int, y: int, heading: float) -> tuple[int, int]:
    """Single-cell step destination for the current heading."""
    a = heading * DEG2RAD
    return round_half_away(x + math.cos(a)), round_half_away(y + math.sin(a))


def motor_step(
    p: Particle,
    occupancy,
    habitat,
    trail,
    mode: MotorMode,
    rng,
    particle_index: int,
) -> bool:
    """Attempt the forward move; returns True when the particle moved.

    On success (target in bounds, vacant and empty) the particle advances,
    deposits into the trail and clears its internal offset. When blocked,
    the non-oscillatory mode draws a fresh random heading; the oscillatory
    mode accumulates the intended motion and holds its heading, except
    that a pID-success draw resets both (the pID test consumes one draw on
    every blocked step, even at pid 0).
    """
    tx, ty = motor_target(p.x, p.y, p.heading)
    free = (
        habitat.in_bounds(tx, ty)
        and not habitat.wall[ty, tx]
        and occupancy[ty, tx] < 0
    )
    if free:
        occupancy[p.y, p.x] = -1
        occupancy[ty, tx] = particle_index
        p.x, p.y = tx, ty
        trail[ty, tx] += mode.deposit
        p.off_x = 0.0
        p.off_y = 0.0
        return True
    if not mode.oscillatory:
        p.heading = rng.random() * 360.0
        return False
    a = p.heading * DEG2RAD
    p.off_x += math.cos(a)
    p.off_y += math.sin(a)
    if rng.random() < mode.pid:
        p.off_x = 0.0
        p.off_y = 0.0
        p.heading = rng.random() * 360.0
    return False
