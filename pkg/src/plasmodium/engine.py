"""World state, the seeded step loop, and the scenario event timeline.

Determinism contract: one global PCG64 stream seeded from the config.
Draws are consumed in a fixed, documented order:

* init — for each particle in index order: one uniform selecting its cell
  from the remaining vacant cells of its seed region, one uniform for the
  heading.
* each step — motor stage (permutation draws, then per-particle draws in
  permutation order), then sensory stage (likewise). Stimulus projection
  and diffusion draw nothing.

Within a step the sub-order is fixed: timeline events, motor stage for
the whole population, sensory stage for the whole population (sampling
the current trail), stimulus projection, diffusion, statistics.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import backend as backend_mod
from .lattice import (
    Attractant,
    Habitat,
    IrradiationRegion,
    StimulusSet,
    new_trail,
    project_stimuli,
)
from .particles import MotorMode, SensorParams


class ConfigError(ValueError):
    pass


class ObserverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SeedRegion:
    """Disc or rectangle of cells for initial placement.

    ``count`` fixes how many particles this region receives; None shares
    the remainder of the population evenly across unfixed regions.
    """

    kind: str  # "disc" | "rect"
    params: tuple[int, ...]  # disc: (cx, cy, r); rect: (x0, y0, x1, y1)
    count: int | None = None

    def __post_init__(self):
        if self.kind not in ("disc", "rect"):
            raise ConfigError(f"seed region kind must be disc or rect, got {self.kind!r}")
        expect = 3 if self.kind == "disc" else 4
        if len(self.params) != expect:
            raise ConfigError(f"{self.kind} seed region takes {expect} parameters")

    def cells(self, habitat: Habitat) -> list[tuple[int, int]]:
        """Vacant cells of the region in row-major order."""
        out = []
        if self.kind == "disc":
            cx, cy, r = self.params
            for y in range(max(0, cy - r), min(habitat.height, cy + r + 1)):
                for x in range(max(0, cx - r), min(habitat.width, cx + r + 1)):
                    if (x - cx) ** 2 + (y - cy) ** 2 <= r * r and not habitat.wall[y, x]:
                        out.append((x, y))
        else:
            x0, y0, x1, y1 = self.params
            for y in range(max(0, y0), min(habitat.height, y1 + 1)):
                for x in range(max(0, x0), min(habitat.width, x1 + 1)):
                    if not habitat.wall[y, x]:
                        out.append((x, y))
        return out


# -- timeline commands --------------------------------------------------

@dataclass(frozen=True)
class EnableOscillation:
    pass


@dataclass(frozen=True)
class SetPID:
    value: float


@dataclass(frozen=True)
class SetParam:
    name: str  # pid | sa | ra | so | damping | deposit | oscillatory
    value: float | bool


@dataclass(frozen=True)
class AddAttractant:
    id: str
    x: int
    y: int
    magnitude: float
    budget: float | None
    consumption_rate: float


@dataclass(frozen=True)
class RemoveAttractant:
    id: str


@dataclass(frozen=True)
class AddIrradiation:
    id: str
    x0: int
    y0: int
    x1: int
    y1: int
    weight: float


@dataclass(frozen=True)
class RemoveIrradiation:
    id: str


Command = Union[
    EnableOscillation,
    SetPID,
    SetParam,
    AddAttractant,
    RemoveAttractant,
    AddIrradiation,
    RemoveIrradiation,
]


@dataclass(frozen=True)
class TimelineEvent:
    at_step: int
    command: Command


@dataclass(frozen=True)
class EngineConfig:
    population: int
    sensors: SensorParams = SensorParams()
    motor: MotorMode = MotorMode()
    damping: float = 0.07
    seed: int = 42
    seed_regions: tuple[SeedRegion, ...] = ()
    oscillation_onset: int | None = None  # None = never

    def __post_init__(self):
        if self.population < 0:
            raise ConfigError(f"population must be >= 0, got {self.population}")
        if not 0 <= self.damping < 1:
            raise ConfigError(f"damping must lie in [0, 1), got {self.damping}")


@dataclass
class EngineParams:
    """Mutable runtime view of the tunable parameters."""

    sa: float
    ra: float
    so: float
    pid: float
    deposit: float
    damping: float
    oscillatory: bool


@dataclass(frozen=True)
class StepStats:
    step_index: int
    moved: int
    blocked: int
    trail_mass: float
    centroid_x: float
    centroid_y: float

    def pack(self) -> bytes:
        return struct.pack(
            "<qqqddd",
            self.step_index,
            self.moved,
            self.blocked,
            self.trail_mass,
            self.centroid_x,
            self.centroid_y,
        )


@dataclass
class World:
    habitat: Habitat
    trail: np.ndarray
    occ: np.ndarray
    px: np.ndarray
    py: np.ndarray
    heading: np.ndarray
    off_x: np.ndarray
    off_y: np.ndarray
    moved: np.ndarray
    stimuli: StimulusSet
    params: EngineParams
    rng: np.random.Generator
    config: EngineConfig
    timeline: list[TimelineEvent] = field(default_factory=list)
    step_index: int = 0
    _fired: int = 0  # timeline events already applied
    _backend: object = None

    @property
    def population(self) -> int:
        return int(self.px.shape[0])

    @property
    def wall_u8(self) -> np.ndarray:
        return self.habitat.wall.view(np.uint8)


def _resolve_counts(population: int, regions: tuple[SeedRegion, ...]) -> list[int]:
    fixed = sum(r.count for r in regions if r.count is not None)
    if fixed > population:
        raise ConfigError(f"seed region counts sum to {fixed}, exceeding population {population}")
    free = [i for i, r in enumerate(regions) if r.count is None]
    counts = [r.count if r.count is not None else 0 for r in regions]
    if free:
        remainder = population - fixed
        share, extra = divmod(remainder, len(free))
        for k, i in enumerate(free):
            counts[i] = share + (1 if k < extra else 0)
    elif fixed != population:
        raise ConfigError(f"seed region counts sum to {fixed}, but population is {population}")
    return counts


def init(
    config: EngineConfig,
    habitat: Habitat,
    timeline: list[TimelineEvent] | None = None,
    backend=None,
) -> World:
    """Place the population and build the starting world."""
    regions = config.seed_regions
    if not regions:
        regions = (SeedRegion("rect", (0, 0, habitat.width - 1, habitat.height - 1)),)
    counts = _resolve_counts(config.population, regions)

    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = config.population
    px = np.empty(n, dtype=np.int32)
    py = np.empty(n, dtype=np.int32)
    heading = np.empty(n, dtype=np.float64)
    occ = np.full((habitat.height, habitat.width), -1, dtype=np.int32)

    i = 0
    for region, count in zip(regions, counts):
        cells = region.cells(habitat)
        if len(cells) < count:
            raise ConfigError(
                f"seed region {region.kind}{region.params} has {len(cells)} vacant "
                f"cells, need {count} ({count - len(cells)} short)"
            )
        for _ in range(count):
            j = int(rng.random() * len(cells))
            if j >= len(cells):
                j = len(cells) - 1
            x, y = cells[j]
            cells[j] = cells[-1]
            cells.pop()
            px[i] = x
            py[i] = y
            occ[y, x] = i
            heading[i] = rng.random() * 360.0
            i += 1

    events = list(timeline) if timeline else []
    if config.oscillation_onset is not None:
        events.append(TimelineEvent(config.oscillation_onset, EnableOscillation()))
    events.sort(key=lambda e: e.at_step)

    params = EngineParams(
        sa=config.sensors.sa,
        ra=config.sensors.ra,
        so=config.sensors.so,
        pid=config.motor.pid,
        deposit=config.motor.deposit,
        damping=config.damping,
        oscillatory=config.motor.oscillatory,
    )
    world = World(
        habitat=habitat,
        trail=new_trail(habitat),
        occ=occ,
        px=px,
        py=py,
        heading=heading,
        off_x=np.zeros(n, dtype=np.float64),
        off_y=np.zeros(n, dtype=np.float64),
        moved=np.zeros(n, dtype=np.uint8),
        stimuli=StimulusSet(),
        params=params,
        rng=rng,
        config=config,
        timeline=events,
    )
    world._backend = backend if backend is not None else backend_mod.ACTIVE
    return world


def apply_command(world: World, command: Command) -> None:
    """Apply a steering/timeline command to the world, with validation."""
    p = world.params
    if isinstance(command, EnableOscillation):
        p.oscillatory = True
    elif isinstance(command, SetPID):
        _check_param("pid", command.value)
        p.pid = float(command.value)
    elif isinstance(command, SetParam):
        value = _check_param(command.name, command.value)
        setattr(p, command.name, value)
    elif isinstance(command, AddAttractant):
        a = Attractant(
            command.id,
            command.x,
            command.y,
            command.magnitude,
            command.budget,
            command.consumption_rate,
        )
        a.validate(world.habitat)
        if any(existing.id == a.id for existing in world.stimuli.attractants):
            raise ConfigError(f"attractant id {a.id!r} already active")
        world.stimuli.attractants.append(a)
    elif isinstance(command, RemoveAttractant):
        world.stimuli.attractants[:] = [
            a for a in world.stimuli.attractants if a.id != command.id
        ]
    elif isinstance(command, AddIrradiation):
        r = IrradiationRegion(
            command.id, command.x0, command.y0, command.x1, command.y1, command.weight
        )
        r.validate()
        if any(existing.id == r.id for existing in world.stimuli.irradiation):
            raise ConfigError(f"irradiation id {r.id!r} already active")
        world.stimuli.irradiation.append(r)
    elif isinstance(command, RemoveIrradiation):
        world.stimuli.irradiation[:] = [
            r for r in world.stimuli.irradiation if r.id != command.id
        ]
    else:
        raise ConfigError(f"unknown command {command!r}")


_PARAM_RANGES = {
    "pid": (0.0, 1.0, "pid must lie in [0,1]"),
    "sa": (0.0, 180.0, "sa must lie in [0, 180)"),
    "ra": (0.0, 180.0, "ra must lie in (0, 180)"),
    "so": (1.0, float("inf"), "so must be >= 1"),
    "damping": (0.0, 1.0, "damping must lie in [0, 1)"),
    "deposit": (0.0, float("inf"), "deposit must be > 0"),
}


def _check_param(name: str, value) -> float | bool:
    if name == "oscillatory":
        if not isinstance(value, bool):
            raise ConfigError("oscillatory takes a boolean")
        return value
    if name not in _PARAM_RANGES:
        raise ConfigError(f"unknown parameter {name!r}")
    lo, hi, msg = _PARAM_RANGES[name]
    v = float(value)
    ok = lo <= v <= hi
    if name in ("sa", "damping"):
        ok = lo <= v < hi
    elif name in ("ra",):
        ok = lo < v < hi
    elif name in ("deposit",):
        ok = v > lo
    if not ok or math.isnan(v):
        raise ConfigError(msg)
    return v


def step(world: World) -> StepStats:
    """Advance one scheduler step and return its statistics."""
    while world._fired < len(world.timeline) and world.timeline[world._fired].at_step <= world.step_index:
        apply_command(world, world.timeline[world._fired].command)
        world._fired += 1

    kernels = world._backend
    p = world.params
    moved_count = kernels.motor_stage(
        world.px,
        world.py,
        world.heading,
        world.off_x,
        world.off_y,
        world.moved,
        world.occ,
        world.wall_u8,
        world.trail,
        p.deposit,
        p.oscillatory,
        p.pid,
        world.rng,
    )
    irr_rects, irr_weights = world.stimuli.irradiation_arrays()
    kernels.sensory_stage(
        world.px,
        world.py,
        world.heading,
        world.trail,
        world.wall_u8,
        irr_rects,
        irr_weights,
        p.so,
        p.sa,
        p.ra,
        world.rng,
    )
    project_stimuli(world.trail, world.stimuli, world.occ, in_place=True)
    world.trail = kernels.diffuse(world.trail, world.wall_u8, p.damping)

    n = world.population
    if n:
        cx = float(np.mean(world.px))
        cy = float(np.mean(world.py))
    else:
        cx = cy = float("nan")
    stats = StepStats(
        step_index=world.step_index,
        moved=int(moved_count),
        blocked=n - int(moved_count),
        trail_mass=float(np.sum(world.trail)),
        centroid_x=cx,
        centroid_y=cy,
    )
    world.step_index += 1
    return stats


@dataclass(frozen=True)
class Snapshot:
    """Immutable copy of the observable world state at one step."""

    step_index: int
    stats: StepStats | None
    trail: np.ndarray
    px: np.ndarray
    py: np.ndarray
    heading: np.ndarray
    stimuli: StimulusSet
    width: int
    height: int


@dataclass(frozen=True)
class Observer:
    every: int
    fn: Callable[[Snapshot], None]


def snapshot(world: World, stats: StepStats | None = None) -> Snapshot:
    return Snapshot(
        step_index=world.step_index,
        stats=stats,
        trail=world.trail.copy(),
        px=world.px.copy(),
        py=world.py.copy(),
        heading=world.heading.copy(),
        stimuli=world.stimuli.copy(),
        width=world.habitat.width,
        height=world.habitat.height,
    )


def _notify(obs: Observer, snap: Snapshot) -> None:
    try:
        obs.fn(snap)
    except Exception as exc:
        raise ObserverError(f"observer failed at step {snap.step_index}: {exc}") from exc


def run_world(world: World, n_steps: int, observers: tuple[Observer, ...] = ()) -> list[StepStats]:
    """Step n times, notifying observers at their cadences.

    Every observer receives an initial snapshot (stats None) before the
    first step, then one per step whose index is a cadence multiple.
    """
    if n_steps < 0:
        raise ConfigError(f"n_steps must be >= 0, got {n_steps}")
    for obs in observers:
        _notify(obs, snapshot(world))
    series: list[StepStats] = []
    for _ in range(n_steps):
        stats = step(world)
        series.append(stats)
        snap = None
        for obs in observers:
            if obs.every > 0 and (stats.step_index + 1) % obs.every == 0:
                if snap is None:
                    snap = snapshot(world, stats)
                _notify(obs, snap)
    return series


def run(
    config: EngineConfig,
    habitat: Habitat,
    timeline: list[TimelineEvent] | None,
    n_steps: int,
    observers: tuple[Observer, ...] = (),
    backend=None,
) -> tuple[World, list[StepStats]]:
    world = init(config, habitat, timeline, backend=backend)
    series = run_world(world, n_steps, observers)
    return world, series


def digest(world: World, series: list[StepStats]) -> str:
    """Stable hash of the final state plus the full statistics series."""
    h = hashlib.sha256()
    h.update(world.trail.tobytes())
    h.update(world.px.tobytes())
    h.update(world.py.tobytes())
    h.update(world.heading.tobytes())
    h.update(world.off_x.tobytes())
    h.update(world.off_y.tobytes())
    for stats in series:
        h.update(stats.pack())
    return h.hexdigest()
