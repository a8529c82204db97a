"""Pure-Python step kernels.

Fallback used when the compiled extension is unavailable, and the
reference the extension is tested against: for the same RNG stream both
backends produce bit-identical arrays. Draw order per stage: first the
Fisher-Yates permutation (one uniform per swap, high index down to 1),
then per-particle draws in permutation order. All uniforms come from
``Generator.random()`` so the stream matches ``next_double`` in the
compiled kernels.
"""

from __future__ import annotations

import math

import numpy as np

from .particles import DEG2RAD, round_half_away

COMPILED = False


def permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded Fisher-Yates shuffle of 0..n-1."""
    perm = np.arange(n, dtype=np.int64)
    if n < 2:
        return perm
    us = rng.random(n - 1)  # same stream as n-1 scalar draws
    for k, i in enumerate(range(n - 1, 0, -1)):
        j = int(us[k] * (i + 1))
        if j > i:
            j = i
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def motor_stage(
    px: np.ndarray,
    py: np.ndarray,
    heading: np.ndarray,
    off_x: np.ndarray,
    off_y: np.ndarray,
    moved: np.ndarray,
    occ: np.ndarray,
    wall: np.ndarray,
    trail: np.ndarray,
    deposit: float,
    oscillatory: bool,
    pid: float,
    rng: np.random.Generator,
) -> int:
    """One motor pass over the population in a fresh random order."""
    n = px.shape[0]
    h, w = wall.shape
    order = permutation(n, rng)
    random = rng.random
    moved_count = 0
    for i in order:
        i = int(i)
        x = int(px[i])
        y = int(py[i])
        hd = float(heading[i])
        a = hd * DEG2RAD
        dx = math.cos(a)
        dy = math.sin(a)
        tx = round_half_away(x + dx)
        ty = round_half_away(y + dy)
        if 0 <= tx < w and 0 <= ty < h and not wall[ty, tx] and occ[ty, tx] < 0:
            occ[y, x] = -1
            occ[ty, tx] = i
            px[i] = tx
            py[i] = ty
            trail[ty, tx] += deposit
            off_x[i] = 0.0
            off_y[i] = 0.0
            moved[i] = 1
            moved_count += 1
        else:
            moved[i] = 0
            if not oscillatory:
                heading[i] = random() * 360.0
            else:
                off_x[i] += dx
                off_y[i] += dy
                if random() < pid:
                    off_x[i] = 0.0
                    off_y[i] = 0.0
                    heading[i] = random() * 360.0
    return moved_count


def sensory_stage(
    px: np.ndarray,
    py: np.ndarray,
    heading: np.ndarray,
    trail: np.ndarray,
    wall: np.ndarray,
    irr_rects: np.ndarray,
    irr_weights: np.ndarray,
    so: float,
    sa: float,
    ra: float,
    rng: np.random.Generator,
) -> None:
    """One sensory pass: every particle aligns toward its strongest sensor."""
    n = px.shape[0]
    h, w = wall.shape
    order = permutation(n, rng)
    random = rng.random
    n_regions = irr_rects.shape[0]

    def sample_at(cx: float, cy: float, hd: float, ang: float) -> float:
        a = (hd + ang) * DEG2RAD
        sx = round_half_away(cx + so * math.cos(a))
        sy = round_half_away(cy + so * math.sin(a))
        if not (0 <= sx < w and 0 <= sy < h) or wall[sy, sx]:
            return 0.0
        value = float(trail[sy, sx])
        for r in range(n_regions):
            if irr_rects[r, 0] <= sx <= irr_rects[r, 2] and irr_rects[r, 1] <= sy <= irr_rects[r, 3]:
                value *= float(irr_weights[r])
        return value

    for i in order:
        i = int(i)
        x = int(px[i])
        y = int(py[i])
        hd = float(heading[i])
        fl = sample_at(x, y, hd, -sa)
        f = sample_at(x, y, hd, 0.0)
        fr = sample_at(x, y, hd, sa)
        if f > fl and f > fr:
            continue
        if f < fl and f < fr:
            if random() < 0.5:
                hd += ra
            else:
                hd -= ra
        elif fl < fr:
            hd += ra
        elif fr < fl:
            hd -= ra
        else:
            continue
        hd = math.fmod(hd, 360.0)
        if hd < 0.0:
            hd += 360.0
        if hd >= 360.0:
            hd = 0.0
        heading[i] = hd


def diffuse(trail: np.ndarray, wall: np.ndarray, damping: float) -> np.ndarray:
    """3x3 mean filter with absorbing walls, damped by (1 - damping)."""
    h, w = trail.shape
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = trail
    padded[1:-1, 1:-1][wall] = 0.0
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
    out[wall] = 0.0
    return out
