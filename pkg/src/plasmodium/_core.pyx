# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled step kernels.

Must stay bit-identical to ``_pure``: same arithmetic, same operation
order, same RNG draw order. Uniform draws go straight to the PCG64 bit
generator's ``next_double``, which yields the exact sequence of
``Generator.random()`` on the same bit generator.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport M_PI, cos, fmod, floor, sin

from numpy.random cimport bitgen_t

import numpy as np

COMPILED = True

cdef double DEG2RAD = M_PI / 180.0


cdef bitgen_t *_bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng does not expose a BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline long _round_half_away(double v) noexcept nogil:
    cdef double f = floor(v)
    cdef double diff = v - f
    if diff > 0.5:
        return <long> f + 1
    if diff < 0.5:
        return <long> f
    if v > 0:
        return <long> f + 1
    return <long> f


cdef void _fill_permutation(long[::1] perm, Py_ssize_t n, bitgen_t *bg) noexcept:
    cdef Py_ssize_t i, j
    cdef long tmp
    for i in range(n):
        perm[i] = i
    for i in range(n - 1, 0, -1):
        j = <Py_ssize_t> (bg.next_double(bg.state) * (i + 1))
        if j > i:
            j = i
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp


def permutation(Py_ssize_t n, object rng):
    """Seeded Fisher-Yates shuffle of 0..n-1."""
    cdef bitgen_t *bg = _bitgen(rng)
    perm = np.arange(n, dtype=np.int64)
    cdef long[::1] view = perm
    if n >= 2:
        _fill_permutation(view, n, bg)
    return perm


def motor_stage(
    int[::1] px,
    int[::1] py,
    double[::1] heading,
    double[::1] off_x,
    double[::1] off_y,
    unsigned char[::1] moved,
    int[:, ::1] occ,
    const unsigned char[:, ::1] wall,
    double[:, ::1] trail,
    double deposit,
    bint oscillatory,
    double pid,
    object rng,
):
    """One motor pass over the population in a fresh random order."""
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t h = wall.shape[0]
    cdef Py_ssize_t w = wall.shape[1]
    perm = np.arange(n, dtype=np.int64)
    cdef long[::1] order = perm
    if n >= 2:
        _fill_permutation(order, n, bg)
    cdef Py_ssize_t k, i
    cdef long x, y, tx, ty
    cdef double hd, a, dx, dy
    cdef long moved_count = 0
    for k in range(n):
        i = order[k]
        x = px[i]
        y = py[i]
        hd = heading[i]
        a = hd * DEG2RAD
        dx = cos(a)
        dy = sin(a)
        tx = _round_half_away(x + dx)
        ty = _round_half_away(y + dy)
        if 0 <= tx < w and 0 <= ty < h and not wall[ty, tx] and occ[ty, tx] < 0:
            occ[y, x] = -1
            occ[ty, tx] = <int> i
            px[i] = <int> tx
            py[i] = <int> ty
            trail[ty, tx] += deposit
            off_x[i] = 0.0
            off_y[i] = 0.0
            moved[i] = 1
            moved_count += 1
        else:
            moved[i] = 0
            if not oscillatory:
                heading[i] = bg.next_double(bg.state) * 360.0
            else:
                off_x[i] += dx
                off_y[i] += dy
                if bg.next_double(bg.state) < pid:
                    off_x[i] = 0.0
                    off_y[i] = 0.0
                    heading[i] = bg.next_double(bg.state) * 360.0
    return moved_count


cdef inline double _sample(
    double[:, ::1] trail,
    const unsigned char[:, ::1] wall,
    long[:, ::1] irr_rects,
    double[::1] irr_weights,
    Py_ssize_t w,
    Py_ssize_t h,
    double cx,
    double cy,
    double angle_deg,
    double so,
) noexcept nogil:
    cdef double a = angle_deg * DEG2RAD
    cdef long sx = _round_half_away(cx + so * cos(a))
    cdef long sy = _round_half_away(cy + so * sin(a))
    if sx < 0 or sx >= w or sy < 0 or sy >= h or wall[sy, sx]:
        return 0.0
    cdef double value = trail[sy, sx]
    cdef Py_ssize_t r
    for r in range(irr_rects.shape[0]):
        if irr_rects[r, 0] <= sx <= irr_rects[r, 2] and irr_rects[r, 1] <= sy <= irr_rects[r, 3]:
            value *= irr_weights[r]
    return value


def sensory_stage(
    int[::1] px,
    int[::1] py,
    double[::1] heading,
    double[:, ::1] trail,
    const unsigned char[:, ::1] wall,
    long[:, ::1] irr_rects,
    double[::1] irr_weights,
    double so,
    double sa,
    double ra,
    object rng,
):
    """One sensory pass: every particle aligns toward its strongest sensor."""
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t h = wall.shape[0]
    cdef Py_ssize_t w = wall.shape[1]
    perm = np.arange(n, dtype=np.int64)
    cdef long[::1] order = perm
    if n >= 2:
        _fill_permutation(order, n, bg)
    cdef Py_ssize_t k, i
    cdef double hd, fl, f, fr
    cdef double x, y
    for k in range(n):
        i = order[k]
        x = px[i]
        y = py[i]
        hd = heading[i]
        fl = _sample(trail, wall, irr_rects, irr_weights, w, h, x, y, hd - sa, so)
        f = _sample(trail, wall, irr_rects, irr_weights, w, h, x, y, hd, so)
        fr = _sample(trail, wall, irr_rects, irr_weights, w, h, x, y, hd + sa, so)
        if f > fl and f > fr:
            continue
        if f < fl and f < fr:
            if bg.next_double(bg.state) < 0.5:
                hd += ra
            else:
                hd -= ra
        elif fl < fr:
            hd += ra
        elif fr < fl:
            hd -= ra
        else:
            continue
        hd = fmod(hd, 360.0)
        if hd < 0.0:
            hd += 360.0
        if hd >= 360.0:
            hd = 0.0
        heading[i] = hd


def diffuse(object trail_arr, object wall_arr, double damping):
    """3x3 mean filter with absorbing walls, damped by (1 - damping)."""
    cdef double[:, ::1] trail = trail_arr
    cdef const unsigned char[:, ::1] wall = wall_arr
    cdef Py_ssize_t h = trail.shape[0]
    cdef Py_ssize_t w = trail.shape[1]
    padded_arr = np.zeros((h + 2, w + 2), dtype=np.float64)
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] padded = padded_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t x, y
    cdef double s
    cdef double keep = 1.0 - damping
    for y in range(h):
        for x in range(w):
            if not wall[y, x]:
                padded[y + 1, x + 1] = trail[y, x]
    # Same accumulation order as the pure backend's chain of array adds.
    for y in range(h):
        for x in range(w):
            if wall[y, x]:
                out[y, x] = 0.0
                continue
            s = padded[y, x]
            s += padded[y, x + 1]
            s += padded[y, x + 2]
            s += padded[y + 1, x]
            s += padded[y + 1, x + 1]
            s += padded[y + 1, x + 2]
            s += padded[y + 2, x]
            s += padded[y + 2, x + 1]
            s += padded[y + 2, x + 2]
            out[y, x] = s / 9.0 * keep
    return out_arr
