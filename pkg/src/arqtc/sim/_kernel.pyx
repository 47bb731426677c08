# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernels.

Consumes exactly the same draws, in the same order, as ``_kernel_py``.
"""
import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport cos, sin, sqrt, pow, M_PI
from libc.stdlib cimport malloc, realloc, free
from libc.stdint cimport int64_t
from numpy.random cimport bitgen_t

from ._streams import TrialStreams

cnp.import_array()

cdef extern from "numpy/random/distributions.h":
    double random_standard_uniform(bitgen_t *bitgen_state) nogil
    double random_standard_exponential(bitgen_t *bitgen_state) nogil
    int64_t random_poisson(bitgen_t *bitgen_state, double lam) nogil


cdef struct Field:
    Py_ssize_t n
    Py_ssize_t cap
    double *x
    double *y
    double *w
    char *active


cdef int field_reserve(Field *f, Py_ssize_t n) except -1:
    cdef Py_ssize_t cap
    if n <= f.cap:
        return 0
    cap = max(n, 2 * f.cap, 64)
    f.x = <double *> realloc(f.x, cap * sizeof(double))
    f.y = <double *> realloc(f.y, cap * sizeof(double))
    f.w = <double *> realloc(f.w, cap * sizeof(double))
    f.active = <char *> realloc(f.active, cap * sizeof(char))
    if f.x == NULL or f.y == NULL or f.w == NULL or f.active == NULL:
        raise MemoryError()
    f.cap = cap
    return 0


cdef void field_free(Field *f):
    free(f.x)
    free(f.y)
    free(f.w)
    free(f.active)


cdef int draw_field(bitgen_t *rng, Field *f, double mean_count, double disk_radius,
                    double center_x) except -1:
    cdef Py_ssize_t i, n
    cdef double rad, ang
    n = <Py_ssize_t> random_poisson(rng, mean_count)
    field_reserve(f, n)
    f.n = n
    # radii first, then angles, as two separate fills
    for i in range(n):
        f.x[i] = random_standard_uniform(rng)
    for i in range(n):
        f.y[i] = random_standard_uniform(rng)
    for i in range(n):
        rad = disk_radius * sqrt(f.x[i])
        ang = 2.0 * M_PI * f.y[i]
        f.x[i] = center_x + rad * cos(ang)
        f.y[i] = rad * sin(ang)
    return 0


cdef void set_weights(Field *f, double rx, double alpha) nogil:
    cdef Py_ssize_t i
    cdef double dx, e = -0.5 * alpha
    for i in range(f.n):
        dx = f.x[i] - rx
        f.w[i] = pow(dx * dx + f.y[i] * f.y[i], e)


cdef bint slot_outage(bitgen_t *rng, Field *f, double p, double gain, double offset) nogil:
    cdef Py_ssize_t i
    cdef double interference = 0.0, h0
    for i in range(f.n):
        f.active[i] = random_standard_uniform(rng) < p
    for i in range(f.n):
        if f.active[i]:
            interference += random_standard_exponential(rng) * f.w[i]
    h0 = random_standard_exponential(rng)
    return not (h0 >= gain * interference + offset)


cdef bitgen_t *get_bitgen(object bg):
    return <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")


def run_trials(seed, Py_ssize_t start, Py_ssize_t stop, double mean_count, double disk_radius,
               double center_x, rx_x, gain, offset, horizons, double p, double alpha,
               bint resample):
    cdef Py_ssize_t n_hops = len(horizons)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] out = np.zeros((stop - start, n_hops), dtype=np.int32)
    cdef double[:] rxv = np.ascontiguousarray(rx_x, dtype=np.float64)
    cdef double[:] gv = np.ascontiguousarray(gain, dtype=np.float64)
    cdef double[:] ov = np.ascontiguousarray(offset, dtype=np.float64)
    cdef int[:] hv = np.ascontiguousarray(horizons, dtype=np.int32)
    cdef Field f
    streams = TrialStreams(seed)
    cdef bitgen_t *rng = get_bitgen(streams.bitgen)
    cdef Py_ssize_t row, trial, h
    cdef int slot
    f.n = 0
    f.cap = 0
    f.x = NULL
    f.y = NULL
    f.w = NULL
    f.active = NULL
    try:
        for row in range(stop - start):
            trial = start + row
            streams.reset(trial)
            if not resample:
                draw_field(rng, &f, mean_count, disk_radius, center_x)
            for h in range(n_hops):
                if not resample:
                    set_weights(&f, rxv[h], alpha)
                for slot in range(1, hv[h] + 1):
                    if resample:
                        draw_field(rng, &f, mean_count, disk_radius, center_x)
                        set_weights(&f, rxv[h], alpha)
                    if random_standard_uniform(rng) >= p:
                        continue
                    if not slot_outage(rng, &f, p, gv[h], ov[h]):
                        out[row, h] = slot
                        break
    finally:
        field_free(&f)
    return out


def run_outage_slots(seed, Py_ssize_t start, Py_ssize_t stop, double mean_count,
                     double disk_radius, double center_x, double rx_x, double gain,
                     double offset, int n_slots, double p, double alpha, bint resample):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((stop - start, n_slots), dtype=np.uint8)
    cdef Field f
    streams = TrialStreams(seed)
    cdef bitgen_t *rng = get_bitgen(streams.bitgen)
    cdef Py_ssize_t row
    cdef int slot
    f.n = 0
    f.cap = 0
    f.x = NULL
    f.y = NULL
    f.w = NULL
    f.active = NULL
    try:
        for row in range(stop - start):
            streams.reset(start + row)
            if not resample:
                draw_field(rng, &f, mean_count, disk_radius, center_x)
                set_weights(&f, rx_x, alpha)
            for slot in range(n_slots):
                if resample:
                    draw_field(rng, &f, mean_count, disk_radius, center_x)
                    set_weights(&f, rx_x, alpha)
                out[row, slot] = slot_outage(rng, &f, p, gain, offset)
    finally:
        field_free(&f)
    return out
