# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the pairing kernels (see package docstring)."""

import numpy as np

from libc.math cimport sin, cos

cdef double HALF_PI = 1.5707963267948966


def pair_terms(double[:, ::1] points, double[:, ::1] coeffs,
               int[::1] dir_offsets, double[:, ::1] dirs_flat,
               double[::1] amp, double[:, ::1] xi, double[::1] phase,
               int[::1] icol):
    """Per-term pairing of a packed chain against packed trig atoms."""
    cdef Py_ssize_t T = points.shape[0]
    cdef Py_ssize_t M = amp.shape[0]
    cdef Py_ssize_t n = points.shape[1]
    out_np = np.zeros(T, dtype=np.float64)
    if T == 0 or M == 0:
        return out_np
    cdef double[::1] out = out_np
    cdef Py_ssize_t t, m, d, i, lo, hi
    cdef double acc, factor, dot, angle
    for t in range(T):
        lo = dir_offsets[t]
        hi = dir_offsets[t + 1]
        acc = 0.0
        for m in range(M):
            factor = amp[m]
            for d in range(lo, hi):
                dot = 0.0
                for i in range(n):
                    dot += xi[m, i] * dirs_flat[d, i]
                factor *= dot
                if factor == 0.0:
                    break
            if factor == 0.0:
                continue
            dot = 0.0
            for i in range(n):
                dot += xi[m, i] * points[t, i]
            angle = dot + phase[m] + (hi - lo) * HALF_PI
            acc += factor * sin(angle) * coeffs[t, icol[m]]
        out[t] = acc
    return out_np


def pair_atoms(double[:, ::1] points, double[:, ::1] coeffs,
               int[::1] dir_offsets, double[:, ::1] dirs_flat,
               double[:, ::1] xi_cand, int[::1] icol_cand):
    """Chain response to unit-amplitude sin and cos candidate atoms."""
    cdef Py_ssize_t T = points.shape[0]
    cdef Py_ssize_t M = xi_cand.shape[0]
    cdef Py_ssize_t n = points.shape[1]
    sin_np = np.zeros(M, dtype=np.float64)
    cos_np = np.zeros(M, dtype=np.float64)
    if T == 0 or M == 0:
        return sin_np, cos_np
    cdef double[::1] sin_resp = sin_np
    cdef double[::1] cos_resp = cos_np
    cdef Py_ssize_t t, m, d, i, lo, hi
    cdef double factor, dot, angle, base
    for t in range(T):
        lo = dir_offsets[t]
        hi = dir_offsets[t + 1]
        for m in range(M):
            factor = 1.0
            for d in range(lo, hi):
                dot = 0.0
                for i in range(n):
                    dot += xi_cand[m, i] * dirs_flat[d, i]
                factor *= dot
                if factor == 0.0:
                    break
            if factor == 0.0:
                continue
            base = factor * coeffs[t, icol_cand[m]]
            if base == 0.0:
                continue
            dot = 0.0
            for i in range(n):
                dot += xi_cand[m, i] * points[t, i]
            angle = dot + (hi - lo) * HALF_PI
            sin_resp[m] += base * sin(angle)
            cos_resp[m] += base * cos(angle)
    return sin_np, cos_np
