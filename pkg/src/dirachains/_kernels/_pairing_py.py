"""Vectorized numpy implementation of the pairing kernels."""

import math

import numpy as np

HALF_PI = math.pi / 2.0


def _direction_factors(dots: np.ndarray, dir_offsets: np.ndarray, T: int) -> np.ndarray:
    """Per (term, atom) product of xi.v over the term's direction list.

    dots has one row per flattened direction; terms own contiguous slices
    given by dir_offsets.  Grouping by position-within-slice turns the
    ragged products into a handful of dense multiplies.
    """
    M = dots.shape[1]
    counts = np.diff(dir_offsets)
    factors = np.ones((T, M))
    max_count = int(counts.max()) if T else 0
    for j in range(max_count):
        sel = np.nonzero(counts > j)[0]
        factors[sel] *= dots[dir_offsets[sel] + j]
    return factors


def pair_terms(points, coeffs, dir_offsets, dirs_flat, amp, xi, phase, icol):
    """Per-term pairing of a packed chain against packed trig atoms."""
    T = points.shape[0]
    if T == 0 or amp.shape[0] == 0:
        return np.zeros(T)
    dots = dirs_flat @ xi.T
    factors = _direction_factors(dots, dir_offsets, T)
    counts = np.diff(dir_offsets)
    angles = points @ xi.T + phase[None, :] + counts[:, None] * HALF_PI
    contrib = amp[None, :] * factors * np.sin(angles) * coeffs[:, icol]
    return contrib.sum(axis=1)


def pair_atoms(points, coeffs, dir_offsets, dirs_flat, xi_cand, icol_cand):
    """Chain response to unit-amplitude sin and cos candidate atoms."""
    M = xi_cand.shape[0]
    T = points.shape[0]
    if T == 0 or M == 0:
        return np.zeros(M), np.zeros(M)
    dots = dirs_flat @ xi_cand.T
    factors = _direction_factors(dots, dir_offsets, T)
    counts = np.diff(dir_offsets)
    angles = points @ xi_cand.T + counts[:, None] * HALF_PI
    base = factors * coeffs[:, icol_cand]
    sin_resp = (base * np.sin(angles)).sum(axis=0)
    cos_resp = (base * np.cos(angles)).sum(axis=0)
    return sin_resp, cos_resp
