# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernels over ranked probability arrays.

Must match cptrie._scan_py exactly on integer outputs and to float64
rounding on profiles; the parity test suite enforces this.
"""

from libc.math cimport log, sqrt

import numpy as np

P_EPSILON = 1e-12


def top_p_cut(const double[::1] probs, double p):
    """Smallest 1-based j whose cumulative mass reaches p - 1e-12; 0 if never."""
    cdef double target = p - 1e-12
    cdef double c = 0.0
    cdef Py_ssize_t j
    for j in range(probs.shape[0]):
        c += probs[j]
        if c >= target:
            return j + 1
    return 0


def count_above(const double[::1] probs, double threshold):
    """Number of leading entries strictly above threshold (input non-increasing)."""
    cdef Py_ssize_t n = 0
    cdef Py_ssize_t j
    for j in range(probs.shape[0]):
        if probs[j] > threshold:
            n += 1
        else:
            break
    return n


def entropy_profile(const double[::1] probs):
    """Entropy of the top-j renormalized distribution for j = 1..N."""
    cdef Py_ssize_t n = probs.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    cdef double s = 0.0
    cdef double u = 0.0
    cdef double q
    cdef Py_ssize_t j
    for j in range(n):
        q = probs[j]
        s += q
        u += q * log(q)
        view[j] = log(s) - u / s
    return out


def adaptive_cut(const double[::1] probs, double delta_conf):
    """Cut where the min-max-scaled entropy profile first rises by less than
    delta_conf; N when it never does, 1 on a flat profile."""
    cdef Py_ssize_t n = probs.shape[0]
    h = np.empty(n, dtype=np.float64)
    cdef double[::1] view = h
    cdef double s = 0.0
    cdef double u = 0.0
    cdef double q, lo, hi, scale
    cdef Py_ssize_t j
    for j in range(n):
        q = probs[j]
        s += q
        u += q * log(q)
        view[j] = log(s) - u / s
    lo = view[0]
    hi = view[0]
    for j in range(1, n):
        if view[j] < lo:
            lo = view[j]
        elif view[j] > hi:
            hi = view[j]
    scale = hi - lo
    if scale == 0.0:
        return 1
    for j in range(n - 1):
        if (view[j + 1] - view[j]) / scale < delta_conf:
            return j + 1
    return n


def zipf_s_hat(const double[::1] probs, int max_pairs=100):
    """Least-squares Zipf exponent over up to max_pairs adjacent rank pairs."""
    cdef Py_ssize_t m = probs.shape[0] - 1
    if max_pairs < m:
        m = max_pairs
    cdef double num = 0.0
    cdef double den = 0.0
    cdef double t, b
    cdef Py_ssize_t i
    for i in range(1, m + 1):
        t = log((i + 1.0) / i)
        b = log(probs[i - 1] / probs[i])
        num += t * b
        den += t * t
    return num / den
