"""Pure-Python scan kernels over ranked probability arrays.

Reference implementations of the hot inner loops; the compiled variant in
``_scan_cy`` must match these bit for bit on the integer outputs and to
float64 rounding on the profiles. Inputs are probabilities in
non-increasing order.
"""

from __future__ import annotations

import math

import numpy as np

P_EPSILON = 1e-12


def top_p_cut(probs, p: float) -> int:
    """Smallest 1-based j whose cumulative mass reaches p - 1e-12; 0 if never."""
    target = p - P_EPSILON
    c = 0.0
    for j, q in enumerate(probs, 1):
        c += q
        if c >= target:
            return j
    return 0


def count_above(probs, threshold: float) -> int:
    """Number of leading entries strictly above threshold (input non-increasing)."""
    n = 0
    for q in probs:
        if q > threshold:
            n += 1
        else:
            break
    return n


def entropy_profile(probs) -> np.ndarray:
    """Entropy of the top-j renormalized distribution for j = 1..N.

    Uses the running-sum identity H_j = ln(S_j) - U_j / S_j with
    S_j = sum(p_i) and U_j = sum(p_i * ln p_i) over i <= j.
    """
    out = np.empty(len(probs), dtype=np.float64)
    s = 0.0
    u = 0.0
    for j, q in enumerate(probs):
        s += q
        u += q * math.log(q)
        out[j] = math.log(s) - u / s
    return out


def adaptive_cut(probs, delta_conf: float) -> int:
    """Cut where the min-max-scaled entropy profile first rises by less than
    delta_conf; N when it never does, 1 on a flat profile."""
    h = entropy_profile(probs)
    n = len(h)
    lo = h[0]
    hi = h[0]
    for j in range(1, n):
        if h[j] < lo:
            lo = h[j]
        elif h[j] > hi:
            hi = h[j]
    scale = hi - lo
    if scale == 0.0:
        return 1
    for j in range(n - 1):
        if (h[j + 1] - h[j]) / scale < delta_conf:
            return j + 1
    return n


def zipf_s_hat(probs, max_pairs: int = 100) -> float:
    """Least-squares Zipf exponent over up to max_pairs adjacent rank pairs.

    Regresses ln(p_i / p_{i+1}) on ln((i+1)/i) through the origin.
    Requires at least two entries.
    """
    m = min(max_pairs, len(probs) - 1)
    num = 0.0
    den = 0.0
    for i in range(1, m + 1):
        t = math.log((i + 1) / i)
        b = math.log(probs[i - 1] / probs[i])
        num += t * b
        den += t * t
    return num / den
