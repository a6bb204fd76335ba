"""The five truncation methods as pure functions record -> allowed-set size.

All methods produce rank-prefix allowed sets, so the size fully determines
the set; nothing here ever materializes token sets or draws samples. Every
method returns at least 1 (the protocol floor). A cutoff that would fall
beyond the exported top-N but inside the vocabulary raises RankOverflowError
instead of silently clamping, which would bias risk downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels
from .dist_io import DistributionRecord
from .errors import DegenerateZipfError, RankOverflowError

METHODS = ("adaptive", "eta", "mirostat", "top_k", "top_p")

ZIPF_MAX_PAIRS = 100


@dataclass(frozen=True)
class SamplerConfig:
    """Method identifier plus its scalar truncation parameter.

    Domains: top_k integer k >= 1; top_p p in (0, 1]; eta epsilon > 0;
    mirostat target surprise tau > 0 (bits); adaptive confidence step > 0.
    """

    method: str
    theta: float

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {METHODS}"
            )
        theta = self.theta
        if self.method == "top_k":
            if theta < 1 or float(theta) != int(theta):
                raise ValueError(f"top_k requires an integer k >= 1, got {theta!r}")
        elif self.method == "top_p":
            if not (0.0 < theta <= 1.0):
                raise ValueError(f"top_p requires p in (0, 1], got {theta!r}")
        elif theta <= 0.0:
            raise ValueError(f"{self.method} requires theta > 0, got {theta!r}")


def top_k_size(record: DistributionRecord, k: int) -> int:
    """Fixed cut at rank k, clamped to the vocabulary."""
    k = int(k)
    if k > record.n and k <= record.vocab_size:
        raise RankOverflowError(
            f"top_k k={k} exceeds the {record.n} exported tokens "
            f"(vocab {record.vocab_size})"
        )
    return min(k, record.n)


def top_p_size(record: DistributionRecord, p: float) -> int:
    """Smallest rank prefix whose cumulative mass reaches p."""
    j = kernels.top_p_cut(record.probs, p)
    if j:
        return j
    if record.tail_mass <= 0.0:
        # The listing is the whole distribution; float shortfall only.
        return record.n
    raise RankOverflowError(
        f"top_p p={p} falls inside the unexported tail "
        f"(tail_mass={record.tail_mass})"
    )


def eta_size(record: DistributionRecord, eps: float) -> int:
    """Keep tokens above min(eps, sqrt(eps) * exp(-H)), H the full entropy."""
    threshold = min(eps, math.sqrt(eps) * math.exp(-record.entropy_nats))
    count = kernels.count_above(record.probs, threshold)
    if count >= record.n and record.tail_mass > 0.0:
        raise RankOverflowError(
            f"eta eps={eps} admits every exported token with mass left in "
            f"the tail (tail_mass={record.tail_mass})"
        )
    return max(count, 1)


def _zipf_exponent(record: DistributionRecord) -> float:
    # Rank-independent of theta, so cache per record instance.
    cached = record.__dict__.get("_zipf_s_hat")
    if cached is None:
        cached = kernels.zipf_s_hat(record.probs, ZIPF_MAX_PAIRS)
        record.__dict__["_zipf_s_hat"] = cached
    return cached


def mirostat_size(record: DistributionRecord, tau: float) -> int:
    """Static single-step cut from Zipf statistics at target surprise tau (bits).

    k = round((eps * 2^mu / (1 - V^-eps))^(1/s)) with s the estimated Zipf
    exponent, eps = s - 1 and mu = 2 * tau (the feedback loop's
    initialization; this protocol scores isolated steps, so no feedback
    runs).
    """
    if record.n < 2:
        return 1
    s = _zipf_exponent(record)
    if s <= 1.0:
        raise DegenerateZipfError(
            f"estimated Zipf exponent {s:.6g} <= 1 on {record.prefix_id!r}"
        )
    eps = s - 1.0
    mu = 2.0 * tau
    k = round((eps * 2.0**mu / (1.0 - record.vocab_size ** (-eps))) ** (1.0 / s))
    if k > record.n:
        if k <= record.vocab_size:
            raise RankOverflowError(
                f"mirostat tau={tau} wants k={k} beyond the {record.n} "
                f"exported tokens (vocab {record.vocab_size})"
            )
        return record.n
    return max(k, 1)


def mirostat_feedback_update(
    mu: float, surprise_bits: float, tau: float, learning_rate: float = 1.0
) -> float:
    """One step of the surprise-tracking loop: mu <- mu - lr * (surprise - tau).

    The single-step protocol never runs this (each node is scored in
    isolation at mu = 2 * tau); it is kept for autoregressive use of the
    sampler outside the benchmark.
    """
    return mu - learning_rate * (surprise_bits - tau)


def adaptive_size(record: DistributionRecord, delta_conf: float) -> int:
    """Cut where the min-max-scaled renormalized-entropy increment first
    drops below delta_conf."""
    return kernels.adaptive_cut(record.probs, delta_conf)


_DISPATCH = {
    "top_k": lambda record, theta: top_k_size(record, int(theta)),
    "top_p": top_p_size,
    "eta": eta_size,
    "mirostat": mirostat_size,
    "adaptive": adaptive_size,
}


def allowed_set_size(record: DistributionRecord, config: SamplerConfig) -> int:
    """Dispatch to the configured method."""
    return _DISPATCH[config.method](record, config.theta)
