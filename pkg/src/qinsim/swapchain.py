"""Analytic model of a repeater chain split into N elementary segments.

Positions along the chain are numbered ``0..N``; segment ``i`` (1-based)
joins positions ``i-1`` and ``i`` and repeater ``j`` sits at position ``j``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linkbudget import Transmittance
from .model import BsmParams, MemoryParams


class SwapStrategy(str, enum.Enum):
    SEQUENTIAL = "sequential"
    BALANCED = "balanced"
    NESTED = "nested"


class ScalingModel(str, enum.Enum):
    EXPONENTIAL = "exponential"
    POLYNOMIAL = "polynomial"


@dataclass(frozen=True)
class SwapSchedule:
    """Rounds of simultaneous Bell measurements, by 1-based repeater index."""

    rounds: tuple[frozenset[int], ...]

    def __post_init__(self):
        rounds = tuple(frozenset(r) for r in self.rounds)
        object.__setattr__(self, "rounds", rounds)
        flat = [i for r in rounds for i in r]
        n = len(flat)
        if any(not r for r in rounds):
            raise ValueError("schedule rounds must be nonempty")
        if sorted(flat) != list(range(1, n + 1)):
            raise ValueError(
                f"schedule must partition 1..{n} with each index exactly once: {rounds}"
            )

    @property
    def n_bsm(self) -> int:
        return sum(len(r) for r in self.rounds)

    def firing_order(self) -> list[int]:
        """Repeater indices round by round, ascending within a round."""
        return [i for r in self.rounds for i in sorted(r)]

    def round_of(self) -> dict[int, int]:
        return {i: k for k, r in enumerate(self.rounds, start=1) for i in r}

    def reach(self) -> dict[int, tuple[int, int]]:
        """Chain positions each repeater's two pairs must extend to before it measures.

        Repeater ``j`` in round ``r`` waits until its left pair reaches the
        nearest position to its left that is a chain end or a repeater of
        round ``r`` or later, and likewise on the right. Earlier rounds
        therefore finish their stretch of the chain first.
        """
        rounds = self.round_of()
        n = self.n_bsm + 1
        out = {}
        for j, r in rounds.items():
            lo = j - 1
            while lo > 0 and rounds[lo] < r:
                lo -= 1
            hi = j + 1
            while hi < n and rounds[hi] < r:
                hi += 1
            out[j] = (lo, hi)
        return out


@dataclass(frozen=True)
class ChainConfig:
    n_segments: int
    per_segment_transmittance: tuple[float, ...]
    bsm: BsmParams
    source_attempt_rate_hz: float
    memory: MemoryParams | None = None

    def __post_init__(self):
        ts = tuple(Transmittance(t) for t in self.per_segment_transmittance)
        object.__setattr__(self, "per_segment_transmittance", ts)
        if self.n_segments < 1:
            raise ValueError("n_segments must be at least 1")
        if len(ts) != self.n_segments:
            raise ValueError(
                f"expected {self.n_segments} segment transmittances, got {len(ts)}"
            )
        if not self.source_attempt_rate_hz > 0:
            raise ValueError("source_attempt_rate_hz must be positive")


def segment_chain(total_length_km: float, n_segments: int) -> list[float]:
    """Split a link into ``n_segments`` equal parts."""
    if not total_length_km > 0:
        raise ValueError("total_length_km must be positive")
    if n_segments < 1:
        raise ValueError("n_segments must be at least 1")
    return [total_length_km / n_segments] * n_segments


def build_swap_schedule(
    n_bsm: int, strategy: SwapStrategy | str = SwapStrategy.BALANCED
) -> SwapSchedule:
    """Order in which the ``n_bsm`` repeaters of a chain measure.

    ``sequential`` fires one repeater per round from left to right.
    ``balanced`` fires all odd repeaters together, then all even ones, so
    four repeaters need only two rounds of two.
    ``nested`` is the doubling scheme: round ``k`` holds the repeaters whose
    index is an odd multiple of ``2**(k-1)``, so pairs only ever join pairs
    of similar length.
    """
    if n_bsm < 1:
        raise ValueError("n_bsm must be at least 1")
    strategy = SwapStrategy(strategy)
    if strategy is SwapStrategy.SEQUENTIAL:
        return SwapSchedule(tuple(frozenset({i}) for i in range(1, n_bsm + 1)))
    if strategy is SwapStrategy.NESTED:
        levels: dict[int, set[int]] = {}
        for i in range(1, n_bsm + 1):
            levels.setdefault((i & -i).bit_length(), set()).add(i)
        return SwapSchedule(tuple(frozenset(levels[k]) for k in sorted(levels)))
    odd = frozenset(range(1, n_bsm + 1, 2))
    even = frozenset(range(2, n_bsm + 1, 2))
    return SwapSchedule(tuple(r for r in (odd, even) if r))


def single_shot_e2e_prob(chain: ChainConfig) -> float:
    """Probability that one synchronized attempt yields end-to-end entanglement.

    Every segment must deliver its pair and every one of the ``N - 1`` swaps
    must succeed; memories play no part in a single shot.
    """
    p = math.prod(float(t) for t in chain.per_segment_transmittance)
    return p * chain.bsm.success_prob ** (chain.n_segments - 1)


def memoryless_rate_hz(chain: ChainConfig) -> float:
    return chain.source_attempt_rate_hz * single_shot_e2e_prob(chain)


@dataclass(frozen=True)
class ScalingFit:
    model: ScalingModel
    rss_exponential: float
    rss_polynomial: float
    r2_exponential: float
    r2_polynomial: float
    decay_db_per_km: float
    """Slope of the exponential fit, as a loss in dB per km."""
    exponent: float
    """Power of distance in the polynomial fit."""


def _linear_fit(x, y):
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return coef, float(resid @ resid)


def classify_scaling(distances_km, rates_hz) -> ScalingFit:
    """Decide whether rate falls off exponentially or polynomially with distance.

    Fits ``log(rate)`` against ``d`` and against ``log(d)`` by least squares
    and keeps the model with the smaller residual sum of squares; ties go to
    the polynomial model.
    """
    d = np.asarray(distances_km, dtype=float)
    r = np.asarray(rates_hz, dtype=float)
    if d.shape != r.shape or d.ndim != 1:
        raise ValueError("distances and rates must be 1-D sequences of equal length")
    if len(d) < 4:
        raise ValueError("need at least 4 points to classify scaling")
    if np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise ValueError("all rates must be positive and finite")
    if np.any(d <= 0) or np.any(np.diff(d) <= 0):
        raise ValueError("distances must be positive and strictly increasing")

    y = np.log(r)
    (_, slope), rss_exp = _linear_fit(d, y)
    (_, power), rss_poly = _linear_fit(np.log(d), y)
    ss_tot = float(((y - y.mean()) ** 2).sum())

    def r2(rss):
        return 1.0 if ss_tot == 0.0 else 1.0 - rss / ss_tot

    tol = 1e-12 * (1.0 + ss_tot)
    model = (
        ScalingModel.EXPONENTIAL
        if rss_exp < rss_poly - tol
        else ScalingModel.POLYNOMIAL
    )
    return ScalingFit(
        model=model,
        rss_exponential=rss_exp,
        rss_polynomial=rss_poly,
        r2_exponential=r2(rss_exp),
        r2_polynomial=r2(rss_poly),
        decay_db_per_km=float(-10.0 * slope / math.log(10.0)),
        exponent=float(power),
    )
