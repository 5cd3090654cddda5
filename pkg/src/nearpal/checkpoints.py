"""Checkpoint schedules for the streaming engines.

A checkpoint is a stream position whose master-fingerprint snapshot later
positions test substrings against.  The multiplicative schedule keeps, per
geometric level k, checkpoints at multiples of a level stride and retires
them once they fall out of the level's lookback span; the additive
schedule simply drops a checkpoint every fixed stride and keeps them all.

Snapshots are positional: the master structure is append-only, so a
checkpoint only needs to remember its position.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

log = logging.getLogger(__name__)


@dataclass
class Checkpoint:
    """A live checkpoint: snapshot position plus schedule metadata."""

    position: int
    levels: set[int] = field(default_factory=set)
    longest: int = 0  # best accepted substring length starting just after


def alpha_for(epsilon: float) -> float:
    return math.sqrt(1.0 + epsilon) - 1.0


def base_level(alpha: float) -> int:
    """Smallest usable level: guarantees every level stride is >= 1."""
    return math.ceil(math.log2((1 + alpha) ** 2 / alpha) / math.log2(1 + alpha))


def level_stride(alpha: float, k: int) -> int:
    return math.floor(alpha * (1 + alpha) ** (k - 2))


def level_span(alpha: float, k: int) -> float:
    return 2.0 * (1 + alpha) ** k


class MultiplicativeSchedule:
    """Leveled geometric checkpoint schedule.

    Level k places checkpoints every ``floor(alpha*(1+alpha)^(k-2))``
    positions and deletes them once older than ``2*(1+alpha)^k``.  One
    physical checkpoint may carry several levels; it dies when its last
    level retires it.
    """

    def __init__(self, epsilon: float, n_bound: int):
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.epsilon = epsilon
        self.alpha = alpha_for(epsilon)
        self.k0 = base_level(self.alpha)
        ks, strides, spans = [], [], []
        k = self.k0
        while True:
            s = level_stride(self.alpha, k)
            if s > n_bound:
                break
            ks.append(k)
            strides.append(s)
            spans.append(level_span(self.alpha, k))
            k += 1
        self.levels = ks
        self.strides = strides
        self.spans = spans
        self._level_queues: list[deque[int]] = [deque() for _ in ks]
        self.by_pos: dict[int, Checkpoint] = {}
        self._order: list[int] = []  # ascending positions, may contain dead
        self._dead = 0

    def step(self, x: int) -> None:
        created = None
        for i, k in enumerate(self.levels):
            if x % self.strides[i] == 0:
                if created is None:
                    created = self.by_pos.get(x)
                    if created is None:
                        created = Checkpoint(x)
                        self.by_pos[x] = created
                        self._order.append(x)
                created.levels.add(k)
                self._level_queues[i].append(x)
        for i, k in enumerate(self.levels):
            qd = self._level_queues[i]
            horizon = x - self.spans[i]
            while qd and qd[0] < horizon:
                pos = qd.popleft()
                cp = self.by_pos.get(pos)
                if cp is not None:
                    cp.levels.discard(k)
                    if not cp.levels:
                        del self.by_pos[pos]
                        self._dead += 1
        if self._dead > len(self._order) // 2 + 16:
            self._order = [p for p in self._order if p in self.by_pos]
            self._dead = 0

    def live_positions(self) -> list[int]:
        """Live checkpoint positions, ascending (oldest first)."""
        return [p for p in self._order if p in self.by_pos]

    def live_count(self) -> int:
        return len(self.by_pos)


class AdditiveSchedule:
    """Fixed-stride schedule: a checkpoint every floor(E/2) positions."""

    def __init__(self, error_bound: int, n_bound: int):
        if error_bound < 1:
            raise ValueError("additive error bound must be >= 1")
        self.error_bound = error_bound
        self.stride = max(1, error_bound // 2)
        if error_bound < 2:
            log.info("additive error %d degenerates to a checkpoint at every "
                     "position", error_bound)
        self.by_pos: dict[int, Checkpoint] = {}
        self._order: list[int] = []

    def step(self, x: int) -> None:
        if x % self.stride == 0:
            cp = Checkpoint(x)
            self.by_pos[x] = cp
            self._order.append(x)

    def live_positions(self) -> list[int]:
        return list(self._order)

    def live_count(self) -> int:
        return len(self._order)


def simulate_level_counts(epsilon: float, n: int):
    """Closed-form replay of the multiplicative schedule.

    For each level, live checkpoints at step x are exactly the stride
    multiples inside [x - span, x]; counts for all x are returned as an
    array per level along with strides and spans.  Used to validate the
    incremental schedule and to check the published geometry properties at
    scales where stepping one-by-one would be too slow.
    """
    import numpy as np

    alpha = alpha_for(epsilon)
    k0 = base_level(alpha)
    xs = np.arange(1, n + 1, dtype=np.int64)
    out = []
    k = k0
    while True:
        s = level_stride(alpha, k)
        if s > n:
            break
        span = level_span(alpha, k)
        lo = np.ceil(np.maximum(xs - span, s) / s).astype(np.int64)
        hi = xs // s
        counts = np.maximum(hi - lo + 1, 0)
        out.append((k, s, span, counts))
        k += 1
    return out
