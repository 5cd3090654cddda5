"""Ground-truth references and adversarial instance generators.

Everything here recomputes from the raw string, deliberately sharing no
code with the streaming engines, so engine answers can be judged against
an independent source of truth.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

log = logging.getLogger(__name__)

BRUTE_SIZE_LIMIT = 8192


def _as_array(s) -> np.ndarray:
    if isinstance(s, (bytes, bytearray)):
        return np.frombuffer(bytes(s), dtype=np.uint8)
    return np.asarray(list(s), dtype=np.int64)


def _map_table(pairing: dict[int, int] | None, like: np.ndarray) -> np.ndarray:
    size = 256 if like.dtype == np.uint8 else int(like.max(initial=0)) + 1
    table = np.arange(size, dtype=like.dtype)
    if pairing:
        for a, b in pairing.items():
            if a < size:
                table[a] = b
    return table


def exact_ham_reverse(s, x: int, y: int,
                      pairing: dict[int, int] | None = None
                      ) -> tuple[int, tuple[int, ...]]:
    """Hamming distance between S[x, y] and its reverse, plus the mismatched
    absolute indices.

    With a ``pairing`` map f, position i mismatches when S[i] != f(S[x+y-i]),
    the complementary-palindrome reading.
    """
    arr = _as_array(s)
    if not (1 <= x and x <= y + 1 and y <= len(arr)):
        raise ValueError(f"bad substring bounds [{x}, {y}] for length {len(arr)}")
    seg = arr[x - 1:y]
    table = _map_table(pairing, arr)
    mism = seg != table[seg[::-1]]
    idx = np.flatnonzero(mism) + x
    return int(mism.sum()), tuple(int(i) for i in idx)


def _extend_radii(mism: np.ndarray, pair_budget: int) -> int:
    """Largest r with at most pair_budget mismatches among the first r pairs."""
    if pair_budget < 0:
        return -1
    if mism.size == 0:
        return 0
    cum = np.cumsum(mism)
    return int(np.searchsorted(cum, pair_budget, side="right"))


def brute_longest(s, d: int, pairing: dict[int, int] | None = None,
                  limit: int = BRUTE_SIZE_LIMIT):
    """Exact longest d-near-palindrome by center extension, O(n^2) worst case.

    Returns the smallest-start witness among equal-length maxima.  Refuses
    inputs longer than ``limit``.
    """
    from .onepass import PalindromeAnswer  # avoids a module cycle at import

    arr = _as_array(s)
    n = len(arr)
    if n > limit:
        raise ValueError(f"input length {n} exceeds oracle limit {limit}")
    table = _map_table(pairing, arr)
    mapped = table[arr]
    best_len, best_start = 0, 1
    # even lengths: center after position i (1-based last-of-left-half i)
    for i in range(1, n):
        k = min(i, n - i)
        mism = mapped[i - 1::-1][:k] != arr[i:i + k]
        r = _extend_radii(mism, d // 2)
        if r > 0:
            length, start = 2 * r, i - r + 1
            if length > best_len or (length == best_len and start < best_start):
                best_len, best_start = length, start
    # odd lengths centered on position i
    for i in range(1, n + 1):
        mid_pen = int(mapped[i - 1] != arr[i - 1])
        if mid_pen > d:
            continue
        k = min(i - 1, n - i)
        mism = mapped[i - 2::-1][:k] != arr[i:i + k]
        r = _extend_radii(mism, (d - mid_pen) // 2)
        length, start = 2 * r + 1, i - r
        if length > best_len or (length == best_len and start < best_start):
            best_len, best_start = length, start
    if best_len == 0:
        return PalindromeAnswer(start=1, length=0, mismatches=(), mode="oracle",
                                n=n, d=d)
    _, mism_idx = exact_ham_reverse(arr, best_start, best_start + best_len - 1,
                                    pairing)
    return PalindromeAnswer(start=best_start, length=best_len,
                            mismatches=mism_idx, mode="oracle", n=n, d=d)


def longest_by_diagonal_sums(s, d: int,
                             pairing: dict[int, int] | None = None
                             ) -> tuple[int, int]:
    """Independent reference: (length, start) of the longest d-near-palindrome.

    Computes mismatch counts from cumulative sums along anti-diagonals of
    the full pairwise mismatch matrix; shares nothing with the
    center-extension oracle beyond the problem statement.
    """
    arr = _as_array(s)
    n = len(arr)
    if n == 0:
        return 0, 1
    table = _map_table(pairing, arr)
    mism = table[arr][:, None] != arr[None, :]
    cum = np.zeros((n + 1, n + 1), dtype=np.int32)
    # cum[i, j] counts mismatches along the anti-diagonal inward from (i, j)
    for i in range(n - 1, -1, -1):
        cum[i, 1:n] = mism[i, 1:n] + cum[i + 1, 0:n - 1]
        cum[i, 0] = mism[i, 0]
    diag_pen = np.diagonal(mism).astype(np.int32)
    for length in range(n, 0, -1):
        i0 = np.arange(0, n - length + 1)
        j0 = i0 + length - 1
        h = length // 2
        pairs = cum[i0, j0] - cum[i0 + h, j0 - h]
        ham = 2 * pairs
        if length % 2 == 1:
            ham = ham + diag_pen[i0 + h]
        ok = np.flatnonzero(ham <= d)
        if ok.size:
            return length, int(ok[0]) + 1
    return 0, 1


def longest_triple_loop(s, d: int) -> tuple[int, int]:
    """Fully naive reference for tiny inputs: literal definition scan."""
    seq = list(_as_array(s))
    n = len(seq)
    for length in range(n, 0, -1):
        for start in range(1, n - length + 2):
            sub = seq[start - 1:start - 1 + length]
            ham = sum(1 for a, b in zip(sub, reversed(sub)) if a != b)
            if ham <= d:
                return length, start
    return 0, 1


# ---------------------------------------------------------------------------
# adversarial instance generators

@dataclass(frozen=True)
class HardInstanceSpec:
    """Recipe for an adversarial corpus string.

    ``target_ham`` chooses the regime: equal to d builds a full-length
    d-near-palindrome, d+1 builds one whose longest d-near-palindrome is
    provably short of full length.
    """

    kind: str  # "multiplicative" | "additive"
    n: int
    d: int
    target_ham: int
    seed: int
    E: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("multiplicative", "additive"):
            raise ConfigError(f"unknown hard-instance kind {self.kind!r}")
        if self.target_ham not in (self.d, self.d + 1):
            raise ConfigError("target_ham must be d or d+1")
        if self.d * self.d * 64 > self.n:
            raise ConfigError("requires d^2 <= n/64")
        if self.kind == "additive":
            if self.E is None or self.d < 1:
                raise ConfigError("additive instances need E and d >= 1")
            if self.E <= self.d:
                raise ConfigError("additive instances need E > d")


def gen_nu(length: int) -> bytes:
    """Prefix of the block string 1 0 11 00 111 000 ... as ASCII bits."""
    out = bytearray()
    k = 1
    while len(out) < length:
        for ch in (0x31, 0x30):
            out.extend([ch] * k)
        k += 1
    return bytes(out[:length])


def _flip_count(d: int, target_ham: int) -> int:
    # Each flipped position becomes a mirrored mismatch pair, costing 2
    # toward the Hamming budget; d//2 flips stay within budget d, one more
    # flip provably exceeds it.
    return d // 2 if target_ham == d else d // 2 + 1


def gen_mult_hard(spec: HardInstanceSpec) -> bytes:
    """Block-padded instance nu^R x y^R nu separating budget regimes."""
    if spec.kind != "multiplicative":
        raise ConfigError("spec is not multiplicative")
    if spec.n % 4:
        raise ConfigError("multiplicative instances need n divisible by 4")
    quarter = spec.n // 4
    if spec.d > quarter:
        raise ConfigError(f"cannot place {spec.d} ones in {quarter} positions")
    rng = random.Random(spec.seed)
    nu = gen_nu(quarter)
    x = bytearray(b"0" * quarter)
    for i in rng.sample(range(quarter), spec.d):
        x[i] = 0x31
    flips = _flip_count(spec.d, spec.target_ham)
    y = bytearray(x)
    for i in rng.sample(range(quarter), flips):
        y[i] = 0x31 if y[i] == 0x30 else 0x30
    return nu[::-1] + bytes(x) + bytes(y[::-1]) + nu


def gen_add_hard(spec: HardInstanceSpec) -> bytes:
    """Run-padded instance 1^E x1 1^(E/d) x2 ... y2 1^(E/d) y1 1^E."""
    if spec.kind != "additive":
        raise ConfigError("spec is not additive")
    if spec.n % 2 or spec.n < 4:
        raise ConfigError("additive instances need even n >= 4")
    d, e = spec.d, spec.E
    if e % d:
        e = ((e + d - 1) // d) * d
        log.info("additive pad %d rounded up to %d (multiple of d=%d)",
                 spec.E, e, d)
    half = spec.n // 2
    rng = random.Random(spec.seed)
    x = bytearray(rng.choice((0x30, 0x31)) for _ in range(half))
    flips = _flip_count(d, spec.target_ham)
    y = bytearray(x)
    for i in rng.sample(range(half), flips):
        y[i] = 0x31 if y[i] == 0x30 else 0x30
    spacer = b"1" * (e // d)
    parts = [b"1" * e]
    for i, xi in enumerate(x):
        if i:
            parts.append(spacer)
        parts.append(bytes([xi]))
    for i in range(half - 1, -1, -1):
        parts.append(bytes([y[i]]))
        if i:
            parts.append(spacer)
    parts.append(b"1" * e)
    return b"".join(parts)
