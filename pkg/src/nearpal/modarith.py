"""Modular arithmetic and prime machinery behind the fingerprint sketches.

Everything here is deterministic and pure; the only stateful object any
caller passes in is a seeded ``random.Random`` for prime sampling.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

log = logging.getLogger(__name__)

# Witness set proven complete for every integer below 3.3e24 (covers 2^64).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_IS_PRIME_LIMIT = 1 << 64


def is_prime(m: int) -> bool:
    """Deterministic primality test for integers in [2, 2^64]."""
    if m < 2:
        raise ValueError(f"is_prime requires m >= 2, got {m}")
    if m > _IS_PRIME_LIMIT:
        raise ValueError(f"is_prime supports m <= 2^64, got {m}")
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    if m in small:
        return True
    if any(m % p == 0 for p in small):
        return False
    d = m - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, m)
        if x == 1 or x == m - 1:
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeRange:
    """Closed integer interval [lo, hi] expected to contain primes."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo < 2:
            raise ValueError(f"PrimeRange.lo must be >= 2, got {self.lo}")
        if self.hi < self.lo:
            raise ValueError(f"PrimeRange needs hi >= lo, got [{self.lo}, {self.hi}]")

    @classmethod
    def widened(cls, lo: float, hi: float, min_primes: int = 2,
                min_product: int = 1) -> "PrimeRange":
        """Build [lo, hi], doubling hi until the range holds enough primes.

        ``min_product`` additionally forces the product of all primes in the
        range past the given value, which index-recovery needs.  Widening at
        tiny stream lengths is expected and logged.
        """
        ilo = max(2, math.ceil(lo))
        ihi = max(ilo, math.floor(hi))
        widened = False
        while True:
            ps = primes_in_range(cls(ilo, ihi))
            if len(ps) >= min_primes and math.prod(ps) > min_product:
                break
            ihi = ihi * 2
            widened = True
        if widened:
            log.info("prime range [%s, %s] widened to [%d, %d]", lo, hi, ilo, ihi)
        return cls(ilo, ihi)


def primes_in_range(rng: PrimeRange) -> list[int]:
    """All primes p with lo <= p <= hi, ascending."""
    lo, hi = rng.lo, rng.hi
    if hi - lo > 50_000_000:
        raise ValueError(f"prime range too wide to sieve: [{lo}, {hi}]")
    if hi <= 4_000_000:
        sieve = np.ones(hi + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, math.isqrt(hi) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        return [int(p) for p in np.flatnonzero(sieve) if p >= lo]
    # Segmented variant for large bounds: mark composites in [lo, hi] only.
    seg = np.ones(hi - lo + 1, dtype=bool)
    for p in range(2, math.isqrt(hi) + 1):
        if not is_prime(p):
            continue
        start = max(p * p, ((lo + p - 1) // p) * p)
        seg[start - lo :: p] = False
    return [int(lo + i) for i in np.flatnonzero(seg)]


def sample_prime(rng: PrimeRange, rand: random.Random) -> int:
    """One prime drawn uniformly from the primes inside ``rng``.

    Sampling is with replacement across repeated calls.
    """
    ps = primes_in_range(rng)
    if not ps:
        raise ConfigError(f"no prime in range [{rng.lo}, {rng.hi}]")
    return rand.choice(ps)


def mod_pow(base: int, exp: int, modulus: int) -> int:
    if exp < 0:
        raise ValueError("mod_pow requires exp >= 0")
    return pow(base, exp, modulus)


def mod_inv(a: int, p: int) -> int:
    """Inverse of a modulo prime p; a must be nonzero mod p."""
    if a % p == 0:
        raise ValueError("mod_inv of 0 is undefined")
    return pow(a, p - 2, p)


def crt_combine(residues: list[tuple[int, int]]) -> int:
    """Unique x in [0, prod(moduli)) matching every (residue, modulus) pair.

    Moduli must be pairwise coprime; the caller guarantees the product
    covers the value being reconstructed.
    """
    if not residues:
        raise ValueError("crt_combine needs at least one (residue, modulus) pair")
    for i in range(len(residues)):
        for j in range(i + 1, len(residues)):
            if math.gcd(residues[i][1], residues[j][1]) != 1:
                raise ValueError(
                    f"moduli {residues[i][1]} and {residues[j][1]} are not coprime"
                )
    x = 0
    m = 1
    for r, mod in residues:
        # Lift x from modulus m to modulus m*mod.
        inv = pow(m % mod, -1, mod) if mod > 1 else 0
        t = ((r - x) * inv) % mod
        x = x + m * t
        m = m * mod
    return x % m
