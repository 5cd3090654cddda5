"""Karp-Rabin forward and reverse fingerprints over residue-class subpatterns.

A stream position i belongs, for every sketch modulus m, to the class of
positions congruent to i mod m.  Each class keeps a forward fingerprint
sum(sym * B^rank) and a reverse fingerprint sum(sym * B^-rank), where rank
numbers the class members 1, 2, ... in stream order.  Two levels of moduli
are kept: coarse primes p (good for counting disagreeing classes) and
refined products p*q (good for pinning a lone disagreement to an exact
index by remaindering).

The master structure stores, per modulus and per stream position, the
cumulative fingerprint of that position's class.  Because values are only
ever appended, a "snapshot" is just a position; any past prefix state can
be read back in O(1) per class.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InternalError
from .modarith import PrimeRange, is_prime, mod_inv, primes_in_range, sample_prime

log = logging.getLogger(__name__)

MERSENNE61 = (1 << 61) - 1

_U = np.uint64
_MASK30 = _U((1 << 30) - 1)
_MASK31 = _U((1 << 31) - 1)
_M61 = _U(MERSENNE61)
_SH30 = _U(30)
_SH31 = _U(31)
_SH61 = _U(61)


# ---------------------------------------------------------------------------
# modular vector kernels

def _mulmod61_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact (a*b) mod 2^61-1 on uint64 vectors, a, b < 2^61-1."""
    a_hi = a >> _SH31
    a_lo = a & _MASK31
    b_hi = b >> _SH31
    b_lo = b & _MASK31
    mid = a_hi * b_lo + a_lo * b_hi          # < 2^62
    mid_hi = mid >> _SH30
    mid_lo = mid & _MASK30
    t = _U(2) * a_hi * b_hi + mid_hi + (mid_lo << _SH31) + a_lo * b_lo
    t = (t & _M61) + (t >> _SH61)
    t = (t & _M61) + (t >> _SH61)
    return np.where(t >= _M61, t - _M61, t)


def _mulmod_obj(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    prod = (a.astype(object) * b.astype(object)) % p
    return prod.astype(np.uint64)


class _Modulus:
    """Vectorized mulmod/addmod/submod for one fixed prime modulus."""

    def __init__(self, p: int):
        self.p = p
        self._pu = _U(p)
        if p == MERSENNE61:
            self._mul = _mulmod61_vec
        elif p < (1 << 32):
            self._mul = lambda a, b: (a * b) % self._pu
        else:
            # Correct fallback for unusual caller-chosen moduli; slow.
            self._mul = lambda a, b: _mulmod_obj(a, b, p)

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._mul(a, b)

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        s = a + b
        return np.where(s >= self._pu, s - self._pu, s)

    def sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.where(a >= b, a - b, a + (self._pu - b))


# ---------------------------------------------------------------------------
# parameters

def encode_symbol(byte_value: int) -> int:
    """Shift raw byte v to v+1 so a zero symbol still contributes."""
    return byte_value + 1


@dataclass(frozen=True)
class FingerprintParams:
    """Immutable sketch configuration shared by one run's structures."""

    P: int
    B: int
    B_inv: int
    n_bound: int
    d: int
    beta: Fraction
    first_level_primes: tuple[int, ...]
    second_level_primes: tuple[int, ...]
    seed: int
    moduli: tuple[int, ...] = field(repr=False)          # all class families
    second_of: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)

    @property
    def n_first(self) -> int:
        return len(self.first_level_primes)

    def reject_threshold_exceeded(self, delta: int) -> bool:
        """True iff delta > (1+beta)*d, compared in exact rationals."""
        q = self.beta.denominator
        return delta * q > self.d * (q + self.beta.numerator)

    @classmethod
    def build(cls, n_bound: int, d: int, seed: int,
              beta: Fraction = Fraction(1, 16),
              modulus: int | None = None) -> "FingerprintParams":
        """Derive a full parameter set for streams of length <= n_bound.

        The fingerprint modulus defaults to the Mersenne prime 2^61-1,
        which keeps every product inside hardware words; collision odds
        only shrink versus smaller moduli.
        """
        if n_bound < 1:
            raise ValueError("n_bound must be positive")
        if d < 0:
            raise ValueError("d must be non-negative")
        n_eff = max(n_bound, 4)
        p_mod = MERSENNE61 if modulus is None else modulus
        if not is_prime(p_mod):
            raise ValueError(f"modulus {p_mod} is not prime")
        rand = random.Random(seed)
        b = rand.randrange(2, p_mod - 1)
        log2n = math.log2(n_eff)
        coarse_lo = (d / float(beta)) * log2n ** 2
        coarse_hi = 34.0 * (d / float(beta)) * log2n ** 2
        coarse_range = PrimeRange.widened(coarse_lo, coarse_hi)
        count = 2 * math.ceil(log2n)
        firsts = tuple(sample_prime(coarse_range, rand) for _ in range(count))
        fine_range = PrimeRange.widened(log2n, 3.0 * log2n, min_primes=2,
                                        min_product=n_eff)
        seconds = tuple(primes_in_range(fine_range))
        moduli = list(firsts)
        second_of: list[tuple[tuple[int, int], ...]] = []
        for p in firsts:
            fams = []
            for q in seconds:
                fams.append((q, len(moduli)))
                moduli.append(p * q)
            second_of.append(tuple(fams))
        return cls(P=p_mod, B=b, B_inv=mod_inv(b, p_mod), n_bound=n_bound,
                   d=d, beta=beta, first_level_primes=firsts,
                   second_level_primes=seconds, seed=seed,
                   moduli=tuple(moduli), second_of=tuple(second_of))


# ---------------------------------------------------------------------------
# scalar fingerprint algebra (reference semantics; also used on bundles)

@dataclass(frozen=True)
class ClassFingerprint:
    """Forward/reverse fingerprint of one residue class, ranks from 1."""

    forward: int
    reverse: int
    count: int

    @staticmethod
    def zero() -> "ClassFingerprint":
        return ClassFingerprint(0, 0, 0)


def forward_fp(seq: list[int], params: FingerprintParams) -> int:
    """sum(seq[x] * B^x) mod P with x counted from 1."""
    acc = 0
    bp = 1
    for s in seq:
        bp = bp * params.B % params.P
        acc = (acc + s * bp) % params.P
    return acc


def reverse_fp(seq: list[int], params: FingerprintParams) -> int:
    """sum(seq[x] * B^-x) mod P with x counted from 1."""
    acc = 0
    bp = 1
    for s in seq:
        bp = bp * params.B_inv % params.P
        acc = (acc + s * bp) % params.P
    return acc


def concat_class_fp(left: ClassFingerprint, right: ClassFingerprint,
                    params: FingerprintParams) -> ClassFingerprint:
    """Fingerprint of the concatenation of two adjacent class subsequences."""
    p, b, binv = params.P, params.B, params.B_inv
    fwd = (left.forward + pow(b, left.count, p) * right.forward) % p
    rev = (left.reverse + pow(binv, left.count, p) * right.reverse) % p
    return ClassFingerprint(fwd, rev, left.count + right.count)


def mirror_class(rep: int, m: int, c: int, x: int) -> int:
    """Class holding the mirror position c+x-i of every i in class ``rep``.

    Classes are named by 1-based representatives in [1, m]; rep r covers
    the positions congruent to r mod m.
    """
    return (c + x - rep - 1) % m + 1


def _class_count(rep: int, y: int, m: int) -> int:
    """Number of positions in [1, y] congruent to rep (mod m)."""
    return 0 if rep > y else (y - rep) // m + 1


def _class_last(rep: int, y: int, m: int) -> int:
    """Largest position <= y in class rep, or 0 when the class is empty."""
    c = _class_count(rep, y, m)
    return rep + m * (c - 1) if c else 0


# ---------------------------------------------------------------------------
# master fingerprints

class MasterFingerprints:
    """Running class fingerprints of the stream prefix, all families.

    Layout: ``fwd[f, i]`` / ``rev[f, i]`` hold the cumulative fingerprint of
    position i's own class under family f after i symbols.  Column 0 is the
    empty state.  Since each append writes one fresh column entry per family
    and never touches older columns, the value of class r at any past
    position y is ``fwd[f, last_member(r, y)]`` -- history and snapshots come
    for free.
    """

    def __init__(self, params: FingerprintParams):
        self.params = params
        self.position = 0
        self._mod = _Modulus(params.P)
        self.moduli = np.asarray(params.moduli, dtype=np.int64)
        n = params.n_bound
        nf = len(params.moduli)
        self.fwd = np.zeros((nf, n + 1), dtype=np.uint64)
        self.rev = np.zeros((nf, n + 1), dtype=np.uint64)
        self._fam_idx = np.arange(nf, dtype=np.int64)
        self._build_power_tables()

    def _build_power_tables(self) -> None:
        p, b, binv = self.params.P, self.params.B, self.params.B_inv
        size = 3 * self.params.n_bound + 4
        pw = [1] * size
        ipw = [1] * size
        for j in range(1, size):
            pw[j] = pw[j - 1] * b % p
            ipw[j] = ipw[j - 1] * binv % p
        self.bpow = np.asarray(pw, dtype=np.uint64)
        self.bpow_inv = np.asarray(ipw, dtype=np.uint64)

    def append(self, fwd_sym: int, rev_sym: int) -> None:
        """Push one encoded symbol (forward and reverse encodings may differ
        under a complement pairing)."""
        x = self.position + 1
        if x > self.params.n_bound:
            raise ValueError(f"stream longer than declared bound {self.params.n_bound}")
        m = self.moduli
        prev = np.maximum(x - m, 0)
        rank = (x + m - 1) // m
        fterm = self._mod.mul(np.full(len(m), fwd_sym, dtype=np.uint64),
                              self.bpow[rank])
        rterm = self._mod.mul(np.full(len(m), rev_sym, dtype=np.uint64),
                              self.bpow_inv[rank])
        self.fwd[self._fam_idx, x] = self._mod.add(self.fwd[self._fam_idx, prev], fterm)
        self.rev[self._fam_idx, x] = self._mod.add(self.rev[self._fam_idx, prev], rterm)
        self.position = x

    # -- scalar lookups ----------------------------------------------------

    def class_fp_at(self, fam: int, rep: int, pos: int) -> ClassFingerprint:
        """Prefix fingerprint of class ``rep`` under family ``fam`` at
        stream position ``pos`` (master ranks, not renumbered)."""
        if pos > self.position:
            raise ValueError("lookup beyond current position")
        m = int(self.moduli[fam])
        last = _class_last(rep, pos, m)
        cnt = _class_count(rep, pos, m)
        return ClassFingerprint(int(self.fwd[fam, last]), int(self.rev[fam, last]), cnt)

    def logical_words_at(self, pos: int) -> int:
        """Fingerprint words a standalone snapshot at ``pos`` would hold."""
        return int(2 * np.minimum(self.moduli, pos).sum())

    # -- vectorized substring comparison ------------------------------------

    def classes_differ(self, c_sub, x: int, fam: int,
                       reps: np.ndarray) -> np.ndarray:
        """For each class rep, does the substring S[c_sub, x] restricted to
        that class fail to mirror onto its partner class?

        The test compares the class's forward fingerprint against B^(k+1)
        times the reverse fingerprint of the mirrored class, all sliced to
        the substring; equality certifies (up to fingerprint collision) that
        every member equals its mirror-image position.

        ``c_sub`` may be a scalar or an array broadcastable against
        ``reps`` (e.g. a column of starts against a grid of classes), which
        lets one call screen many substrings ending at the same position.
        """
        m = int(self.moduli[fam])
        F = self.fwd[fam]
        R = self.rev[fam]
        snap = c_sub - 1
        mreps = (c_sub + x - reps - 1) % m + 1

        cnt_c = np.where(reps <= snap, (snap - reps) // m + 1, 0)
        cnt_x = np.where(reps <= x, (x - reps) // m + 1, 0)
        k = cnt_x - cnt_c
        mcnt_c = np.where(mreps <= snap, (snap - mreps) // m + 1, 0)

        last_c = np.where(cnt_c > 0, reps + m * (cnt_c - 1), 0)
        last_x = np.where(cnt_x > 0, reps + m * (cnt_x - 1), 0)
        mcnt_x = np.where(mreps <= x, (x - mreps) // m + 1, 0)
        mlast_c = np.where(mcnt_c > 0, mreps + m * (mcnt_c - 1), 0)
        mlast_x = np.where(mcnt_x > 0, mreps + m * (mcnt_x - 1), 0)

        fdiff = self._mod.sub(F[last_x], F[last_c])
        rdiff = self._mod.sub(R[mlast_x], R[mlast_c])
        exps = k + 1 + cnt_c + mcnt_c
        rhs = self._mod.mul(self.bpow[exps], rdiff)
        return fdiff != rhs

    def substring_reps(self, c_sub: int, x: int, fam: int) -> np.ndarray:
        """Class representatives populated inside S[c_sub, x], one each.

        Ordered outside-in by symmetric pairs, so that scans looking for
        disagreeing classes meet mismatched pairs as early as their
        endpoints sit near either boundary.
        """
        m = int(self.moduli[fam])
        length = x - c_sub + 1
        if length <= 0:
            return np.empty(0, dtype=np.int64)
        if m >= length:
            half = (length + 1) // 2
            off = np.arange(half, dtype=np.int64)
            pos = np.empty(2 * half, dtype=np.int64)
            pos[0::2] = c_sub + off
            pos[1::2] = x - off
            if length % 2 == 1:
                pos = pos[:-1]  # both halves end on the central position
            return (pos - 1) % m + 1
        return np.arange(1, m + 1, dtype=np.int64)


def slice_class_fp(snapshot_pos: int, master: MasterFingerprints, fam: int,
                   rep: int, *, end_pos: int | None = None) -> ClassFingerprint:
    """Fingerprint of class ``rep`` within S[snapshot_pos+1, end_pos], with
    ranks renumbered from 1.

    ``snapshot_pos`` plays the role of a checkpoint snapshot; ``end_pos``
    defaults to the master's current position.
    """
    x = master.position if end_pos is None else end_pos
    if snapshot_pos > x:
        raise ValueError("snapshot after current position")
    p = master.params.P
    lo = master.class_fp_at(fam, rep, snapshot_pos)
    hi = master.class_fp_at(fam, rep, x)
    cnt = hi.count - lo.count
    shift_inv = pow(master.params.B_inv, lo.count, p)
    shift = pow(master.params.B, lo.count, p)
    fwd = (hi.forward - lo.forward) % p * shift_inv % p
    rev = (hi.reverse - lo.reverse) % p * shift % p
    return ClassFingerprint(fwd, rev, cnt)


# ---------------------------------------------------------------------------
# relocatable bundles (two-pass gap storage)

class FingerprintBundle:
    """Per-class fingerprints of one substring, classes renumbered so the
    substring's first symbol is position 1.

    Relative numbering makes bundles of equal substrings compare equal no
    matter where they sat in the stream, which is what gap deduplication
    needs; concatenation re-aligns the right operand's classes by the left
    length.
    """

    __slots__ = ("params", "length", "fams")

    def __init__(self, params: FingerprintParams, length: int,
                 fams: list[dict[int, ClassFingerprint]]):
        self.params = params
        self.length = length
        self.fams = fams

    @classmethod
    def empty(cls, params: FingerprintParams) -> "FingerprintBundle":
        return cls(params, 0, [dict() for _ in params.moduli])

    @classmethod
    def slice_from_master(cls, master: MasterFingerprints, start_before: int,
                          end: int) -> "FingerprintBundle":
        """Bundle of S[start_before+1, end] with relative class labels."""
        length = end - start_before
        if length < 0:
            raise ValueError("end precedes start")
        params = master.params
        fams: list[dict[int, ClassFingerprint]] = []
        for fam, m in enumerate(params.moduli):
            d: dict[int, ClassFingerprint] = {}
            for rel in range(1, min(m, length) + 1):
                abs_rep = (start_before + rel - 1) % m + 1
                cf = slice_class_fp(start_before, master, fam, abs_rep,
                                    end_pos=end)
                if cf.count:
                    d[rel] = cf
            fams.append(d)
        return cls(params, length, fams)

    def concat(self, other: "FingerprintBundle") -> "FingerprintBundle":
        if self.params is not other.params and self.params != other.params:
            raise InternalError("bundle concat across parameter sets")
        out: list[dict[int, ClassFingerprint]] = []
        for m, left, right in zip(self.params.moduli, self.fams, other.fams):
            d = dict(left)
            for rel_r, cf in right.items():
                rel = (self.length + rel_r - 1) % m + 1
                cur = d.get(rel, ClassFingerprint.zero())
                d[rel] = concat_class_fp(cur, cf, self.params)
            out.append(d)
        return FingerprintBundle(self.params, self.length + other.length, out)

    def signature(self) -> tuple:
        """Hashable content identity used for gap deduplication."""
        return (self.length,
                tuple(tuple(sorted((r, cf.forward, cf.reverse, cf.count)
                                   for r, cf in fam.items()))
                      for fam in self.fams))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, FingerprintBundle)
                and self.length == other.length and self.fams == other.fams)

    def __hash__(self) -> int:
        return hash(self.signature())
