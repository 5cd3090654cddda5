"""Near-palindrome decision on class fingerprints, with mismatch recovery.

Stage 1 counts, per coarse prime, how many residue classes fail to mirror
onto their partner class; the maximum count is a deterministic lower bound
on the Hamming distance between the substring and its reverse, so a count
past the rejection threshold certifies "not close".  Stage 2 pins down the
actual mismatched indices: a mismatch alone in its coarse class leaves, for
every refining prime q, exactly one disagreeing refined class, and the
index is rebuilt from those remainders by the Chinese remainder theorem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InternalError
from .fingerprint import (ClassFingerprint, FingerprintBundle,
                          FingerprintParams, MasterFingerprints, mirror_class)
from .modarith import crt_combine

ACCEPTED = "accepted"
REJECTED_STAGE1 = "rejected_stage1"
REJECTED_STAGE2 = "rejected_stage2"


@dataclass(frozen=True)
class NearPalResult:
    """Outcome of one substring test.

    ``delta`` is exact for accepted / rejected_stage2 outcomes; for
    rejected_stage1 it is the disagreeing-class count at which the scan
    stopped, which already exceeds the threshold.  ``mismatches`` holds
    absolute 1-based indices and is present only on acceptance.
    ``dropped`` counts recovered indices discarded by sanity filters.
    """

    verdict: str
    delta: int
    mismatches: frozenset[int] | None = None
    dropped: int = 0

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPTED


def _chunk_plan(total: int, first: int) -> list[tuple[int, int]]:
    spans = []
    lo = 0
    size = first
    while lo < total:
        hi = min(total, lo + size)
        spans.append((lo, hi))
        lo = hi
        size *= 4
    return spans


def _family_delta(master: MasterFingerprints, c_sub: int, x: int, fam: int,
                  stop_above: int | None) -> tuple[int, np.ndarray | None]:
    """Count disagreeing classes of one family over S[c_sub, x].

    With ``stop_above`` set, returns early once the count exceeds it;
    the class list is then not materialized.  Otherwise returns the exact
    count together with the disagreeing representatives.
    """
    reps = master.substring_reps(c_sub, x, fam)
    if reps.size == 0:
        return 0, reps
    first = 16 if stop_above is None else max(16, 4 * (stop_above + 2))
    count = 0
    bad: list[np.ndarray] = []
    for lo, hi in _chunk_plan(reps.size, first):
        chunk = reps[lo:hi]
        diff = master.classes_differ(c_sub, x, fam, chunk)
        count += int(diff.sum())
        bad.append(chunk[diff])
        if stop_above is not None and count > stop_above:
            return count, None
    return count, np.concatenate(bad) if bad else np.empty(0, dtype=np.int64)


def delta_statistic(master: MasterFingerprints, c_sub: int, x: int
                    ) -> tuple[int, list[int]]:
    """Exact disagreement statistic of S[c_sub, x]: max and per-prime counts."""
    params = master.params
    per = []
    for fam in range(params.n_first):
        cnt, _ = _family_delta(master, c_sub, x, fam, None)
        per.append(cnt)
    return (max(per) if per else 0), per


def _second_level_reps(c_sub: int, x: int, p: int, q: int, rep: int,
                       members: int) -> np.ndarray:
    """Refined class representatives populated by class ``rep`` members."""
    first = c_sub + (rep - c_sub) % p
    take = min(members, q)
    t = np.arange(take, dtype=np.int64)
    return (first + t * p - 1) % (p * q) + 1


def _recover_family(master: MasterFingerprints, c_sub: int, x: int,
                    fam: int, bad_reps: np.ndarray) -> tuple[set[int], int]:
    """CRT-recover indices of mismatches isolated in their coarse class."""
    params = master.params
    p = params.first_level_primes[fam]
    found: set[int] = set()
    dropped = 0
    for rep in bad_reps.tolist():
        members = 0 if rep > x else (x - rep) // p + 1
        if rep <= c_sub - 1:
            members -= (c_sub - 1 - rep) // p + 1
        residues = [(rep % p, p)]
        isolated = True
        for q, fam2 in params.second_of[fam]:
            reps2 = _second_level_reps(c_sub, x, p, q, rep, members)
            diff2 = master.classes_differ(c_sub, x, fam2, reps2)
            hits = reps2[diff2]
            if hits.size != 1:
                isolated = False
                break
            if q != p:
                residues.append((int(hits[0]) % q, q))
        if not isolated:
            continue
        idx = crt_combine(residues)
        if c_sub <= idx <= x:
            found.add(idx)
        else:
            dropped += 1
    return found, dropped


def isolated_mismatches(master: MasterFingerprints, c_sub: int, x: int,
                        bad_by_family: list[np.ndarray]) -> tuple[frozenset[int], int]:
    """Union of isolated-mismatch indices over all coarse families.

    Indices whose mirror was not independently recovered are dropped and
    counted: an unpaired recovery signals a fingerprint lie, and mismatches
    of a substring against its own reverse always come in mirrored pairs.
    """
    raw: set[int] = set()
    dropped = 0
    for fam, bad in enumerate(bad_by_family):
        if bad is None or bad.size == 0:
            continue
        got, d = _recover_family(master, c_sub, x, fam, bad)
        raw |= got
        dropped += d
    paired = {i for i in raw if (c_sub + x - i) in raw}
    dropped += len(raw) - len(paired)
    return frozenset(paired), dropped


def near_palindrome(master: MasterFingerprints, c_pos: int, x: int) -> NearPalResult:
    """Decide whether S[c_pos+1, x] is a d-near-palindrome.

    ``c_pos`` is the checkpoint position whose snapshot precedes the
    substring; the substring length x - c_pos must be even.  On acceptance
    the mismatch set (absolute 1-based indices) is returned.
    """
    params = master.params
    c_sub = c_pos + 1
    length = x - c_pos
    if length < 0 or x > master.position:
        raise ValueError("substring out of range")
    if length % 2 == 1:
        raise ValueError("near_palindrome requires even-length substrings")
    if length == 0:
        return NearPalResult(ACCEPTED, 0, frozenset())
    q = params.beta.denominator
    stop_above = (params.d * (q + params.beta.numerator)) // q
    delta = 0
    bad_by_family: list[np.ndarray] = []
    for fam in range(params.n_first):
        cnt, bad = _family_delta(master, c_sub, x, fam, stop_above)
        if bad is None:  # early certificate: cnt already exceeds the threshold
            return NearPalResult(REJECTED_STAGE1, cnt)
        delta = max(delta, cnt)
        bad_by_family.append(bad)
    if params.reject_threshold_exceeded(delta):
        return NearPalResult(REJECTED_STAGE1, delta)
    mism, dropped = isolated_mismatches(master, c_sub, x, bad_by_family)
    if len(mism) > params.d:
        return NearPalResult(REJECTED_STAGE2, delta, dropped=dropped)
    return NearPalResult(ACCEPTED, delta, mism, dropped)


# ---------------------------------------------------------------------------
# bundle evaluation (reconstructed substrings, classes renumbered from 1)

def _bundle_class_differs(params: FingerprintParams,
                          fam_dict: dict[int, ClassFingerprint],
                          m: int, rep: int, length: int) -> bool:
    cf = fam_dict.get(rep)
    partner = fam_dict.get(mirror_class(rep, m, 1, length))
    k = cf.count if cf else 0
    pk = partner.count if partner else 0
    if k != pk:
        raise InternalError("mirrored classes of an even substring must "
                            f"have equal sizes, got {k} vs {pk}")
    fwd = cf.forward if cf else 0
    rev = partner.reverse if partner else 0
    return fwd != pow(params.B, k + 1, params.P) * rev % params.P


def near_palindrome_bundle(bundle: FingerprintBundle, *,
                           base_pos: int = 0) -> NearPalResult:
    """Run the decision on a reconstructed substring's class fingerprints.

    The bundle's classes are numbered relative to the substring (first
    symbol is position 1).  Recovered indices are shifted by ``base_pos``
    so callers get absolute stream coordinates back.
    """
    params = bundle.params
    length = bundle.length
    if length % 2 == 1:
        raise ValueError("even-length substrings only")
    if length == 0:
        return NearPalResult(ACCEPTED, 0, frozenset())
    q_den = params.beta.denominator
    stop_above = (params.d * (q_den + params.beta.numerator)) // q_den
    delta = 0
    bad_by_family: list[list[int]] = []
    for fam in range(params.n_first):
        p = params.first_level_primes[fam]
        fam_dict = bundle.fams[fam]
        cnt = 0
        bad: list[int] = []
        for rep in fam_dict:
            if _bundle_class_differs(params, fam_dict, p, rep, length):
                cnt += 1
                bad.append(rep)
                if cnt > stop_above:
                    return NearPalResult(REJECTED_STAGE1, cnt)
        delta = max(delta, cnt)
        bad_by_family.append(bad)
    raw: set[int] = set()
    dropped = 0
    for fam, bad in enumerate(bad_by_family):
        p = params.first_level_primes[fam]
        for rep in bad:
            members = bundle.fams[fam][rep].count
            residues = [(rep % p, p)]
            isolated = True
            for q, fam2 in params.second_of[fam]:
                pq = p * q
                fam2_dict = bundle.fams[fam2]
                hits = []
                for t in range(min(members, q)):
                    rep2 = (rep + t * p - 1) % pq + 1
                    if _bundle_class_differs(params, fam2_dict, pq, rep2, length):
                        hits.append(rep2)
                        if len(hits) > 1:
                            break
                if len(hits) != 1:
                    isolated = False
                    break
                if q != p:
                    residues.append((hits[0] % q, q))
            if not isolated:
                continue
            idx = crt_combine(residues)
            if 1 <= idx <= length:
                raw.add(idx)
            else:
                dropped += 1
    paired = {i for i in raw if (1 + length - i) in raw}
    dropped += len(raw) - len(paired)
    if len(paired) > params.d:
        return NearPalResult(REJECTED_STAGE2, delta, dropped=dropped)
    return NearPalResult(ACCEPTED, delta,
                         frozenset(base_pos + i for i in paired), dropped)


# ---------------------------------------------------------------------------
# batched pre-screening across checkpoints

@dataclass
class BatchScreen:
    """Vectorized stage-1 sampler shared by the streaming engines.

    For many candidate substrings ending at the same position, test the
    outermost ``width`` mirror pairs under one coarse family in a single
    vector pass.  Any candidate whose sampled disagreement count already
    tops the rejection threshold is certifiably rejected without running
    the full procedure; every disagreement found is genuine because equal
    strings can never produce unequal fingerprints.
    """

    master: MasterFingerprints
    fam: int = field(init=False)
    width: int = field(init=False)

    def __post_init__(self) -> None:
        params = self.master.params
        firsts = params.first_level_primes
        self.fam = max(range(len(firsts)), key=lambda j: firsts[j])
        q = params.beta.denominator
        thr = (params.d * (q + params.beta.numerator)) // q
        self.width = max(8, 2 * (thr + 2))

    def certified_rejects(self, c_subs: np.ndarray, x: int) -> np.ndarray:
        """Boolean mask over candidate starts: True = provably rejectable.

        Each row samples the classes of the candidate's first few positions
        (its outermost mirror pairs when classes are singletons).  The
        sampled disagreement count never exceeds the family's true count,
        so crossing the threshold is a sound rejection certificate.
        """
        params = self.master.params
        m = int(params.first_level_primes[self.fam])
        lengths = x - c_subs + 1
        w_eff = np.minimum(np.minimum(self.width, lengths // 2), m)
        off = np.arange(self.width, dtype=np.int64)
        valid = off[None, :] < w_eff[:, None]
        pos = np.where(valid, c_subs[:, None] + off[None, :], x)
        reps = (pos - 1) % m + 1
        diff = self.master.classes_differ(c_subs[:, None], x, self.fam, reps)
        counts = (diff & valid).sum(axis=1)
        q = params.beta.denominator
        return counts * q > params.d * (q + params.beta.numerator)
