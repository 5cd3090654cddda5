"""One-pass streaming engines for longest d-near-palindrome substrings.

Per arriving symbol the engine: updates an exact sliding-window tracker
(so short answers are never missed), appends to the master fingerprints,
advances the checkpoint schedule, and tests the substring from every
eligible checkpoint to the current position with the fingerprint decision
procedure.  Checkpoints are scanned oldest first, so the first acceptance
is the longest available and ends the scan.

Streams are processed at even candidate lengths; odd lengths are covered
by running on a symbol-doubled stream with a doubled mismatch budget and
mapping the answer back, which `run_stream` does by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .checkpoints import AdditiveSchedule, MultiplicativeSchedule
from .decision import BatchScreen, near_palindrome
from .errors import ConfigError
from .fingerprint import FingerprintParams, MasterFingerprints

MODE_WINDOW = "window"
MODE_MULT = "multiplicative"
MODE_ADD = "additive"
MODE_EXACT = "exact"


@dataclass(frozen=True)
class PalindromeAnswer:
    """Final report: where the best substring starts, how long it is, and
    which of its positions mismatch their mirror (1-based, ascending)."""

    start: int
    length: int
    mismatches: tuple[int, ...]
    mode: str
    n: int
    d: int
    epsilon: float | None = None
    error_bound: int | None = None
    modulus: int | None = None
    base: int | None = None
    seed: int | None = None

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "d": self.d,
            "start": self.start,
            "length": self.length,
            "mismatches": list(self.mismatches),
            "params": {
                "epsilon": self.epsilon,
                "E": self.error_bound,
                "P": self.modulus,
                "B": self.base,
                "seed": self.seed,
            },
        }


class WindowTracker:
    """Exact even-length near-palindrome detection at bounded radius.

    Keeps one live center per recent position; when symbol x arrives, the
    center at mu gains the mirror pair (2mu-x+1, x).  A center dies once
    its mismatch budget is exhausted or its radius cap is reached.  Every
    surviving radius is offered to the engine, and centers that survive at
    full radius can be reported (the two-pass first pass uses that hook to
    collect candidate midpoints).
    """

    def __init__(self, budget: int, radius_cap: int, offer,
                 fwd_map: np.ndarray | None = None, on_full_radius=None):
        self.budget = budget
        self.cap = radius_cap
        self.offer = offer
        self.on_full_radius = on_full_radius
        self.fwd_map = fwd_map
        size = max(2 * radius_cap, 1)
        self._ring = np.zeros(size, dtype=np.int64)
        self._centers: list[list] = []  # [mu, mismatch_count, mism_indices]

    def _char(self, pos: int) -> int:
        return int(self._ring[(pos - 1) % len(self._ring)])

    def feed(self, x: int, sym: int) -> None:
        mapped = int(self.fwd_map[sym]) if self.fwd_map is not None else sym
        if self.cap > 0:
            keep = []
            for entry in self._centers:
                mu, count, mism = entry
                r = x - mu
                mirror = 2 * mu - x + 1
                if mirror < 1:
                    continue
                if mapped != self._char(mirror):
                    count += 2
                    if count > self.budget:
                        continue
                    entry[1] = count
                    mism.extend((mirror, x))
                self.offer(mirror, 2 * r, mism)
                if r >= self.cap:
                    if self.on_full_radius is not None:
                        self.on_full_radius(mu, count, mism)
                    continue
                keep.append(entry)
            keep.append([x, 0, []])
            self._centers = keep
        self._ring[(x - 1) % len(self._ring)] = sym


class OnePassEngine:
    """Streaming engine; ``mode`` selects the checkpoint schedule.

    In window mode no checkpoints are kept and the tracker radius spans
    the whole declared stream, making it an exact small-input scanner.
    """

    def __init__(self, n_bound: int, d: int, seed: int, mode: str,
                 epsilon: float | None = None, error_bound: int | None = None,
                 pairing: dict[int, int] | None = None,
                 params: FingerprintParams | None = None):
        if mode not in (MODE_WINDOW, MODE_MULT, MODE_ADD):
            raise ConfigError(f"unsupported one-pass mode {mode!r}")
        self.mode = mode
        self.params = params or FingerprintParams.build(n_bound, d, seed)
        self.master = MasterFingerprints(self.params)
        self.epsilon = epsilon
        self.error_bound = error_bound
        self._fwd_map = None
        if pairing:
            table = np.arange(256, dtype=np.int64)
            for a, b in pairing.items():
                table[a] = b
            self._fwd_map = table
        if mode == MODE_MULT:
            if epsilon is None or epsilon <= 0:
                raise ConfigError("multiplicative mode needs epsilon > 0")
            self.schedule = MultiplicativeSchedule(epsilon, n_bound)
        elif mode == MODE_ADD:
            if error_bound is None or error_bound < 1:
                raise ConfigError("additive mode needs error bound E >= 1")
            self.schedule = AdditiveSchedule(error_bound, n_bound)
        else:
            self.schedule = None
        cap = (n_bound // 2) + 1 if mode == MODE_WINDOW else d
        self.window = WindowTracker(d, cap, self._offer, self._fwd_map)
        self.screen = BatchScreen(self.master) if self.schedule else None
        self._best_len = 0
        self._best_start = 1
        self._best_mism: tuple[int, ...] = ()
        self.metrics = {"nearpal_calls": 0, "screened_out": 0,
                        "peak_checkpoints": 0, "peak_fingerprint_words": 0}
        self._cp_words: dict[int, int] = {}
        self._cp_words_sum = 0

    # -- internals ----------------------------------------------------------

    def _offer(self, start: int, length: int, mism) -> None:
        if length > self._best_len:
            self._best_len = length
            self._best_start = start
            self._best_mism = tuple(sorted(mism))

    def _encode(self, sym: int) -> tuple[int, int]:
        fwd = int(self._fwd_map[sym]) if self._fwd_map is not None else sym
        return fwd + 1, sym + 1

    def _track_space(self, x: int) -> None:
        live = self.schedule.live_count() if self.schedule else 0
        m = self.metrics
        if live > m["peak_checkpoints"]:
            m["peak_checkpoints"] = live
        if x % 64 == 0 or x == self.params.n_bound:
            own = self.master.logical_words_at(x)
            total = own + self._cp_words_sum
            if total > m["peak_fingerprint_words"]:
                m["peak_fingerprint_words"] = total
            assert total <= (live + 1) * own, "snapshot words exceed bound"

    def feed(self, sym: int) -> None:
        x = self.master.position + 1
        self.window.feed(x, sym)
        fwd, rev = self._encode(sym)
        self.master.append(fwd, rev)
        if self.schedule is not None:
            self.schedule.step(x)
            self._account_checkpoints(x)
            self._scan(x)
        self._track_space(x)

    def _account_checkpoints(self, x: int) -> None:
        live = self.schedule.by_pos
        if x in live and x not in self._cp_words:
            w = self.master.logical_words_at(x)
            self._cp_words[x] = w
            self._cp_words_sum += w
        if len(self._cp_words) > len(live):
            for pos in [p for p in self._cp_words if p not in live]:
                self._cp_words_sum -= self._cp_words.pop(pos)

    def _eligible(self, x: int) -> list[int]:
        cutoff = x - self._best_len  # need length x - c > best
        out = []
        order = self.schedule._order
        alive = self.schedule.by_pos
        for c in order:
            if c >= cutoff:
                break
            if c in alive and (x - c) % 2 == 0:
                out.append(c)
        return out

    def _scan(self, x: int) -> None:
        elig = self._eligible(x)
        if not elig:
            return
        if len(elig) >= 16:
            starts = np.asarray(elig, dtype=np.int64) + 1
            rejected = self.screen.certified_rejects(starts, x)
            self.metrics["screened_out"] += int(rejected.sum())
            elig = [c for c, r in zip(elig, rejected) if not r]
        for c in elig:
            if x - c <= self._best_len:
                break
            res = near_palindrome(self.master, c, x)
            self.metrics["nearpal_calls"] += 1
            if res.accepted:
                self._offer(c + 1, x - c, res.mismatches)
                break

    def finalize(self) -> PalindromeAnswer:
        return PalindromeAnswer(
            start=self._best_start, length=self._best_len,
            mismatches=self._best_mism, mode=self.mode,
            n=self.master.position, d=self.params.d, epsilon=self.epsilon,
            error_bound=self.error_bound, modulus=self.params.P,
            base=self.params.B, seed=self.params.seed)


# ---------------------------------------------------------------------------
# stream-level entry points

def double_stream(symbols) -> list[int]:
    """Each symbol emitted twice; odd answers of the original stream become
    even answers of the doubled stream."""
    out = []
    for s in symbols:
        out.append(s)
        out.append(s)
    return out


def _map_doubled_answer(ans: PalindromeAnswer, mode: str, n: int, d: int,
                        epsilon, error_bound, seed) -> PalindromeAnswer:
    start2, len2 = ans.start, ans.length
    end2 = start2 + len2 - 1
    mism2 = set(ans.mismatches)
    # A witness starting on a second copy covers its outermost mirror pair
    # only once, so that pair costs 2 toward the doubled budget instead of
    # 4.  If that pair mismatches, halving the count would exceed d; trim
    # to the aligned core, which drops exactly that pair.
    if len2 > 0 and start2 % 2 == 0 and (start2 in mism2 or end2 in mism2):
        mism2 -= {start2, end2}
        start2 += 1
        end2 -= 1
        len2 -= 2
    if len2 <= 0:
        start, length, mism = 1, 0, ()
    else:
        start = (start2 + 1) // 2
        end = (end2 + 1) // 2
        length = end - start + 1
        mism = tuple(sorted({(i + 1) // 2 for i in mism2}))
    return PalindromeAnswer(start=start, length=length, mismatches=mism,
                            mode=mode, n=n, d=d, epsilon=epsilon,
                            error_bound=error_bound, modulus=ans.modulus,
                            base=ans.base, seed=seed)


def run_stream(data, mode: str, d: int, *, epsilon: float | None = None,
               error_bound: int | None = None, seed: int = 0,
               doubling: bool = True, pairing: dict[int, int] | None = None
               ) -> PalindromeAnswer:
    """Run one engine over a fully materialized symbol sequence.

    With ``doubling`` (the default) the engine consumes each symbol twice
    with budget 2d, covering both answer parities; without it only
    even-length answers are sought.
    """
    symbols = list(data)
    n = len(symbols)
    mode_full = {
        "window": MODE_WINDOW, MODE_WINDOW: MODE_WINDOW,
        "mult": MODE_MULT, MODE_MULT: MODE_MULT,
        "add": MODE_ADD, MODE_ADD: MODE_ADD,
        "exact": MODE_EXACT, MODE_EXACT: MODE_EXACT,
    }.get(mode)
    if mode_full is None:
        raise ConfigError(f"unknown mode {mode!r}")
    if mode_full == MODE_EXACT:
        from .twopass import run_exact

        return run_exact(symbols, d, seed=seed, doubling=doubling,
                         pairing=pairing)
    if doubling:
        # 2E-3 keeps the additive promise through both the doubled-length
        # mapping (floor halving) and a possible one-symbol core trim.
        eng = OnePassEngine(max(2 * n, 1), 2 * d, seed, mode_full,
                            epsilon=epsilon,
                            error_bound=None if error_bound is None
                            else max(1, 2 * error_bound - 3),
                            pairing=pairing)
        for s in double_stream(symbols):
            eng.feed(s)
        raw = eng.finalize()
        return _map_doubled_answer(raw, mode_full, n, d, epsilon, error_bound,
                                   seed)
    eng = OnePassEngine(max(n, 1), d, seed, mode_full, epsilon=epsilon,
                        error_bound=error_bound, pairing=pairing)
    for s in symbols:
        eng.feed(s)
    ans = eng.finalize()
    return PalindromeAnswer(start=ans.start, length=ans.length,
                            mismatches=ans.mismatches, mode=mode_full, n=n,
                            d=d, epsilon=epsilon, error_bound=error_bound,
                            modulus=ans.modulus, base=ans.base, seed=seed)
