"""Streaming detection of longest d-near-palindrome substrings.

A d-near-palindrome is a string whose Hamming distance from its own
reverse is at most d.  This package finds the longest such substring of
a symbol stream in sublinear working memory, in three modes:

* one-pass with a (1+epsilon) multiplicative length guarantee,
* one-pass with an additive-E length guarantee,
* two-pass exact.

All modes report the start index, the length, and the set of mismatched
positions of the reported substring.
"""

from .errors import ConfigError, InputError, InternalError
from .fingerprint import FingerprintParams, MasterFingerprints, ClassFingerprint
from .decision import NearPalResult, near_palindrome, delta_statistic
from .onepass import OnePassEngine, PalindromeAnswer, double_stream, run_stream
from .twopass import TwoPassEngine
from .oracle import exact_ham_reverse, brute_longest

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "InputError",
    "InternalError",
    "FingerprintParams",
    "MasterFingerprints",
    "ClassFingerprint",
    "NearPalResult",
    "near_palindrome",
    "delta_statistic",
    "OnePassEngine",
    "TwoPassEngine",
    "PalindromeAnswer",
    "double_stream",
    "run_stream",
    "exact_ham_reverse",
    "brute_longest",
]
