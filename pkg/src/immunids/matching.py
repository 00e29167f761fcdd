"""Longest common contiguous byte run between two byte strings.

This is the partial-matching primitive the immune layer calls once per
(detector, antigen) pair, which makes it the hottest loop in the pipeline.
A compiled kernel is used when the extension built; otherwise a pure-Python
implementation takes over. Set IMMUNIDS_PURE=1 to force the fallback.
"""

from __future__ import annotations

import os


def lcs_len_py(a: bytes, b: bytes) -> int:
    """Pure-Python longest common substring length.

    Binary search over the answer: a shared run of length k exists iff some
    k-byte window of the shorter string occurs in the longer one, which
    bytes.find checks at C speed.
    """
    if not a or not b:
        return 0
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    short = bytes(short)
    long_ = bytes(long_)

    def shares_run(k: int) -> bool:
        return any(long_.find(short[i:i + k]) >= 0
                   for i in range(len(short) - k + 1))

    lo, hi = 0, len(short)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if shares_run(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


if os.environ.get("IMMUNIDS_PURE"):
    _impl = lcs_len_py
else:
    try:
        from immunids._kernels import lcs_len as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = lcs_len_py


def lcs_len(a: bytes, b: bytes) -> int:
    """Length of the longest byte string occurring contiguously in both."""
    return _impl(a, b)


def backend() -> str:
    """Which implementation is active: ``compiled`` or ``pure``."""
    return "pure" if _impl is lcs_len_py else "compiled"
