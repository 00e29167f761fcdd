"""The contiguous-run matcher against an exhaustive all-substrings oracle,
for both the compiled kernel and the pure-Python fallback."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from immunids.matching import backend, lcs_len, lcs_len_py


def oracle_lcs(a: bytes, b: bytes) -> int:
    # O(n*m*min) exhaustive common-extension scan
    best = 0
    for i in range(len(a)):
        for j in range(len(b)):
            k = 0
            while i + k < len(a) and j + k < len(b) and a[i + k] == b[j + k]:
                k += 1
            best = max(best, k)
    return best


IMPLS = [pytest.param(lcs_len_py, id="pure")]
if backend() == "compiled":
    IMPLS.append(pytest.param(lcs_len, id="compiled"))


@pytest.mark.parametrize("impl", IMPLS)
class TestLcsLen:
    def test_shared_four_byte_run(self, impl):
        assert impl(b"GATTACA", b"xxGATTxx") == 4

    def test_interior_run(self, impl):
        assert impl(b"ABCDE", b"ZBCDZ") == 3

    def test_empty_sides(self, impl):
        assert impl(b"", b"abc") == 0
        assert impl(b"abc", b"") == 0
        assert impl(b"", b"") == 0

    def test_full_containment(self, impl):
        assert impl(b"needle", b"xxneedleyy") == 6

    def test_matches_oracle_on_random_pairs(self, impl):
        rng = random.Random(77)
        for _ in range(400):
            a = bytes(rng.randrange(4) for _ in range(rng.randrange(0, 65)))
            b = bytes(rng.randrange(4) for _ in range(rng.randrange(0, 65)))
            assert impl(a, b) == oracle_lcs(a, b)


@given(st.binary(max_size=48), st.binary(max_size=48))
def test_backends_agree_and_are_symmetric(a, b):
    got = lcs_len(a, b)
    assert got == lcs_len_py(a, b)
    assert got == lcs_len(b, a)
    assert got <= min(len(a), len(b))


@given(st.binary(min_size=1, max_size=32), st.binary(max_size=16),
       st.binary(max_size=16))
def test_substring_lower_bound(inner, prefix, suffix):
    assert lcs_len(inner, prefix + inner + suffix) == len(inner)
