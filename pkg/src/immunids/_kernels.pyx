# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernel: longest common contiguous byte run between two
byte strings.  Dynamic programming over a single rolling row, O(len(a) *
len(b)) time and O(len(b)) memory."""

from libc.stdlib cimport calloc, free


def lcs_len(const unsigned char[:] a, const unsigned char[:] b) -> int:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    if n == 0 or m == 0:
        return 0
    cdef Py_ssize_t i, j
    cdef int best = 0
    cdef int cur
    cdef int *row = <int *> calloc(m + 1, sizeof(int))
    if row == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            # iterate j right-to-left so row[j-1] still holds the previous i
            for j in range(m, 0, -1):
                if a[i] == b[j - 1]:
                    cur = row[j - 1] + 1
                    row[j] = cur
                    if cur > best:
                        best = cur
                else:
                    row[j] = 0
        return best
    finally:
        free(row)
