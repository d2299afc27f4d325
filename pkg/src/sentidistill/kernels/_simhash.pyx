# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled simhash kernels; the pure-Python twin lives in ``pure.py``.

Both implementations must produce bit-identical fingerprints: 64-bit FNV-1a
over UTF-8 shingle bytes (state = offset_basis XOR seed), majority vote with
ties rounding up.
"""

from libc.stdint cimport uint64_t

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL


cpdef uint64_t fnv1a64(bytes data, uint64_t seed=0):
    cdef uint64_t h = FNV_OFFSET ^ seed
    cdef const unsigned char* buf = data
    cdef Py_ssize_t i, n = len(data)
    for i in range(n):
        h ^= <uint64_t>buf[i]
        h *= FNV_PRIME
    return h


cpdef uint64_t fingerprint_tokens(list tokens, int shingle_size, uint64_t seed=0):
    cdef Py_ssize_t n = len(tokens)
    if n == 0:
        raise ValueError("empty token list")
    cdef long counts[64]
    cdef int bit
    for bit in range(64):
        counts[bit] = 0
    cdef list windows
    cdef Py_ssize_t i
    if n < shingle_size:
        windows = [" ".join(tokens)]
    else:
        windows = [" ".join(tokens[i : i + shingle_size]) for i in range(n - shingle_size + 1)]
    cdef uint64_t h
    cdef Py_ssize_t total = len(windows)
    for window in windows:
        h = fnv1a64(window.encode("utf-8"), seed)
        for bit in range(64):
            if (h >> bit) & 1ULL:
                counts[bit] += 1
    cdef uint64_t fp = 0
    for bit in range(64):
        if 2 * counts[bit] >= total:
            fp |= (<uint64_t>1) << bit
    return fp


cpdef int hamming64(uint64_t a, uint64_t b):
    cdef uint64_t x = a ^ b
    cdef int count = 0
    while x:
        x &= x - 1
        count += 1
    return count


cpdef Py_ssize_t hamming_within(uint64_t fp, list candidates, int threshold):
    cdef Py_ssize_t i, n = len(candidates)
    for i in range(n):
        if hamming64(fp, <uint64_t>candidates[i]) <= threshold:
            return i
    return -1
