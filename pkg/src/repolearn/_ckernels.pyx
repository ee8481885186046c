# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels over 64-bit package masks (n <= 64).

Mirrors ``_pykernels``; ``repolearn.kernels`` picks whichever is importable.
"""
import numpy as np

ctypedef unsigned long long u64

cdef extern from *:
    """
    static inline int rl_ctz64(unsigned long long x) { return __builtin_ctzll(x); }
    """
    int rl_ctz64(unsigned long long x) nogil


cdef inline bint _evaluate(u64 mask, const u64[::1] req, const u64[::1] conf, u64 defect) noexcept nogil:
    cdef u64 m
    cdef Py_ssize_t k
    if mask & defect:
        return False
    m = mask
    while m:
        if req[rl_ctz64(m)] & ~mask:
            return False
        m &= m - 1
    for k in range(conf.shape[0]):
        if (mask & conf[k]) == conf[k]:
            return False
    return True


cdef inline bint _next_comb(int* c, int k, int nmax) noexcept nogil:
    cdef int i = k - 1
    cdef int j
    while i >= 0 and c[i] == nmax - k + i:
        i -= 1
    if i < 0:
        return False
    c[i] += 1
    for j in range(i + 1, k):
        c[j] = c[j - 1] + 1
    return True


def evaluate_many(const u64[::1] masks, const u64[::1] req, const u64[::1] conf, u64 defect):
    cdef Py_ssize_t k, m = masks.shape[0]
    out = np.empty(m, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    with nogil:
        for k in range(m):
            o[k] = _evaluate(masks[k], req, conf, defect)
    return out


def enumerate_successful(int n, const u64[::1] req, const u64[::1] conf, u64 defect):
    cdef u64 total = (<u64>1) << n
    cdef u64 mask
    cdef Py_ssize_t count = 0
    buf = np.empty(total, dtype=np.uint64)
    cdef u64[::1] b = buf
    with nogil:
        for mask in range(total):
            if _evaluate(mask, req, conf, defect):
                b[count] = mask
                count += 1
    return buf[:count]


def success_profiles(int n, const u64[::1] masks):
    cdef u64 full = ((<u64>1) << n) - 1 if n < 64 else <u64>0xFFFFFFFFFFFFFFFF
    and_arr = np.full(n, full, dtype=np.uint64)
    or_arr = np.zeros(n, dtype=np.uint64)
    cdef u64[::1] a = and_arr
    cdef u64[::1] o = or_arr
    cdef Py_ssize_t k
    cdef u64 v, m
    cdef int p
    with nogil:
        for k in range(masks.shape[0]):
            v = masks[k]
            m = v
            while m:
                p = rl_ctz64(m)
                a[p] &= v
                o[p] |= v
                m &= m - 1
    return and_arr, or_arr


def propagate_many(const u64[::1] vectors, const u64[::1] rows):
    cdef Py_ssize_t k, m = vectors.shape[0]
    out = np.empty(m, dtype=np.uint64)
    cdef u64[::1] o = out
    cdef u64 acc, bits
    with nogil:
        for k in range(m):
            acc = vectors[k]
            bits = acc
            while bits:
                acc |= rows[rl_ctz64(bits)]
                bits &= bits - 1
            o[k] = acc
    return out


def first_uncovered(const u64[::1] vectors, int n, int a, int b):
    if a == 0 and b == 0:
        return None
    cdef Py_ssize_t size = vectors.shape[0]
    filt_arr = np.empty(max(size, 1), dtype=np.uint64)
    cdef u64[::1] filt = filt_arr
    cdef int s1[64]
    cdef int s2[64]
    cdef int rest[64]
    cdef Py_ssize_t nf, k
    cdef int i, nr
    cdef u64 m1, m2
    cdef bint found
    for i in range(a):
        s1[i] = i
    while True:
        m1 = 0
        for i in range(a):
            m1 |= (<u64>1) << s1[i]
        nf = 0
        for k in range(size):
            if (vectors[k] & m1) == 0:
                filt[nf] = vectors[k]
                nf += 1
        nr = 0
        for i in range(n):
            if not ((m1 >> i) & 1):
                rest[nr] = i
                nr += 1
        for i in range(b):
            s2[i] = i
        while True:
            m2 = 0
            for i in range(b):
                m2 |= (<u64>1) << rest[s2[i]]
            found = False
            for k in range(nf):
                if (filt[k] & m2) == m2:
                    found = True
                    break
            if not found:
                return (tuple([s1[i] for i in range(a)]),
                        tuple([rest[s2[i]] for i in range(b)]))
            if not _next_comb(s2, b, nr):
                break
        if not _next_comb(s1, a, n):
            break
    return None
