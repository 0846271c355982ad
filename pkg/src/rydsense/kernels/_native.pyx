# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernel for the diagonal + transverse-drive Hamiltonian.

Each stage evaluates (H psi)[i] = d[i] psi[i] + (Omega/2) sum_k psi[i ^ 2^k]
as a pure per-index map, so results are independent of the thread count.

The apply is split to keep the state out of DRAM as much as possible:
bit flips below LOW_BITS are gathered inside 2^LOW_BITS-element slabs that
fit in cache, while the remaining high-bit flips are resolved in a second
pass that walks small per-slab chunks of every slab in parallel streams and
fuses the RK4 stage arithmetic, so the state crosses memory once per pass
instead of once per bit.  Small registers (or threads == 1) take plain
serial loops: entering an OpenMP region costs more than a whole RK4 step
at dimensions below a few thousand.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()

BACKEND = "native"

ctypedef double complex cplx

# Slab size 2^LOW_BITS complex values (64 KiB at 12) targets the L1/L2 window;
# CHUNK bounds the per-slab block streamed in the high-bit pass.  Overridable
# through RYDSENSE_LOW_BITS / RYDSENSE_CHUNK for tuning.
import os as _os

LOW_BITS = int(_os.environ.get("RYDSENSE_LOW_BITS", "12"))
CHUNK = int(_os.environ.get("RYDSENSE_CHUNK", "32"))

# below this dimension OpenMP region overhead dominates; stay serial
PARALLEL_MIN_DIM = 1 << 15


cdef void _apply_low(const cplx* src, const double* diag, double om_half,
                     int low_bits, Py_ssize_t dim, cplx* partial,
                     int threads) noexcept nogil:
    # partial[i] = diag[i]*src[i] + om_half * sum_{k < low_bits} src[i ^ 2^k]
    cdef Py_ssize_t n_slabs = dim >> low_bits
    cdef Py_ssize_t slab = (<Py_ssize_t>1) << low_bits
    cdef Py_ssize_t s, i, base, end
    cdef int k
    cdef cplx acc
    if threads > 1:
        for s in prange(n_slabs, num_threads=threads, schedule='static'):
            base = s << low_bits
            end = base + slab
            for i in range(base, end):
                acc = diag[i] * src[i]
                for k in range(low_bits):
                    acc = acc + om_half * src[i ^ ((<Py_ssize_t>1) << k)]
                partial[i] = acc
    else:
        for i in range(dim):
            acc = diag[i] * src[i]
            for k in range(low_bits):
                acc = acc + om_half * src[i ^ ((<Py_ssize_t>1) << k)]
            partial[i] = acc


cdef inline void _finish_chunk(const cplx* src, const cplx* partial,
                               const cplx* psi, double om_half, int low_bits,
                               int high_bits, Py_ssize_t n_slabs,
                               Py_ssize_t start, Py_ssize_t chunk_len,
                               double complex step_i_dt,
                               double complex sixth_i_dt, int mode, cplx* acc,
                               cplx* dst) noexcept nogil:
    cdef Py_ssize_t g, lo, i
    cdef int j
    cdef cplx y
    for g in range(n_slabs):
        i = (g << low_bits) + start
        for lo in range(chunk_len):
            y = partial[i]
            for j in range(high_bits):
                y = y + om_half * src[i ^ ((<Py_ssize_t>1) << (low_bits + j))]
            if mode == 0:
                acc[i] = y
                dst[i] = psi[i] - step_i_dt * y
            elif mode == 1:
                acc[i] = acc[i] + 2.0 * y
                dst[i] = psi[i] - step_i_dt * y
            else:
                dst[i] = psi[i] - sixth_i_dt * (acc[i] + y)
            i = i + 1


cdef void _finish_stage(const cplx* src, const cplx* partial, const cplx* psi,
                        double om_half, int low_bits, int n_bits,
                        Py_ssize_t dim, double complex step_i_dt,
                        double complex sixth_i_dt, int mode, cplx* acc,
                        cplx* dst, int threads, Py_ssize_t chunk) noexcept nogil:
    # y[i] = partial[i] + om_half * sum_{k >= low_bits} src[i ^ 2^k], then
    #   mode 0: acc = y;       dst = psi - step_i_dt*y       (stage 1)
    #   mode 1: acc += 2y;     dst = psi - step_i_dt*y       (stages 2, 3)
    #   mode 2: dst = psi - sixth_i_dt*(acc + y)             (stage 4)
    cdef int high_bits = n_bits - low_bits
    cdef Py_ssize_t slab = (<Py_ssize_t>1) << low_bits
    cdef Py_ssize_t n_slabs = dim >> low_bits
    cdef Py_ssize_t n_chunks = slab // chunk if slab >= chunk else 1
    cdef Py_ssize_t chunk_len = slab // n_chunks
    cdef Py_ssize_t c
    if threads > 1:
        for c in prange(n_chunks, num_threads=threads, schedule='static'):
            _finish_chunk(src, partial, psi, om_half, low_bits, high_bits,
                          n_slabs, c * chunk_len, chunk_len, step_i_dt,
                          sixth_i_dt, mode, acc, dst)
    else:
        for c in range(n_chunks):
            _finish_chunk(src, partial, psi, om_half, low_bits, high_bits,
                          n_slabs, c * chunk_len, chunk_len, step_i_dt,
                          sixth_i_dt, mode, acc, dst)


cdef inline int _bit_count(Py_ssize_t dim) noexcept nogil:
    cdef int n = 0
    while (<Py_ssize_t>1) << n < dim:
        n += 1
    return n


def apply_h(cplx[::1] psi, double[::1] diag, double om_half, cplx[::1] out,
            int threads=1):
    """out <- H psi."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef int n_bits = _bit_count(dim)
    cdef int cfg_low = LOW_BITS
    cdef int low_bits = cfg_low if cfg_low < n_bits else n_bits
    cdef int high_bits = n_bits - low_bits
    if threads < 1 or dim < PARALLEL_MIN_DIM:
        threads = 1
    buf = np.empty(dim, dtype=np.complex128)
    cdef cplx[::1] partial = buf
    cdef Py_ssize_t i
    cdef int j
    cdef cplx y
    with nogil:
        _apply_low(&psi[0], &diag[0], om_half, low_bits, dim, &partial[0], threads)
        if threads > 1:
            for i in prange(dim, num_threads=threads, schedule='static'):
                y = partial[i]
                for j in range(high_bits):
                    y = y + om_half * psi[i ^ ((<Py_ssize_t>1) << (low_bits + j))]
                out[i] = y
        else:
            for i in range(dim):
                y = partial[i]
                for j in range(high_bits):
                    y = y + om_half * psi[i ^ ((<Py_ssize_t>1) << (low_bits + j))]
                out[i] = y


def rk4_steps(cplx[::1] psi, double[::1] diag, double om_half, double dt,
              Py_ssize_t n_steps, int threads=1):
    """Advance psi in place by n_steps fixed RK4 steps of dpsi/dt = -iH psi."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef int n_bits = _bit_count(dim)
    cdef int cfg_low = LOW_BITS
    cdef int low_bits = cfg_low if cfg_low < n_bits else n_bits
    cdef Py_ssize_t chunk = CHUNK
    if threads < 1 or dim < PARALLEL_MIN_DIM:
        threads = 1

    buf_acc = np.empty(dim, dtype=np.complex128)
    buf_a = np.empty(dim, dtype=np.complex128)
    buf_b = np.empty(dim, dtype=np.complex128)
    buf_p = np.empty(dim, dtype=np.complex128)
    cdef cplx[::1] acc = buf_acc
    cdef cplx[::1] sa = buf_a
    cdef cplx[::1] sb = buf_b
    cdef cplx[::1] partial = buf_p

    cdef double complex half_i_dt = 0.5j * dt
    cdef double complex full_i_dt = 1.0j * dt
    cdef double complex sixth_i_dt = (1.0j / 6.0) * dt
    cdef double complex zero = 0.0
    cdef Py_ssize_t step

    with nogil:
        for step in range(n_steps):
            _apply_low(&psi[0], &diag[0], om_half, low_bits, dim, &partial[0], threads)
            _finish_stage(&psi[0], &partial[0], &psi[0], om_half, low_bits,
                          n_bits, dim, half_i_dt, zero, 0, &acc[0], &sa[0],
                          threads, chunk)
            _apply_low(&sa[0], &diag[0], om_half, low_bits, dim, &partial[0], threads)
            _finish_stage(&sa[0], &partial[0], &psi[0], om_half, low_bits,
                          n_bits, dim, half_i_dt, zero, 1, &acc[0], &sb[0],
                          threads, chunk)
            _apply_low(&sb[0], &diag[0], om_half, low_bits, dim, &partial[0], threads)
            _finish_stage(&sb[0], &partial[0], &psi[0], om_half, low_bits,
                          n_bits, dim, full_i_dt, zero, 1, &acc[0], &sa[0],
                          threads, chunk)
            _apply_low(&sa[0], &diag[0], om_half, low_bits, dim, &partial[0], threads)
            _finish_stage(&sa[0], &partial[0], &psi[0], om_half, low_bits,
                          n_bits, dim, zero, sixth_i_dt, 2, &acc[0], &psi[0],
                          threads, chunk)
