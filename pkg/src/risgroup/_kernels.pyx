# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte-Carlo hot loop; same contract and random streams as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log1p, cos, sin, M_PI
from libc.stdint cimport uint64_t
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    typedef struct {
        uint64_t ctr[4];
        uint64_t key[2];
        uint64_t buf[4];
        int pos;
    } rg_philox;

    static inline void rg_mulhilo(uint64_t a, uint64_t b, uint64_t *hi, uint64_t *lo) {
        __uint128_t p = (__uint128_t)a * b;
        *lo = (uint64_t)p;
        *hi = (uint64_t)(p >> 64);
    }

    /* Philox4x64 with 10 rounds, matching numpy.random.Philox */
    static inline void rg_philox_block(rg_philox *s) {
        uint64_t c0 = s->ctr[0], c1 = s->ctr[1], c2 = s->ctr[2], c3 = s->ctr[3];
        uint64_t k0 = s->key[0], k1 = s->key[1];
        uint64_t hi0, lo0, hi1, lo1;
        for (int r = 0; r < 10; r++) {
            if (r > 0) {
                k0 += 0x9E3779B97F4A7C15ULL;
                k1 += 0xBB67AE8584CAA73BULL;
            }
            rg_mulhilo(0xD2E7470EE14C6C93ULL, c0, &hi0, &lo0);
            rg_mulhilo(0xCA5A826395121157ULL, c2, &hi1, &lo1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
        }
        s->buf[0] = c0; s->buf[1] = c1; s->buf[2] = c2; s->buf[3] = c3;
    }

    static inline void rg_philox_init(rg_philox *s, uint64_t seed, uint64_t trial) {
        s->ctr[0] = 0; s->ctr[1] = 0; s->ctr[2] = 0; s->ctr[3] = trial;
        s->key[0] = seed; s->key[1] = 0;
        s->pos = 4;
    }

    static inline uint64_t rg_philox_next(rg_philox *s) {
        if (s->pos < 4) return s->buf[s->pos++];
        if (++s->ctr[0] == 0 && ++s->ctr[1] == 0 && ++s->ctr[2] == 0) ++s->ctr[3];
        rg_philox_block(s);
        s->pos = 1;
        return s->buf[0];
    }

    static inline double rg_philox_double(rg_philox *s) {
        return (double)(rg_philox_next(s) >> 11) * (1.0 / 9007199254740992.0);
    }
    """
    ctypedef struct rg_philox:
        pass
    void rg_philox_init(rg_philox *s, uint64_t seed, uint64_t trial) nogil
    uint64_t rg_philox_next(rg_philox *s) nogil
    double rg_philox_double(rg_philox *s) nogil


cdef inline void cnormal(rg_philox *s, double *re, double *im) noexcept nogil:
    cdef double u1 = rg_philox_double(s)
    cdef double u2 = rg_philox_double(s)
    cdef double r = sqrt(-log1p(-u1))
    cdef double th = 2.0 * M_PI * u2
    re[0] = r * cos(th)
    im[0] = r * sin(th)


def philox_raw(uint64_t seed, uint64_t trial, Py_ssize_t n):
    cdef rg_philox s
    rg_philox_init(&s, seed, trial)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] ov = out
    cdef Py_ssize_t i
    for i in range(n):
        ov[i] = rg_philox_next(&s)
    return out


def simulate_trials(uint64_t seed, Py_ssize_t start, Py_ssize_t stop, int K, int B, int n_on,
                    double sqrt_bd, double sqrt_bl, double sigma, double sqrt_ptr, double gamma,
                    phi, bint perfect):
    cdef int k_est = n_on if n_on > 0 else K // B
    cdef int tp = k_est + 1
    if phi.shape[0] != tp or phi.shape[1] != tp:
        raise ValueError("schedule shape does not match the estimated channel")
    cdef Py_ssize_t n = stop - start
    phi_c = np.array(phi, dtype=np.complex128, order="C", copy=True)
    phi_h = np.ascontiguousarray(phi_c.conj().T)
    c = np.empty((n, tp), dtype=np.complex128)
    y = np.empty((n, tp), dtype=np.complex128)
    est = np.empty((n, tp), dtype=np.complex128)
    out = np.empty(n, dtype=np.float64)
    hg = np.empty(4 * K, dtype=np.float64)

    cdef double[:, ::1] cv = c.view(np.float64)
    cdef double[:, ::1] yv = y.view(np.float64)
    cdef double[:, ::1] ev = est.view(np.float64)
    cdef double complex[:, ::1] phiv = phi_c
    cdef double complex[:, ::1] phihv = phi_h
    cdef double complex[:, ::1] cz = c
    cdef double complex[:, ::1] yz = y
    cdef double complex[:, ::1] ez = est
    cdef double[::1] ov = out
    cdef double[::1] w = hg
    cdef rg_philox s
    cdef Py_ssize_t t, i, b, e, k
    cdef double hr, hi, gr, gi, ar, ai, xr, xi, e0r, e0i, rr, ri, mag, sr, si
    cdef char ta = b'T', tn = b'N'
    cdef int m_ = tp, n_ = <int>n, k_ = tp
    cdef double complex alpha, beta

    with nogil:
        for t in range(n):
            rg_philox_init(&s, seed, <uint64_t>(start + t))
            # h then g, interleaved (re, im) in w
            for i in range(2 * K):
                cnormal(&s, &w[2 * i], &w[2 * i + 1])
            cnormal(&s, &hr, &hi)
            cv[t, 0] = sqrt_bd * hr
            cv[t, 1] = sqrt_bd * hi
            for i in range(tp):
                cnormal(&s, &xr, &xi)
                yv[t, 2 * i] = sigma * xr
                yv[t, 2 * i + 1] = sigma * xi
            for i in range(k_est):
                ar = 0.0
                ai = 0.0
                for b in range(1 if n_on > 0 else B):
                    e = i * B + b if n_on <= 0 else i
                    hr = w[2 * e]
                    hi = w[2 * e + 1]
                    gr = w[2 * (K + e)]
                    gi = w[2 * (K + e) + 1]
                    ar = ar + (hr * gr - hi * gi)
                    ai = ai + (hr * gi + hi * gr)
                cv[t, 2 * (i + 1)] = sqrt_bl * ar
                cv[t, 2 * (i + 1) + 1] = sqrt_bl * ai

        if perfect:
            for t in range(n):
                sr = sqrt(cv[t, 0] * cv[t, 0] + cv[t, 1] * cv[t, 1])
                for k in range(1, tp):
                    sr = sr + sqrt(cv[t, 2 * k] * cv[t, 2 * k] + cv[t, 2 * k + 1] * cv[t, 2 * k + 1])
                ov[t] = gamma * sr * sr
        else:
            # rows are trials, so the C-order (n, tp) arrays are Fortran (tp, n);
            # y^T = sqrt_ptr * phi @ c^T + noise^T, est^T = phi^H @ y^T / (tp sqrt_ptr)
            alpha = sqrt_ptr
            beta = 1.0
            zgemm(&ta, &tn, &m_, &n_, &k_, &alpha, &phiv[0, 0], &k_, &cz[0, 0], &k_, &beta, &yz[0, 0], &m_)
            alpha = 1.0 / (tp * sqrt_ptr)
            beta = 0.0
            zgemm(&ta, &tn, &m_, &n_, &k_, &alpha, &phihv[0, 0], &k_, &yz[0, 0], &k_, &beta, &ez[0, 0], &m_)
            for t in range(n):
                e0r = ev[t, 0]
                e0i = ev[t, 1]
                sr = cv[t, 0]
                si = cv[t, 1]
                for k in range(1, tp):
                    xr = ev[t, 2 * k]
                    xi = ev[t, 2 * k + 1]
                    # exp(j arg(e0 * conj(e_k)))
                    rr = e0r * xr + e0i * xi
                    ri = e0i * xr - e0r * xi
                    mag = sqrt(rr * rr + ri * ri)
                    if mag > 0.0:
                        rr = rr / mag
                        ri = ri / mag
                    else:
                        rr = 1.0
                        ri = 0.0
                    sr = sr + rr * cv[t, 2 * k] - ri * cv[t, 2 * k + 1]
                    si = si + rr * cv[t, 2 * k + 1] + ri * cv[t, 2 * k]
                ov[t] = gamma * (sr * sr + si * si)
    return out
