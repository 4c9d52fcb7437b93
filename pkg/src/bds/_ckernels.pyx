# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of :mod:`bds._kernels_py`; same algorithms, explicit loops."""

import numpy as np
cimport numpy as cnp
from libc.math cimport lgamma, log, log1p, exp, sqrt, floor, fabs

cnp.import_array()

cdef double LN_2PI = 1.8378770664093454835606594728112
cdef double S0 = 1.0 / 12.0
cdef double S1 = 1.0 / 360.0
cdef double S2 = 1.0 / 1260.0
cdef double S3 = 1.0 / 1680.0
cdef double S4 = 1.0 / 1188.0


cdef inline double c_stirlerr(double m) nogil:
    cdef double m2
    if m <= 15.0:
        return lgamma(m + 1.0) - (m + 0.5) * log(m) + m - 0.5 * LN_2PI
    m2 = m * m
    return (S0 - (S1 - (S2 - (S3 - S4 / m2) / m2) / m2) / m2) / m


cdef inline double c_bd0(double x, double mu) nogil:
    cdef double d = x - mu
    cdef double v, s, ej, v2
    cdef int j
    if fabs(d) < 0.1 * (x + mu):
        v = d / (x + mu)
        s = d * v
        ej = 2.0 * x * v
        v2 = v * v
        for j in range(1, 9):
            ej = ej * v2
            s = s + ej / (2 * j + 1)
        return s
    return x * log(x / mu) + mu - x


cdef double c_log_dbinom_raw(double x, double n, double p, double q) nogil:
    cdef double lc, lf
    if x == 0.0:
        if n == 0.0:
            return 0.0
        return n * log(q)
    if x == n:
        return n * log(p)
    lc = c_stirlerr(n) - c_stirlerr(x) - c_stirlerr(n - x) - c_bd0(x, n * p) - c_bd0(n - x, n * q)
    lf = LN_2PI + log(x) + log1p(-x / n)
    return lc - 0.5 * lf


def stirlerr(m):
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    flat_in = m.ravel()
    flat = out.ravel()
    for i in range(flat_in.shape[0]):
        flat[i] = c_stirlerr(flat_in[i])
    return out


def bd0(x, mu):
    x, mu = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(mu, dtype=float))
    out = np.empty(x.shape)
    xf = x.ravel()
    mf = mu.ravel()
    of = out.ravel()
    for i in range(xf.shape[0]):
        of[i] = c_bd0(xf[i], mf[i])
    return out


def log_dbinom_raw(x, n, p, q):
    x, n, p, q = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, n, p, q)))
    out = np.empty(x.shape)
    xf, nf, pf, qf, of = x.ravel(), n.ravel(), p.ravel(), q.ravel(), out.ravel()
    for i in range(xf.shape[0]):
        of[i] = c_log_dbinom_raw(xf[i], nf[i], pf[i], qf[i])
    return out


def log_nb_terms(double c, double gx, long kmin, long kmax):
    cdef long nk = kmax - kmin + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nk)
    cdef double prob = 1.0 / (1.0 + gx)
    cdef double qprob = gx / (1.0 + gx)
    cdef double k
    cdef long i
    with nogil:
        for i in range(nk):
            k = <double>(kmin + i)
            if k == 0.0:
                out[i] = -c * log1p(gx)
            else:
                out[i] = log(c / (c + k)) + c_log_dbinom_raw(c, c + k, prob, qprob)
    return out


cdef inline void _sort(double* a, int n) nogil:
    cdef int i, j
    cdef double key
    for i in range(1, n):
        key = a[i]
        j = i - 1
        while j >= 0 and a[j] > key:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = key


cdef int _edges(double a1, double b1, double ybar, double sd,
                double[::1] z, double grading, int graded, double* ye) nogil:
    cdef int nz = z.shape[0]
    cdef int m = 0
    cdef int i
    cdef double e, sc
    ye[m] = 0.0
    m += 1
    ye[m] = 1.0
    m += 1
    for i in range(nz):
        e = ybar + sd * z[i]
        if e < 0.0:
            e = 0.0
        elif e > 1.0:
            e = 1.0
        ye[m] = e
        m += 1
    sc = 1.0
    for i in range(graded):
        sc = sc / grading
        if a1 != floor(a1):
            ye[m] = ybar * sc
            m += 1
        if b1 != floor(b1):
            ye[m] = 1.0 - (1.0 - ybar) * sc
            m += 1
    _sort(ye, m)
    return m


def beta_rule(ks, double c, double gamma, int level, z_template, double grading,
              int graded_levels, gl_nodes, gl_weights):
    cdef double[::1] kv = np.ascontiguousarray(ks, dtype=float)
    cdef double[::1] z = np.ascontiguousarray(z_template, dtype=float)
    cdef double[::1] gx = np.ascontiguousarray(gl_nodes, dtype=float)
    cdef double[::1] gwt = np.ascontiguousarray(gl_weights, dtype=float)
    cdef int nk = kv.shape[0]
    cdef int nq = gx.shape[0]
    cdef int nsub = 1 << level
    cdef int per_panel = nsub * nq
    cdef int maxe = z.shape[0] + 2 * graded_levels + 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ebuf = np.empty(maxe)
    cdef double* ye = &ebuf[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fr = np.empty(per_panel)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fw = np.empty(per_panel)
    cdef int i, j, q, p, m, idx
    cdef long total = 0
    cdef long pos
    cdef double a, b, a1, b1, s, ybar, sd, h, ylo, ychi, y, yc, x1, n1, const, logd
    cdef bint flip

    for j in range(nsub):
        for q in range(nq):
            fr[j * nq + q] = (j + 0.5 * (gx[q] + 1.0)) / nsub
            fw[j * nq + q] = 0.5 * gwt[q] / nsub

    b = c + 1.0
    for i in range(nk):
        a = kv[i]
        if a > b:
            a1, b1 = b, a
        else:
            a1, b1 = a, b
        s = a1 + b1
        ybar = a1 / s
        sd = sqrt(a1 * b1 / (s * s * (s + 1.0)))
        m = _edges(a1, b1, ybar, sd, z, grading, graded_levels, ye)
        for p in range(m - 1):
            if ye[p + 1] - ye[p] > 0.0:
                total += per_panel

    cdef cnp.ndarray[cnp.float64_t, ndim=1] t_out = np.empty(total)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_out = np.empty(total)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] o_out = np.empty(total, dtype=np.intp)
    pos = 0
    for i in range(nk):
        a = kv[i]
        flip = a > b
        if flip:
            a1, b1 = b, a
        else:
            a1, b1 = a, b
        s = a1 + b1
        ybar = a1 / s
        sd = sqrt(a1 * b1 / (s * s * (s + 1.0)))
        x1 = a1 - 1.0
        n1 = s - 2.0
        if x1 > 0.0:
            const = (log(n1 + 1.0) + c_stirlerr(n1) - c_stirlerr(x1) - c_stirlerr(n1 - x1)
                     - 0.5 * (LN_2PI + log(x1) + log1p(-x1 / n1)))
        else:
            const = log(b1)
        m = _edges(a1, b1, ybar, sd, z, grading, graded_levels, ye)
        for p in range(m - 1):
            h = ye[p + 1] - ye[p]
            if not h > 0.0:
                continue
            ylo = ye[p]
            ychi = 1.0 - ye[p + 1]
            for idx in range(per_panel):
                y = ylo + h * fr[idx]
                yc = ychi + h * (1.0 - fr[idx])
                if x1 > 0.0:
                    logd = const - c_bd0(x1, n1 * y) - c_bd0(n1 - x1, n1 * yc)
                else:
                    logd = const + n1 * log(yc)
                w_out[pos] = h * fw[idx] * exp(logd)
                if flip:
                    t_out[pos] = yc / y / gamma
                else:
                    t_out[pos] = y / yc / gamma
                o_out[pos] = i
                pos += 1
    return t_out, w_out, o_out
