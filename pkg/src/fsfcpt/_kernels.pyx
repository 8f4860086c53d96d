# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same algorithms as :mod:`fsfcpt._pykernels`."""

from libc.math cimport sqrt, fabs, pow, cos, sin
from libc.stdlib cimport malloc, free
import numpy as np

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784, A76 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40

cdef enum:
    ST_OK = 0
    ST_MAX_STEPS = 1
    ST_STEP_UNDERFLOW = 2

OK = ST_OK
MAX_STEPS = ST_MAX_STEPS
STEP_UNDERFLOW = ST_STEP_UNDERFLOW


cdef inline double complex cexpi(double x) noexcept nogil:
    return cos(x) + 1j * sin(x)


def comb_envelope(times, coeffs, long n_first, double spacing):
    """Evaluate ``sum_k coeffs[k] * exp(1j * (n_first + k) * spacing * t)``."""
    t_arr = np.array(times, dtype=float, order="C")
    shape = t_arr.shape
    cdef double[::1] t = t_arr.reshape(-1)
    cdef double complex[::1] c = np.array(coeffs, dtype=complex, order="C")
    out_arr = np.empty(t.shape[0], dtype=complex)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, k, nt = t.shape[0], nc = c.shape[0]
    cdef double complex base, p, acc
    with nogil:
        for i in range(nt):
            base = cexpi(spacing * t[i])
            p = cexpi(spacing * t[i] * n_first)
            acc = 0
            for k in range(nc):
                acc = acc + c[k] * p
                p = p * base
            out[i] = acc
    return out_arr.reshape(shape)


cdef struct Params:
    Py_ssize_t nv
    Py_ssize_t nc
    long n_first
    double spacing, rabi1, rabi2, nu
    double complex a12, src13, src32


cdef inline double complex envelope_at(double t, const double complex* c, Params* P) noexcept nogil:
    cdef double complex base = cexpi(P.spacing * t)
    cdef double complex p = cexpi(P.spacing * t * P.n_first)
    cdef double complex acc = 0
    cdef Py_ssize_t k
    for k in range(P.nc):
        acc = acc + c[k] * p
        p = p * base
    return acc


cdef void rhs(double t, const double complex* y, double complex* f, const double complex* c,
              const double complex* a13, const double complex* a32, const double* w,
              Params* P) noexcept nogil:
    cdef Py_ssize_t i, nv = P.nv
    cdef double complex e = envelope_at(t, c, P)
    cdef double complex ec = e.conjugate()
    cdef double complex big_n = 0
    cdef double complex rho, s13, s32, b13, b32
    cdef double sf = 0.0, sb = 0.0
    for i in range(nv):
        big_n = big_n + w[i] * y[i]
    for i in range(nv):
        rho = y[i]
        s13 = y[nv + i]
        s32 = y[2 * nv + i]
        b13 = y[3 * nv + i]
        b32 = y[4 * nv + i]
        f[i] = -0.5j * (P.rabi1 * e * s32 - P.rabi2 * ec * s13) + P.a12 * rho + P.nu * big_n
        f[nv + i] = e * (P.src13 + 0.5j * P.rabi2 * rho) + a13[i] * s13
        f[2 * nv + i] = ec * (P.src32 - 0.5j * P.rabi1 * rho) + a32[i] * s32
        f[3 * nv + i] = e * P.src13 + a13[i] * b13
        f[4 * nv + i] = ec * P.src32 + a32[i] * b32
        sf += w[i] * (P.rabi1 * (s13 * ec).imag - P.rabi2 * (s32 * e).imag)
        sb += w[i] * (P.rabi1 * (b13 * ec).imag - P.rabi2 * (b32 * e).imag)
    f[5 * nv] = sf
    f[5 * nv + 1] = sb


def rwa_integrate(coeffs, long n_first, double spacing, double rabi1, double rabi2,
                  double p1, double p2, double omega21, double delta1,
                  double gamma_prime, double gamma_coh, double nu, kv, weights,
                  t_marks, double rtol, double atol, long max_steps):
    """See :func:`fsfcpt._pykernels.rwa_integrate`."""
    cdef double complex[::1] c = np.array(coeffs, dtype=complex, order="C")
    cdef double[::1] kvv = np.array(kv, dtype=float, order="C")
    cdef double[::1] w = np.array(weights, dtype=float, order="C")
    cdef double[::1] marks = np.array(t_marks, dtype=float, order="C")
    cdef Py_ssize_t nv = kvv.shape[0], ny = 5 * nv + 2, nm = marks.shape[0]
    cdef Params P
    P.nv = nv
    P.nc = c.shape[0]
    P.n_first = n_first
    P.spacing = spacing
    P.rabi1 = rabi1
    P.rabi2 = rabi2
    P.nu = nu
    P.a12 = 1j * omega21 - gamma_coh - nu
    P.src13 = 0.5j * rabi1 * p1
    P.src32 = -0.5j * rabi2 * p2
    cdef double delta2 = delta1 - omega21

    q_full_arr = np.zeros(nm)
    q_ref_arr = np.zeros(nm)
    cdef double[::1] q_full = q_full_arr
    cdef double[::1] q_ref = q_ref_arr

    a13_arr = np.empty(nv, dtype=complex)
    a32_arr = np.empty(nv, dtype=complex)
    cdef double complex[::1] a13 = a13_arr
    cdef double complex[::1] a32 = a32_arr
    cdef Py_ssize_t i, j, im
    cdef double kvmax = 0.0
    for i in range(nv):
        a13[i] = 1j * (delta1 + kvv[i]) - gamma_prime
        a32[i] = -1j * (delta2 + kvv[i]) - gamma_prime
        if fabs(kvv[i]) > kvmax:
            kvmax = fabs(kvv[i])

    # work buffers: y, y_new, acc, err, k1..k7
    cdef double complex* buf = <double complex*> malloc(11 * ny * sizeof(double complex))
    if buf == NULL:
        raise MemoryError()
    cdef double complex* y = buf
    cdef double complex* yn = buf + ny
    cdef double complex* tmp = buf + 2 * ny
    cdef double complex* k1 = buf + 3 * ny
    cdef double complex* k2 = buf + 4 * ny
    cdef double complex* k3 = buf + 5 * ny
    cdef double complex* k4 = buf + 6 * ny
    cdef double complex* k5 = buf + 7 * ny
    cdef double complex* k6 = buf + 8 * ny
    cdef double complex* k7 = buf + 9 * ny
    cdef double complex* swap
    cdef double complex ej

    cdef double t = 0.0, t_end, h, h_try, err_norm, fac, sc, ay, ayn, ae
    cdef long n_acc = 0, n_rej = 0
    cdef int status = ST_OK
    cdef double scale = (gamma_prime + fabs(delta1) + fabs(delta2) + kvmax
                         + spacing * (fabs(<double> n_first) + P.nc) + fabs(rabi1) + fabs(rabi2)
                         + fabs(omega21) + nu + gamma_coh)
    h = 0.05 / scale
    cdef const double complex* cp = &c[0]
    cdef const double complex* a13p = &a13[0]
    cdef const double complex* a32p = &a32[0]
    cdef const double* wp = &w[0]

    try:
        with nogil:
            for j in range(ny):
                y[j] = 0
            rhs(t, y, k1, cp, a13p, a32p, wp, &P)
            for im in range(nm):
                t_end = marks[im]
                while t < t_end:
                    if n_acc + n_rej >= max_steps:
                        status = ST_MAX_STEPS
                        break
                    h_try = h if h < t_end - t else t_end - t
                    if h_try < 1e-14 * (fabs(t) if fabs(t) > 1.0 else 1.0):
                        status = ST_STEP_UNDERFLOW
                        break
                    for j in range(ny):
                        tmp[j] = y[j] + h_try * A21 * k1[j]
                    rhs(t + C2 * h_try, tmp, k2, cp, a13p, a32p, wp, &P)
                    for j in range(ny):
                        tmp[j] = y[j] + h_try * (A31 * k1[j] + A32 * k2[j])
                    rhs(t + C3 * h_try, tmp, k3, cp, a13p, a32p, wp, &P)
                    for j in range(ny):
                        tmp[j] = y[j] + h_try * (A41 * k1[j] + A42 * k2[j] + A43 * k3[j])
                    rhs(t + C4 * h_try, tmp, k4, cp, a13p, a32p, wp, &P)
                    for j in range(ny):
                        tmp[j] = y[j] + h_try * (A51 * k1[j] + A52 * k2[j] + A53 * k3[j] + A54 * k4[j])
                    rhs(t + C5 * h_try, tmp, k5, cp, a13p, a32p, wp, &P)
                    for j in range(ny):
                        tmp[j] = y[j] + h_try * (A61 * k1[j] + A62 * k2[j] + A63 * k3[j]
                                                 + A64 * k4[j] + A65 * k5[j])
                    rhs(t + h_try, tmp, k6, cp, a13p, a32p, wp, &P)
                    for j in range(ny):
                        yn[j] = y[j] + h_try * (A71 * k1[j] + A73 * k3[j] + A74 * k4[j]
                                                + A75 * k5[j] + A76 * k6[j])
                    rhs(t + h_try, yn, k7, cp, a13p, a32p, wp, &P)
                    err_norm = 0.0
                    for j in range(ny):
                        ej = h_try * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j]
                                      + E6 * k6[j] + E7 * k7[j])
                        ay = sqrt(y[j].real * y[j].real + y[j].imag * y[j].imag)
                        ayn = sqrt(yn[j].real * yn[j].real + yn[j].imag * yn[j].imag)
                        sc = atol + rtol * (ay if ay > ayn else ayn)
                        ae = sqrt(ej.real * ej.real + ej.imag * ej.imag) / sc
                        err_norm += ae * ae
                    err_norm = sqrt(err_norm / ny)
                    if err_norm <= 1.0:
                        if h_try == t_end - t:
                            t = t_end
                        else:
                            t = t + h_try
                        swap = y
                        y = yn
                        yn = swap
                        swap = k1
                        k1 = k7
                        k7 = swap
                        n_acc += 1
                        if err_norm == 0.0:
                            fac = MAX_FACTOR
                        else:
                            fac = SAFETY * pow(err_norm, -0.2)
                            if fac > MAX_FACTOR:
                                fac = MAX_FACTOR
                        if h_try == h:
                            h = h_try * fac
                        elif h_try * fac > h:
                            h = h_try * fac
                    else:
                        n_rej += 1
                        fac = SAFETY * pow(err_norm, -0.2)
                        if fac < MIN_FACTOR:
                            fac = MIN_FACTOR
                        h = h_try * fac
                if status != ST_OK:
                    break
                q_full[im] = y[5 * nv].real
                q_ref[im] = y[5 * nv + 1].real
    finally:
        free(buf)
    return q_full_arr, q_ref_arr, n_acc, n_rej, status
