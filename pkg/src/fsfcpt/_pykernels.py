"""Pure-Python (numpy) kernels.

Reference implementation of the compiled ``_kernels`` extension. The two
modules implement the same algorithms step for step; the compiled one is
selected at import when available (see :mod:`fsfcpt.kernels`).
"""

import numpy as np

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

# status codes shared with the compiled backend
OK = 0
MAX_STEPS = 1
STEP_UNDERFLOW = 2


def comb_envelope(times, coeffs, n_first, spacing):
    """Evaluate ``sum_k coeffs[k] * exp(1j * (n_first + k) * spacing * t)``."""
    times = np.asarray(times, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    n = n_first + np.arange(coeffs.size)
    flat = times.reshape(-1)
    out = np.empty(flat.size, dtype=complex)
    # chunk to bound the (times x components) temporary
    step = max(1, 2**20 // max(1, coeffs.size))
    for i in range(0, flat.size, step):
        t = flat[i:i + step]
        out[i:i + step] = np.exp(1j * spacing * np.outer(t, n)) @ coeffs
    return out.reshape(times.shape)


def _envelope_at(t, coeffs, n_first, spacing):
    base = np.exp(1j * spacing * t)
    k = coeffs.size
    powers = np.empty(k, dtype=complex)
    powers[0] = np.exp(1j * spacing * t * n_first)
    for i in range(1, k):
        powers[i] = powers[i - 1] * base
    return np.dot(coeffs, powers)


def rwa_integrate(coeffs, n_first, spacing, rabi1, rabi2, p1, p2, omega21,
                  delta1, gamma_prime, gamma_coh, nu, kv, weights, t_marks,
                  rtol, atol, max_steps):
    """Integrate the rotating-wave equations from the ground-state start.

    State per velocity node: ground coherence, the two optical coherences of
    the full problem, and the two optical coherences of the reference run in
    which the ground coherence is decoupled. Two scalar accumulators carry the
    running time integrals of the velocity-averaged excitation rate of both
    runs. All coherences are divided by the Maxwell weight of their node.

    Returns ``(q_full, q_ref, n_accepted, n_rejected, status)`` where
    ``q_*[k]`` is the accumulated integral at ``t_marks[k]``.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    kv = np.ascontiguousarray(kv, dtype=float)
    w = np.ascontiguousarray(weights, dtype=float)
    marks = np.ascontiguousarray(t_marks, dtype=float)
    nv = kv.size
    delta2 = delta1 - omega21
    a13 = 1j * (delta1 + kv) - gamma_prime
    a32 = -1j * (delta2 + kv) - gamma_prime
    a12 = 1j * omega21 - gamma_coh - nu
    src13 = 0.5j * rabi1 * p1
    src32 = -0.5j * rabi2 * p2

    def rhs(t, y):
        e = _envelope_at(t, coeffs, n_first, spacing)
        ec = e.conjugate()
        rho = y[0:nv]
        s13 = y[nv:2 * nv]
        s32 = y[2 * nv:3 * nv]
        b13 = y[3 * nv:4 * nv]
        b32 = y[4 * nv:5 * nv]
        big_n = np.dot(w, rho)
        f = np.empty_like(y)
        f[0:nv] = -0.5j * (rabi1 * e * s32 - rabi2 * ec * s13) + a12 * rho + nu * big_n
        f[nv:2 * nv] = e * (src13 + 0.5j * rabi2 * rho) + a13 * s13
        f[2 * nv:3 * nv] = ec * (src32 - 0.5j * rabi1 * rho) + a32 * s32
        f[3 * nv:4 * nv] = e * src13 + a13 * b13
        f[4 * nv:5 * nv] = ec * src32 + a32 * b32
        sf = rabi1 * (s13 * ec).imag - rabi2 * (s32 * e).imag
        sb = rabi1 * (b13 * ec).imag - rabi2 * (b32 * e).imag
        f[5 * nv] = np.dot(w, sf)
        f[5 * nv + 1] = np.dot(w, sb)
        return f

    y = np.zeros(5 * nv + 2, dtype=complex)
    t = 0.0
    scale = (gamma_prime + abs(delta1) + abs(delta2) + float(np.max(np.abs(kv)))
             + spacing * (abs(n_first) + coeffs.size) + abs(rabi1) + abs(rabi2)
             + abs(omega21) + nu + gamma_coh)
    h = 0.05 / scale
    q_full = np.zeros(marks.size)
    q_ref = np.zeros(marks.size)
    n_acc = n_rej = 0
    k1 = rhs(t, y)
    ks = [None] * 7
    for im, t_end in enumerate(marks):
        while t < t_end:
            if n_acc + n_rej >= max_steps:
                return q_full, q_ref, n_acc, n_rej, MAX_STEPS
            h_try = min(h, t_end - t)
            if h_try < 1e-14 * max(1.0, abs(t)):
                return q_full, q_ref, n_acc, n_rej, STEP_UNDERFLOW
            ks[0] = k1
            for s in range(1, 7):
                acc = y.copy()
                for j, a in enumerate(_A[s]):
                    if a != 0.0:
                        acc += (h_try * a) * ks[j]
                ks[s] = rhs(t + _C[s] * h_try, acc)
                if s == 6:
                    y_new = acc
            err = np.zeros_like(y)
            for j, e in enumerate(_E):
                if e != 0.0:
                    err += (h_try * e) * ks[j]
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.sqrt(np.mean((np.abs(err) / sc) ** 2)))
            if err_norm <= 1.0:
                t = t_end if h_try == t_end - t else t + h_try
                y = y_new
                k1 = ks[6]
                n_acc += 1
                fac = MAX_FACTOR if err_norm == 0.0 else min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
                if h_try == h:
                    h = h_try * fac
                else:
                    h = max(h, h_try * fac)
            else:
                n_rej += 1
                h = h_try * max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
        q_full[im] = y[5 * nv].real
        q_ref[im] = y[5 * nv + 1].real
    return q_full, q_ref, n_acc, n_rej, OK
