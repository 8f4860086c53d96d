"""Maxwell averages of products of complex Lorentzian factors.

Everything reduces to the plasma dispersion function

    G(z) = 1/sqrt(pi) * integral exp(-u**2) / (u - z) du,

evaluated through the Faddeeva function ``scipy.special.wofz``. A factor
``c + i*s*kv0*u`` (``s = +-1``, ``Re c > 0``) is rewritten as
``i*s*kv0*(u - z)`` with ``z = i*s*c/kv0`` and the product is split into
partial fractions.
"""

import numpy as np
from scipy.special import wofz

SQRT_PI = np.sqrt(np.pi)


def plasma_g(z):
    """``G(z)`` for ``Im z != 0``, continued from the correct half plane."""
    z = np.asarray(z, dtype=complex)
    upper = z.imag > 0
    zz = np.where(upper, z, z.conj())
    wz = wofz(zz)
    return np.where(upper, 1j * SQRT_PI * wz, -1j * SQRT_PI * wz.conj())


def plasma_g_prime(z, g=None):
    """``dG/dz = -2 (1 + z G)``."""
    z = np.asarray(z, dtype=complex)
    if g is None:
        g = plasma_g(z)
    return -2.0 * (1.0 + z * g)


def _pole(c, sign, kv0):
    return 1j * sign * np.asarray(c, dtype=complex) / kv0


def average2(c1, s1, c2, s2, kv0):
    """``<1 / ((c1 + i s1 kv) (c2 + i s2 kv))>`` over the Maxwell distribution, ``s1 != s2``.

    Opposite signs keep the two poles in opposite half planes, so they never
    coincide.
    """
    z1 = _pole(c1, s1, kv0)
    z2 = _pole(c2, s2, kv0)
    pref = 1.0 / ((1j * s1 * kv0) * (1j * s2 * kv0))
    return pref * (plasma_g(z1) - plasma_g(z2)) / (z1 - z2)


def average3(c1, s1, c2, s2, c3, s3, kv0, tol=1e-12):
    """Maxwell average of ``1 / prod_k (c_k + i s_k kv)`` for three factors.

    ``s1 = -s2``; the third factor may coincide exactly with either of the
    first two (double pole), which is detected elementwise.
    """
    z1 = _pole(c1, s1, kv0)
    z2 = _pole(c2, s2, kv0)
    z3 = _pole(c3, s3, kv0)
    pref = 1.0 / ((1j * s1 * kv0) * (1j * s2 * kv0) * (1j * s3 * kv0))
    # G is evaluated on the un-broadcast pole arrays
    g1, g2, g3 = plasma_g(z1), plasma_g(z2), plasma_g(z3)
    g3p = plasma_g_prime(z3, g3)
    scale = 1.0 + np.abs(z3)
    z13, z23, z12 = z1 - z3, z2 - z3, z1 - z2
    same1 = np.abs(z13) <= tol * scale
    same2 = np.abs(z23) <= tol * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        out = g1 / (z12 * z13) - g2 / (z12 * z23) + g3 / (z13 * z23)
        if np.any(same1):
            # double pole z3 = z1, simple pole z2
            out = np.where(same1, (g2 - g3) / z23**2 - g3p / z23, out)
        if np.any(same2):
            out = np.where(same2, (g1 - g3) / z13**2 - g3p / z13, out)
    return pref * out


def dispersion_f(x, ratio):
    """``F(x) = <ratio / (ratio + i (ratio x + u))>`` in closed form.

    ``ratio`` is ``gamma' / kv0``; the result is ``sqrt(pi) r w(r (i - x))``.
    """
    x = np.asarray(x, dtype=float)
    return SQRT_PI * ratio * wofz(ratio * (1j - x))
