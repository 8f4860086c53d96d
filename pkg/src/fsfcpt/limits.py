"""Closed-form limiting cases of the CPT signal.

Large ``gamma'`` (homogeneous) regime: narrow-band and broad-band signals,
field broadening, light shift and its Lorentzian-envelope estimate, the
zero-shift detuning and the shift of the resonance minimum. Small ``gamma'``
(Doppler) regime: the velocity-averaged signal with strong collisions and
the dispersion integral ``F``.

Two-photon detuning convention as in :mod:`fsfcpt.solver`:
``omega21 = m_tilde * spacing + delta`` at fixed ``delta1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import lineshape
from .atom import LambdaSystem, VelocityGrid, build_velocity_grid, select_mtilde
from .comb import CombSpec
from .errors import DomainError, IllConditionedError


@dataclass(frozen=True)
class ShiftBroadeningReport:
    gamma_b: float
    delta_f: float
    delta_z: float | None = None
    delta_s: float | None = None

    def __post_init__(self):
        if not self.gamma_b >= 0:
            raise DomainError(f"gamma_b must be >= 0, got {self.gamma_b}")


def _mtilde(system, comb, m_tilde):
    if m_tilde is None:
        return select_mtilde(system.omega21, comb.spacing)
    if m_tilde < 1:
        raise DomainError(f"m_tilde must be >= 1, got {m_tilde}")
    return int(m_tilde)


def _link_sums(comb: CombSpec, m):
    """``P_m = sum_n Omega_{1,n} Omega_{2,n-m} exp(i (phi_{n-m} - phi_n))`` for each ``m``."""
    n = comb.indices
    m = np.asarray(m)
    b = n[None, :] - m[:, None]
    amp = comb.rabi(1, n)[None, :] * comb.rabi(2, b)
    return (amp * np.exp(1j * (comb.phases(b) - comb.phases(n)[None, :]))).sum(axis=1)


def _harmonics(comb: CombSpec):
    span = int(comb.n_max - comb.n_min)
    return np.arange(-span, span + 1)


def signal_narrowband(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=0.0,
                      resonant_only: bool = False):
    """CPT signal for ``gamma'`` much larger than the comb width, weak field.

    The triple sum over ``(n, m, l)`` factorizes as ``sum_m |P_m|**2 / (...)``.
    ``resonant_only`` keeps the ``m = m_tilde`` term alone. Accepts a scalar
    or an array of ``delta``.
    """
    mt = _mtilde(system, comb, m_tilde)
    m = np.array([mt]) if resonant_only else _harmonics(comb)
    weight = np.abs(_link_sums(comb, m)) ** 2
    d = np.asarray(delta, dtype=float)
    lor = 1.0 / (system.gamma_coh - 1j * (d[..., None] + (mt - m) * comb.spacing))
    pref = (system.p1 + system.p2) / (4.0 * system.gamma_prime**2)
    out = -pref * (weight * lor.real).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def resonance_minimum_shift(system: LambdaSystem, comb: CombSpec, m_tilde=None, h: float = 1e-3,
                            resonant_only: bool = False, signal=None, rtol: float = 1e-4) -> float:
    """``-S'(0) / S''(0)`` of the narrow-band signal by central differences.

    The estimate with step ``h`` is checked against a Richardson-extrapolated
    one built from steps ``h`` and ``2h``. ``signal`` may replace the
    narrow-band model with any callable ``delta -> S``.
    """
    if signal is None:
        def signal(d):
            return signal_narrowband(system, comb, m_tilde, d, resonant_only)

    def derivs(step):
        sp, s0, sm = signal(step), signal(0.0), signal(-step)
        return (sp - sm) / (2 * step), (sp - 2 * s0 + sm) / step**2, s0

    d1, d2, s0 = derivs(h)
    d1b, d2b, _ = derivs(2 * h)
    g = system.gamma_coh if system.gamma_coh > 0 else 1.0
    if not abs(d2) > 1e-8 * abs(s0) / g**2 or d2 == 0.0:
        raise IllConditionedError("second derivative of the signal vanishes at delta = 0",
                                  {"d2": d2, "s0": s0})
    shift = -d1 / d2
    rich = -((4 * d1 - d1b) / 3) / ((4 * d2 - d2b) / 3)
    if abs(rich - shift) > rtol * max(abs(shift), abs(rich)) + 1e-12 * g:
        raise IllConditionedError("finite-difference shift is not step-converged",
                                  {"shift": shift, "richardson": rich, "h": h})
    return float(shift)


def _detunings(system, comb, delta2=None):
    n = comb.indices
    d2 = system.delta2 if delta2 is None else delta2
    return system.delta1 - n * comb.spacing, d2 - n * comb.spacing


def field_broadening(system: LambdaSystem, comb: CombSpec, delta2=None) -> float:
    """Power broadening ``gamma_b`` of the dark resonance."""
    x1, x2 = _detunings(system, comb, delta2)
    g = system.gamma_prime
    return float(0.25 * g * np.sum(comb.rabi(1) ** 2 / (g * g + x1 * x1)
                                   + comb.rabi(2) ** 2 / (g * g + x2 * x2)))


def light_shift(system: LambdaSystem, comb: CombSpec, delta2=None) -> float:
    """Light shift ``delta_f`` summed exactly over the comb components."""
    x1, x2 = _detunings(system, comb, delta2)
    g2 = system.gamma_prime**2
    return float(0.25 * np.sum(comb.rabi(1) ** 2 * x1 / (g2 + x1 * x1)
                               - comb.rabi(2) ** 2 * x2 / (g2 + x2 * x2)))


def _lorentzian_arm(rabi0, d, n0, w, g):
    s2 = math.sqrt(2.0)
    num = ((math.sqrt(2 * math.pi * s2) * g - n0 * w * 2**0.25) ** 2 + 2 * math.pi * s2 * d * d)
    den = 4.0 * (4 * math.pi**2 * (d * d + g * g) ** 2
                 + n0**2 * w**2 * (n0**2 * w**2 + 4 * math.pi * d * d - 4 * math.pi * g * g))
    if abs(den) <= 1e-300 or not math.isfinite(den):
        raise IllConditionedError("Lorentzian-envelope light shift has a vanishing denominator",
                                  {"delta": d, "n0": n0, "spacing": w, "gamma_prime": g})
    return rabi0**2 * n0 * d * math.sqrt(math.pi**3) * num / den


def light_shift_lorentzian(system: LambdaSystem, comb: CombSpec) -> float:
    """Light shift for a Lorentzian spectral envelope with the sum replaced by an integral."""
    g = system.gamma_prime
    a1 = _lorentzian_arm(comb.rabi0[0], system.delta1, comb.n0, comb.spacing, g)
    a2 = _lorentzian_arm(comb.rabi0[1], system.delta2, comb.n0, comb.spacing, g)
    return a1 - a2


def zero_shift_detuning(omega21: float, omega1_0: float, omega2_0: float) -> float:
    """``delta1`` at which the two arms' light shifts cancel (broad-band comb)."""
    den = omega2_0**2 - omega1_0**2
    if den == 0:
        raise DomainError("equal Rabi amplitudes have no finite zero-shift detuning")
    return omega21 * omega2_0**2 / den


def signal_broadband(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=0.0,
                     detunings: str = "resonance"):
    """Resonant-harmonic signal with field broadening and light shift, ``gamma' >> kv0``.

    Only ``r12`` at ``m_tilde`` is kept, so the signal is a Lorentzian in
    ``delta`` of half-width ``gamma_coh + gamma_b`` centred at
    ``delta = -delta_f`` (``delta_f`` from :func:`light_shift`).

    ``detunings="resonance"`` evaluates the numerators, ``gamma_b`` and
    ``delta_f`` at ``delta2 = delta1 - m_tilde * spacing`` so that ``delta``
    enters through the resonance denominator only; ``"local"`` re-evaluates
    them with ``delta2 = delta1 - (m_tilde * spacing + delta)`` at each point.
    Accepts scalar or array ``delta``.
    """
    if detunings not in ("resonance", "local"):
        raise DomainError(f"detunings must be 'resonance' or 'local', got {detunings!r}")
    mt = _mtilde(system, comb, m_tilde)
    d = np.atleast_1d(np.asarray(delta, dtype=float))
    n = comb.indices
    w = comb.spacing
    g = system.gamma_prime
    b = n - mt
    amp = comb.rabi(1) * comb.rabi(2, b)
    ph = comb.phases
    e_src = amp * np.exp(1j * (ph(n) - ph(mt) - ph(b)))
    e_sig = amp * np.exp(1j * (ph(mt) - ph(n) + ph(b)))
    den13 = g - 1j * (system.delta1 - n * w)

    def parts(d2):
        den32 = g + 1j * (d2 - b * w)
        src = (e_src * (system.p1 / den13 + system.p2 / den32)).sum()
        sig = (e_sig * (0.5 / den13 + 0.5 / den32)).sum()
        return src * sig, field_broadening(system, comb, d2), light_shift(system, comb, d2)

    out = np.empty(d.size)
    if detunings == "resonance":
        k, gb, df = parts(system.delta1 - mt * w)
        out[:] = (-k / (4.0 * (system.gamma_coh + gb - 1j * (d + df)))).real
    else:
        for i, dk in enumerate(d):
            k, gb, df = parts(system.delta1 - (mt * w + dk))
            out[i] = (-k / (4.0 * (system.gamma_coh + gb - 1j * (dk + df)))).real
    return float(out[0]) if np.ndim(delta) == 0 else out.reshape(np.shape(delta))


def dispersion_integral(x, ratio: float, nodes: int | None = None):
    """``F(x) = integral gamma' M(v) / (gamma' + i (gamma' x + kv)) dv`` with ``ratio = gamma'/kv0``.

    Evaluated in closed form through the Faddeeva function; pass ``nodes`` to
    use Gauss-Hermite quadrature on that many velocity nodes instead.
    """
    if not ratio > 0:
        raise DomainError(f"ratio must be > 0, got {ratio}")
    if math.isinf(ratio):
        x = np.asarray(x, dtype=float)
        out = 1.0 / (1.0 + 1j * x)
    elif nodes is None:
        out = lineshape.dispersion_f(x, ratio)
    else:
        grid = build_velocity_grid(1.0, nodes)
        x = np.asarray(x, dtype=float)
        u = grid.nodes
        out = (grid.weights * ratio / (ratio + 1j * (ratio * x[..., None] + u))).sum(axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


class _Averager:
    """Maxwell averages of Lorentzian products: closed form, ``kv0 = 0`` or a grid."""

    def __init__(self, kv0, grid: VelocityGrid | None):
        self.kv0 = kv0
        self.grid = grid

    def two(self, c1, s1, c2, s2):
        if self.grid is not None:
            return self._quad((c1, s1), (c2, s2))
        if self.kv0 == 0:
            return 1.0 / (c1 * c2)
        return lineshape.average2(c1, s1, c2, s2, self.kv0)

    def three(self, c1, s1, c2, s2, c3, s3):
        if self.grid is not None:
            return self._quad((c1, s1), (c2, s2), (c3, s3))
        if self.kv0 == 0:
            return 1.0 / (c1 * c2 * c3)
        return lineshape.average3(c1, s1, c2, s2, c3, s3, self.kv0)

    def f(self, x, gamma_prime):
        if self.grid is not None:
            kv = self.kv0 * self.grid.nodes
            acc = 0
            for wi, k in zip(self.grid.weights, kv):
                acc = acc + wi * gamma_prime / (gamma_prime + 1j * (gamma_prime * x + k))
            return acc
        if self.kv0 == 0:
            return 1.0 / (1.0 + 1j * x)
        return lineshape.dispersion_f(x, gamma_prime / self.kv0)

    def _quad(self, *factors):
        acc = 0
        for wi, k in zip(self.grid.weights, self.kv0 * self.grid.nodes):
            term = wi
            for c, s in factors:
                term = term / (c + 1j * s * k)
            acc = acc + term
        return acc


def signal_doppler(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=0.0,
                   fast: bool = False, grid: VelocityGrid | None = None) -> float:
    """Weak-field CPT signal with Doppler averaging and strong collisions.

    Field broadening and light shifts are neglected. The velocity integrals
    are done in closed form (Faddeeva function) unless ``grid`` is given.
    ``fast`` keeps only the ``m = m_tilde, l = n`` terms, which makes the
    result independent of the comb phases.
    """
    mt = _mtilde(system, comb, m_tilde)
    g = system.gamma_prime
    gc = system.gamma_coh
    nu = system.nu
    w = comb.spacing
    d1 = system.delta1
    d = float(delta)
    n = comb.indices
    m = np.array([mt]) if fast else _harmonics(comb)

    # P[m, n] and the conjugate-type link factor for l
    b = n[None, :] - m[:, None]
    P = comb.rabi(1, n)[None, :] * comb.rabi(2, b) * np.exp(1j * (comb.phases(b) - comb.phases(n)[None, :]))
    dm = d + (mt - m) * w
    avg = _Averager(system.kv0, grid)

    nn = n[None, :, None].astype(float)
    mm = m[:, None, None].astype(float)
    ll = nn if fast else n[None, None, :].astype(float)
    Q = P.conj()[:, :, None] if fast else P.conj()[:, None, :]

    c1 = g - 1j * (d1 - nn * w)
    c2 = g + 1j * (d1 - d - nn * w + mm * w - mt * w)
    c3p2 = g + 1j * (d1 - d - (ll + mt - mm) * w)
    c3p1 = g - 1j * (d1 - ll * w)
    bracket = system.p2 * avg.three(c1, -1, c2, 1, c3p2, 1) + system.p1 * avg.three(c1, -1, c2, 1, c3p1, -1)
    if nu != 0.0:
        dmm = dm[:, None, None]
        fa = avg.f((d1 - d - ll * w + mm * w - mt * w) / g, g)
        fb = np.conj(avg.f((d1 - ll * w) / g, g))
        coll = nu / (g * (gc - 1j * dmm)) * (system.p2 * fa + system.p1 * fb)
        bracket = bracket + coll * avg.two(c1, -1, c2, 1)
    K = P[:, :, None] * Q * (2 * g - 1j * dm)[:, None, None]
    total = (K * bracket).sum(axis=(1, 2)) / (gc + nu - 1j * dm)
    return float(-0.125 * total.sum().real)


def shift_broadening_report(system: LambdaSystem, comb: CombSpec, m_tilde=None,
                            zero_shift: bool = True, minimum_shift: bool = True) -> ShiftBroadeningReport:
    """``gamma_b``, ``delta_f`` and, where defined, ``delta_z`` and ``delta_s``."""
    gb = field_broadening(system, comb)
    df = light_shift(system, comb)
    dz = None
    if zero_shift and comb.rabi0[0] != comb.rabi0[1]:
        dz = zero_shift_detuning(system.omega21, *comb.rabi0)
    ds = None
    if minimum_shift:
        ds = resonance_minimum_shift(system, comb, m_tilde)
    return ShiftBroadeningReport(gb, df, dz, ds)
