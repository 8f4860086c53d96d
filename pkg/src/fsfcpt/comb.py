"""Spectral comb of a frequency-shifted-feedback laser.

The comb is a set of equidistant components ``omega_n = omega + n * spacing``
with Gaussian amplitudes and quadratic phases::

    Omega_{j,n} = Omega_{j,0} * exp(-n**2 / n0**2)
    phi_n       = alpha * n**2 + beta * n + phi0

All rates are in units of the ground-coherence relaxation rate gamma_coh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CombSpec:
    """Stationary FSF comb.

    Parameters
    ----------
    rabi0 : (float, float)
        Peak Rabi frequencies ``(Omega_{1,0}, Omega_{2,0})`` of the
        ``|1>-|3>`` and ``|2>-|3>`` arms.
    n0 : float
        Gaussian envelope width, in component counts.
    spacing : float
        Frequency difference between adjacent components.
    alpha, beta, phi0 : float
        Quadratic, linear and constant phase coefficients [rad].
    n_max : int, optional
        Components with ``n > n_max`` are dropped. Defaults to ``ceil(3*n0)``.
    n_min : int, optional
        Components with ``n < n_min`` are dropped. Defaults to ``-n_max``;
        set it explicitly to build one-sided combs such as a bichromatic
        field ``n_min=0, n_max=1``.
    """

    rabi0: tuple[float, float]
    n0: float
    spacing: float
    alpha: float = 0.0
    beta: float = 0.0
    phi0: float = 0.0
    n_max: int | None = None
    n_min: int | None = None
    _indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.n0 > 0:
            raise DomainError(f"n0 must be > 0, got {self.n0}")
        if not self.spacing > 0:
            raise DomainError(f"spacing must be > 0, got {self.spacing}")
        if len(self.rabi0) != 2:
            raise DomainError("rabi0 must be a pair (Omega_1_0, Omega_2_0)")
        object.__setattr__(self, "rabi0", (float(self.rabi0[0]), float(self.rabi0[1])))
        if self.n_max is None:
            object.__setattr__(self, "n_max", int(math.ceil(3.0 * self.n0)))
        if self.n_min is None:
            object.__setattr__(self, "n_min", -int(self.n_max))
        if self.n_max - self.n_min < 1:
            raise DomainError(
                f"truncation [{self.n_min}, {self.n_max}] keeps fewer than two components")
        idx = np.arange(self.n_min, self.n_max + 1)
        idx.setflags(write=False)
        object.__setattr__(self, "_indices", idx)

    @property
    def indices(self) -> np.ndarray:
        """Component numbers kept after truncation."""
        return self._indices

    @property
    def period(self) -> float:
        """Repetition period ``T = 2 pi / spacing``."""
        return TWO_PI / self.spacing

    def envelope(self, n=None) -> np.ndarray:
        """Relative field amplitudes ``E_n / E_0``, zero outside the truncation."""
        n = self._indices if n is None else np.asarray(n)
        inside = (n >= self.n_min) & (n <= self.n_max)
        return np.where(inside, np.exp(-(n.astype(float) ** 2) / self.n0**2), 0.0)

    def rabi(self, arm: int, n=None) -> np.ndarray:
        if arm not in (1, 2):
            raise DomainError(f"arm must be 1 or 2, got {arm}")
        return self.rabi0[arm - 1] * self.envelope(n)

    def phases(self, n=None) -> np.ndarray:
        n = self._indices if n is None else np.asarray(n)
        n = n.astype(float)
        return np.mod(self.alpha * n**2 + self.beta * n + self.phi0, TWO_PI)

    def replace(self, **changes) -> "CombSpec":
        """Copy with fields changed; a new ``n0`` resets the default truncation."""
        kw = {k: getattr(self, k) for k in
              ("rabi0", "n0", "spacing", "alpha", "beta", "phi0", "n_max", "n_min")}
        if "n0" in changes and "n_max" not in changes:
            kw["n_max"] = kw["n_min"] = None
        kw.update(changes)
        return CombSpec(**kw)


def component_amplitude(spec: CombSpec, arm: int, n: int) -> float:
    """Rabi frequency of component ``n`` on the given arm."""
    return float(spec.rabi(arm, np.array([n]))[0])


def component_phase(spec: CombSpec, n: int) -> float:
    """Phase of component ``n`` reduced to ``[0, 2 pi)``."""
    return float(spec.phases(np.array([n]))[0])


def alpha_from_cavity(round_trip_time: float, spacing: float) -> float:
    """Quadratic phase coefficient set by the cavity round trip and the AOM shift.

    ``spacing`` is an angular frequency [rad/s], ``round_trip_time`` in seconds.
    """
    if not round_trip_time > 0 or not spacing > 0:
        raise DomainError("round_trip_time and spacing must both be positive")
    return 0.5 * round_trip_time * spacing


def optimal_alpha(m_tilde: int, j: int) -> float:
    """Phase coefficient ``pi * j / m_tilde`` at which all resonant Lambda links add up."""
    if m_tilde < 1:
        raise DomainError(f"m_tilde must be >= 1, got {m_tilde}")
    return math.pi * j / m_tilde


def alpha_tolerance(m: int, n0: float) -> float:
    """Detuning of alpha from an optimum over which the signal collapses."""
    if m < 1 or not n0 > 0:
        raise DomainError(f"need m >= 1 and n0 > 0, got m={m}, n0={n0}")
    return 1.0 / (m * n0)


def field_envelope(spec: CombSpec, times) -> np.ndarray:
    """Complex slowly varying field ``sum_n (E_n/E_0) exp(i (n spacing t + phi_n))``."""
    times = np.asarray(times, dtype=float)
    coeffs = spec.envelope() * np.exp(1j * spec.phases())
    return kernels.comb_envelope(times, coeffs, int(spec.n_min), float(spec.spacing))


def pulse_train_intensity(spec: CombSpec, times) -> np.ndarray:
    """Intensity ``|sum_n E_n exp(i (n spacing t + phi_n))|**2`` in units of ``E_0**2``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise DomainError("time grid is empty")
    eps = field_envelope(spec, times)
    return eps.real**2 + eps.imag**2


def period_grid(spec: CombSpec, samples: int = 4096) -> np.ndarray:
    """``samples`` equispaced times covering one period, endpoint excluded."""
    return np.arange(samples) * (spec.period / samples)


def fundamental_period(intensity, period: float, threshold: float = 0.9) -> float:
    """Shortest lag at which the periodic intensity repeats itself.

    ``intensity`` must sample exactly one period on an equispaced grid with the
    endpoint excluded. The circular autocorrelation of the mean-subtracted
    samples is searched for its first local maximum exceeding ``threshold``
    (relative to zero lag); if none exists the full period is returned.
    """
    x = np.asarray(intensity, dtype=float)
    x = x - x.mean()
    n = x.size
    spec = np.fft.rfft(x)
    ac = np.fft.irfft(np.abs(spec) ** 2, n)
    if ac[0] <= 0:
        return period
    ac = ac / ac[0]
    for k in range(1, n // 2 + 1):
        if ac[k] >= threshold and ac[k] >= ac[k - 1] and ac[k] >= ac[(k + 1) % n]:
            return k * period / n
    return period
