"""Three-level Lambda atom: rates, populations, detunings and velocity grids."""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import DomainError

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class LambdaSystem:
    """Atomic parameters, all rates in units of ``gamma_coh`` (normally 1).

    ``delta1`` is the detuning ``omega_31 - omega`` of the strongest comb
    component from the ``|1>-|3>`` transition; ``delta2`` follows from it.
    Populations of the long-lived states are held fixed (weak field) and the
    excited-state population is taken as zero.
    """

    omega21: float
    gamma_prime: float
    p1: float = 0.5
    p2: float = 0.5
    gamma_coh: float = 1.0
    nu: float = 0.0
    kv0: float = 0.0
    delta1: float = 0.0

    def __post_init__(self):
        problems = []
        if not self.omega21 >= 0:
            problems.append(f"omega21 must be >= 0, got {self.omega21}")
        if not self.gamma_prime > 0:
            problems.append(f"gamma_prime must be > 0, got {self.gamma_prime}")
        if self.p1 < 0 or self.p2 < 0 or self.p1 + self.p2 > 1 + 1e-12:
            problems.append(f"need p1, p2 >= 0 and p1 + p2 <= 1, got {self.p1}, {self.p2}")
        if self.gamma_coh < 0:
            problems.append(f"gamma_coh must be >= 0, got {self.gamma_coh}")
        if self.nu < 0:
            problems.append(f"nu must be >= 0, got {self.nu}")
        if self.kv0 < 0:
            problems.append(f"kv0 must be >= 0, got {self.kv0}")
        if problems:
            raise DomainError("; ".join(problems))

    @classmethod
    def from_rates(cls, omega21, gamma_col, gamma_sp, gamma_laser=0.0, **kw):
        """Build from the collisional, spontaneous and laser-linewidth contributions."""
        return cls(omega21=omega21, gamma_prime=gamma_col + 0.5 * gamma_sp + 0.5 * gamma_laser, **kw)

    @property
    def delta2(self) -> float:
        return self.delta1 - self.omega21

    def replace(self, **changes) -> "LambdaSystem":
        return dataclasses.replace(self, **changes)

    def check_two_photon_doppler(self, wavelength_ratio: float) -> bool:
        """Warn when the neglected two-photon Doppler width is not small.

        ``wavelength_ratio`` is ``omega21 / omega`` (ground splitting over the
        optical frequency), so that ``(omega21/c) v0 = wavelength_ratio * kv0``.
        Returns True when the inequality against ``gamma_prime`` holds.
        """
        ok = wavelength_ratio * self.kv0 < self.gamma_prime
        if not ok:
            warnings.warn("two-photon Doppler width is not small compared with gamma'",
                          RuntimeWarning, stacklevel=2)
        return ok


@dataclass(frozen=True)
class VelocityGrid:
    """Quadrature nodes (units of v0) and weights for ``int M(v) f(v) dv``."""

    nodes: np.ndarray
    weights: np.ndarray
    rule: str = "hermite"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1 or nodes.size == 0:
            raise DomainError("nodes and weights must be equal-length 1-d arrays")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    def integrate(self, values, axis=-1):
        """Maxwell-weighted sum of ``values`` sampled on the nodes along ``axis``."""
        values = np.moveaxis(np.asarray(values), axis, -1)
        return values @ self.weights


def maxwell_density(v):
    """One-dimensional Maxwell distribution in units where v0 = 1."""
    v = np.asarray(v, dtype=float)
    out = np.exp(-v * v) / SQRT_PI
    return float(out) if out.ndim == 0 else out


def build_velocity_grid(kv0: float, node_count: int = 64, rule: str = "hermite") -> VelocityGrid:
    """Velocity quadrature for the Maxwell weight.

    ``rule="hermite"`` gives Gauss-Hermite nodes; ``rule="uniform"`` gives an
    equispaced trapezoid grid on ``[-6.5, 6.5]`` which converges faster when
    the integrand has poles close to the real axis (``gamma' << kv0``).
    A zero Doppler width collapses the grid to the single node ``v = 0``.
    """
    if node_count < 1:
        raise DomainError(f"node_count must be >= 1, got {node_count}")
    if kv0 < 0:
        raise DomainError(f"kv0 must be >= 0, got {kv0}")
    if kv0 == 0:
        return VelocityGrid(np.zeros(1), np.ones(1), rule="single")
    if rule == "hermite":
        x, w = hermgauss(node_count)
    elif rule == "uniform":
        if node_count < 3:
            raise DomainError("uniform rule needs at least 3 nodes")
        x = np.linspace(-6.5, 6.5, node_count)
        w = np.exp(-x * x)
    else:
        raise DomainError(f"unknown quadrature rule {rule!r}")
    # exact mirror symmetry against rounding
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return VelocityGrid(x, w / w.sum(), rule=rule)


def select_mtilde(omega21: float, spacing: float) -> int:
    """Harmonic ``m >= 1`` minimizing ``|omega21 - m * spacing|``; ties go to the smaller m."""
    if not spacing > 0:
        raise DomainError(f"spacing must be > 0, got {spacing}")
    if not omega21 > 0:
        raise DomainError(f"omega21 must be > 0, got {omega21}")
    lo = max(1, math.floor(omega21 / spacing))
    best = lo
    for m in (lo + 1, lo - 1):
        if m >= 1 and abs(omega21 - m * spacing) < abs(omega21 - best * spacing):
            best = m
    return int(best)


def two_photon_detuning(omega21: float, m_tilde: int, spacing: float) -> float:
    """Mismatch ``omega21 - m_tilde * spacing`` of the ground splitting from the comb harmonic."""
    return omega21 - m_tilde * spacing
