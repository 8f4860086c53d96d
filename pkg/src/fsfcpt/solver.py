"""Steady-state Fourier solver for the ground coherence and the CPT signal.

The ground coherence is expanded in comb harmonics,
``rho_12 = sum_n r12_n exp(i (n spacing t + phi_n))``; the optical coherences
follow algebraically and the harmonics ``r12_n`` obey one linear system per
velocity node, coupled across nodes by strong velocity-changing collisions.

Internally every velocity-resolved amplitude is divided by the Maxwell weight
of its node, so ``R12 = sum_i w_i r12[:, i]`` and the collision term injects
``nu * R12`` identically at every node. This keeps the single-node limit
``kv0 = 0`` exact.

Units: all rates in ``gamma_coh`` of the :class:`~fsfcpt.atom.LambdaSystem`
(normally 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .atom import LambdaSystem, VelocityGrid, build_velocity_grid, select_mtilde
from .comb import CombSpec
from .errors import ConvergenceError, DomainError, SingularSystemError

COND_LIMIT = 1e13
RESIDUAL_LIMIT = 1e-10


@dataclass(frozen=True)
class SignalPoint:
    delta: float
    s_cpt: float
    s_background: float
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class CoherenceField:
    """Ground-coherence harmonics on a velocity grid.

    ``r12[k, i]`` is the amplitude of harmonic ``harmonics[k]`` at velocity
    node ``i`` per unit Maxwell weight; ``R12`` is its velocity integral.
    """

    harmonics: np.ndarray
    r12: np.ndarray
    R12: np.ndarray
    grid: VelocityGrid
    omega21: float
    m_tilde: int
    meta: dict = field(default_factory=dict, compare=False)

    def component(self, n: int) -> complex:
        """Velocity-integrated amplitude of harmonic ``n`` (0 outside the window)."""
        k = n - int(self.harmonics[0])
        if 0 <= k < self.harmonics.size:
            return complex(self.R12[k])
        return 0j


class _Problem:
    """Index bookkeeping and detuning factors shared by assembly and signal."""

    def __init__(self, system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=None,
                 grid: VelocityGrid | None = None, pad: int = 0):
        if m_tilde is None:
            m_tilde = select_mtilde(system.omega21, comb.spacing)
        if m_tilde < 1:
            raise DomainError(f"m_tilde must be >= 1, got {m_tilde}")
        self.system = system
        self.comb = comb
        self.m_tilde = int(m_tilde)
        w = comb.spacing
        if delta is None:
            self.omega21 = system.omega21
            self.delta = system.omega21 - m_tilde * w
        else:
            self.delta = float(delta)
            self.omega21 = m_tilde * w + self.delta
        self.delta1 = system.delta1
        self.delta2 = system.delta1 - self.omega21
        self.grid = grid if grid is not None else build_velocity_grid(system.kv0, 1)
        self.kv = system.kv0 * self.grid.nodes

        span = int(comb.n_max - comb.n_min)
        half = span + self.m_tilde + int(pad)
        self.harm = np.arange(-half, half + 1)
        self.comb_idx = comb.indices
        self.rabi1 = comb.rabi(1)
        self.rabi2 = comb.rabi(2)

    def phase(self, n):
        return self.comb.phases(n)

    def d13(self, a):
        """``1 / (gamma' - i (delta1 - a w + kv))`` with shape ``(nodes,) + a.shape``."""
        a = np.asarray(a, dtype=float)
        x = self.delta1 - a * self.comb.spacing
        return 1.0 / (self.system.gamma_prime - 1j * (x[None, ...] + _expand(self.kv, a.ndim)))

    def d32(self, b):
        """``1 / (gamma' + i (delta2 - b w + kv))`` with shape ``(nodes,) + b.shape``."""
        b = np.asarray(b, dtype=float)
        x = self.delta2 - b * self.comb.spacing
        return 1.0 / (self.system.gamma_prime + 1j * (x[None, ...] + _expand(self.kv, b.ndim)))

    def pair_table(self):
        """Lambda links ``(m, a)``: arm-1 component ``a`` with arm-2 component ``a - m``.

        Returns ``(a, b, amp)`` of shape ``(harmonics, comb)`` where
        ``amp = Omega_{1,a} Omega_{2,a-m} exp(i (phi_a - phi_{a-m}))``.
        """
        a = np.broadcast_to(self.comb_idx[None, :], (self.harm.size, self.comb_idx.size))
        b = a - self.harm[:, None]
        amp = (self.comb.rabi(1, a) * self.comb.rabi(2, b)
               * np.exp(1j * (self.phase(a) - self.phase(b))))
        return a, b, amp


def _expand(kv, ndim):
    return kv.reshape(kv.shape + (1,) * ndim)


def assemble_r12_system(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=None,
                        v=0.0, pad: int = 0):
    """Linear system ``A r = b + c * R12`` for one velocity ``v`` (units of v0).

    Returns ``(A, b, c, harmonics)``. ``c`` is the collision injection vector
    (``nu`` on every harmonic, in the per-Maxwell-weight normalization).
    """
    grid = VelocityGrid(np.array([float(v)]), np.ones(1), rule="point")
    prob = _Problem(system, comb, m_tilde, delta, grid, pad)
    A, b = _assemble(prob)
    c = np.full(prob.harm.size, system.nu, dtype=complex)
    return A[0], b[0], c, prob.harm


def _assemble(prob: _Problem):
    sysm = prob.system
    harm = prob.harm
    nh = harm.size
    nv = prob.kv.size

    a, bidx, amp = prob.pair_table()
    src = amp[None] * (sysm.p1 * prob.d13(a) + sysm.p2 * prob.d32(bidx))
    b = -0.25 * np.exp(-1j * prob.phase(harm))[None, :] * src.sum(axis=-1)

    # field-broadening / light-shift coupling: U dA U^H + W dB W^H over l
    l = np.arange(prob.comb.n_min - harm[-1], prob.comb.n_max - harm[0] + 1)
    nl = harm[:, None] + l[None, :]
    U = prob.comb.rabi(1, nl) * np.exp(1j * (prob.phase(nl) - prob.phase(harm)[:, None]))
    ln = l[None, :] - harm[:, None]
    W = prob.comb.rabi(2, ln) * np.exp(-1j * (prob.phase(ln) + prob.phase(harm)[:, None]))
    dA = prob.d32(l)
    dB = prob.d13(l)
    coupling = np.einsum("nl,il,jl->inj", U, dA, U.conj()) + np.einsum("nl,il,jl->inj", W, dB, W.conj())

    diag = sysm.gamma_coh + sysm.nu - 1j * (prob.omega21 - harm * prob.comb.spacing)
    A = 0.25 * coupling
    A[:, np.arange(nh), np.arange(nh)] += diag[None, :]
    assert A.shape == (nv, nh, nh)
    return A, b


def _invert(A, kv):
    try:
        Ainv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("r12 system is singular", {"kv": kv.tolist()}) from exc
    cond = np.abs(A).sum(axis=-2).max(axis=-1) * np.abs(Ainv).sum(axis=-2).max(axis=-1)
    worst = int(np.argmax(cond))
    if not np.all(np.isfinite(cond)) or cond[worst] > COND_LIMIT:
        raise SingularSystemError(
            "r12 system is ill-conditioned",
            {"condition": float(cond[worst]), "node": worst, "kv": float(kv[worst])},
        )
    return Ainv, float(cond[worst])


def _solve(prob: _Problem) -> CoherenceField:
    sysm = prob.system
    A, b = _assemble(prob)
    Ainv, cond = _invert(A, prob.kv)
    w = prob.grid.weights
    x0 = np.einsum("inj,ij->in", Ainv, b)
    nu = sysm.nu
    R = w @ x0
    closure_cond = 1.0
    if nu != 0.0:
        K = np.einsum("i,inj->nj", w, Ainv)
        closure = np.eye(K.shape[0]) - nu * K
        Cinv, closure_cond = _invert(closure[None], np.zeros(1))
        R = Cinv[0] @ R
        r = x0 + nu * np.einsum("inj,j->in", Ainv, R)
    else:
        r = x0
    rhs = b + nu * R[None, :]
    resid = np.einsum("inj,ij->in", A, r) - rhs
    scale = (np.abs(A).sum(axis=(1, 2)) / A.shape[1]) * np.abs(r).max(axis=1) + np.abs(rhs).max(axis=1)
    rel = np.abs(resid).max(axis=1) / np.where(scale > 0, scale, 1.0)
    if np.any(rel > RESIDUAL_LIMIT):
        raise SingularSystemError("linear-solve residual above tolerance",
                                  {"residual": float(rel.max()), "condition": cond})
    meta = {"condition": cond, "closure_condition": closure_cond, "residual": float(rel.max()),
            "nodes": int(prob.kv.size), "rule": prob.grid.rule}
    return CoherenceField(prob.harm.copy(), r.T.copy(), R, prob.grid, prob.omega21,
                          prob.m_tilde, meta)


def solve_coherence(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=None,
                    grid: VelocityGrid | None = None, nodes: int = 64, rule: str = "hermite",
                    pad: int = 0) -> CoherenceField:
    """Solve for all ``r12_n(v)`` with the collision coupling closed exactly.

    The velocity-integrated amplitudes are eliminated first,
    ``R12 = (I - nu K)^-1 sum_i w_i A_i^-1 b_i`` with ``K = sum_i w_i A_i^-1``,
    after which each node follows from ``r_i = A_i^-1 (b_i + nu R12)``.
    """
    if grid is None:
        grid = build_velocity_grid(system.kv0, nodes, rule)
    return _solve(_Problem(system, comb, m_tilde, delta, grid, pad))


def solve_coherence_monolithic(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=None,
                               grid: VelocityGrid | None = None, nodes: int = 8,
                               rule: str = "hermite", pad: int = 0) -> CoherenceField:
    """Reference solve of the stacked ``(nodes x harmonics + harmonics)`` system.

    Intended for small instances only (dense, size grows with the node count).
    """
    if grid is None:
        grid = build_velocity_grid(system.kv0, nodes, rule)
    prob = _Problem(system, comb, m_tilde, delta, grid, pad)
    A, b = _assemble(prob)
    nv, nh, _ = A.shape
    size = nv * nh + nh
    big = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    eye = np.eye(nh)
    for i in range(nv):
        blk = slice(i * nh, (i + 1) * nh)
        big[blk, blk] = A[i]
        big[blk, nv * nh:] = -system.nu * eye
        rhs[blk] = b[i]
        big[nv * nh:, blk] = -grid.weights[i] * eye
    big[nv * nh:, nv * nh:] = eye
    sol = np.linalg.solve(big, rhs)
    r = sol[: nv * nh].reshape(nv, nh)
    R = sol[nv * nh:]
    return CoherenceField(prob.harm.copy(), r.T.copy(), R, grid, prob.omega21, prob.m_tilde,
                          {"monolithic": True})


def _coherences(prob: _Problem, r12):
    """Optical-coherence harmonics over ``prob.comb_idx`` at every node, shape ``(nodes, comb)``."""
    comb = prob.comb
    sysm = prob.system
    n = prob.comb_idx
    m = prob.harm
    ph = prob.phase
    nm = n[:, None] - m[None, :]
    k13 = comb.rabi(2, nm) * np.exp(1j * (ph(m)[None, :] - ph(n)[:, None] + ph(nm)))
    mn = m[None, :] + n[:, None]
    k32 = comb.rabi(1, mn) * np.exp(1j * (ph(m)[None, :] + ph(n)[:, None] - ph(mn)))
    coh13 = r12.T @ k13.T
    coh32 = r12.T @ k32.T
    r13 = 0.5j * (prob.rabi1 * sysm.p1 + coh13) * prob.d13(n)
    r32 = -0.5j * (prob.rabi2 * sysm.p2 + coh32) * prob.d32(n)
    return r13, r32


def optical_coherences(fld: CoherenceField, system: LambdaSystem, comb: CombSpec, node: int = 0):
    """Optical-coherence harmonics at one velocity node, per unit Maxwell weight.

    Returns ``(r13, r32)`` indexed like ``comb.indices``; these are the only
    harmonics that enter the excitation rate.
    """
    grid = VelocityGrid(fld.grid.nodes[node:node + 1], np.ones(1), rule="point")
    prob = _Problem(system, comb, fld.m_tilde, fld.omega21 - fld.m_tilde * comb.spacing, grid)
    r13, r32 = _coherences(prob, fld.r12[:, node:node + 1])
    return r13[0], r32[0]


def excitation_rate(fld: CoherenceField, system: LambdaSystem, comb: CombSpec) -> float:
    """Velocity-averaged, time-averaged excitation rate from the optical coherences.

    Includes the background; the CPT part is this minus the ``r12 = 0`` value.
    """
    prob = _Problem(system, comb, fld.m_tilde, fld.omega21 - fld.m_tilde * comb.spacing, fld.grid)
    return _rate(prob, fld.r12)


def _rate(prob: _Problem, r12):
    r13, r32 = _coherences(prob, r12)
    per_node = (prob.rabi1 * r13.imag - prob.rabi2 * r32.imag).sum(axis=1)
    return float(prob.grid.weights @ per_node)


def _signal_weights(prob: _Problem):
    """``G[i, m]`` such that the CPT part is ``Re sum_i w_i sum_m G[i, m] r12[m, i]``."""
    a, bidx, amp = prob.pair_table()
    fac = 0.5 * (prob.d13(a) + prob.d32(bidx))
    return np.exp(1j * prob.phase(prob.harm))[None, :] * (amp.conj()[None] * fac).sum(axis=-1)


def _background(prob: _Problem):
    n = prob.comb_idx
    sysm = prob.system
    per_node = (prob.rabi1**2 * sysm.p1 * prob.d13(n).real
                + prob.rabi2**2 * sysm.p2 * prob.d32(n).real).sum(axis=-1) * 0.5
    return float(prob.grid.weights @ per_node)


def signal_from_field(fld: CoherenceField, system: LambdaSystem, comb: CombSpec):
    """``(Re, Im)`` of the CPT double sum for a solved field.

    Only the real part is the signal; the imaginary part of the raw double
    sum does not vanish in general.
    """
    prob = _Problem(system, comb, fld.m_tilde, fld.omega21 - fld.m_tilde * comb.spacing, fld.grid)
    G = _signal_weights(prob)
    total = fld.grid.weights @ (G * fld.r12.T).sum(axis=1)
    return float(total.real), float(total.imag)


def cpt_signal(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=None,
               grid: VelocityGrid | None = None, nodes: int = 64, rule: str = "hermite",
               pad: int = 0) -> SignalPoint:
    """Time-averaged excitation rate split into its CPT part and the background.

    ``delta`` sets the two-photon detuning by moving ``omega21`` to
    ``m_tilde * spacing + delta`` at fixed ``delta1``; ``None`` keeps the
    system's ``omega21``.
    """
    if grid is None:
        grid = build_velocity_grid(system.kv0, nodes, rule)
    prob = _Problem(system, comb, m_tilde, delta, grid, pad)
    fld = _solve(prob)
    G = _signal_weights(prob)
    s_cpt = float((grid.weights @ (G * fld.r12.T).sum(axis=1)).real)
    s_bg = _background(prob)
    # independent route: rate from the reconstructed optical coherences
    check = _rate(prob, fld.r12) - s_bg
    scale = max(abs(s_cpt), abs(s_bg))
    residue = abs(check - s_cpt) / scale if scale > 0 else 0.0
    meta = dict(fld.meta, m_tilde=prob.m_tilde, omega21=prob.omega21, route_residue=residue)
    return SignalPoint(prob.delta, s_cpt, s_bg, meta)


def cpt_signal_converged(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=None,
                         nodes: int = 64, rule: str = "hermite", rtol: float = 1e-6,
                         max_nodes: int = 1024, pad: int = 0) -> SignalPoint:
    """:func:`cpt_signal` with the node count doubled until ``s_cpt`` settles.

    When ``max_nodes`` is reached first, the last point is returned with
    ``meta["converged"] = False``.
    """
    prev = cpt_signal(system, comb, m_tilde, delta, nodes=nodes, rule=rule, pad=pad)
    if system.kv0 == 0:
        return SignalPoint(prev.delta, prev.s_cpt, prev.s_background, dict(prev.meta, converged=True))
    n = nodes
    while n * 2 <= max_nodes:
        n *= 2
        cur = cpt_signal(system, comb, m_tilde, delta, nodes=n, rule=rule, pad=pad)
        if abs(cur.s_cpt - prev.s_cpt) <= rtol * abs(cur.s_cpt):
            return SignalPoint(cur.delta, cur.s_cpt, cur.s_background, dict(cur.meta, converged=True))
        prev = cur
    return SignalPoint(prev.delta, prev.s_cpt, prev.s_background, dict(prev.meta, converged=False))


def _broadening_rate(prob: _Problem) -> float:
    n = prob.comb_idx
    g = prob.system.gamma_prime
    x1 = prob.delta1 - n * prob.comb.spacing
    x2 = prob.delta2 - n * prob.comb.spacing
    return 0.25 * g * float(np.sum(prob.rabi1**2 / (g**2 + x1**2) + prob.rabi2**2 / (g**2 + x2**2)))


def time_domain_oracle(system: LambdaSystem, comb: CombSpec, m_tilde=None, delta=None,
                       horizon: float | None = None, average_periods: int = 20,
                       grid: VelocityGrid | None = None, nodes: int = 16,
                       rule: str = "hermite", rtol: float = 1e-10, atol: float = 1e-14,
                       transient_tol: float = 1e-5, max_steps: int = 20_000_000,
                       backend: str | None = None) -> SignalPoint:
    """Signal from direct integration of the rotating-wave equations.

    The equations are integrated from the unperturbed state with an adaptive
    Dormand-Prince 5(4) stepper. The excitation rate is averaged over the last
    ``average_periods`` comb periods of the horizon; the same average over the
    preceding window must agree to ``transient_tol`` (relative to the larger
    of the two signal parts), otherwise :class:`ConvergenceError` is raised.
    The CPT part is the difference to a reference run in which the optical
    coherences are not fed by the ground coherence.
    """
    if grid is None:
        grid = build_velocity_grid(system.kv0, nodes, rule)
    prob = _Problem(system, comb, m_tilde, delta, grid)
    if average_periods < 1:
        raise DomainError("average_periods must be >= 1")
    period = comb.period
    window = average_periods * period
    if horizon is None:
        decay = min(system.gamma_coh + _broadening_rate(prob), system.gamma_prime)
        horizon = 30.0 / decay if decay > 0 else math.inf
    if not math.isfinite(horizon) or horizon <= 0:
        raise DomainError("horizon must be finite and positive")
    end = math.ceil(horizon / period) * period + 2 * window
    marks = np.array([end - 2 * window, end - window, end])

    impl = kernels.get_backend(backend)
    coeffs = comb.envelope() * np.exp(1j * comb.phases())
    q_full, q_ref, n_acc, n_rej, status = impl.rwa_integrate(
        coeffs, int(comb.n_min), float(comb.spacing), comb.rabi0[0], comb.rabi0[1],
        system.p1, system.p2, prob.omega21, system.delta1, system.gamma_prime,
        system.gamma_coh, system.nu, prob.kv, grid.weights, marks, rtol, atol, int(max_steps),
    )
    info = {"accepted": int(n_acc), "rejected": int(n_rej), "end": float(end), "backend": impl.__name__}
    if status == kernels.MAX_STEPS:
        raise ConvergenceError("time integration exceeded max_steps", info)
    if status == kernels.STEP_UNDERFLOW:
        raise ConvergenceError("time step underflow", info)
    full = np.diff(q_full) / window
    ref = np.diff(q_ref) / window
    cpt = full - ref
    scale = max(abs(cpt[1]), abs(ref[1]))
    drift = max(abs(cpt[1] - cpt[0]), abs(ref[1] - ref[0]))
    info["drift"] = float(drift / scale) if scale > 0 else 0.0
    if scale > 0 and drift > transient_tol * scale:
        raise ConvergenceError("transient has not decayed over the horizon", info)
    return SignalPoint(prob.delta, float(cpt[1]), float(ref[1]), info)
