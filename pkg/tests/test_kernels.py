import math

import numpy as np
import pytest

from fsfcpt import kernels, solver
from fsfcpt._pykernels import comb_envelope as py_envelope
from fsfcpt.atom import LambdaSystem
from fsfcpt.comb import CombSpec

try:
    compiled = kernels.get_backend("compiled")
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def test_backend_names():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.get_backend("python").__name__.endswith("_pykernels")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_python_envelope_matches_direct_sum():
    rng = np.random.default_rng(1)
    coeffs = rng.normal(size=9) + 1j * rng.normal(size=9)
    t = rng.uniform(0, 1, 50)
    direct = np.array([np.sum(coeffs * np.exp(1j * (np.arange(9) - 4) * 7.0 * tt)) for tt in t])
    np.testing.assert_allclose(py_envelope(t, coeffs, -4, 7.0), direct, rtol=1e-12, atol=1e-12)


@needs_compiled
def test_envelope_backends_agree():
    spec = CombSpec((1, 1), n0=10, spacing=10.0, alpha=math.pi / 5)
    coeffs = spec.envelope() * np.exp(1j * spec.phases())
    t = np.linspace(0, spec.period, 777)
    a = compiled.comb_envelope(t, coeffs, int(spec.n_min), spec.spacing)
    b = py_envelope(t, coeffs, int(spec.n_min), spec.spacing)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-11 * np.abs(b).max())


def _integrate_args(nodes=3):
    spec = CombSpec((4.0, 3.0), n0=2, spacing=20.0, alpha=0.3, n_max=1)
    coeffs = spec.envelope() * np.exp(1j * spec.phases())
    kv = 10.0 * np.linspace(-1, 1, nodes)
    w = np.full(nodes, 1.0 / nodes)
    marks = np.array([0.5, 1.0, 2.0])
    return (coeffs, int(spec.n_min), spec.spacing, 4.0, 3.0, 0.5, 0.5, 41.0, 2.0, 30.0, 1.0,
            2.0, kv, w, marks, 1e-9, 1e-13, 10**6)


@needs_compiled
def test_integrator_backends_agree():
    args = _integrate_args()
    qa, ra, na, ja, sa = compiled.rwa_integrate(*args)
    qb, rb, nb, jb, sb = kernels.get_backend("python").rwa_integrate(*args)
    assert sa == sb == kernels.OK
    assert (na, ja) == (nb, jb)
    np.testing.assert_allclose(qa, qb, rtol=1e-10)
    np.testing.assert_allclose(ra, rb, rtol=1e-10)


def test_integrator_step_limit():
    args = list(_integrate_args())
    args[-1] = 5
    status = kernels.rwa_integrate(*args)[-1]
    assert status == kernels.MAX_STEPS


def test_oracle_pure_python_backend():
    system = LambdaSystem(omega21=40.0, gamma_prime=50.0)
    spec = CombSpec((5.0, 5.0), n0=2, spacing=20.0, alpha=0.3, n_max=1)
    p = solver.time_domain_oracle(system, spec, 2, 0.5, rtol=1e-8, atol=1e-12, backend="python")
    ref = solver.cpt_signal(system, spec, 2, 0.5)
    assert p.s_cpt == pytest.approx(ref.s_cpt, rel=1e-4)
