"""Curve post-processing: Lorentzian dip fits, extrema and zero crossings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, curve_fit

from .errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class DipFit:
    hwhm: float
    center: float
    depth: float
    offset: float


def lorentzian(x, depth, center, hwhm, offset):
    return depth * hwhm**2 / ((x - center) ** 2 + hwhm**2) + offset


def fit_lorentzian(x, y, hwhm_guess: float, center_guess: float = 0.0,
                   offset: bool = False) -> DipFit:
    """Least-squares Lorentzian fit of a sampled resonance (dip or peak).

    The CPT part of the signal has no baseline, so by default the fitted
    curve has none either; ``offset=True`` adds a constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 4 or x.size != y.size:
        raise DomainError("need at least four (x, y) samples of equal length")
    scale = np.max(np.abs(y))
    if scale == 0:
        raise DomainError("signal is identically zero")
    yn = y / scale
    base = np.median(yn) if offset else 0.0
    k = int(np.argmax(np.abs(yn - base)))
    p0 = [yn[k] - base, center_guess, hwhm_guess]
    model = lorentzian
    if offset:
        p0.append(0.0)
    else:
        def model(x, depth, center, hwhm):
            return lorentzian(x, depth, center, hwhm, 0.0)
    try:
        p, _ = curve_fit(model, x, yn, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise ConvergenceError(f"Lorentzian fit failed: {exc}") from exc
    off = float(p[3]) * scale if offset else 0.0
    return DipFit(abs(float(p[2])), float(p[1]), float(p[0]) * scale, off)


def fit_dip_hwhm(signal, hwhm_guess: float, points: int = 41, span: float = 5.0,
                 max_rounds: int = 6, rtol: float = 0.02, offset: bool = False) -> DipFit:
    """Fit ``signal(delta)`` over ``[-span*g, span*g]`` and re-centre the window on the result.

    Starts from ``g = hwhm_guess`` and repeats with the fitted width until two
    successive widths agree to ``rtol``.
    """
    g = float(hwhm_guess)
    center = 0.0
    prev = None
    for _ in range(max_rounds):
        x = center + np.linspace(-span * g, span * g, points)
        y = np.array([signal(v) for v in x])
        fit = fit_lorentzian(x, y, g, center, offset)
        if prev is not None and abs(fit.hwhm - prev) <= rtol * fit.hwhm:
            return fit
        prev = fit.hwhm
        g = fit.hwhm
        center = fit.center
    return fit


def local_maxima(y) -> np.ndarray:
    """Indices of interior and endpoint local maxima of a sampled curve."""
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        return np.arange(y.size)
    left = np.concatenate(([-np.inf], y[:-1]))
    right = np.concatenate((y[1:], [-np.inf]))
    return np.flatnonzero((y >= left) & (y > right) | (y > left) & (y >= right))


def zero_crossings(x, y, func=None) -> np.ndarray:
    """Abscissae where ``y`` changes sign, refined with ``brentq`` when ``func`` is given."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    idx = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    out = []
    for i in idx:
        if func is not None:
            out.append(brentq(func, x[i], x[i + 1], xtol=1e-12))
        else:
            out.append(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))
    return np.array(out)


def is_strictly_decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) < 0))


def single_interior_maximum(values) -> bool:
    """True when the sequence rises strictly to one interior peak and then falls strictly."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return False
    k = int(np.argmax(v))
    if k == 0 or k == v.size - 1:
        return False
    return bool(np.all(np.diff(v[: k + 1]) > 0) and np.all(np.diff(v[k:]) < 0))
