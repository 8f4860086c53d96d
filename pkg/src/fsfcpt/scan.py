"""Declarative parameter scans and table output.

A scan is described by a TOML document::

    engine = "narrowband"          # full-solver | narrowband | broadband | doppler | oracle
    scan_variable = "alpha"        # delta | alpha | nu | delta1
    quantity = "signal"            # signal | light_shift | light_shift_lorentzian | field_broadening
    normalize = "peak"             # peak | none
    outputs = []                   # extra one-shot values, e.g. ["zero_shift"]

    [grid]
    start = 0.0
    stop = 3.141592653589793
    count = 201

    [comb]                         # CombSpec fields; rabi0 = [Omega_1_0, Omega_2_0]
    [system]                       # LambdaSystem fields; omega21 defaults to m_tilde * spacing + delta
    [solver]                       # m_tilde, delta, nodes, rule, pad
    [output]                       # path, format = "csv" | "json"

All quantities are in units of ``gamma_coh``.
"""

from __future__ import annotations

import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels, limits, solver
from .atom import LambdaSystem, select_mtilde
from .comb import CombSpec
from .errors import ConfigError, FsfCptError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENGINES = ("full-solver", "narrowband", "broadband", "doppler", "oracle")
VARIABLES = ("delta", "alpha", "nu", "delta1")
QUANTITIES = ("signal", "light_shift", "light_shift_lorentzian", "field_broadening")
FORMATS = ("csv", "json")
EXTRA_OUTPUTS = ("zero_shift", "field_broadening", "light_shift", "minimum_shift")

_TOP_KEYS = {"engine", "scan_variable", "quantity", "normalize", "outputs",
             "grid", "comb", "system", "solver", "output"}
_SECTION_KEYS = {
    "grid": {"start", "stop", "count"},
    "comb": {"rabi0", "n0", "spacing", "alpha", "beta", "phi0", "n_max", "n_min"},
    "system": {"omega21", "gamma_prime", "p1", "p2", "gamma_coh", "nu", "kv0", "delta1"},
    "solver": {"m_tilde", "delta", "nodes", "rule", "pad"},
    "output": {"path", "format"},
}
FAILURE_FRACTION = 0.10


class ScanError(FsfCptError):
    """More than the tolerated fraction of scan points failed."""

    def __init__(self, message, curve=None):
        super().__init__(message)
        self.curve = curve


@dataclass(frozen=True)
class ScanConfig:
    engine: str
    scan_variable: str
    start: float
    stop: float
    count: int
    comb: CombSpec
    system: LambdaSystem
    m_tilde: int
    delta: float = 0.0
    quantity: str = "signal"
    normalize: str = "none"
    nodes: int = 64
    rule: str = "hermite"
    pad: int = 0
    outputs: tuple = ()
    output_path: str | None = None
    output_format: str = "csv"

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def parameters(self) -> dict:
        """Every value needed to re-run the scan."""
        c = self.comb
        s = self.system
        return {
            "engine": self.engine, "scan_variable": self.scan_variable, "quantity": self.quantity,
            "normalize": self.normalize, "outputs": list(self.outputs),
            "grid": {"start": self.start, "stop": self.stop, "count": self.count},
            "comb": {"rabi0": list(c.rabi0), "n0": c.n0, "spacing": c.spacing, "alpha": c.alpha,
                     "beta": c.beta, "phi0": c.phi0, "n_max": int(c.n_max), "n_min": int(c.n_min)},
            "system": {"omega21": s.omega21, "gamma_prime": s.gamma_prime, "p1": s.p1, "p2": s.p2,
                       "gamma_coh": s.gamma_coh, "nu": s.nu, "kv0": s.kv0, "delta1": s.delta1},
            "solver": {"m_tilde": self.m_tilde, "delta": self.delta, "nodes": self.nodes,
                       "rule": self.rule, "pad": self.pad},
        }

    def replace(self, **changes) -> "ScanConfig":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return ScanConfig(**kw)


@dataclass
class SignalCurve:
    variable: str
    x: np.ndarray
    s_cpt: np.ndarray
    s_background: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.s_cpt = np.asarray(self.s_cpt, dtype=float)
        if self.s_background is not None:
            self.s_background = np.asarray(self.s_background, dtype=float)
            if self.s_background.shape != self.x.shape:
                raise ValueError("s_background length differs from x")
        if self.s_cpt.shape != self.x.shape:
            raise ValueError("s_cpt length differs from x")


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate_mapping(raw: dict) -> ScanConfig:
    """Validate a parsed configuration, collecting every issue before raising."""
    issues = []
    if not isinstance(raw, dict):
        raise ConfigError(["configuration must be a table"])
    for key in sorted(set(raw) - _TOP_KEYS):
        issues.append(f"unknown key '{key}'")
    sections = {}
    for name, allowed in _SECTION_KEYS.items():
        sec = raw.get(name, {})
        if not isinstance(sec, dict):
            issues.append(f"[{name}] must be a table")
            sec = {}
        for key in sorted(set(sec) - allowed):
            issues.append(f"unknown key '{name}.{key}'")
        sections[name] = {k: v for k, v in sec.items() if k in allowed}

    engine = raw.get("engine", "full-solver")
    if engine not in ENGINES:
        issues.append(f"engine must be one of {', '.join(ENGINES)}, got {engine!r}")
    var = raw.get("scan_variable", "delta")
    if var not in VARIABLES:
        issues.append(f"scan_variable must be one of {', '.join(VARIABLES)}, got {var!r}")
    quantity = raw.get("quantity", "signal")
    if quantity not in QUANTITIES:
        issues.append(f"quantity must be one of {', '.join(QUANTITIES)}, got {quantity!r}")
    normalize = raw.get("normalize", "none")
    if normalize not in ("none", "peak"):
        issues.append(f"normalize must be 'none' or 'peak', got {normalize!r}")
    outputs = raw.get("outputs", [])
    if not isinstance(outputs, list) or any(o not in EXTRA_OUTPUTS for o in outputs):
        issues.append(f"outputs must be a list drawn from {', '.join(EXTRA_OUTPUTS)}")
        outputs = []

    grid = sections["grid"]
    start, stop, count = grid.get("start"), grid.get("stop"), grid.get("count", 2)
    if not _number(start) or not _number(stop):
        issues.append("grid start and stop are required numbers")
    elif not start < stop:
        issues.append(f"grid start < stop required, got {start} >= {stop}")
    if not isinstance(count, int) or isinstance(count, bool) or count < 2:
        issues.append(f"grid count >= 2 required, got {count!r}")

    out = sections["output"]
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        issues.append(f"output format must be csv or json, got {fmt!r}")

    scfg = sections["solver"]
    nodes = scfg.get("nodes", 64)
    if not isinstance(nodes, int) or nodes < 1:
        issues.append(f"solver.nodes must be an integer >= 1, got {nodes!r}")
    rule = scfg.get("rule", "hermite")
    if rule not in ("hermite", "uniform"):
        issues.append(f"solver.rule must be 'hermite' or 'uniform', got {rule!r}")
    delta = scfg.get("delta", 0.0)
    if not _number(delta):
        issues.append("solver.delta must be a number")
        delta = 0.0
    pad = scfg.get("pad", 0)
    if not isinstance(pad, int) or pad < 0:
        issues.append(f"solver.pad must be an integer >= 0, got {pad!r}")

    comb = None
    try:
        ckw = dict(sections["comb"])
        if "rabi0" in ckw:
            ckw["rabi0"] = tuple(ckw["rabi0"])
        comb = CombSpec(**ckw)
    except (TypeError, ValueError) as exc:
        issues.append(f"[comb]: {exc}")

    m_tilde = scfg.get("m_tilde")
    system = None
    skw = dict(sections["system"])
    if "omega21" not in skw:
        if m_tilde is not None and comb is not None:
            skw["omega21"] = float(m_tilde * comb.spacing + delta)
        else:
            issues.append("system.omega21 is required unless solver.m_tilde is given")
    try:
        if "omega21" in skw:
            system = LambdaSystem(**skw)
    except (TypeError, ValueError) as exc:
        issues.append(f"[system]: {exc}")
    if m_tilde is None and system is not None and comb is not None:
        try:
            m_tilde = select_mtilde(system.omega21, comb.spacing)
        except ValueError as exc:
            issues.append(f"m_tilde: {exc}")
    elif m_tilde is not None and (not isinstance(m_tilde, int) or m_tilde < 1):
        issues.append(f"solver.m_tilde must be an integer >= 1, got {m_tilde!r}")

    if system is not None:
        if engine == "doppler" and not system.kv0 > 0:
            issues.append("doppler engine needs kv0 > 0 (use narrowband/broadband/full-solver for kv0 = 0)")
        if engine in ("narrowband", "broadband") and system.kv0 >= system.gamma_prime:
            issues.append(f"{engine} engine assumes kv0 << gamma_prime, got kv0={system.kv0}")
        if var == "nu" and engine in ("narrowband", "broadband"):
            issues.append(f"{engine} engine does not depend on nu; a nu scan needs doppler, full-solver or oracle")
    if quantity != "signal" and var != "delta1":
        issues.append(f"quantity {quantity!r} is scanned over delta1, not {var}")
    if "zero_shift" in outputs and comb is not None and comb.rabi0[0] == comb.rabi0[1]:
        issues.append("zero_shift requested but Omega_1_0 == Omega_2_0: the zero-shift "
                      "detuning omega21*Omega2^2/(Omega2^2 - Omega1^2) has a vanishing denominator")

    if issues:
        raise ConfigError(issues)
    return ScanConfig(engine=engine, scan_variable=var, start=float(start), stop=float(stop),
                      count=int(count), comb=comb, system=system, m_tilde=int(m_tilde),
                      delta=float(delta), quantity=quantity, normalize=normalize,
                      nodes=int(nodes), rule=rule, pad=int(pad), outputs=tuple(outputs),
                      output_path=out.get("path"), output_format=fmt)


def validate_config(text: str) -> ScanConfig:
    """Parse TOML text and validate it; see :func:`validate_mapping`."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"TOML syntax: {exc}"]) from exc
    return validate_mapping(raw)


def _point(cfg: ScanConfig, x: float):
    """Evaluate one grid point; returns ``(s_cpt, s_background or None)``."""
    comb, system, delta = cfg.comb, cfg.system, cfg.delta
    var = cfg.scan_variable
    if var == "alpha":
        comb = comb.replace(alpha=x)
    elif var == "nu":
        system = system.replace(nu=x)
    elif var == "delta1":
        system = system.replace(delta1=x)
    elif var == "delta":
        delta = x
    if cfg.quantity != "signal":
        fn = {"light_shift": limits.light_shift,
              "light_shift_lorentzian": limits.light_shift_lorentzian,
              "field_broadening": limits.field_broadening}[cfg.quantity]
        return fn(system, comb), None
    mt = cfg.m_tilde
    if cfg.engine == "full-solver":
        p = solver.cpt_signal(system, comb, mt, delta, nodes=cfg.nodes, rule=cfg.rule, pad=cfg.pad)
        return p.s_cpt, p.s_background
    if cfg.engine == "oracle":
        p = solver.time_domain_oracle(system, comb, mt, delta, nodes=cfg.nodes, rule=cfg.rule)
        return p.s_cpt, p.s_background
    if cfg.engine == "narrowband":
        return limits.signal_narrowband(system, comb, mt, delta), None
    if cfg.engine == "broadband":
        return limits.signal_broadband(system, comb, mt, delta), None
    return limits.signal_doppler(system, comb, mt, delta), None


def worker_count(n_points: int) -> int:
    env = os.environ.get("FSFCPT_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            pass
    return max(1, min(cap, n_points))


def _extras(cfg: ScanConfig) -> dict:
    out = {}
    for name in cfg.outputs:
        if name == "zero_shift":
            out[name] = limits.zero_shift_detuning(cfg.system.omega21, *cfg.comb.rabi0)
        elif name == "field_broadening":
            out[name] = limits.field_broadening(cfg.system, cfg.comb)
        elif name == "light_shift":
            out[name] = limits.light_shift(cfg.system, cfg.comb)
        elif name == "minimum_shift":
            out[name] = limits.resonance_minimum_shift(cfg.system, cfg.comb, cfg.m_tilde)
    return out


def run_scan(cfg: ScanConfig, workers: int | None = None) -> SignalCurve:
    """Evaluate the configured engine on every grid point, in grid order.

    Failed points become NaN with a note in ``metadata["failures"]``; the
    scan raises :class:`ScanError` when more than 10% of the points fail.
    Peak normalization (division by the largest ``|s_cpt|``) is applied last.
    """
    xs = cfg.grid

    def task(x):
        try:
            return _point(cfg, float(x)), None
        except (FsfCptError, ArithmeticError, np.linalg.LinAlgError) as exc:
            return (math.nan, math.nan), f"{type(exc).__name__}: {exc}"

    n_workers = workers or worker_count(xs.size)
    if n_workers == 1:
        results = [task(x) for x in xs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(task, xs))

    s = np.array([r[0][0] for r in results], dtype=float)
    bg_vals = [r[0][1] for r in results]
    has_bg = any(b is not None for b in bg_vals) and cfg.quantity == "signal" \
        and cfg.engine in ("full-solver", "oracle")
    bg = np.array([math.nan if b is None else b for b in bg_vals], dtype=float) if has_bg else None
    failures = [{"index": i, "x": float(xs[i]), "error": r[1]} for i, r in enumerate(results) if r[1]]

    meta = {
        "code_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "engine": cfg.engine,
        "scan_variable": cfg.scan_variable,
        "quantity": cfg.quantity,
        "parameters": cfg.parameters(),
        "tolerances": {"linear_residual": solver.RESIDUAL_LIMIT, "condition_limit": solver.COND_LIMIT},
        "quadrature_nodes": cfg.nodes if cfg.system.kv0 > 0 else 1,
        "normalize": cfg.normalize,
        "failures": failures,
    }
    if cfg.outputs:
        meta["extras"] = _extras(cfg)
    curve = SignalCurve(cfg.scan_variable, xs, s, bg, meta)
    if len(failures) > FAILURE_FRACTION * xs.size:
        raise ScanError(f"{len(failures)} of {xs.size} scan points failed", curve)
    if cfg.normalize == "peak":
        finite = np.isfinite(s)
        peak = float(np.max(np.abs(s[finite]))) if finite.any() else 0.0
        if peak > 0:
            curve.s_cpt = s / peak
            if bg is not None:
                curve.s_background = bg / peak
        meta["normalization_factor"] = peak
    return curve


def _columns(curve: SignalCurve):
    cols = [(curve.variable, curve.x), ("s_cpt", curve.s_cpt)]
    if curve.s_background is not None:
        cols.append(("s_background", curve.s_background))
    return cols


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    return v


def emit_table(curve: SignalCurve, fmt: str = "csv") -> bytes:
    """Serialize a curve. Byte-stable for identical inputs.

    CSV: ``# key: value`` metadata lines (JSON-encoded values), one header
    row, then rows with 12 significant digits. JSON: one object with the
    metadata and parallel arrays; floats round-trip exactly, NaN is ``null``.
    """
    if fmt == "csv":
        buf = io.StringIO()
        for key in sorted(curve.metadata):
            buf.write(f"# {key}: {json.dumps(_jsonable(curve.metadata[key]), sort_keys=True)}\n")
        cols = _columns(curve)
        buf.write(",".join(name for name, _ in cols) + "\n")
        for row in zip(*(c for _, c in cols)):
            buf.write(",".join("%.12g" % v for v in row) + "\n")
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        obj = {"metadata": _jsonable(curve.metadata), "variable": curve.variable}
        for name, col in _columns(curve):
            obj["x" if name == curve.variable else name] = _jsonable([float(v) for v in col])
        return (json.dumps(obj, sort_keys=True, indent=1) + "\n").encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")


def load_table_json(data: bytes) -> SignalCurve:
    obj = json.loads(data)

    def arr(v):
        return np.array([math.nan if x is None else x for x in v], dtype=float)

    bg = arr(obj["s_background"]) if "s_background" in obj else None
    return SignalCurve(obj["variable"], arr(obj["x"]), arr(obj["s_cpt"]), bg, obj["metadata"])


def write_table(curve: SignalCurve, path: str, fmt: str = "csv") -> None:
    """Write :func:`emit_table` output to ``path``; I/O errors propagate."""
    data = emit_table(curve, fmt)
    with open(path, "wb") as fh:
        fh.write(data)
