"""Command-line interface.

Exit codes: 0 success, 1 configuration/validation error, 2 numeric failure.
"""

from __future__ import annotations

import json
import sys

import click

from . import comb as comb_mod
from . import limits, scan
from .errors import ConfigError, FsfCptError

# built-in configurations, one per subcommand
DEFAULTS = {
    "spectrum": """
engine = "full-solver"
normalize = "none"
[grid]
start = -5.0
stop = 5.0
count = 41
[comb]
rabi0 = [0.1, 0.1]
n0 = 10
spacing = 10.0
alpha = 0.6283185307179586
[system]
gamma_prime = 1000.0
[solver]
m_tilde = 5
""",
    "alpha-scan": """
engine = "narrowband"
normalize = "peak"
[grid]
start = 0.0
stop = 3.141592653589793
count = 201
[comb]
rabi0 = [0.1, 0.1]
n0 = 10
spacing = 10.0
[system]
gamma_prime = 1000.0
[solver]
m_tilde = 5
""",
    "nu-scan": """
engine = "doppler"
normalize = "peak"
[grid]
start = 0.0
stop = 1000.0
count = 21
[comb]
rabi0 = [1.0, 1.0]
n0 = 10
spacing = 50.0
alpha = 3.141592653589793
[system]
gamma_prime = 200.0
kv0 = 2000.0
[solver]
m_tilde = 10
""",
    "shift-scan": """
engine = "broadband"
quantity = "light_shift"
[grid]
start = -3000.0
stop = 3000.0
count = 121
[comb]
rabi0 = [5.0, 10.0]
n0 = 400
spacing = 20.0
[system]
omega21 = 1000.0
gamma_prime = 1000.0
""",
}
DEFAULTS["report"] = DEFAULTS["spectrum"]
DEFAULTS["validate"] = DEFAULTS["spectrum"]
DEFAULTS["pulse-train"] = DEFAULTS["alpha-scan"].replace(
    "[comb]\n", "[comb]\nalpha = 0.6283185307179586\n")

VARIABLE_OF = {"spectrum": "delta", "alpha-scan": "alpha", "nu-scan": "nu", "shift-scan": "delta1"}


def _load(command, config_path):
    text = DEFAULTS[command]
    if config_path is not None:
        with open(config_path, encoding="utf-8") as fh:
            text = fh.read()
    return scan.tomllib.loads(text) if text else {}


def _fail_config(exc: ConfigError):
    for issue in exc.issues:
        click.echo(f"error: {issue}", err=True)
    sys.exit(1)


def _emit(data: bytes, out):
    if out is None:
        click.echo(data.decode("utf-8"), nl=False)
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def _build(command, config_path, nodes, engine, normalize, fmt):
    try:
        raw = _load(command, config_path)
    except (OSError, scan.tomllib.TOMLDecodeError) as exc:
        _fail_config(ConfigError([f"cannot read configuration: {exc}"]))
    if command in VARIABLE_OF:
        raw["scan_variable"] = VARIABLE_OF[command]
    if engine is not None:
        raw["engine"] = engine
    if normalize is not None:
        raw["normalize"] = normalize
    if nodes is not None:
        raw.setdefault("solver", {})["nodes"] = nodes
    if fmt is not None:
        raw.setdefault("output", {})["format"] = fmt
    try:
        return scan.validate_mapping(raw)
    except ConfigError as exc:
        _fail_config(exc)


def common_options(fn):
    fn = click.option("--normalize", type=click.Choice(["peak", "none"]), default=None)(fn)
    fn = click.option("--engine", type=click.Choice(list(scan.ENGINES)), default=None)(fn)
    fn = click.option("--nodes", type=int, default=None, help="velocity quadrature nodes")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(list(scan.FORMATS)), default=None)(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None)(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="TOML scan configuration")(fn)
    return fn


def _scan_command(command, config_path, out, fmt, nodes, engine, normalize):
    cfg = _build(command, config_path, nodes, engine, normalize, fmt)
    try:
        curve = scan.run_scan(cfg)
    except FsfCptError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    for f in curve.metadata.get("failures", []):
        click.echo(f"warning: point {f['index']} ({f['x']:.6g}) failed: {f['error']}", err=True)
    _emit(scan.emit_table(curve, cfg.output_format), out or cfg.output_path)


@click.group()
@click.version_option(package_name="fsfcpt")
def main():
    """Dark-resonance spectra of a Lambda atom in an FSF laser comb."""


@main.command()
@common_options
def spectrum(config_path, out, fmt, nodes, engine, normalize):
    """Signal versus two-photon detuning delta."""
    _scan_command("spectrum", config_path, out, fmt, nodes, engine, normalize)


@main.command("alpha-scan")
@common_options
def alpha_scan(config_path, out, fmt, nodes, engine, normalize):
    """Signal versus the quadratic phase coefficient alpha."""
    _scan_command("alpha-scan", config_path, out, fmt, nodes, engine, normalize)


@main.command("nu-scan")
@common_options
def nu_scan(config_path, out, fmt, nodes, engine, normalize):
    """Signal versus the velocity-changing collision rate nu."""
    _scan_command("nu-scan", config_path, out, fmt, nodes, engine, normalize)


@main.command("shift-scan")
@common_options
def shift_scan(config_path, out, fmt, nodes, engine, normalize):
    """Light shift (or another quantity) versus the one-photon detuning delta1."""
    _scan_command("shift-scan", config_path, out, fmt, nodes, engine, normalize)


@main.command("pulse-train")
@common_options
@click.option("--samples", type=int, default=1024, show_default=True)
def pulse_train(config_path, out, fmt, nodes, engine, normalize, samples):
    """Intensity of the comb field over one period."""
    cfg = _build("pulse-train", config_path, nodes, engine, normalize, fmt)
    if samples < 2:
        _fail_config(ConfigError(["--samples must be >= 2"]))
    t = comb_mod.period_grid(cfg.comb, samples)
    intensity = comb_mod.pulse_train_intensity(cfg.comb, t)
    if cfg.normalize == "peak":
        intensity = intensity / intensity.max()
    period = comb_mod.fundamental_period(intensity, cfg.comb.period)
    curve = scan.SignalCurve("t", t, intensity, None, {
        "quantity": "intensity", "parameters": cfg.parameters(),
        "period": cfg.comb.period, "fundamental_period": period,
        "pulses_per_period": int(round(cfg.comb.period / period)),
    })
    _emit(scan.emit_table(curve, cfg.output_format), out or cfg.output_path)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def validate(config_path):
    """Check a configuration and list every problem found."""
    cfg = _build("validate", config_path, None, None, None, None)
    click.echo(f"ok: {cfg.engine} scan over {cfg.scan_variable}, {cfg.count} points")


@main.command()
@common_options
def report(config_path, out, fmt, nodes, engine, normalize):
    """One-shot gamma_b, delta_f, delta_z and delta_s."""
    cfg = _build("report", config_path, nodes, engine, normalize, fmt)
    try:
        rep = limits.shift_broadening_report(cfg.system, cfg.comb, cfg.m_tilde)
    except FsfCptError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    obj = {"gamma_b": rep.gamma_b, "delta_f": rep.delta_f, "delta_z": rep.delta_z,
           "delta_s": rep.delta_s, "parameters": cfg.parameters()}
    _emit((json.dumps(obj, sort_keys=True, indent=1) + "\n").encode("utf-8"), out)
