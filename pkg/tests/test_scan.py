import json
import math
import os

import numpy as np
import pytest
from scipy.optimize import brentq

from fsfcpt import limits, scan
from fsfcpt.analysis import local_maxima
from fsfcpt.cli import DEFAULTS
from fsfcpt.errors import ConfigError

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

MINIMAL = """
[grid]
start = -2.0
stop = 2.0
count = 5
[comb]
rabi0 = [0.1, 0.1]
n0 = 3
spacing = 10.0
[system]
gamma_prime = 1000.0
[solver]
m_tilde = 5
"""


def config(text=None, **top):
    raw = scan.tomllib.loads(text or MINIMAL)
    raw.update(top)
    return scan.validate_mapping(raw)


def test_minimal_config_defaults():
    cfg = scan.validate_config(MINIMAL)
    assert cfg.engine == "full-solver" and cfg.scan_variable == "delta"
    assert cfg.comb.n_max == 9 and cfg.nodes == 64
    assert cfg.system.p1 == cfg.system.p2 == 0.5
    assert cfg.system.omega21 == 50.0


def test_count_one_rejected():
    with pytest.raises(ConfigError) as err:
        scan.validate_config(MINIMAL.replace("count = 5", "count = 1"))
    assert any("grid count >= 2" in i for i in err.value.issues)


def test_zero_shift_degeneracy_reported():
    with pytest.raises(ConfigError) as err:
        config(outputs=["zero_shift"])
    assert any("zero-shift" in i for i in err.value.issues)


def test_all_issues_listed():
    text = MINIMAL.replace("count = 5", "count = 1").replace("n0 = 3", "n0 = 3\ncolour = 1")
    raw = scan.tomllib.loads(text)
    raw.update(engine="doppler", bogus=1)
    with pytest.raises(ConfigError) as err:
        scan.validate_mapping(raw)
    issues = err.value.issues
    assert len(issues) >= 4
    text = "\n".join(issues)
    for part in ("bogus", "comb.colour", "grid count", "doppler engine needs kv0 > 0"):
        assert part in text


def test_regime_checks():
    with pytest.raises(ConfigError):
        config(engine="narrowband", scan_variable="nu")
    with pytest.raises(ConfigError):
        config(quantity="light_shift")
    with pytest.raises(ConfigError):
        scan.validate_config("grid = [")


def test_run_order_and_metadata():
    cfg = config()
    curve = scan.run_scan(cfg, workers=3)
    np.testing.assert_array_equal(curve.x, np.linspace(-2, 2, 5))
    assert curve.s_background is not None
    meta = curve.metadata
    assert meta["parameters"] == cfg.parameters()
    assert meta["quadrature_nodes"] == 1 and meta["failures"] == []
    for key in ("code_version", "kernel_backend", "tolerances"):
        assert key in meta
    assert np.argmin(curve.s_cpt) == 2


def test_determinism_across_workers():
    cfg = config()
    a = scan.emit_table(scan.run_scan(cfg, workers=1), "csv")
    b = scan.emit_table(scan.run_scan(cfg, workers=4), "csv")
    assert a == b


def test_peak_normalization():
    curve = scan.run_scan(config(normalize="peak"))
    assert np.max(np.abs(curve.s_cpt)) == 1.0
    assert curve.metadata["normalization_factor"] > 0


def test_failed_points_become_nan():
    # gamma_coh = 0, zero field: the point at delta = 0 is singular
    text = MINIMAL.replace("rabi0 = [0.1, 0.1]", "rabi0 = [0.0, 0.0]").replace(
        "gamma_prime = 1000.0", "gamma_prime = 1000.0\ngamma_coh = 0.0")
    cfg = config(text.replace("count = 5", "count = 11"))
    curve = scan.run_scan(cfg)
    assert math.isnan(curve.s_cpt[5]) and np.all(np.isfinite(np.delete(curve.s_cpt, 5)))
    assert curve.metadata["failures"][0]["index"] == 5
    with pytest.raises(scan.ScanError) as err:
        scan.run_scan(config(text))
    assert err.value.curve is not None


def test_csv_layout():
    curve = scan.SignalCurve("delta", [0.0, 1.0, 2.0], [1.0, 2.0, 1.0 / 3.0], None,
                             {"a": 1, "b": [1, 2], "c": "x", "d": None, "e": {"z": 1.5}})
    lines = scan.emit_table(curve, "csv").decode().splitlines()
    meta = [l for l in lines if l.startswith("#")]
    rows = [l for l in lines if not l.startswith("#")]
    assert len(meta) >= 5
    assert rows[0] == "delta,s_cpt" and len(rows) == 4
    assert rows[3] == "2,0.333333333333"


def test_json_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    curve = scan.SignalCurve("alpha", rng.uniform(size=7), rng.normal(size=7), rng.normal(size=7), {"k": 1})
    curve.s_cpt[2] = math.nan
    data = scan.emit_table(curve, "json")
    back = scan.load_table_json(data)
    np.testing.assert_array_equal(back.x, curve.x)
    np.testing.assert_array_equal(back.s_cpt, curve.s_cpt)
    np.testing.assert_array_equal(back.s_background, curve.s_background)
    assert json.loads(data)["s_cpt"][2] is None
    path = tmp_path / "c.json"
    scan.write_table(curve, str(path), "json")
    assert path.read_bytes() == data


def test_unwritable_sink(tmp_path):
    curve = scan.SignalCurve("delta", [0.0, 1.0], [1.0, 2.0])
    with pytest.raises(OSError):
        scan.write_table(curve, str(tmp_path / "missing" / "x.csv"))


def test_alpha_scan_golden_csv():
    cfg = scan.validate_mapping(dict(scan.tomllib.loads(DEFAULTS["alpha-scan"]), scan_variable="alpha"))
    curve = scan.run_scan(cfg)
    curve.metadata.pop("kernel_backend")
    with open(os.path.join(FIXTURES, "alpha_scan.csv"), "rb") as fh:
        assert scan.emit_table(curve, "csv") == fh.read()


def test_alpha_scan_six_maxima():
    cfg = scan.validate_mapping(dict(scan.tomllib.loads(DEFAULTS["alpha-scan"]), scan_variable="alpha"))
    curve = scan.run_scan(cfg)
    s = np.abs(curve.s_cpt)
    peaks = [k for k in local_maxima(s) if s[k] > 0.5]
    np.testing.assert_allclose(curve.x[peaks], np.arange(6) * math.pi / 5, atol=1e-12)


def test_shift_scan_zero_crossing():
    raw = scan.tomllib.loads(DEFAULTS["shift-scan"])
    raw.update(scan_variable="delta1", outputs=["zero_shift"])
    cfg = scan.validate_mapping(raw)
    curve = scan.run_scan(cfg)
    k = np.flatnonzero(np.diff(np.sign(curve.s_cpt)) != 0)
    roots = [brentq(lambda d1: limits.light_shift(cfg.system.replace(delta1=d1), cfg.comb),
                    curve.x[i], curve.x[i + 1]) for i in k]
    assert any(abs(r - 1333.3) < 0.05 * 1333.3 for r in roots)
    assert curve.metadata["extras"]["zero_shift"] == pytest.approx(4000 / 3)


def test_nu_scan_decreasing():
    raw = scan.tomllib.loads(DEFAULTS["nu-scan"])
    raw.update(scan_variable="nu", normalize="none")
    raw["comb"]["alpha"] = math.pi / raw["solver"]["m_tilde"]
    raw["grid"].update(stop=100.0, count=5)
    curve = scan.run_scan(scan.validate_mapping(raw))
    assert np.all(np.diff(np.abs(curve.s_cpt)) < 0)
