"""Regenerate the golden fixtures.

    python tests/fixtures/make_fixtures.py

golden.json holds values from independent high-precision oracles (mpmath
direct summation, quadrature and root finding); alpha_scan.csv is the
narrow-band alpha scan written by the scan pipeline.
"""

import json
import os

import mpmath as mp

HERE = os.path.dirname(os.path.abspath(__file__))
mp.mp.dps = 30


def gamma_b_direct(rabi0, n0, spacing, gp, d1, d2, span):
    tot = mp.mpf(0)
    for n in range(-span, span + 1):
        e = mp.e ** (-2 * mp.mpf(n) ** 2 / n0**2)
        tot += rabi0[0] ** 2 * e / (gp**2 + (d1 - n * spacing) ** 2)
        tot += rabi0[1] ** 2 * e / (gp**2 + (d2 - n * spacing) ** 2)
    return gp / 4 * tot


def light_shift_direct(rabi0, n0, spacing, gp, d1, d2, span):
    tot = mp.mpf(0)
    for n in range(-span, span + 1):
        e = mp.e ** (-2 * mp.mpf(n) ** 2 / n0**2)
        x1, x2 = d1 - n * spacing, d2 - n * spacing
        tot += rabi0[0] ** 2 * e * x1 / (gp**2 + x1**2) - rabi0[1] ** 2 * e * x2 / (gp**2 + x2**2)
    return tot / 4


def dispersion_f_quad(x, ratio):
    f = lambda u: ratio * mp.e ** (-u * u) / (ratio + 1j * (ratio * x + u)) / mp.sqrt(mp.pi)  # noqa: E731
    return mp.quad(f, [-mp.inf, 0, mp.inf])


def narrowband_direct(alpha, delta, n0=10, mt=5, spacing=10, span=30, gc=1):
    """Narrow-band triple sum in the link-sum form, with exact delta derivatives."""
    def rabi(q):
        return mp.e ** (-mp.mpf(q) ** 2 / n0**2) * mp.mpf("0.1") if -span <= q <= span else mp.mpf(0)

    def ph(q):
        return alpha * q * q

    s = [mp.mpf(0)] * 3
    for m in range(-2 * span, 2 * span + 1):
        P = mp.mpc(0)
        for n in range(-span, span + 1):
            P += rabi(n) * rabi(n - m) * mp.expjpi((ph(n - m) - ph(n)) / mp.pi)
        wgt = abs(P) ** 2
        x = delta + (mt - m) * spacing
        # Re 1/(gc - i x) = gc/(gc^2 + x^2) and its first two x derivatives
        den = gc**2 + x**2
        s[0] += wgt * gc / den
        s[1] += wgt * (-2 * gc * x / den**2)
        s[2] += wgt * (gc * (6 * x**2 - 2 * gc**2) / den**3)
    pref = -1 / (4 * mp.mpf(1000) ** 2)
    return [pref * v for v in s]


def main():
    # field broadening for the wide comb, delta1 = 0, omega21 = 1000
    gb = gamma_b_direct((5, 10), 400, 20, 1000, 0, -1000, 1200)
    # zero crossing of the exact light shift
    root = mp.findroot(lambda d1: light_shift_direct((5, 10), 400, 20, 1000, d1, d1 - 1000, 1200), 1330)
    f01 = dispersion_f_quad(0, 1)
    shifts = {}
    for j in (1, 2, 3, 4, 5):
        s0, s1, s2 = narrowband_direct(mp.pi * j / 5, 0)
        shifts[str(j)] = float(-s1 / s2)
    golden = {
        "wide_comb_gamma_b": float(gb),
        "wide_comb_shift_zero": float(root),
        "dispersion_f_0_1": [float(f01.real), float(f01.imag)],
        "minimum_shift": shifts,
    }
    with open(os.path.join(HERE, "golden.json"), "w") as fh:
        json.dump(golden, fh, indent=1, sort_keys=True)
        fh.write("\n")

    from fsfcpt import scan
    from fsfcpt.cli import DEFAULTS
    cfg = scan.validate_mapping(dict(scan.tomllib.loads(DEFAULTS["alpha-scan"]), scan_variable="alpha"))
    curve = scan.run_scan(cfg, workers=1)
    curve.metadata.pop("kernel_backend")
    with open(os.path.join(HERE, "alpha_scan.csv"), "wb") as fh:
        fh.write(scan.emit_table(curve, "csv"))
    print(json.dumps(golden, indent=1, sort_keys=True))


if __name__ == "__main__":
    main()
