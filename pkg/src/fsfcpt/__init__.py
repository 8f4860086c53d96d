"""Dark resonances of a Lambda atom in the field of a frequency-shifted-feedback laser.

Modules
-------
comb      spectral comb, phases, pulse-train synthesis
atom      Lambda system parameters, Maxwell velocity grids
solver    steady-state Fourier solver and time-domain oracle
limits    closed-form limiting cases
scan      declarative scans and table output
"""

__version__ = "0.1.0"
