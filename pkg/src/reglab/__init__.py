"""reglab: Kronecker-Eisenstein series, elliptic regulators and Stark-type ratios for CM curves."""

__version__ = "0.1.0"
