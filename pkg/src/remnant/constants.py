"""Physical constants in Gaussian-CGS units (CODATA values via scipy)."""
from scipy import constants as _si

C_LIGHT = _si.c * 1e2  # cm/s
HBAR = _si.hbar * 1e7  # erg s
ELECTRON_MASS = _si.m_e * 1e3  # g
# 1 C = 10 c[m/s] statC
ELEMENTARY_CHARGE = _si.e * _si.c * 10.0  # statC
