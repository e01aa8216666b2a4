"""Photon-electron entanglement in a single quantized laser mode.

Submodules: specfun (Bessel and Laguerre functions), pulse (switching
envelopes and h(t)), dressed (displacement matrix elements), density
(reduced photon density matrix), entropy (entanglement measures),
wavepacket (spatial amplitudes and the integration oracle), config,
scenario and cli.
"""

__version__ = "0.1.0"
