"""Josephson traveling-wave parametric amplifiers as squeezing sources.

Modules
-------
dispersion  engineered k(omega), bandgaps and phase-matching tuning
amplifier   gain, output moments, squeezing spectra and loss
qubits      two qubits in a two-mode squeezed bath
gaussian    Gaussian states and linear Lindblad dynamics
cluster     cluster-state graphs, macronode layouts and nullifiers
cli         command-line runner
"""

__version__ = "0.1.0"
