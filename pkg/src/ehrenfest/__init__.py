"""Ehrenfest frequency of one-dimensional polynomial single and double wells.

Submodules
----------
model         potentials, turning points, action and period
specfun       Gamma, arg Gamma(1/2 + i t) and K0
spectrum      selected eigenpairs at large quantum numbers
semiclassics  WKB and regularized WKB formulas
dynamics      wave packet, overlaps, survival probability, nu_E
sweep         hbar sweeps and scaling fits
cli           command line interface
"""

__version__ = "0.1.0"
