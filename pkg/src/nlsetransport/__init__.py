"""Photon transport through a driven, nonlinear one-dimensional medium.

One- and two-photon steady states of the quantum nonlinear Schrodinger
equation with open input/output boundaries, zero-delay correlations of the
transmitted light, and the open-boundary Bethe-ansatz mode spectrum.
"""
__version__ = "0.1.0"
