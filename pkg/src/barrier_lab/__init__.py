"""Numerical laboratory for heat transport across a turbulent barrier.

Modules
-------
coefficients   model parameters and cutoff profiles
analytic1d     stationary one-dimensional solution by quadrature
limits         small-eps limits of the crossing probability
hitting        closed-form hitting probabilities with a membrane
membrane       reflected and snapping-out Brownian motion
sdepath        Euler simulation of the pre-limit diffusions
spectral       velocity basis and covariance decomposition
pde2d          finite-volume heat equation on the strip
cli            command-line front end
"""

__version__ = "0.1.0"
