"""chargelab: a numerical laboratory for charged Bose gas energy estimates.

Modules
-------
numerics     quadrature, Gamma, graded radial grids
foldy        the constant J and the local cutoff energy integral
bogolubov    quadratic-Hamiltonian lower bound and truncated-Fock sharpness
correlation  Yukawa pair energies and correlation inequality checkers
variational  minimization of the density functional and N^(7/5) assembly
trialstate   occupation function, pair-energy identity, trace scaling,
             finite tight-frame trace inequality
matrixloc    window localization of large Hermitian matrices
spectral     radial Schrodinger spectra, semiclassical ratios, stability bound
cli          command-line front end with reproducible run records
"""

__version__ = "0.1.0"
