"""AeroDG - adjoint-based 2D aerodynamic shape optimization with DG and FV Euler solvers."""

__version__ = "0.3.0"
__author__ = "AeroDG Team"
__description__ = "Adjoint-based 2D aerodynamic shape optimization with DG and FV Euler solvers"
