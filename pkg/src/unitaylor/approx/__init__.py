"""Least-squares polynomial approximation, bump polynomials and gluing."""
from .fit import Constraint, FitFailure, FitReport, basis_frame, escalate, fit_at_degree, ls_fit, measure
from .glue import GlueInfeasible, bump, glue, leibniz_constant, min_distance, sup_majorant
from .targets import TargetFunction

__all__ = [name for name in dir() if not name.startswith("_")]
