"""Simulation and verification toolkit for partial linear eigenvalue statistics."""

from . import (
    ensembles,
    functions,
    limit_laws,
    montecarlo,
    report,
    rigidity,
    rng,
    sampling_clt,
    spectra,
    variance_functionals,
)
from .errors import NonConvergenceError

__all__ = [
    "NonConvergenceError",
    "ensembles",
    "functions",
    "limit_laws",
    "montecarlo",
    "report",
    "rigidity",
    "rng",
    "sampling_clt",
    "spectra",
    "variance_functionals",
]
__version__ = "0.1.0"
