"""Spectral statistics of 1-d Schrodinger operators with decaying random potential.

The potential is ``a(t) F(X_t)`` with ``a(t) = (1 + t^2)^(-alpha/2)``, ``F`` a
trigonometric polynomial on the circle and ``X`` a Brownian motion on it.
"""
__version__ = "0.1.0"

from .decay import DecayProfile, integral_a_squared
from .errors import (ConfigError, InvalidArgumentError, InvariantError, NumericalError,
                     SchrodecayError, StatisticalPreconditionError, StepSizeError)
from .fd import (EigenPair, GridHamiltonian, PointSample, SpectrumWindow, assemble,
                 count_below, eigenvalues_in, eigenvector, rescaled_process)
from .measure import (EigenfunctionMeasure, build_measure, localization_center,
                      total_variation, wasserstein1)
from .torus import (DiffusionSpec, DisorderPath, TorusField, lyapunov_tau, parse_field,
                    sample_brownian_path)

__all__ = [
    "DecayProfile", "integral_a_squared",
    "ConfigError", "InvalidArgumentError", "InvariantError", "NumericalError",
    "SchrodecayError", "StatisticalPreconditionError", "StepSizeError",
    "EigenPair", "GridHamiltonian", "PointSample", "SpectrumWindow", "assemble",
    "count_below", "eigenvalues_in", "eigenvector", "rescaled_process",
    "EigenfunctionMeasure", "build_measure", "localization_center", "total_variation",
    "wasserstein1",
    "DiffusionSpec", "DisorderPath", "TorusField", "lyapunov_tau", "parse_field",
    "sample_brownian_path",
]
