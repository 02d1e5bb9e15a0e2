"""Thermodynamic formalism on free-group subshifts.

The full shift here is the space of freely reduced words over the 2d
letters of a rank-d free group. Given a potential (a function of a
bounded window of letters) the package computes topological pressure,
critical exponents and Bowen dimensions, free-energy curves and their
Legendre (multifractal) spectra, and the same quantities restricted to
the fibers of a quotient map. Comparing the full and restricted values
gives numerical amenability and dimension-gap diagnostics.
"""

from .config import RunConfig, load_config
from .diagnostics import (GibbsData, SymmetricAverageResult, VerdictReport,
                          amenability_report, divergence_probe, gibbs_verify,
                          half_bound_check, pressure_inequality_check,
                          symmetric_on_average_statistic)
from .errors import (FreeshiftError, NumericError, ResourceError,
                     UndefinedRatioError, ValidationError)
from .potentials import (GeometricPotential, Potential, birkhoff_sup_sum,
                         boundary_completion, combine, distortion_constant,
                         load_potential_csv, random_inverse_symmetric,
                         save_potential_csv, window_states)
from .pressure import (FiberSeries, GrowthFit, LiftedTransferMatrix,
                       PerronResult, PressureResult, TransferMatrix,
                       fiber_partition, fiber_partition_many, full_pressure,
                       growth_rate, partition_sum_matrix, perron_eigen,
                       restricted_pressure, restricted_pressure_exact)
from .quotients import (FiniteQuotient, FreeAbelianQuotient, FreeKillQuotient,
                        Quotient)
from .spectra import (CogrowthResult, FreeEnergyCurve, FreeEnergyPoint,
                      SpectrumCurve, bowen_dimension, cogrowth,
                      default_beta_grid, delta, free_energy,
                      free_energy_curve, legendre, level_set_dimension)
from .words import (Alphabet, ReducedWord, concat_reduce, count_words,
                    enumerate_words, inverse_word, involute, is_reduced)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "CogrowthResult",
    "FiberSeries",
    "FiniteQuotient",
    "FreeAbelianQuotient",
    "FreeEnergyCurve",
    "FreeEnergyPoint",
    "FreeKillQuotient",
    "FreeshiftError",
    "GeometricPotential",
    "GibbsData",
    "GrowthFit",
    "LiftedTransferMatrix",
    "NumericError",
    "PerronResult",
    "Potential",
    "PressureResult",
    "Quotient",
    "ReducedWord",
    "ResourceError",
    "RunConfig",
    "SpectrumCurve",
    "SymmetricAverageResult",
    "TransferMatrix",
    "UndefinedRatioError",
    "ValidationError",
    "VerdictReport",
    "amenability_report",
    "birkhoff_sup_sum",
    "boundary_completion",
    "bowen_dimension",
    "cogrowth",
    "combine",
    "concat_reduce",
    "count_words",
    "distortion_constant",
    "default_beta_grid",
    "delta",
    "divergence_probe",
    "enumerate_words",
    "fiber_partition",
    "fiber_partition_many",
    "free_energy",
    "free_energy_curve",
    "full_pressure",
    "gibbs_verify",
    "growth_rate",
    "half_bound_check",
    "inverse_word",
    "involute",
    "is_reduced",
    "legendre",
    "level_set_dimension",
    "load_config",
    "load_potential_csv",
    "partition_sum_matrix",
    "perron_eigen",
    "pressure_inequality_check",
    "random_inverse_symmetric",
    "restricted_pressure",
    "restricted_pressure_exact",
    "save_potential_csv",
    "symmetric_on_average_statistic",
    "window_states",
]
