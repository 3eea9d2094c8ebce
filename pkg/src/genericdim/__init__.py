"""Dimension of generic points on the countable full shift."""

__version__ = "0.1.0"

from genericdim.dimension import (  # noqa: E402
    DimensionReport,
    SupportMismatchError,
    convergence_exponent,
    covering_sum_diagnostic,
    dimension_formula,
    dimension_report,
    entropy_dimension_closed,
    entropy_dimension_grid,
    local_dimension,
    relative_entropy_integral,
    relative_entropy_sum,
)
from genericdim.gauss import (  # noqa: E402
    GaussMeasure,
    basic_interval_length,
    cf_encode,
    dim_generic_cf,
    gauss_measure_mass,
    wegmann_check,
)
from genericdim.generic import build_seed, sample_F, sample_Ystar, typical_word, verify_generic  # noqa: E402
from genericdim.gibbs import GaussPotential, GibbsModel, build_model, gurevich_pressure  # noqa: E402
from genericdim.kernels import BACKEND  # noqa: E402
from genericdim.measures import (  # noqa: E402
    BernoulliMeasure,
    CylinderMeasure,
    MarkovMeasure,
    PeriodicOrbitMeasure,
    TableMeasure,
    markov_approximation,
)
from genericdim.symbolic import accumulate_orbit, bowen_bound, d_star, d_star_orbit_vs_measure  # noqa: E402

__all__ = [
    "__version__",
    "DimensionReport",
    "SupportMismatchError",
    "convergence_exponent",
    "covering_sum_diagnostic",
    "dimension_formula",
    "dimension_report",
    "entropy_dimension_closed",
    "entropy_dimension_grid",
    "local_dimension",
    "relative_entropy_integral",
    "relative_entropy_sum",
    "GaussMeasure",
    "basic_interval_length",
    "cf_encode",
    "dim_generic_cf",
    "gauss_measure_mass",
    "wegmann_check",
    "build_seed",
    "sample_F",
    "sample_Ystar",
    "typical_word",
    "verify_generic",
    "GaussPotential",
    "GibbsModel",
    "build_model",
    "gurevich_pressure",
    "BACKEND",
    "BernoulliMeasure",
    "CylinderMeasure",
    "MarkovMeasure",
    "PeriodicOrbitMeasure",
    "TableMeasure",
    "markov_approximation",
    "accumulate_orbit",
    "bowen_bound",
    "d_star",
    "d_star_orbit_vs_measure",
]
