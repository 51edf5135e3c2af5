"""Grenander-type estimators of monotone functions and their sup-norm limit theory."""
from .errors import (
    ConfigurationError,
    ConsistencyError,
    DegenerateBandError,
    DomainError,
    FitError,
    PrecisionError,
)
from .inverse import inverse_estimator, jump_structure, max_spacing
from .lcm import grenander_type, least_concave_majorant
from .models import SeedSpec, linear_density_model, linear_regression_model, sample
from .stepfn import CadlagStep, LeftContStep, upper_version

__version__ = "0.1.0"
