"""Factorial moments and limit laws of additive functions on Ewens permutations."""

from .backend import BACKEND, available_backends
from .core import (
    AdditiveSpec,
    CycleStructure,
    EwensParams,
    additive_value,
    esf_log_probability,
    esf_probability,
    psi,
    psi_exact,
    rising_factorial_exact,
    rising_factorial_log,
    truncate_weights,
)
from .errors import (
    DomainError,
    EwensError,
    ResourceError,
    UnsupportedParameterError,
    ValidationError,
)
from .instances import (
    build_bernoulli_subset,
    build_binomial2_subset,
    build_lugo_interval,
    build_poisson_longcycle_spec,
    describe_instance,
    poisson_longcycle_construction,
)
from .laws import (
    DiscreteLaw,
    bernoulli_law,
    binomial_law,
    factorial_moments_to_pmf,
    geometric_law,
    membership_necessary_check,
    mixed_poisson_law,
    poisson_law,
    quasi_poisson_law,
    tv_distance,
    tv_distance_with_error,
)
from .moments import (
    BetaTable,
    FactorialMomentVector,
    Provenance,
    approx_error_bound,
    build_beta_table,
    concentration_D,
    concentration_D_min,
    exact_factorial_moment,
    exact_factorial_moments,
    gamma_zero,
    upsilon_restricted,
    upsilon_truncated,
    upsilon_vector,
    watterson_moment,
)
from .oracle import (
    PartitionIterator,
    SeriesCoeffs,
    brute_force_permutations,
    exact_law,
    exact_tv_short_cycles,
    exp_series,
    partition_count,
)
from .sampler import (
    EmpiricalLaw,
    SampleBatch,
    empirical_factorial_moments,
    empirical_law,
    sample_conditioned_poisson,
    sample_crp,
)
from .spectral import AngleWindow, angle_spec, char_poly_log_abs, eigen_angle_count
from .transform import ThetaTransform

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
