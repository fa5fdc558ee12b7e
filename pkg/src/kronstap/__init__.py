"""Low-rank Kronecker clutter covariance estimation and Kronecker STAP filters."""
from ._backend import available as available_backends
from .covariance import (
    KronCovModel,
    SampleSet,
    contract_for_a,
    contract_for_b,
    kron_fit_unconstrained,
    kron_objective,
    lr_kron,
    sample_covariance,
)
from .errors import (
    ArgumentError,
    ConfigError,
    DegenerateInputError,
    FormatError,
    KronStapError,
    SizingError,
    StapWarning,
    ValidationError,
)
from .filters import (
    FilterKind,
    StapFilter,
    SteeringVector,
    apply_filter,
    detection_statistic,
    doppler_grid,
    kron_classical_filter,
    kron_stap_filter,
    lr_stap_filter,
    spatial_only_filter,
    steering_bank,
)
from .linalg import EigenPairs, eig_truncate, hermitian_eig, kron, rearrange, rearrange_inv
from .simulation import ClutterScenario, TargetSpec, make_scenario, sample_clutter

__version__ = "0.1.0"
