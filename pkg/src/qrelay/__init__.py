"""Decode-forward rates for quantum relay channels, with the supporting
quantum-information toolkit and a Monte-Carlo FQSW decoupling check."""

from ._backend import BACKEND
from .channels import (
    QuantumChannel,
    RelayChannel,
    apply_channel,
    channel_from_spec,
    channels_equal,
    choi_matrix,
    complementary_channel,
    compose_relay,
    interaction_relay,
    make_channel,
    orthogonal_relay,
    partial_swap_relay,
    relay_from_spec,
    stinespring_isometry,
)
from .entropics import (
    coherent_information,
    conditional_entropy,
    mutual_information,
    purity,
    von_neumann_entropy,
)
from .errors import (
    DegenerateParameterError,
    LabelError,
    NumericDomainError,
    ParameterError,
    QRelayError,
    ShapeError,
)
from .fqsw import (
    DecouplingConfig,
    DecouplingResult,
    entanglement_byproduct,
    fqsw_bound,
    monte_carlo,
)
from .linalg import (
    DensityOperator,
    PureState,
    SubsystemShape,
    haar_unitary,
    partial_trace,
    purify,
    tensor,
    uhlmann_isometry,
)
from .optimize import (
    OptimizationResult,
    OptimizerConfig,
    channel_coherent_information,
    maximize,
)
from .rates import (
    RatePoint,
    RateReport,
    check_rate_point,
    decoupling_exponents,
    evaluate_state_rates,
    orthogonal_links_bound,
    superdense_classical_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DecouplingConfig",
    "DecouplingResult",
    "DegenerateParameterError",
    "DensityOperator",
    "LabelError",
    "NumericDomainError",
    "OptimizationResult",
    "OptimizerConfig",
    "ParameterError",
    "PureState",
    "QRelayError",
    "QuantumChannel",
    "RatePoint",
    "RateReport",
    "RelayChannel",
    "ShapeError",
    "SubsystemShape",
    "apply_channel",
    "channel_coherent_information",
    "channel_from_spec",
    "channels_equal",
    "check_rate_point",
    "choi_matrix",
    "coherent_information",
    "complementary_channel",
    "compose_relay",
    "conditional_entropy",
    "decoupling_exponents",
    "entanglement_byproduct",
    "evaluate_state_rates",
    "fqsw_bound",
    "haar_unitary",
    "interaction_relay",
    "make_channel",
    "maximize",
    "monte_carlo",
    "mutual_information",
    "orthogonal_links_bound",
    "orthogonal_relay",
    "partial_swap_relay",
    "partial_trace",
    "purify",
    "purity",
    "relay_from_spec",
    "stinespring_isometry",
    "superdense_classical_rate",
    "tensor",
    "uhlmann_isometry",
    "von_neumann_entropy",
]
