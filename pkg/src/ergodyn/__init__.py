"""ergodyn: work-driven quantum time evolution on truncated Fock spaces."""

from .closed_forms import (
    GravityScenario,
    MoonParams,
    balanced_superposition_number,
    balanced_superposition_probabilities,
    detuning_response,
    gravitational_probabilities,
    moon_degenerate_probabilities,
    moon_perturbative_probabilities,
    noon_probabilities,
    oscillation_frequency,
    oscillation_frequency_from_coherence,
    product_recurrence_possible,
    separable_pair_number,
    separable_pair_probabilities,
    two_level_probabilities,
    two_level_survival,
)
from .dynamics import (
    EffectiveDynamics,
    SubspaceGenerator,
    TimeSeries,
    block_probabilities,
    effective_hamiltonian,
    evolve_probabilities,
    expanded_generator,
    first_order_dyson,
    propagator,
    rk4_commutator_oracle,
    rk4_expectation_series,
    standard_propagator,
    subspace_generator,
    survival_probability,
)
from .errors import (
    ConfigError,
    DegenerateSpectrumError,
    DimensionCapError,
    EngineDisagreementError,
    ErgodynError,
    GridError,
    RefinementError,
)
from .fock import (
    BasisIndex,
    DensityOperator,
    Ket,
    ModeSystem,
    Operator,
    build_basis,
    flat_index,
    fock_ket,
    free_hamiltonian,
    identity_operator,
    number_operator,
    occupations_of,
    projector,
    pure_density,
    superposition,
    tensor,
    vacuum_ket,
)
from .measures import BipartitionSpec, l1_coherence, negativity, partial_transpose
from .passive import (
    GroundDecomposition,
    build_passive_unitary,
    decompose_against_ground,
    passive_energy,
    passive_state,
    passive_unitary_for,
)
from .scenarios import ScenarioConfig, load_config, run_scenario, sweep

__version__ = "0.1.0"
