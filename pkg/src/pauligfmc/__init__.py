"""Green's function Monte Carlo for spinless fermions in a finite square well.

The propagator is iterated in the resolvent form with a harmonic trial
kernel; antisymmetry is carried by a pairwise Pauli weight 1 - exp(-S)
applied at every step instead of explicit determinants in the propagator.
Exact references (well spectra, two-fermion propagators) live in
:mod:`pauligfmc.oracle`; run orchestration and extrapolation in
:mod:`pauligfmc.experiments`.
"""

from .model import (
    ConfigError,
    Population,
    RunConfig,
    SystemSpec,
    Walker,
    config_from_dict,
    config_to_dict,
    default_orbitals,
    load_config,
    save_config,
    validate_spec,
    validation_errors,
)
from .potentials import PauliWeight, pauli_action, pauli_weight, trial_potential, well_potential
from .guidance import (
    GuidanceValue,
    drift_diffusion_density,
    guidance_value,
    orbital_value,
    quantum_force,
    trial_density_matrix,
)
from .engine import (
    EngineError,
    StepStats,
    advance_generation,
    energy_estimate,
    propagate_walker,
    intermediate_multiplicity,
    sample_initial_generation,
    sample_time_step,
    stochastic_round,
)
from .oracle import (
    Level,
    LevelTable,
    bound_states_1d,
    bound_states_radial,
    exact_two_fermion_propagator,
    fermi_ground_energy,
    pauli_factorization_error,
)
from .experiments import (
    EnergySeries,
    ExtrapolationFit,
    SweepResult,
    blocking_error,
    extrapolate_linear,
    run_single,
    sweep_delta,
)

__version__ = "0.1.0"
