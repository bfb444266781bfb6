"""qflow: quantum momentum-flow simulator and verification suite.

Evolves one-dimensional wavefunctions spectrally and computes the local
mean momentum four independent ways (phase gradient, current density,
position-post-selected weak value, midpoint-constrained momentum-pair
sum), integrates the matching flow lines, and verifies that every route
coincides. Discrete path machinery (short-time amplitudes, kink momenta,
lattice propagator sums) connects the same picture to path sums.
"""

from .errors import (
    ConfigError,
    GridError,
    MaskedRegionError,
    NumericalError,
    QFlowError,
    StateError,
    TrajectoryError,
)
from .grids import (
    Grid1D,
    MomentumAmplitudes,
    WaveFunction,
    apply_momentum_operator,
    from_momentum_space,
    inner_product,
    make_grid,
    normalize,
    spectral_derivative,
    to_momentum_space,
)
from .schrodinger import (
    EvolutionSeries,
    Potential,
    evolve,
    evolve_step,
    free_potential,
    harmonic_potential,
    initial_state,
    square_barrier,
    square_well,
    total_energy,
    two_gaussian_slit,
)
from .polar import (
    FieldOnGrid,
    PolarFields,
    bohm_momentum,
    continuity_residual,
    energy_momentum_components,
    kinetic_trace_check,
    osmotic_momentum,
    polar_decompose,
    polar_series,
    qhj_residual,
    quantum_potential,
)
from .trajectories import (
    Trajectory,
    TrajectoryEnsemble,
    VelocityField,
    integrate_ensemble,
    integrate_trajectory,
    non_crossing_check,
    seed_ensemble,
    velocity_at,
)
from .weak_values import (
    WeakValueResult,
    weak_flow_lines,
    weak_momentum_at,
    weak_momentum_gaussian_postselected,
    weak_value,
)
from .wigner import (
    EquivalenceReport,
    WignerFunction,
    conditional_momentum_derivative,
    conditional_momentum_integral,
    conditional_momentum_profile,
    equivalence_report,
    wigner_transform,
)
from .feynman import (
    DiscretePath,
    MomentumTPA,
    PathLattice,
    lattice_propagator,
    momentum_tpa,
    path_amplitude,
    roughness_scan,
    short_time_action,
    spray_mean_momentum,
    transition_amplitude,
)
from .config import ScenarioConfig, load_catalog_config, load_config

__version__ = "0.1.0"
