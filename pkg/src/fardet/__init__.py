"""Master-equation simulator for a far-detuned two-level atom in a standing wave."""

from .equations import (
    EquationKind,
    Generator,
    build_generator,
    dressed_generator,
    full_generator,
    secular_generator,
    sophisticated_adiabatic_generator,
    standard_adiabatic_generator,
    vec,
    unvec,
    vectorize,
)
from .integrator import (
    DensityState,
    LeakageError,
    StiffnessError,
    Trajectory,
    integrate,
    make_initial_state,
)
from .observables import (
    ObservableSeries,
    PositivityWarning,
    SeriesComparison,
    fluorescence_estimate,
    momentum_distribution,
    series_compare,
    validity_ratio,
)
from .operators import (
    DressedFunctions,
    KickWeights,
    MomentumBasis,
    OperatorMatrix,
    SimParams,
    build_basis,
    dipole_distribution,
    dressed_functions,
    kick_superoperator,
    kick_weights,
    kinetic_operator,
    lindblad_dissipator,
    rabi_operator,
    raising_operator,
)

__version__ = "0.1.0"
