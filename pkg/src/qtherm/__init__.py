"""qtherm: eigenstate thermalization of a fermionic resonant level at desk scale."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    SetupParams,
    SingleParticleHamiltonian,
    Spectrum,
    build_custom,
    build_quenched,
    build_resonant_level,
    diagonalize,
    min_gap,
)
from .ensemble import (  # noqa: F401
    ReferenceEnsemble,
    SampledEigenstate,
    SamplingResult,
    eigenstate_energy,
    energy_window_for_temperature,
    fermi,
    grand_canonical_occupations,
    read_sample_cache,
    sample_fixed_n,
    sample_microcanonical_window,
    solve_reference,
    write_sample_cache,
)
from .observables import (  # noqa: F401
    IndicatorKind,
    IndicatorReport,
    chebyshev_bound,
    deviation_fraction,
    equilibrium_band,
    indicator_gc_exact,
    indicator_ref,
    ipr,
    occupancy_gc,
    occupancy_static,
)
from .dynamics import (  # noqa: F401
    AmplitudeMatrix,
    QuenchPair,
    indicator_ref_t,
    infinite_time_indicator,
    ipr_t,
    make_quench_pair,
    mode_correlator,
    occupancy_t,
    propagate_amplitudes,
    sigma_av,
    temporal_std,
    time_averaged_occupancy,
    time_grid,
)
from .bath_scenario import (  # noqa: F401
    BathInitialState,
    bath_quench_pair,
    bath_spectrum,
    indicator_gc_bath_exact,
    indicator_ref_bath,
    localization_coefficient,
    sample_bath_states,
    system_occupancy_bath_scenario,
)
from .errors import BudgetError, ConfigError, NumericError, QthermError  # noqa: F401
