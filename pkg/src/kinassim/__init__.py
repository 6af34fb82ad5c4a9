"""Kinetic-level nudging data assimilation for 1D hyperbolic conservation laws.

Solvers for Burgers' equation and the Saint-Venant system built on kinetic
(BGK-type) representations, with Luenberger/nudging observers, synthetic
observation generation, error metrics and twin-experiment drivers.
"""
from .assimilation import (
    BurgersObserverMode,
    DecayFit,
    GainSchedule,
    RunConfig,
    RunResult,
    SweepPoint,
    TemporalMode,
    decay_study,
    run_forward,
    run_twin,
    sweep_lambda,
)
from .burgers import (
    KineticField,
    burgers_cfl,
    engquist_osher_flux,
    exact_relaxation_solution,
    step_collapse_macroscopic,
    step_kinetic_burgers,
    step_kinetic_linear,
    step_macroscopic_burgers,
)
from .grid import BoundaryKind, Grid1D, XiGrid
from .kinetic import (
    GRAVITY,
    ChiProfile,
    GibbsEquilibrium,
    ScalarChi,
    XiSide,
    chi_cube_integral,
    chi_indicator,
    chi_profile_value,
    gibbs_moments,
    halfline_energy_flux,
    halfline_flux_moment,
)
from .metrics import (
    ErrorSeries,
    fit_decay_rate,
    l1_absolute,
    l1_relative,
    l2_absolute,
    sobolev_seminorm,
    sweep_minimum,
)
from .observation import (
    Mollifier,
    NoiseSpec,
    ObservabilityResult,
    ObservationSeries,
    interpolate_in_time,
    load_series_csv,
    mollified_gain,
    noise_field,
    noise_l2_closed_form,
    observability_check,
    sample_observations,
    save_series_csv,
)
from .shallow_water import (
    EnergyBudget,
    InterfaceReconstruction,
    SWState,
    cell_energy,
    dam_break_state,
    energy_budget,
    hydrostatic_reconstruct,
    lake_at_rest_state,
    parabolic_bowl_bathymetry,
    sv_cfl,
    sv_forward_step,
    sv_interface_flux,
    sv_observer_step,
    thacker_setup,
    total_energy,
)

__version__ = "0.1.0"
