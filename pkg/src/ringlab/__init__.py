"""ringlab: a numerical laboratory for the ring model of orientation tuning.

Reduced Galerkin dynamics of a V1 hypercolumn, equilibrium continuation with
fold tracking, the O(2) orbit-space reduction of the two-mode model, and the
dynamic-stimulus protocols that produce the 90-degree illusion.
"""

from .model import (
    BlowUpError,
    CortexState,
    ModelSpec,
    RingModelError,
    Stimulus,
    Trajectory,
    full_ring_simulate,
    galerkin_rhs,
    group_act,
    integrate,
    make_lgn_stimulus,
    project_ring_state,
    reconstruct_activity,
    reconstruct_voltage,
    ring_grid,
)
from .continuation import (
    Branch,
    ContinuationConfig,
    NewtonError,
    continue_branch,
    fold_locus,
    homotopy_start,
    newton_solve,
    stability,
)
from .ring1 import (
    PolarState,
    ThresholdBoundary,
    find_equilibria_grid,
    pitchfork_condition,
    threshold_boundary,
    tuning_halfwidth,
)
from .orbit import (
    OrbitPoint,
    ReducedSystem,
    chebyshev_fit,
    hilbert_pi,
    invariant_oracle,
    orbit_rhs,
    reduce_invariants,
    tuning_curve_n2,
)
from .illusions import OutcomeReport, Scenario, classify_basin, run_scenario

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "Branch", "ContinuationConfig", "CortexState",
    "ModelSpec", "NewtonError", "OrbitPoint", "OutcomeReport", "PolarState",
    "ReducedSystem", "RingModelError", "Scenario", "Stimulus",
    "ThresholdBoundary", "Trajectory", "chebyshev_fit", "classify_basin",
    "continue_branch", "find_equilibria_grid", "fold_locus",
    "full_ring_simulate", "galerkin_rhs",
    "group_act", "hilbert_pi", "homotopy_start", "integrate",
    "invariant_oracle", "make_lgn_stimulus", "newton_solve", "orbit_rhs",
    "pitchfork_condition", "project_ring_state", "reconstruct_activity",
    "reconstruct_voltage", "reduce_invariants", "ring_grid", "run_scenario",
    "stability", "threshold_boundary", "tuning_curve_n2", "tuning_halfwidth",
]
