"""Numerical toolkit for a two-species Lotka-Volterra competition model
with memory-based (delayed self-advective) diffusion on an interval with
hostile boundaries.

Core pipeline: principal eigenpairs of the weighted Dirichlet problems
-> steady-state expansion and Newton refinement -> interaction integrals,
region classification, and crossing data -> delayed time integration and
outcome classification.
"""

from .dynamics import (
    History,
    SimConfig,
    SimulationResult,
    classify_outcome,
    find_hopf_threshold,
    simulate,
)
from .eigen import (
    EigenPair,
    ResourceProfile,
    principal_eigen,
    richardson,
    second_eigenvalue_shifted,
)
from .errors import (
    AdmissibilityError,
    BracketError,
    CharacteristicInconsistencyError,
    ConfigError,
    ConvergenceError,
    DegenerateExpansionError,
    DegenerateGeometryError,
    GridMismatchError,
    MemcompError,
    NoHopfError,
    SubcriticalTargetError,
)
from .grid import (
    Field,
    Grid,
    flux_divergence,
    gradient_energy,
    inner_product,
    l2_norm,
    laplacian,
)
from .hopf import (
    HopfData,
    KappaSet,
    KSet,
    RegionReport,
    assemble_hopf_data,
    classify_region,
    compute_kappas,
    compute_Ks,
    hopf_point,
    region_lines,
    sn0_imaginary,
    tau_sequence,
    transversality_sign,
    transversality_value,
)
from .model import ModelParams, preset_q1, preset_q2
from .steady import (
    SteadyState,
    lambda_primes,
    leading_state,
    memory_strength_margins,
    refine_steady_state,
    s_from_lambda,
    solve_w_prime,
    steady_residual,
)

__version__ = "0.1.0"
