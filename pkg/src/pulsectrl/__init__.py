"""Stability and controllability toolkit for a two-component
reaction-diffusion pulse under proportional feedback control.

Submodules:
    model     -- pulse data, existence condition, (alpha, beta, nu) reduction
    spectral  -- explicit spectral function R, root equation, verdict
    oracle    -- brute-force Sturm-Liouville cross-checks
    regions   -- parameter-plane classification and sweep
    pde_sim   -- direct time integration of the controlled system
    cli       -- command-line front end
"""

__version__ = "1.0.0"

from .errors import (
    BranchCut,
    DegenerateControl,
    EssentialRay,
    FloorInsufficient,
    NearEigenvalue,
    NotControllable,
    NumericalBlowup,
    OutOfContinuum,
    PoleAtInput,
    PulseControlError,
    QuadratureFailure,
    RootIsolationFailure,
    UnstableEssential,
)
from .model import (
    ModelParams,
    PowerLawModel,
    ReducedCoefficients,
    existence_residual,
    pulse_profile,
    reduced_coefficients,
)
from .spectral import (
    RValue,
    SpectrumReport,
    assemble_spectrum,
    essential_edges,
    find_complex_roots,
    find_real_roots,
    lhs,
    r_continuous,
    r_discrete,
    r_total,
)
from .oracle import (
    FastGrid,
    FastOperator,
    eigenfunction_identities,
    r_oracle,
    solve_vin,
    theta_inner_product,
    theta_reference,
    top_eigenvalues,
)
from .regions import (
    RegionCell,
    SweepResult,
    classify_theorem,
    min_control_gain,
    sweep_plane,
    uncontrolled_verdict,
)
from .pde_sim import SimConfig, SimTrace, relax_profile, rhs, run, step

__all__ = [name for name in dir() if not name.startswith("_")]
