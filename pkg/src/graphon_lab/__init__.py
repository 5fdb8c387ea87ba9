"""Entropy-maximizing bipodal graphons at fixed edge and odd-cycle densities.

Library layout:

- scalars: binary entropy, relative entropies, trade-off constant, a0 root
- bipodal: the 4-parameter step graphon, densities, spectrum, exact assembly
- optimize: damped fixed-matrix Newton solver in the reduced coordinates
- series: truncated asymptotic expansions and empirical convergence orders
- grid: independent discretized-graphon oracle and structural diagnostics
- sampling: W-random graphs and Monte Carlo density checks
- cli: `graphon-lab` command-line front end
"""

from .bipodal import (
    AboveCoords,
    BelowCoords,
    BipodalGraphon,
    SpectralPair,
    assemble_above,
    assemble_below,
    constant_graphon,
    cycle_density,
    degree_split,
    edge_density,
    entropy,
    rank_one_competitor,
    spectrum,
    triangle_density,
)
from .errors import (
    ConstraintInfeasible,
    DegeneratePode,
    DomainError,
    GraphonLabError,
    MaxIterExceeded,
    NoRootInBracket,
    NotNegativeDefinite,
    OutOfDomain,
    RegionViolation,
)
from .optimize import (
    ModelHessian,
    SolveOptions,
    SolverReport,
    SweepPoint,
    fd_hessian,
    initialize_above,
    initialize_below,
    model_hessian,
    reduced_entropy_and_grad,
    solve,
    sweep,
)
from .scalars import (
    a0_closed_form,
    entropy_h,
    entropy_h_deriv,
    mass_distance,
    rel_entropy,
    solve_a0,
    tradeoff_c,
)
from .series import (
    SeriesPrediction,
    convergence_order,
    entropy_above,
    entropy_below,
    params_above,
    params_below,
)

__version__ = "0.1.0"
