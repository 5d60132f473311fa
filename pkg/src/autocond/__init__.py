"""Linesearch-free first-order optimization with auto-conditioned stepsizes.

Solvers estimate local curvature from consecutive iterates and use the
running maximum as the inverse stepsize, so they need neither a Lipschitz
constant nor backtracking retries.  The package bundles the solvers, a
problem zoo, trace diagnostics that verify the supporting inequalities, and
LIBSVM/CSV data plumbing behind a small CLI.
"""

from .dataio import LIBRARY_VERSION as __version__
from .dataio import (
    ParseError,
    SparseDataset,
    load_libsvm,
    parse_libsvm,
    read_trace_csv,
    serialize_libsvm,
    write_trace_csv,
)
from .diagnostics import (
    BoundReport,
    RateFit,
    failure_census,
    lemma1_check,
    lemma3_check,
    rate_fit,
    theorem1_bound_check,
    theorem5_bound_check,
    theorem6_bound_check,
)
from .instances import (
    LogisticTrimmedL1,
    SphereManifold,
    StiefelManifold,
    holder_toy,
    logreg_smooth_constant,
    nonconvex_quadratic_simplex,
    quadratic_problem,
    quartic_kernel,
    quartic_kernel_step,
    random_sphere_point,
    random_stiefel_point,
    rel_smooth_quartic,
    simplex_lmo,
    sphere_rayleigh,
    stiefel_brockett,
    stiefel_initial_curvature,
    synthetic_logreg,
    trimmed_l1_prox,
    trimmed_l1_prox_bruteforce,
    trimmed_l1_value,
)
from .numerics import (
    PowerIterationError,
    SparseMatrix,
    operator_norm,
    qr_thin,
    solve_cubic_scale,
)
from .oracles import (
    BregmanKernel,
    CompositeProblem,
    GradientCheckReport,
    LmoProblem,
    Manifold,
    RiemannianProblem,
    bregman_divergence,
    bregman_divergence_definition,
    euclidean_kernel,
    gradient_check,
)
from .solvers import (
    IterationRecord,
    LineSearchError,
    SolverConfig,
    Trace,
    TraceHeader,
    ac_bpgm,
    ac_cgm,
    ac_pgm,
    ac_rgm,
    pgm_constant,
    rgm_armijo,
)
