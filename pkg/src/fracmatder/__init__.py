"""Finite-volume L1 solver for the fractional material derivative.

The operator :math:`D^\\alpha_\\pm` is a Riemann-Liouville derivative taken
along the characteristics ``x ∓ t = C``. This package marches the upwind /
L1 finite-volume scheme for ``D^α_± u = f``, provides the closed-form
Lévy-walk densities it should reproduce, and a Monte Carlo simulator of the
wait-first walk for cross-checks.
"""

from __future__ import annotations

from fracmatder._backend import available as available_backends
from fracmatder.analytic import (
    GeneralIVP,
    SourceKind,
    SourceSpec,
    general_solution,
    jump_first_cell_averages,
    jump_first_normalization,
    jump_first_tail_bound,
    pdf_jump_first,
    pdf_standard,
    pdf_wait_first,
    power_source_solution,
    solvability_integral,
    source_cell_average,
    source_cell_averages,
    wait_first_cell_averages,
    wait_first_normalization,
)
from fracmatder.core import (
    AlphaParam,
    Direction,
    FieldHistory,
    L1Coefficients,
    MeshSpec,
    cell_index,
    discrete_matder,
    l1_coefficients,
    special_beta,
    special_gamma,
)
from fracmatder.errors import (
    AccuracyError,
    ConfigError,
    DomainOfDependenceError,
    FracMatDerError,
    PathBudgetError,
)
from fracmatder.fvm import (
    InitialCondition,
    SchemeVariant,
    SourceTable,
    check_domain,
    fit_mesh,
    march,
    step,
    valid_cells,
)
from fracmatder.metrics import (
    RateFit,
    RunReport,
    discrete_norm,
    error_vs_reference,
    fit_rate,
    mass_series,
    power_convergence,
    timing_compare,
    wait_first_convergence,
)
from fracmatder.quadrature import matder_quadrature_oracle, riemann_liouville_integral
from fracmatder.stochastic import (
    EmpiricalPdf,
    RandomStream,
    RngSeed,
    SubordinatorPath,
    estimate_pdf,
    sample_positive_stable,
    simulate_coupled_paths,
    wait_first_position,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AlphaParam",
    "ConfigError",
    "Direction",
    "DomainOfDependenceError",
    "EmpiricalPdf",
    "FieldHistory",
    "FracMatDerError",
    "GeneralIVP",
    "InitialCondition",
    "L1Coefficients",
    "MeshSpec",
    "PathBudgetError",
    "RandomStream",
    "RateFit",
    "RngSeed",
    "RunReport",
    "SchemeVariant",
    "SourceKind",
    "SourceSpec",
    "SourceTable",
    "SubordinatorPath",
    "available_backends",
    "cell_index",
    "check_domain",
    "discrete_matder",
    "discrete_norm",
    "error_vs_reference",
    "estimate_pdf",
    "fit_mesh",
    "fit_rate",
    "general_solution",
    "jump_first_cell_averages",
    "jump_first_normalization",
    "jump_first_tail_bound",
    "l1_coefficients",
    "march",
    "mass_series",
    "matder_quadrature_oracle",
    "pdf_jump_first",
    "pdf_standard",
    "pdf_wait_first",
    "power_convergence",
    "power_source_solution",
    "riemann_liouville_integral",
    "sample_positive_stable",
    "simulate_coupled_paths",
    "solvability_integral",
    "source_cell_average",
    "source_cell_averages",
    "special_beta",
    "special_gamma",
    "step",
    "timing_compare",
    "valid_cells",
    "wait_first_cell_averages",
    "wait_first_convergence",
    "wait_first_normalization",
    "wait_first_position",
]
