"""Branching ratios for a driven four-level emitter in a Lorentzian vacuum.

Two independent numerical routes to the asymptotic channel populations:
frequency-domain quadrature of the population integral and exact
pseudo-mode time-domain dynamics, plus a residue-calculus oracle, a
parameter-sweep engine with survey presets, and a CLI.
"""

__version__ = "0.1.0"

from .dynamics import (
    AmplitudeState,
    StepOptions,
    Trajectory,
    branching_ratio_time_domain,
    evolve,
    generator_matrix,
    population_time_domain,
    populations_time_domain,
)
from .errors import NumericalError, ParameterError
from .model import (
    PoleSet,
    QuarticPolynomial,
    SystemParams,
    denominator_polynomial,
    find_poles,
    resolvent,
    validate,
)
from .spectral import (
    BranchingResult,
    QuadratureOptions,
    branching_ratio,
    population,
    population_residue_oracle,
)
from .sweep import (
    GridAxis,
    GridSpec,
    SweepTable,
    preset_fig2,
    preset_fig3a,
    preset_fig3b,
    preset_fig4,
    preset_fig5,
    run_sweep,
)

__all__ = [
    "AmplitudeState",
    "BranchingResult",
    "GridAxis",
    "GridSpec",
    "NumericalError",
    "ParameterError",
    "PoleSet",
    "QuadratureOptions",
    "QuarticPolynomial",
    "StepOptions",
    "SweepTable",
    "SystemParams",
    "Trajectory",
    "branching_ratio",
    "branching_ratio_time_domain",
    "denominator_polynomial",
    "evolve",
    "find_poles",
    "generator_matrix",
    "population",
    "population_residue_oracle",
    "population_time_domain",
    "populations_time_domain",
    "preset_fig2",
    "preset_fig3a",
    "preset_fig3b",
    "preset_fig4",
    "preset_fig5",
    "resolvent",
    "run_sweep",
    "validate",
    "__version__",
]
