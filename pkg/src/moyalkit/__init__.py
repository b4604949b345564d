"""moyalkit: Moyal star products, Weyl calculus and phase-space Schrödinger evolution on uniform grids."""

from .fieldio import FieldFormatError, read_field, write_field
from .grid import GridSpec, SampledField, hbar_fourier, inner_product, symplectic_fourier
from .norms import NormReport, Weight, msinf1_norm, msq_norm, scaling_norm_bound_check
from .propagation import (
    PropagationError,
    PropagationResult,
    QuadraticHamiltonian,
    star_exp_propagate,
    star_exp_series,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .star import (
    BoppOperator,
    OperatorMatrix,
    Symbol,
    bopp_apply,
    moyal_bracket,
    moyal_star,
    tau_quantize,
    twisted_product,
    weyl_quantize,
)
from .symplectic import HbarContext, PhasePoint, gaussian_admissible, hardy_pair_check, is_symplectic, standard_j
from .transforms import Window, cross_wigner, heisenberg_weyl, metaplectic_apply, stft, wave_packet, wave_packet_adjoint

__version__ = "0.1.0"

__all__ = [
    "BoppOperator",
    "FieldFormatError",
    "GridSpec",
    "HbarContext",
    "NormReport",
    "OperatorMatrix",
    "PhasePoint",
    "PropagationError",
    "PropagationResult",
    "QuadraticHamiltonian",
    "SampledField",
    "Scenario",
    "ScenarioError",
    "Symbol",
    "Weight",
    "Window",
    "bopp_apply",
    "cross_wigner",
    "gaussian_admissible",
    "hardy_pair_check",
    "hbar_fourier",
    "heisenberg_weyl",
    "inner_product",
    "is_symplectic",
    "load_scenario",
    "metaplectic_apply",
    "moyal_bracket",
    "moyal_star",
    "msinf1_norm",
    "msq_norm",
    "read_field",
    "scaling_norm_bound_check",
    "standard_j",
    "star_exp_propagate",
    "star_exp_series",
    "stft",
    "symplectic_fourier",
    "tau_quantize",
    "twisted_product",
    "wave_packet",
    "wave_packet_adjoint",
    "weyl_quantize",
    "write_field",
]
