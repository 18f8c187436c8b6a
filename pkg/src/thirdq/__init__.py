"""Third-quantized field operators for two beam-splitter-coupled optical modes."""

__version__ = "0.1.0"

from .basis import ConfigurationError, HermiteBasis, QuadGrid, build_phi_table, eval_eigenfunction, x_matrix_element
from .engine import EngineConfig, EvolutionState, NumericalError, evolve
from .hyperfock import JointHyperBasis, ModeBasis, make_cat, make_coherent, make_zero_oscillaton, tensor
from .operators import HyperFockOperators, coherence_op, commutator, field_op

__all__ = [
    "ConfigurationError", "EngineConfig", "EvolutionState", "HermiteBasis", "HyperFockOperators",
    "JointHyperBasis", "ModeBasis", "NumericalError", "QuadGrid", "build_phi_table", "coherence_op",
    "commutator", "eval_eigenfunction", "evolve", "field_op", "make_cat", "make_coherent",
    "make_zero_oscillaton", "tensor", "x_matrix_element",
]
