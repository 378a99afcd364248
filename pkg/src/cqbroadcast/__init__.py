"""Classical codes for classical-quantum broadcast channels.

Rate regions for superposition and Marton coding, and literal small-blocklength
simulations of the random codes and square-root-measurement decoders that
achieve them.
"""

__version__ = "0.1.0"

from .channel import (CQBroadcastChannel, dump_channel, load_channel, load_example,
                      marginal_channel, n_fold_output, parse_channel)
from .codec import (Povm, SimReport, average_error_probability, build_marton_povm,
                    build_receiver1_povm, build_receiver2_povm, generate_marton_codebook,
                    generate_superposition_codebook, run_marton, run_superposition,
                    simulate_decode, square_root_povm)
from .exceptions import (CQBroadcastError, EmptyTypicalSetError, NotPSDError, NumericalError,
                         OversizeError, ParseError, ShapeError, ValidationError)
from .info import (CQEnsemble, DensityOperator, JointCodeState, build_marton_state,
                   build_superposition_state, classical_mutual_information,
                   conditional_holevo, holevo_information, mutual_information,
                   von_neumann_entropy)
from .lemmas import LemmaCheckResult, run_suite
from .regions import (RatePoint, RateRegion, SearchConfig, marton_rate_triple, marton_region,
                      pareto_reduce, superposition_rate_triple, superposition_region)
from .typicality import (conditional_typical_projector, strong_typical_projector,
                         weak_typical_projector)

__all__ = [
    "CQBroadcastChannel", "dump_channel", "load_channel", "load_example", "marginal_channel",
    "n_fold_output", "parse_channel",
    "Povm", "SimReport", "average_error_probability", "build_marton_povm",
    "build_receiver1_povm", "build_receiver2_povm", "generate_marton_codebook",
    "generate_superposition_codebook", "run_marton", "run_superposition", "simulate_decode",
    "square_root_povm",
    "CQBroadcastError", "EmptyTypicalSetError", "NotPSDError", "NumericalError",
    "OversizeError", "ParseError", "ShapeError", "ValidationError",
    "CQEnsemble", "DensityOperator", "JointCodeState", "build_marton_state",
    "build_superposition_state", "classical_mutual_information", "conditional_holevo",
    "holevo_information", "mutual_information", "von_neumann_entropy",
    "LemmaCheckResult", "run_suite",
    "RatePoint", "RateRegion", "SearchConfig", "marton_rate_triple", "marton_region",
    "pareto_reduce", "superposition_rate_triple", "superposition_region",
    "conditional_typical_projector", "strong_typical_projector", "weak_typical_projector",
]
