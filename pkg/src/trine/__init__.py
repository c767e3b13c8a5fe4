"""Three-color reversible automaton on mixed graphs: simulator,
precise-filling invariant checker, mask search and resolution-table
algebra."""

__version__ = "0.1.0"

from .graph import MixedGraph, complement, transliterate, weak_computable, super_weak_computable
from .dynamics import RunRecord, full_cycle, predecessor, run_to_mirror, step

__all__ = [
    "MixedGraph",
    "RunRecord",
    "complement",
    "transliterate",
    "weak_computable",
    "super_weak_computable",
    "full_cycle",
    "predecessor",
    "run_to_mirror",
    "step",
    "__version__",
]
