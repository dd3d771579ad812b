"""h-hop grid coloring toolkit."""

__version__ = "0.1.0"

from ._backend import name as backend
from .graph_model import GridSpec, Topology, build_grid, k_hop_neighbors, neighborhood_up_to
from .priority import PriorityAssignment, assign
from .reduction import equivalence_check, transform, verify_lemmas
from .serena_sim import run_naive, run_serena
from .validity import Coloring, check_h_hop, chromatic_number_bruteforce
from .vector_method import VectorPair, bounds, couple_of, fixture_patterns, solve_vectors, tile_grid

__all__ = [
    "Coloring",
    "GridSpec",
    "PriorityAssignment",
    "Topology",
    "VectorPair",
    "__version__",
    "assign",
    "backend",
    "bounds",
    "build_grid",
    "check_h_hop",
    "chromatic_number_bruteforce",
    "couple_of",
    "equivalence_check",
    "fixture_patterns",
    "k_hop_neighbors",
    "neighborhood_up_to",
    "run_naive",
    "run_serena",
    "solve_vectors",
    "tile_grid",
    "transform",
    "verify_lemmas",
]
