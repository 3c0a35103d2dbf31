"""Exact embedding counts and pseudorandomness checks for k-uniform hypergraphs."""

__version__ = "0.1.0"

from .hypergraph import (Hypergraph, HypergraphError, ParseError, SubsetFamily, complete_hypergraph,
                         density, is_linear, is_stable, joint_neighborhood, load_hypergraph,
                         neighborhood, read_hypergraph, save_hypergraph, write_hypergraph)
from .structure import (NotLinearError, Ordering, StructureProfile, connectors, degeneracy,
                        left_degrees, prefix_degenerate_ordering, profile)
from .properties import (BddParams, ExactCheckInfeasible, ParameterError, PseudoParams, TupleParams,
                         Verdict, bad_families, binomial_ratio_gap, check_bdd, check_pseudorandom,
                         check_tuple, concentration_check, concentration_gamma, concentration_table)
from .counting import (BudgetExceeded, CountReport, PinSpec, PreconditionError, check_extension_bound,
                       classify_clean, classify_induced, count_clean_polluted, count_embeddings,
                       iter_embeddings, non_induced_bound, omega, polluted_bound)
from .generators import GenSpec, catalog_pattern, generate, pattern_catalog
from .harness import Experiment, RunRecord, report, run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
