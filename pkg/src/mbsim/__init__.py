"""Biased Maker-Breaker games on graphs: engine, Maker strategy S_M, MinBox, Pósa tools,
property checkers, resilience estimation, digraph reduction and an experiment harness."""

from .breakers import make_breaker
from .checkers import CheckResult, property_from_id
from .digraphs import Digraph, delta_zero, from_bipartite, sample_dnp, to_bipartite
from .engine import GameResult, OwnershipBoard, play_game
from .errors import (ConfigurationError, InvariantViolation, MbsimError, ParameterError,
                     ProtocolViolation)
from .graph import Graph, Seed, complete_graph, make_rng, sample_gnp, sample_subgraph
from .harness import ExperimentConfig, run_experiment, tail_bound
from .maker import SMStrategy, desk_parameters, sm_init
from .minbox import MinBoxParams, MinBoxState, danger_bound, play_minbox
from .posa import find_e_boosters, hamilton_path_between, rotate_all
from .resilience import adversary_destroy, check_gpr_resilient, estimate_local_resilience
from .trees import embed_tree, random_tree_with_bare_path

__version__ = "0.1.0"
