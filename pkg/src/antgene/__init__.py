"""Deterministic parallel ant-colony + genetic-algorithm solver for the
symmetric travelling salesman problem."""

from .colony import (
    AcoParams,
    AntState,
    PheromoneMatrix,
    construct_tour,
    deposit,
    evaporate,
    init_pheromone,
    select_next_city,
    transition_probabilities,
    visibility,
)
from .errors import (
    AntgeneError,
    DegenerateDistributionError,
    InstanceTooLargeError,
    InvalidTourError,
    ParameterError,
    TsplibParseError,
)
from .estimator import AcoGaSolver
from .genetic import (
    GaParams,
    Population,
    crossover_ox,
    evolve,
    fitness,
    mutate_swap,
    remove_duplicates,
    selection_probabilities,
)
from .hybrid import HybridParams, RunTrace, solve, two_opt
from .instance import (
    Instance,
    Tour,
    brute_force_optimum,
    canonical_form,
    enumerate_optimum,
    load_tsplib,
    nearest_neighbor_tour,
    optimality_gap,
    parse_tsplib,
    random_instance,
    tour_from_order,
    tour_length,
)
from .parallel import EngineConfig, Purpose, StreamKey, parallel_construct, phase_timer, stream_for

__version__ = "0.1.0"

__all__ = [
    "AcoGaSolver",
    "AcoParams",
    "AntState",
    "AntgeneError",
    "DegenerateDistributionError",
    "EngineConfig",
    "GaParams",
    "HybridParams",
    "Instance",
    "InstanceTooLargeError",
    "InvalidTourError",
    "ParameterError",
    "PheromoneMatrix",
    "Population",
    "Purpose",
    "RunTrace",
    "StreamKey",
    "Tour",
    "TsplibParseError",
    "brute_force_optimum",
    "canonical_form",
    "construct_tour",
    "crossover_ox",
    "deposit",
    "enumerate_optimum",
    "evaporate",
    "evolve",
    "fitness",
    "init_pheromone",
    "load_tsplib",
    "mutate_swap",
    "nearest_neighbor_tour",
    "optimality_gap",
    "parallel_construct",
    "parse_tsplib",
    "phase_timer",
    "random_instance",
    "remove_duplicates",
    "select_next_city",
    "selection_probabilities",
    "solve",
    "stream_for",
    "tour_from_order",
    "tour_length",
    "transition_probabilities",
    "two_opt",
    "visibility",
]
