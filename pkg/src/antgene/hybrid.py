"""The combined solver loop.

Each iteration: (1) all ants construct tours in the parallel phase,
(2) optional 2-opt refinement of every ant tour, (3) best-tour check,
(4) trail evaporation followed by the ant-cycle deposit over all ant tours,
(5) a genetic generation evolved from this iteration's ant tours, whose best
tour (6) updates the global best when it improves on it and always deposits
one extra ant-cycle quantum, feeding the genetic result back into the trail
that drives the next iteration, and (7) a trace record is appended.

The global best can only ever be replaced by a strictly better tour, so the
best-so-far sequence is non-increasing by construction. All randomness comes
from keyed streams, making a run a pure function of (instance, params).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .colony import AcoParams, PheromoneMatrix, deposit, evaporate, init_pheromone
from .errors import ParameterError
from .genetic import GaParams, Population, evolve
from .instance import Tour, cycle_length
from .parallel import (
    EngineConfig,
    Purpose,
    StreamKey,
    local_search_block,
    parallel_construct,
    phase_timer,
    stream_for,
)

TRACE_CSV_HEADER = "iteration,best_so_far,iteration_best,mean_length,construction_s,update_s,ga_s"


@dataclass
class HybridParams:
    """Everything a run depends on; two runs with equal params are identical."""

    aco: AcoParams = field(default_factory=AcoParams)
    ga: GaParams | None = None
    ga_enabled: bool = True
    max_iterations: int = 500
    stagnation_limit: int = 100
    local_search: bool = True
    seed: int = 0
    threads: int = 1  # 0 = use all available cores

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ParameterError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.stagnation_limit < 1:
            raise ParameterError(f"stagnation_limit must be >= 1, got {self.stagnation_limit}")
        if self.threads < 0:
            raise ParameterError(f"threads must be >= 0, got {self.threads}")
        if self.ga is None:
            # one chromosome per ant by default
            self.ga = GaParams(pop_size=max(2, self.aco.m))


@dataclass
class IterationRecord:
    iteration: int
    best_so_far: float
    iteration_best: float
    mean_length: float
    construction_s: float
    update_s: float
    ga_s: float


@dataclass
class RunTrace:
    """Per-iteration convergence record plus the final best tour."""

    params: HybridParams
    records: list[IterationRecord] = field(default_factory=list)
    best: Tour | None = None

    def to_csv(self):
        lines = [TRACE_CSV_HEADER]
        for r in self.records:
            lines.append(
                f"{r.iteration},{r.best_so_far!r},{r.iteration_best!r},{r.mean_length!r},"
                f"{r.construction_s!r},{r.update_s!r},{r.ga_s!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self):
        return {
            "params": asdict(self.params),
            "records": [asdict(r) for r in self.records],
            "best": {
                "order": [int(c) for c in self.best.order],
                "length": self.best.length,
            },
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


@dataclass
class RunState:
    """Mutable state threaded through run_iteration."""

    tau: PheromoneMatrix
    best: Tour | None = None
    population: Population | None = None
    iteration: int = 0


def two_opt(inst, tour):
    """First-improvement 2-opt to a local optimum; never lengthens the tour.

    Scans candidate moves (i, j) lexicographically, reverses the improving
    segment, and restarts until no improving move exists.
    """
    order = tour.order.copy()
    _kernels.two_opt_inplace(inst.dist, order)
    return Tour(order, cycle_length(inst.dist, order))


def init_state(inst, params):
    return RunState(tau=init_pheromone(inst, params.aco))


def run_iteration(state, inst, params):
    """Advance the run by one iteration; mutates state, returns the record."""
    state.iteration += 1
    it = state.iteration
    config = EngineConfig(threads=params.threads)

    def construction_phase():
        tours = parallel_construct(state.tau, inst, params.aco, it, params.seed, config)
        if params.local_search:
            tours = local_search_block(inst, tours, config)
        return tours

    tours, construction_s = phase_timer("construction", construction_phase)

    iteration_best = min(tours, key=lambda t: t.length)
    if state.best is None or iteration_best.length < state.best.length:
        state.best = iteration_best

    def update_phase():
        evaporate(state.tau, params.aco.delta)
        deposit(state.tau, tours, params.aco.q)
        state.tau.t += 1

    _, update_s = phase_timer("update", update_phase)

    ga_s = 0.0
    if params.ga_enabled:

        def ga_phase():
            population = Population(instance=inst, members=list(tours), capacity=params.ga.pop_size)
            new_pop = evolve(
                population,
                params.ga,
                stream_for(StreamKey(params.seed, it, 0, Purpose.GA)),
                topup_stream=stream_for(StreamKey(params.seed, it, 0, Purpose.TOPUP)),
            )
            ga_best = min(new_pop.members, key=lambda t: t.length)
            # the genetic result feeds the next construction through the trail
            deposit(state.tau, [ga_best], params.aco.q)
            return new_pop, ga_best

        (state.population, ga_best), ga_s = phase_timer("ga", ga_phase)
        if ga_best.length < state.best.length:
            state.best = ga_best

    mean_length = float(np.mean([t.length for t in tours]))
    return IterationRecord(
        iteration=it,
        best_so_far=state.best.length,
        iteration_best=iteration_best.length,
        mean_length=mean_length,
        construction_s=construction_s,
        update_s=update_s,
        ga_s=ga_s,
    )


def solve(inst, params=None):
    """Run the full loop until max_iterations or stagnation; returns
    (best tour, trace).

    Output depends only on (instance, params); worker count and wall clock
    never change any traced value other than the timing columns.
    """
    if params is None:
        params = HybridParams()
    state = init_state(inst, params)
    trace = RunTrace(params=params)
    stagnation = 0
    previous_best = np.inf
    for _ in range(params.max_iterations):
        record = run_iteration(state, inst, params)
        trace.records.append(record)
        if state.best.length < previous_best:
            previous_best = state.best.length
            stagnation = 0
        else:
            stagnation += 1
        if stagnation >= params.stagnation_limit:
            break
    trace.best = state.best
    return state.best, trace
