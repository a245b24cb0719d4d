"""Deterministic execution engine for the data-parallel construction phase.

Randomness comes from counter-based Philox streams addressed purely by
(seed, iteration, ant, purpose), so every draw is independent of worker
count, scheduling, and wall clock. The construction phase reads shared
immutable state (instance, pheromone snapshot as a weight matrix), keeps all
per-ant state private, writes each ant's tour to its own output slot, and
joins before anything else runs. Worker counts above the hardware limit are
clamped; outputs are identical either way.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from enum import IntEnum

import numba
import numpy as np

from . import _kernels
from .colony import construct_tours_block, eta_matrix, trail_weights
from .errors import ParameterError
from .instance import Tour, cycle_lengths

THREADS_ENV_VAR = "ANTGENE_THREADS"

_MASK64 = (1 << 64) - 1
_ITERATION_BITS = 32
_ANT_BITS = 24
_PURPOSE_BITS = 8


class Purpose(IntEnum):
    """Draw-context tag; part of every stream key."""

    START_CITY = 0
    TRANSITION = 1
    GA = 2
    TOPUP = 3


@dataclass(frozen=True)
class StreamKey:
    seed: int
    iteration: int
    ant: int
    purpose: Purpose

    def context(self):
        if not 0 <= self.iteration < (1 << _ITERATION_BITS):
            raise ParameterError(f"iteration {self.iteration} outside 0..2^{_ITERATION_BITS}-1")
        if not 0 <= self.ant < (1 << _ANT_BITS):
            raise ParameterError(f"ant index {self.ant} outside 0..2^{_ANT_BITS}-1")
        return (
            (self.iteration << (_ANT_BITS + _PURPOSE_BITS))
            | (self.ant << _PURPOSE_BITS)
            | int(self.purpose)
        )


def stream_for(key):
    """Deterministic stream for a key: Philox keyed by the master seed with
    the (iteration, ant, purpose) context in the high counter word.

    Distinct keys address disjoint counter blocks of the same keyed PRF, so
    streams are statistically independent; the same key always reproduces
    the same draws, with no global state involved.
    """
    key_words = np.zeros(2, dtype=np.uint64)
    key_words[0] = key.seed & _MASK64
    counter_words = np.zeros(4, dtype=np.uint64)
    counter_words[3] = key.context()
    return np.random.Generator(np.random.Philox(key=key_words, counter=counter_words))


@dataclass(frozen=True)
class EngineConfig:
    """Requested worker count; 0 means use all available hardware threads."""

    threads: int = 1

    def __post_init__(self):
        if self.threads < 0:
            raise ParameterError(f"threads must be >= 0, got {self.threads}")


def available_workers():
    """Hardware parallelism as seen by the compiled kernels."""
    return numba.config.NUMBA_NUM_THREADS


def resolve_worker_count(config):
    """Requested count clamped to hardware; 0 resolves to all cores."""
    limit = available_workers()
    if config.threads == 0:
        return limit
    return max(1, min(config.threads, limit))


def threads_from_env(default=1):
    """Worker count from the ANTGENE_THREADS variable, else `default`.

    A command-line flag takes precedence over the environment; callers apply
    that ordering.
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    if value < 0:
        raise ParameterError(f"{THREADS_ENV_VAR} must be >= 0, got {value}")
    return value


def parallel_construct(tau, inst, p, iteration, seed, config=EngineConfig()):
    """Construct all m ant tours for one iteration in parallel.

    Ant k starts at a city drawn from its START_CITY stream and walks using
    uniforms from its TRANSITION stream, so the returned list (indexed by
    ant) is identical for every worker count. The pheromone matrix is only
    read; all workers join before the call returns.
    """
    n, m = inst.n, p.m
    starts = np.empty(m, dtype=np.int64)
    draws = np.empty((m, n - 1))
    for k in range(m):
        start_stream = stream_for(StreamKey(seed, iteration, k, Purpose.START_CITY))
        starts[k] = int(start_stream.integers(0, n))
        draws[k] = stream_for(StreamKey(seed, iteration, k, Purpose.TRANSITION)).random(n - 1)
    weights = trail_weights(tau.tau, eta_matrix(inst), p.alpha, p.beta)
    numba.set_num_threads(resolve_worker_count(config))
    orders = construct_tours_block(weights, starts, draws, iteration)
    lengths = cycle_lengths(inst.dist, orders)
    return [Tour(orders[k], float(lengths[k])) for k in range(m)]


def local_search_block(inst, tours, config=EngineConfig()):
    """2-opt every tour to a local optimum, one worker per tour.

    Tours are refined in disjoint slots, so the result is worker-count
    independent like the construction phase.
    """
    orders = np.stack([t.order for t in tours])
    numba.set_num_threads(resolve_worker_count(config))
    _kernels.two_opt_block(inst.dist, orders)
    lengths = cycle_lengths(inst.dist, orders)
    return [Tour(orders[k], float(lengths[k])) for k in range(len(tours))]


def phase_timer(label, work, *args, **kwargs):
    """Run `work` and return (result, elapsed seconds on the monotonic clock).

    `label` names the phase at call sites; timing is observational only and
    never feeds back into results.
    """
    t0 = time.perf_counter()
    result = work(*args, **kwargs)
    return result, time.perf_counter() - t0
