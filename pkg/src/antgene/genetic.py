"""Genetic stage over populations of tours.

Fitness is a tour's share of the population's total length, so smaller is
better; selection therefore weights each member by the complement
(1 - fitness), keeping shorter tours more likely to parent. Crossover is
the order crossover (OX), which maps permutations to permutations without
repair. Duplicate removal works on undirected-tour equality via canonical
forms, so rotations and reflections of one tour count as one individual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidTourError, ParameterError
from .instance import Instance, Tour, canonical_form, cycle_length


@dataclass
class GaParams:
    pop_size: int = 20
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    elitism: int = 1

    def __post_init__(self):
        if self.pop_size < 2:
            raise ParameterError(f"pop_size must be >= 2, got {self.pop_size}")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ParameterError(f"crossover_rate must be in [0, 1], got {self.crossover_rate}")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ParameterError(f"mutation_rate must be in [0, 1], got {self.mutation_rate}")
        if not 1 <= self.elitism <= self.pop_size:
            raise ParameterError(
                f"elitism must be in 1..pop_size ({self.pop_size}), got {self.elitism}"
            )


@dataclass
class Population:
    instance: Instance
    members: list[Tour]
    capacity: int


def fitness(member, pop):
    """Share of the population's total path length carried by `member`.

    Smaller is better; values over a population sum to 1.
    """
    if not pop.members:
        raise ValueError("fitness undefined for an empty population")
    total = float(sum(t.length for t in pop.members))
    return member.length / total


def selection_probabilities(pop):
    """Parent-selection weights: complement of fitness, normalized.

    Shorter tours never receive a lower probability than longer ones, and
    every member stays strictly selectable.
    """
    if len(pop.members) < 2:
        raise ValueError("selection needs a population of at least 2")
    lengths = np.array([t.length for t in pop.members])
    share = lengths / lengths.sum()
    weights = 1.0 - share
    return weights / weights.sum()


def crossover_ox(inst, parent1, parent2, cut1, cut2):
    """Order crossover: keep parent1[cut1:cut2] in place, fill the remaining
    positions in ascending order with parent2's cities in parent2 order,
    skipping cities already present."""
    n = inst.n
    if parent1.order.shape[0] != n or parent2.order.shape[0] != n:
        raise InvalidTourError("parents do not belong to this instance")
    if not 0 <= cut1 < cut2 <= n:
        raise ValueError(f"cuts must satisfy 0 <= cut1 < cut2 <= n, got ({cut1}, {cut2})")
    child = np.full(n, -1, dtype=np.int64)
    child[cut1:cut2] = parent1.order[cut1:cut2]
    present = np.zeros(n, dtype=bool)
    present[parent1.order[cut1:cut2]] = True
    fill = (c for c in parent2.order if not present[c])
    for pos in range(n):
        if child[pos] < 0:
            child[pos] = next(fill)
    return Tour(child, cycle_length(inst.dist, child))


def mutate_swap(inst, member, i, j):
    """Exchange the cities at positions i and j; length recomputed."""
    n = inst.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"swap positions ({i}, {j}) out of range 0..{n - 1}")
    order = member.order.copy()
    order[i], order[j] = order[j], order[i]
    return Tour(order, cycle_length(inst.dist, order))


def remove_duplicates(pop):
    """Keep the first member of each undirected-tour equivalence class."""
    seen = set()
    keep = []
    for tour in pop.members:
        key = canonical_form(tour.order).tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(tour)
    return Population(pop.instance, keep, pop.capacity)


def _pick(cumulative, draw):
    idx = int(np.searchsorted(cumulative, draw, side="right"))
    return min(idx, len(cumulative) - 1)


def evolve(pop, params, stream, topup_stream=None):
    """One generation: sort, carry elites, breed to capacity, dedup, top up.

    Breeding selects two parents by the complement-fitness roulette, applies
    OX with probability crossover_rate (otherwise copies the better parent),
    then swap mutation with probability mutation_rate at stream-drawn
    positions. After duplicate removal the population is topped up with
    fresh random permutations. Elitism guarantees the output best is never
    worse than the input best.
    """
    if not pop.members:
        raise ValueError("cannot evolve an empty population")
    if topup_stream is None:
        topup_stream = stream
    inst = pop.instance
    n = inst.n
    ranked = sorted(pop.members, key=lambda t: t.length)
    next_members = list(ranked[: params.elitism])
    if len(ranked) >= 2:
        probs = selection_probabilities(Population(inst, ranked, pop.capacity))
        cumulative = np.cumsum(probs)
    else:
        cumulative = None
    while len(next_members) < params.pop_size:
        if cumulative is None:
            child = ranked[0]
        else:
            p1 = ranked[_pick(cumulative, float(stream.random()))]
            p2 = ranked[_pick(cumulative, float(stream.random()))]
            if float(stream.random()) < params.crossover_rate:
                cut1 = int(stream.integers(0, n))
                cut2 = int(stream.integers(cut1 + 1, n + 1))
                child = crossover_ox(inst, p1, p2, cut1, cut2)
            else:
                child = p1 if p1.length <= p2.length else p2
        if float(stream.random()) < params.mutation_rate:
            i = int(stream.integers(0, n))
            j = int(stream.integers(0, n))
            child = mutate_swap(inst, child, i, j)
        next_members.append(child)
    deduped = remove_duplicates(Population(inst, next_members, params.pop_size))
    members = deduped.members
    while len(members) < params.pop_size:
        order = topup_stream.permutation(n).astype(np.int64)
        members.append(Tour(order, cycle_length(inst.dist, order)))
    return Population(inst, members, params.pop_size)
