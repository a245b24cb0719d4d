"""Ant System core: pheromone state, visibility, probabilistic transitions
with tabu exclusion, tour construction, evaporation and deposit.

From city i the transition probability of an unvisited city j is

    p(j) = tau[i, j]**alpha * eta[i, j]**beta / sum over unvisited l

with visibility eta[i, j] = 1 / dist[i, j], and exactly zero for cities
already on the ant's tabu list. After all ants complete their tours the
trail is first evaporated (multiplied by the persistence factor delta) and
then reinforced along each tour with the ant-cycle quantity q / tour length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateDistributionError, ParameterError
from .instance import Tour, cycle_length, nearest_neighbor_tour

# beyond this exponent magnitude the weight products over- or underflow, so
# they are assembled in log space instead
LOG_SPACE_EXPONENT = 8.0


@dataclass
class AcoParams:
    """Colony tunables: trail and visibility exponents, persistence, size."""

    alpha: float = 1.0
    beta: float = 2.0
    delta: float = 0.9
    m: int = 20
    q: float = 1.0
    tau0: float | None = None  # override for the m / L_nn initial trail

    def __post_init__(self):
        if self.alpha < 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise ParameterError(f"beta must be >= 0, got {self.beta}")
        if not 0.0 < self.delta <= 1.0:
            raise ParameterError(f"delta must be in (0, 1], got {self.delta}")
        if self.m < 1:
            raise ParameterError(f"ant count m must be >= 1, got {self.m}")
        if self.q <= 0:
            raise ParameterError(f"deposit constant q must be > 0, got {self.q}")
        if self.tau0 is not None and self.tau0 <= 0:
            raise ParameterError(f"tau0 override must be > 0, got {self.tau0}")


@dataclass
class PheromoneMatrix:
    """Symmetric trail intensities with an iteration counter `t`."""

    tau: np.ndarray
    t: int = 0

    def check_invariants(self):
        n = self.tau.shape[0]
        off = ~np.eye(n, dtype=bool)
        assert np.array_equal(self.tau, self.tau.T), "pheromone matrix lost symmetry"
        assert np.all(self.tau[off] > 0.0), "pheromone positivity violated"

    def to_csv(self):
        """Matrix dump, one row per city; used by trail-convergence checks."""
        return "\n".join(",".join(repr(v) for v in row) for row in self.tau.tolist()) + "\n"


@dataclass
class AntState:
    """One ant's partial tour plus its tabu list (visited mask)."""

    current: int
    visited: np.ndarray
    partial: list[int] = field(default_factory=list)

    @classmethod
    def begin(cls, n, start):
        visited = np.zeros(n, dtype=bool)
        visited[start] = True
        return cls(current=start, visited=visited, partial=[start])

    def advance(self, city):
        self.visited[city] = True
        self.partial.append(city)
        self.current = city


def visibility(inst, i, j):
    """Visibility of city j from city i: the reciprocal distance."""
    if i == j:
        raise ValueError(f"visibility undefined for i == j == {i}")
    return 1.0 / inst.dist[i, j]


def eta_matrix(inst):
    """Full visibility matrix, zero on the diagonal."""
    with np.errstate(divide="ignore"):
        eta = 1.0 / inst.dist
    np.fill_diagonal(eta, 0.0)
    return eta


def trail_weights(tau, eta, alpha, beta):
    """Unnormalized transition weights tau**alpha * eta**beta.

    For exponents above LOG_SPACE_EXPONENT the product is computed as
    exp(alpha*log tau + beta*log eta) to avoid overflow/underflow; both
    branches agree to ~1e-12 after normalization on non-extreme inputs.
    """
    if max(alpha, beta) > LOG_SPACE_EXPONENT:
        with np.errstate(divide="ignore"):
            w = np.exp(alpha * np.log(tau) + beta * np.log(eta))
    else:
        w = np.power(tau, alpha) * np.power(eta, beta)
    np.fill_diagonal(w, 0.0)
    return w


def transition_probabilities(tau, inst, ant, p):
    """Probability vector over all cities for the ant's next move.

    Entries on the tabu list are exactly zero; the rest are proportional to
    tau**alpha * eta**beta and sum to 1. The normalizer accumulates in
    ascending city order, matching the compiled construction kernel bit for
    bit.
    """
    if ant.visited.all():
        raise ValueError("no unvisited city remains")
    row = trail_weights(tau.tau, eta_matrix(inst), p.alpha, p.beta)[ant.current]
    total = 0.0
    for j in range(inst.n):
        if not ant.visited[j]:
            total += row[j]
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateDistributionError(
            f"all transition weights from city {ant.current} collapsed to zero"
        )
    probs = np.where(ant.visited, 0.0, row / total)
    return probs


def select_next_city(probs, draw):
    """Roulette selection: first city whose cumulative probability exceeds draw.

    The scan runs in ascending city index; the last positive-probability
    city absorbs any cumulative round-off, so the call cannot fail for a
    proper distribution.
    """
    cum = 0.0
    last = -1
    for j in range(len(probs)):
        pj = probs[j]
        if pj > 0.0:
            last = j
            cum += pj
            if cum > draw:
                return j
    if last < 0:
        raise ValueError("no city has positive probability")
    return last


def construct_tour(tau, inst, p, start, stream):
    """Build a complete tour from `start`, drawing one uniform per step.

    Reads the pheromone matrix only. Deterministic given (tau, start,
    stream state); bit-identical to the parallel construction kernel fed
    from the same stream.
    """
    if not 0 <= start < inst.n:
        raise ValueError(f"start city {start} out of range 0..{inst.n - 1}")
    ant = AntState.begin(inst.n, start)
    for _ in range(inst.n - 1):
        probs = transition_probabilities(tau, inst, ant, p)
        ant.advance(select_next_city(probs, float(stream.random())))
    order = np.array(ant.partial, dtype=np.int64)
    return Tour(order, cycle_length(inst.dist, order))


def evaporate(tau, delta):
    """Scale every trail by the persistence factor delta in place."""
    if not 0.0 < delta <= 1.0:
        raise ParameterError(f"delta must be in (0, 1], got {delta}")
    tau.tau *= delta
    return tau


def deposit(tau, tours, q):
    """Ant-cycle update: each tour of length L adds q/L on every edge it uses,
    mirrored to keep the matrix symmetric."""
    if q <= 0:
        raise ParameterError(f"deposit constant q must be > 0, got {q}")
    for tour in tours:
        amount = q / tour.length
        i = tour.order
        j = np.roll(i, -1)
        np.add.at(tau.tau, (i, j), amount)
        np.add.at(tau.tau, (j, i), amount)
    return tau


def init_pheromone(inst, p):
    """Uniform initial trail tau0 = m / L_nn (or the explicit override)."""
    if p.tau0 is not None:
        tau0 = p.tau0
    else:
        tau0 = p.m / nearest_neighbor_tour(inst, 0).length
    tau = np.full((inst.n, inst.n), tau0)
    np.fill_diagonal(tau, 0.0)
    return PheromoneMatrix(tau=tau, t=0)


def construct_tours_block(weights, starts, draws, iteration):
    """Run the compiled construction kernel over pre-drawn uniforms.

    `weights` is the trail_weights matrix, `starts[k]` and `draws[k]` the
    k-th ant's start city and per-step uniforms. Raises
    DegenerateDistributionError naming the ant and iteration on collapse.
    """
    m, n = draws.shape[0], weights.shape[0]
    orders = np.empty((m, n), dtype=np.int64)
    status = np.empty(m, dtype=np.int64)
    _kernels.construct_block(weights, starts, draws, orders, status)
    bad = np.nonzero(status)[0]
    if bad.size:
        k = int(bad[0])
        raise DegenerateDistributionError(
            f"transition weights collapsed to zero for ant {k} at iteration "
            f"{iteration}, step {int(status[k])}",
            ant=k,
            iteration=iteration,
        )
    return orders
