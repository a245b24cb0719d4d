import numpy as np
import pytest

from antgene.colony import (
    AcoParams,
    AntState,
    PheromoneMatrix,
    construct_tour,
    deposit,
    evaporate,
    eta_matrix,
    init_pheromone,
    select_next_city,
    trail_weights,
    transition_probabilities,
    visibility,
)
from antgene.errors import ParameterError
from antgene.instance import Instance, random_instance, tour_from_order
from antgene.parallel import Purpose, StreamKey, stream_for


def equilateral():
    dist = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    return Instance(3, dist)


def test_aco_params_validation():
    AcoParams()  # defaults are legal
    for kwargs in (
        {"alpha": -0.1},
        {"beta": -1.0},
        {"delta": 0.0},
        {"delta": 1.5},
        {"m": 0},
        {"q": 0.0},
        {"tau0": -1.0},
    ):
        with pytest.raises(ParameterError):
            AcoParams(**kwargs)


def test_visibility_reciprocal():
    inst = Instance(2, np.array([[0.0, 2.0], [2.0, 0.0]]))
    assert visibility(inst, 0, 1) == 0.5
    inst1 = Instance(2, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert visibility(inst1, 0, 1) == 1.0


def test_visibility_rejects_self_loop():
    inst = equilateral()
    with pytest.raises(ValueError):
        visibility(inst, 1, 1)


def test_transition_uniform_when_symmetric():
    # equal trails and equal visibilities: uniform over the 3 feasible cities
    dist = np.full((4, 4), 2.0)
    np.fill_diagonal(dist, 0.0)
    inst = Instance(4, dist)
    tau = init_pheromone(inst, AcoParams(m=4))
    ant = AntState.begin(4, 0)
    probs = transition_probabilities(tau, inst, ant, AcoParams())
    assert probs[0] == 0.0
    assert np.allclose(probs[1:], 1.0 / 3.0, atol=1e-15)


def test_transition_matches_direct_arithmetic():
    inst = equilateral()
    tau = PheromoneMatrix(np.array([[0.0, 2.0, 1.0], [2.0, 0.0, 1.0], [1.0, 1.0, 0.0]]))
    ant = AntState.begin(3, 0)
    probs = transition_probabilities(tau, inst, ant, AcoParams(alpha=1.0, beta=1.0))
    assert probs[1] == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert probs[2] == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_transition_zero_on_tabu_and_sums_to_one():
    gen = np.random.default_rng(7)
    p = AcoParams(alpha=1.3, beta=2.7)
    for _ in range(200):
        n = int(gen.integers(3, 12))
        inst = random_instance(n, int(gen.integers(0, 10**6)))
        tau = init_pheromone(inst, p)
        tau.tau[tau.tau > 0] *= gen.random((tau.tau > 0).sum()) + 0.5
        tau.tau = (tau.tau + tau.tau.T) / 2.0
        np.fill_diagonal(tau.tau, 0.0)
        k = int(gen.integers(1, n))
        visited_cities = gen.choice(n, size=k, replace=False)
        ant = AntState.begin(n, int(visited_cities[0]))
        for c in visited_cities[1:]:
            ant.advance(int(c))
        probs = transition_probabilities(tau, inst, ant, p)
        assert np.all(probs[ant.visited] == 0.0)
        assert np.all(probs >= 0.0)
        assert abs(probs.sum() - 1.0) <= 1e-12


def test_transition_factorizations():
    # alpha = 0 leaves only visibility; beta = 0 leaves only trail
    inst = random_instance(6, 3)
    tau = init_pheromone(inst, AcoParams(m=6))
    tau.tau[0, 1] = tau.tau[1, 0] = 9.0  # break the symmetry of the trail
    ant = AntState.begin(6, 0)
    eta = eta_matrix(inst)

    probs_eta = transition_probabilities(tau, inst, ant, AcoParams(alpha=0.0, beta=2.0))
    expected = eta[0] ** 2.0
    expected[0] = 0.0
    assert np.allclose(probs_eta, expected / expected.sum(), rtol=1e-12)

    probs_tau = transition_probabilities(tau, inst, ant, AcoParams(alpha=1.0, beta=0.0))
    expected = tau.tau[0].copy()
    expected[0] = 0.0
    assert np.allclose(probs_tau, expected / expected.sum(), rtol=1e-12)


def test_log_space_weights_match_direct():
    # just below the log-space cutoff both branches must agree after
    # normalization
    inst = random_instance(8, 1)
    tau = init_pheromone(inst, AcoParams())
    eta = eta_matrix(inst)
    direct = trail_weights(tau.tau, eta, 1.0, 8.0)
    logspace = np.exp(1.0 * np.log(tau.tau, where=tau.tau > 0) + 8.0 * np.log(eta, where=eta > 0))
    np.fill_diagonal(logspace, 0.0)
    row_d = direct[0] / direct[0].sum()
    row_l = logspace[0] / logspace[0].sum()
    assert np.allclose(row_d, row_l, atol=1e-12)


def test_select_next_city_degenerate_and_boundary():
    assert select_next_city(np.array([1.0]), 0.0) == 0
    assert select_next_city(np.array([1.0]), 0.999999) == 0
    assert select_next_city(np.array([0.5, 0.5]), 0.49) == 0
    assert select_next_city(np.array([0.5, 0.5]), 0.51) == 1


def test_select_next_city_frequencies():
    probs = np.array([0.2, 0.5, 0.3])
    stream = stream_for(StreamKey(123, 0, 0, Purpose.TRANSITION))
    draws = stream.random(10**5)
    counts = np.zeros(3)
    for d in draws:
        counts[select_next_city(probs, float(d))] += 1
    for j in range(3):
        sigma = np.sqrt(probs[j] * (1 - probs[j]) * 10**5)
        assert abs(counts[j] - probs[j] * 10**5) < 3 * sigma


def test_construct_tour_two_cities():
    inst = random_instance(2, 5)
    tau = init_pheromone(inst, AcoParams(m=2))
    stream = stream_for(StreamKey(0, 1, 0, Purpose.TRANSITION))
    tour = construct_tour(tau, inst, AcoParams(m=2), 1, stream)
    assert sorted(tour.order.tolist()) == [0, 1]
    assert tour.length == pytest.approx(2 * inst.dist[0, 1])


def test_construct_tour_greedy_limit(unit_square):
    # huge visibility exponent makes construction follow nearest neighbors
    tau = init_pheromone(unit_square, AcoParams(m=4))
    p = AcoParams(beta=10.0, m=4)
    stream = stream_for(StreamKey(3, 1, 0, Purpose.TRANSITION))
    tour = construct_tour(tau, unit_square, p, 0, stream)
    assert tour.length == pytest.approx(4.0)


def test_construct_tour_deterministic():
    inst = random_instance(9, 2)
    tau = init_pheromone(inst, AcoParams())
    key = StreamKey(77, 4, 2, Purpose.TRANSITION)
    t1 = construct_tour(tau, inst, AcoParams(), 3, stream_for(key))
    t2 = construct_tour(tau, inst, AcoParams(), 3, stream_for(key))
    assert np.array_equal(t1.order, t2.order)
    assert t1.length == t2.length


def test_evaporate_examples():
    tau = PheromoneMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    evaporate(tau, 0.9)
    assert tau.tau[0, 1] == pytest.approx(0.9)
    before = tau.tau.copy()
    evaporate(tau, 1.0)
    assert np.array_equal(tau.tau, before)
    with pytest.raises(ParameterError):
        evaporate(tau, 0.0)
    with pytest.raises(ParameterError):
        evaporate(tau, 1.1)


def test_evaporate_closed_form():
    # delta = 0.5 scales by an exact power of two, so k applications must
    # match the closed form bit for bit
    tau = PheromoneMatrix(np.array([[0.0, 3.0], [3.0, 0.0]]))
    for _ in range(20):
        evaporate(tau, 0.5)
    assert tau.tau[0, 1] == 3.0 * 0.5**20


def test_deposit_examples(unit_square):
    tau = PheromoneMatrix(np.zeros((4, 4)) + 1.0)
    np.fill_diagonal(tau.tau, 0.0)
    tour = tour_from_order(unit_square, [0, 1, 2, 3])  # length 4
    before = tau.tau.copy()
    deposit(tau, [tour], 1.0)
    assert tau.tau[0, 1] == pytest.approx(before[0, 1] + 0.25)
    assert tau.tau[1, 0] == pytest.approx(before[1, 0] + 0.25)
    assert tau.tau[0, 2] == before[0, 2]  # unused edge untouched

    tau2 = PheromoneMatrix(before.copy())
    deposit(tau2, [], 1.0)
    assert np.array_equal(tau2.tau, before)


def test_deposit_additive(unit_square):
    tau = PheromoneMatrix(np.ones((4, 4)))
    np.fill_diagonal(tau.tau, 0.0)
    t1 = tour_from_order(unit_square, [0, 1, 2, 3])
    t2 = tour_from_order(unit_square, [0, 1, 3, 2])
    deposit(tau, [t1, t2], 1.0)
    # edge (0, 1) is on both tours
    assert tau.tau[0, 1] == pytest.approx(1.0 + 1.0 / t1.length + 1.0 / t2.length)


def test_init_pheromone(unit_square):
    tau = init_pheromone(unit_square, AcoParams(m=4))
    off = ~np.eye(4, dtype=bool)
    assert np.allclose(tau.tau[off], 1.0)  # m / L_nn = 4 / 4.0
    assert np.all(np.diagonal(tau.tau) == 0.0)
    assert np.array_equal(tau.tau, tau.tau.T)
    assert tau.t == 0

    override = init_pheromone(unit_square, AcoParams(m=4, tau0=0.125))
    assert np.allclose(override.tau[off], 0.125)


def test_ant_state_tracks_tabu_list():
    ant = AntState.begin(5, 2)
    ant.advance(0)
    ant.advance(4)
    assert ant.partial == [2, 0, 4]
    assert len(ant.partial) == len(set(ant.partial))
    assert set(np.nonzero(ant.visited)[0]) == set(ant.partial)
    assert ant.current == ant.partial[-1]


def test_pheromone_csv_dump():
    tau = PheromoneMatrix(np.array([[0.0, 2.0], [2.0, 0.0]]))
    lines = tau.to_csv().splitlines()
    assert len(lines) == 2
    assert lines[0] == "0.0,2.0"


def test_update_cycle_preserves_invariants():
    inst = random_instance(8, 13)
    p = AcoParams(m=5)
    tau = init_pheromone(inst, p)
    gen = np.random.default_rng(1)
    for _ in range(30):
        tours = [tour_from_order(inst, gen.permutation(8)) for _ in range(p.m)]
        evaporate(tau, p.delta)
        deposit(tau, tours, p.q)
        tau.check_invariants()
