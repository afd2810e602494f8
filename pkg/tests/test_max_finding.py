import math

import numpy as np
import pytest

from qdca.classical_dca import count_table
from qdca.max_finding import (SEARCH_GROWTH_FACTOR, DistributionCounter, ExactCounter,
                              MaxFindingConfig, QuantumCounter, SearchBudget,
                              ThresholdState, find_max_subkey,
                              grover_search_marked, oracle_o1)
from qdca.quantum_counting import (CountingParams, count_marked,
                                   counting_distribution,
                                   estimate_from_outcome)
from qdca.toy_cipher import true_subkey


def _rng(entropy, *key):
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy, spawn_key=key))


# ---- threshold oracle -------------------------------------------------------


def test_oracle_never_marks_the_threshold_itself():
    counter = ExactCounter([3, 1, 4, 1])
    for x in range(4):
        assert oracle_o1(x, x, counter) == 0


def test_oracle_marks_strictly_larger_counts():
    counter = ExactCounter([1, 5, 5, 0])
    marked = [x for x in range(4) if oracle_o1(x, 0, counter)]
    assert marked == [1, 2]  # ties with the threshold stay unmarked


def test_true_subkey_marked_against_any_wrong_threshold(cipher, planted):
    # exact distributions: against every wrong threshold the true subkey is
    # marked (counted strictly higher) with probability well above 0.9
    key, ch, pairs, ctx = planted
    z = true_subkey(cipher, key, ch)
    params = CountingParams.default(6)

    def rounded_pmf(marked):
        dist = counting_distribution(marked, params)
        rounded = np.array([estimate_from_outcome(b, params)[2]
                            for b in range(dist.size)])
        pmf = np.zeros(params.num_pairs + 1)
        np.add.at(pmf, rounded, dist)
        return pmf

    pz = rounded_pmf(ctx.marked_table(z))
    for y in range(16):
        if y == z:
            continue
        cum = np.cumsum(rounded_pmf(ctx.marked_table(y)))
        p_marked = sum(pz[r] * cum[r - 1] for r in range(1, pz.size))
        assert p_marked >= 0.9, (y, p_marked)


# ---- search with unknown marked count -----------------------------------------


def test_search_all_marked_returns_immediately():
    out = grover_search_marked(np.ones(8, dtype=bool), 3, _rng(0))
    assert out.found is not None
    assert out.iterations == 0 and out.measurements == 1


def test_search_zero_marked_gives_up_at_cap():
    out = grover_search_marked(np.zeros(16, dtype=bool), 4, _rng(1))
    assert out.found is None
    assert out.measurements == 4 * math.ceil(4.5 * math.sqrt(16))


def test_search_single_marked_of_four_is_certain():
    # one Grover iteration on K=4 makes the marked item certain, so the
    # search can never return a wrong item
    marked = np.zeros(4, dtype=bool)
    marked[1] = True
    for seed in range(25):
        out = grover_search_marked(marked, 2, _rng(2, seed))
        assert out.found == 1


def test_search_respects_caller_budget():
    budget = SearchBudget(confidence=1, expected_steps=3)  # limit 6
    out = grover_search_marked(np.zeros(16, dtype=bool), 4, _rng(3), budget)
    assert out.found is None
    assert budget.spent <= budget.limit


def test_growth_factor_pinned():
    assert SEARCH_GROWTH_FACTOR == pytest.approx(1.2)


# ---- budget ---------------------------------------------------------------------


def test_budget_charge_or_stop():
    budget = SearchBudget(confidence=2, expected_steps=10)
    assert budget.limit == 40
    assert budget.try_charge(39)
    assert not budget.try_charge(2)  # would cross: refused, not partially spent
    assert budget.spent == 39
    assert budget.try_charge(1)
    assert budget.spent == 40


def test_default_budget_formula(planted):
    _, _, _, ctx = planted
    params = CountingParams.default(6)
    counter = QuantumCounter(ctx, params, _rng(4))
    budget = MaxFindingConfig(confidence=4).budget_for(4, counter)
    expected_m0 = math.ceil(22.5 * 4) + 4 * params.counting_cost
    assert budget.expected_steps == expected_m0
    assert budget.limit == 8 * expected_m0
    exact_budget = MaxFindingConfig(confidence=4).budget_for(4, ExactCounter([0] * 16))
    assert exact_budget.expected_steps == math.ceil(22.5 * 4)


def test_threshold_state_rejects_non_increasing():
    state = ThresholdState(0, 2, [(0, 2)])
    state.accept(3, 5)
    with pytest.raises(ValueError):
        state.accept(1, 5)


# ---- the full loop ----------------------------------------------------------------


def test_single_candidate_returns_without_search():
    res = find_max_subkey(ExactCounter([7]), 0, MaxFindingConfig(4), _rng(5))
    assert res.subkey == 0
    assert res.loop_iterations == 0
    assert res.stages.search == 0


def test_exact_counts_recover_argmax_with_monotone_history(cipher, planted):
    _, ch, pairs, _ = planted
    table = count_table(pairs, cipher, ch)
    argmax = table.winner()
    wins = 0
    for trial in range(100):
        rng = _rng(77, trial)
        res = find_max_subkey(ExactCounter(table.counts), 4, MaxFindingConfig(4), rng)
        wins += res.subkey == argmax
        values = [v for _, v in res.threshold.history]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert res.budget.spent <= res.budget.limit
    assert wins / 100 >= 1 - 1 / 16 - 0.05


def test_exact_counts_recover_argmax_on_permutations():
    # canonical setting: all counts distinct, planted maximum
    wins = 0
    for trial in range(60):
        rng = _rng(13, trial)
        counts = rng.permutation(16)
        res = find_max_subkey(ExactCounter(counts), 4, MaxFindingConfig(4), rng)
        wins += res.subkey == int(np.argmax(counts))
    assert wins / 60 >= 1 - 1 / 16 - 0.05


def test_planted_instance_recovery_rate(cipher, planted):
    # counting-backed maximum finding on the planted instance: the recovery
    # rate clears the 1 - 1/2^c confidence target over 100 seeded trials
    key, ch, pairs, ctx = planted
    z = true_subkey(cipher, key, ctx.characteristic)
    assert int(ctx.marked_table(z).sum()) >= 8  # adequate planted signal
    params = CountingParams.default(6)
    cache = {}
    wins = 0
    for trial in range(100):
        rng = _rng(55, trial)
        counter = DistributionCounter(ctx, params, rng, cache=cache)
        res = find_max_subkey(counter, 4, MaxFindingConfig(confidence=4), rng)
        wins += res.subkey == z
    assert wins >= math.ceil((1 - 1 / 16) * 100)


def test_distribution_counter_matches_simulated_outcomes():
    # sampled full-circuit outcomes agree with the exact readout distribution
    params = CountingParams.default(3)
    marked = np.zeros(16, dtype=bool)
    marked[:3] = True
    exact = counting_distribution(marked, params)
    outcomes = [count_marked(marked, params, _rng(9, seed)).raw_outcome
                for seed in range(400)]
    hist = np.bincount(outcomes, minlength=exact.size) / 400
    assert 0.5 * np.abs(hist - exact).sum() < 0.12


def test_quantum_counter_memoizes(planted):
    _, _, _, ctx = planted
    counter = QuantumCounter(ctx, CountingParams.default(6), _rng(6))
    first = counter.count(3)
    assert counter.count(3) == first
    assert counter.invocations == 1


def test_per_loop_step_accounting(planted):
    # each pass charges one counting cost to the counting, oracle and observe
    # stages, and 2k + (t+n+1) initialization steps on top of the initial
    # random-threshold preparation and per-round search re-initializations
    _, _, _, ctx = planted
    params = CountingParams.default(6)
    counter = QuantumCounter(ctx, params, _rng(21))
    res = find_max_subkey(counter, 4, MaxFindingConfig(4), _rng(21, 1))
    loops = res.loop_iterations
    assert res.stages.counting == loops * params.counting_cost
    assert res.stages.oracle == loops * params.counting_cost
    assert res.stages.observe == loops * params.counting_cost
    reinit_steps = res.stages.init - 4 - loops * (2 * 4 + params.init_steps)
    assert reinit_steps >= 0 and reinit_steps % 4 == 0
    assert res.budget.spent == res.stages.total


def test_trace_rows_reflect_loop(cipher, planted):
    _, ch, pairs, _ = planted
    table = count_table(pairs, cipher, ch)
    res = find_max_subkey(ExactCounter(table.counts), 4, MaxFindingConfig(4), _rng(8))
    assert len(res.trace) == res.loop_iterations
    for row in res.trace:
        assert set(row) == {"loop_iter", "y", "r_y", "y_prime", "r_y_prime",
                            "accepted", "steps_spent"}
    assert res.trace[-1]["steps_spent"] == res.budget.spent
