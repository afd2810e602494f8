"""Threshold maximum finding over candidate subkeys.

A random threshold subkey y is improved repeatedly: an oracle marks every
candidate whose (estimated) right-pair count strictly exceeds the
threshold's, a Grover search with unknown marked count proposes a
candidate, and the threshold moves when the proposal counts higher. The
loop stops when the time-step budget 2*c*m0 would be exceeded.

Estimated counts are memoized per run: each candidate is counted once on
first demand and the value reused, so the marking function f(x, y) is a
fixed function during one run and accepted thresholds increase strictly.

Time-step accounting: initializing q qubits costs q steps, one search
iteration costs one step, one counting run costs its init + Grover-gate +
Fourier-gate total. The oracle is charged one counting cost per
application (it needs a single coherent evaluation, not one per candidate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quantum_counting import (CountEstimate, CountingParams,
                               counting_distribution, estimate_from_outcome,
                               qft_gate_budget, quantum_count)
from .statevector import Register, StateVector
from .toy_cipher import AttackContext

SEARCH_GROWTH_FACTOR = 6.0 / 5.0


@dataclass
class ThresholdState:
    """Current threshold subkey, its count estimate, and accepted updates."""

    subkey: int
    right_pairs: int
    history: list[tuple[int, int]] = field(default_factory=list)

    def accept(self, subkey: int, right_pairs: int):
        if self.history and right_pairs <= self.history[-1][1]:
            raise ValueError("threshold updates must strictly increase")
        self.subkey = subkey
        self.right_pairs = right_pairs
        self.history.append((subkey, right_pairs))


@dataclass
class SearchBudget:
    """Time-step budget: limit = 2 * confidence * expected_steps."""

    confidence: int
    expected_steps: int
    spent: int = 0

    @property
    def limit(self) -> int:
        return 2 * self.confidence * self.expected_steps

    def try_charge(self, steps: int) -> bool:
        """Charge if it fits; refuse (and signal exhaustion) otherwise."""
        if self.spent + steps > self.limit:
            return False
        self.spent += steps
        return True


@dataclass
class StageSteps:
    """Per-stage time-step counters across one maximum-finding run."""

    init: int = 0
    counting: int = 0
    oracle: int = 0
    search: int = 0
    observe: int = 0

    @property
    def total(self) -> int:
        return self.init + self.counting + self.oracle + self.search + self.observe


class QuantumCounter:
    """Memoized quantum counting: one sampled estimate per subkey per run."""

    def __init__(self, ctx: AttackContext, params: CountingParams,
                 rng: np.random.Generator):
        self.ctx = ctx
        self.params = params
        self.rng = rng
        self.estimates: dict[int, CountEstimate] = {}
        self.invocations = 0

    @property
    def counting_cost(self) -> int:
        return self.params.counting_cost

    @property
    def init_width(self) -> int:
        return self.params.init_steps

    def count(self, x: int) -> int:
        if x not in self.estimates:
            self.estimates[x] = quantum_count(x, self.params, self.ctx, self.rng)
            self.invocations += 1
        return self.estimates[x].right_pairs


class ExactCounter:
    """Injected exact counts; isolates the threshold loop from counting noise."""

    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=np.int64)
        self.estimates: dict[int, int] = {}
        self.invocations = 0
        self.counting_cost = 0
        self.init_width = 0

    def count(self, x: int) -> int:
        self.estimates[x] = int(self.counts[x])
        return int(self.counts[x])


class DistributionCounter:
    """Counting via exact outcome distributions, for Monte Carlo sweeps.

    The counting circuit for each subkey is simulated once by amplitude
    readout; individual runs then sample the measured phase from that
    distribution, which is statistically identical to rerunning the circuit
    (a test asserts the equivalence against QuantumCounter). Memoization and
    cost accounting match QuantumCounter.
    """

    def __init__(self, ctx: AttackContext, params: CountingParams,
                 rng: np.random.Generator, cache: dict | None = None):
        self.ctx = ctx
        self.params = params
        self.rng = rng
        self._dists = cache if cache is not None else {}
        self.estimates: dict[int, CountEstimate] = {}
        self.invocations = 0

    @property
    def counting_cost(self) -> int:
        return self.params.counting_cost

    @property
    def init_width(self) -> int:
        return self.params.init_steps

    def _distribution(self, x: int) -> np.ndarray:
        if x not in self._dists:
            self._dists[x] = counting_distribution(self.ctx.marked_table(x), self.params)
        return self._dists[x]

    def count(self, x: int) -> int:
        if x not in self.estimates:
            dist = self._distribution(x)
            b = int(self.rng.choice(dist.size, p=dist / dist.sum()))
            theta, m_est, right = estimate_from_outcome(b, self.params)
            t = self.params.phase_bits
            self.estimates[x] = CountEstimate(
                b, theta, m_est, right, (1 << t) - 1, qft_gate_budget(t),
                self.params.init_steps)
            self.invocations += 1
        return self.estimates[x].right_pairs


def oracle_o1(x: int, y: int, counter) -> int:
    """f(x, y): 1 iff the counted value of x strictly exceeds that of y."""
    return int(counter.count(x) > counter.count(y))


@dataclass
class SearchOutcome:
    found: int | None
    iterations: int
    reinits: int
    measurements: int


def grover_search_marked(marked, subkey_bits: int,
                         rng: np.random.Generator,
                         budget: SearchBudget | None = None,
                         stages: StageSteps | None = None) -> SearchOutcome:
    """Search with unknown marked count: exponentially growing iteration cap.

    Measures the register after a random number of Grover steps, growing the
    range by 6/5 per failure; gives up after 4*ceil(4.5*sqrt(K)) measurements
    (or earlier when the caller's budget runs out). A round is charged its
    Grover iterations plus one step for the query that verifies the measured
    item. Returns the found marked item or None.
    """
    K = 1 << subkey_bits
    marked = np.asarray(marked, dtype=bool)
    if marked.size != K:
        raise ValueError("marked table size must be 2**subkey_bits")
    iterations = reinits = measurements = 0
    if K == 1:
        return SearchOutcome(0 if marked[0] else None, 0, 0, 0)
    reg = Register("subkey", 0, subkey_bits)
    max_measurements = 4 * math.ceil(4.5 * math.sqrt(K))
    m_cap = 1.0
    while measurements < max_measurements:
        j = int(rng.integers(0, max(1, int(m_cap))))
        if budget is not None and not budget.try_charge(subkey_bits + j + 1):
            break
        if stages is not None:
            stages.init += subkey_bits
            stages.search += j + 1
        state = StateVector.uniform(subkey_bits)
        reinits += 1
        for _ in range(j):
            grover_step(state, reg, marked)
        iterations += j
        outcome = state.measure(reg, rng)
        measurements += 1
        if marked[outcome]:
            return SearchOutcome(outcome, iterations, reinits, measurements)
        m_cap = min(SEARCH_GROWTH_FACTOR * m_cap, math.sqrt(K))
    return SearchOutcome(None, iterations, reinits, measurements)


def grover_step(state: StateVector, reg: Register, marked: np.ndarray) -> None:
    state.apply_phase_oracle(reg, marked)
    state.apply_diffusion(reg)


@dataclass
class MaxFindingConfig:
    confidence: int = 4
    expected_steps: int | None = None  # m0; derived from the counter if None

    def budget_for(self, subkey_bits: int, counter) -> SearchBudget:
        # default m0: the threshold-update count is about log2(K), each paid
        # for with one counting run on top of the search-iteration envelope
        K = 1 << subkey_bits
        m0 = self.expected_steps
        if m0 is None:
            m0 = max(1, math.ceil(22.5 * math.sqrt(K))
                     + math.ceil(math.log2(K)) * counter.counting_cost)
        return SearchBudget(self.confidence, m0)


@dataclass
class MaxFindingResult:
    subkey: int
    threshold: ThresholdState
    stages: StageSteps
    budget: SearchBudget
    loop_iterations: int
    trace: list[dict]
    # search steps spent up to (and including) the pass that produced the
    # final accepted threshold; the remaining budget is burned confirming
    # no better candidate exists and does not follow the sqrt(K) growth law
    search_steps_to_max: int = 0


def find_max_subkey(counter, subkey_bits: int, config: MaxFindingConfig,
                    rng: np.random.Generator) -> MaxFindingResult:
    """The full threshold loop; returns the final threshold subkey."""
    K = 1 << subkey_bits
    stages = StageSteps()
    budget = config.budget_for(subkey_bits, counter)
    trace: list[dict] = []
    if K == 1:
        r0 = counter.count(0)
        return MaxFindingResult(0, ThresholdState(0, r0, [(0, r0)]), stages,
                                budget, 0, trace)

    # random initial threshold: prepared by measuring a uniform subkey register
    y = int(rng.integers(K))
    if budget.try_charge(subkey_bits):
        stages.init += subkey_bits
    r_y = counter.count(y)
    threshold = ThresholdState(y, r_y, [(y, r_y)])

    loop = 0
    search_steps_to_max = 0
    while True:
        pass_fixed_cost = ((2 * subkey_bits + counter.init_width)
                           + 3 * counter.counting_cost)
        if not budget.try_charge(pass_fixed_cost):
            break
        stages.init += 2 * subkey_bits + counter.init_width
        stages.counting += counter.counting_cost
        stages.oracle += counter.counting_cost
        stages.observe += counter.counting_cost
        loop += 1

        marked = np.fromiter((oracle_o1(x, threshold.subkey, counter)
                              for x in range(K)), dtype=bool, count=K)
        outcome = grover_search_marked(marked, subkey_bits, rng, budget, stages)
        y_prime = outcome.found
        r_prime = counter.count(y_prime) if y_prime is not None else None
        accepted = y_prime is not None and r_prime > threshold.right_pairs
        trace.append({
            "loop_iter": loop, "y": threshold.subkey, "r_y": threshold.right_pairs,
            "y_prime": y_prime, "r_y_prime": r_prime, "accepted": accepted,
            "steps_spent": budget.spent,
        })
        if accepted:
            threshold.accept(y_prime, r_prime)
            search_steps_to_max = stages.search
    return MaxFindingResult(threshold.subkey, threshold, stages, budget, loop,
                            trace, search_steps_to_max)
