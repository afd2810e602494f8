"""Right-pair counting by phase estimation over the Grover iteration.

For a candidate subkey x, the marked items are the pair indices j with
e(x, j) = 1 inside the padded 2N-item index space. Phase estimation over
the Grover step G (phase oracle then diffusion) yields an outcome b whose
angle theta = 2*pi*b/2**t maps to the estimate F(theta) = 2N*sin^2(theta/2).

The candidate subkey is consumed classically: the per-x oracle reads its
subkey register value without ever writing it, so simulating it as a
parameter cuts the simulated width to t+n+1 qubits. A fully coherent mode
(superposed subkey register) exists as a cross-check at tiny sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statevector import Register, RegisterMap, StateVector
from .toy_cipher import AttackContext

COHERENT_MAX_SUBKEY_BITS = 2
COHERENT_MAX_INDEX_BITS = 2


def qft_gate_budget(width: int) -> int:
    """Exact gate count of the (inverse) Fourier transform as applied here."""
    return width * (width + 1) // 2 + width // 2


@dataclass(frozen=True)
class CountingParams:
    """Accuracy profile: n index bits, m accuracy bits, failure bound epsilon.

    The phase register width is pinned to t = m + ceil(log2(2 + 1/(2*eps))).
    """

    index_bits: int
    accuracy_bits: int
    failure_bound: float = 0.1

    def __post_init__(self):
        if self.index_bits < 1:
            raise ValueError("need at least one index bit")
        if self.accuracy_bits < 1:
            raise ValueError("need at least one accuracy bit")
        if not 0 < self.failure_bound < 0.5:
            raise ValueError("failure bound must be in (0, 1/2)")

    @property
    def phase_bits(self) -> int:
        return self.accuracy_bits + math.ceil(
            math.log2(2.0 + 1.0 / (2.0 * self.failure_bound)))

    @property
    def num_pairs(self) -> int:
        return 1 << self.index_bits

    @property
    def init_steps(self) -> int:
        """Initialization cost: one time step per initialized qubit."""
        return self.phase_bits + self.index_bits + 1

    @property
    def counting_cost(self) -> int:
        """Time steps of one counting run: init + Grover gates + QFT gates."""
        return (self.init_steps + (1 << self.phase_bits) - 1
                + qft_gate_budget(self.phase_bits))

    @classmethod
    def default(cls, index_bits: int) -> "CountingParams":
        """m = ceil(n/2) + 1 and epsilon = 1/10, hence t = ceil(n/2) + 4."""
        return cls(index_bits, math.ceil(index_bits / 2) + 1, 0.1)


@dataclass(frozen=True)
class CountEstimate:
    """One counting outcome: raw phase integer, angle, real and rounded count."""

    raw_outcome: int
    theta: float
    m_estimate: float
    right_pairs: int
    g_gate_count: int
    qft_gate_count: int
    init_steps: int

    @property
    def cost(self) -> int:
        return self.init_steps + self.g_gate_count + self.qft_gate_count


def grover_iteration(state: StateVector, reg: Register, marked: np.ndarray) -> None:
    """One Grover step on the index register: phase oracle, then diffusion."""
    state.apply_phase_oracle(reg, marked)
    state.apply_diffusion(reg)


def grover_iteration_for_subkey(x: int, state: StateVector, reg: Register,
                                ctx: AttackContext) -> None:
    """G parameterized by the (classically read) candidate subkey x."""
    grover_iteration(state, reg, ctx.marked_table(x))


def estimate_from_outcome(b: int, params: CountingParams) -> tuple[float, float, int]:
    """Map a raw phase outcome to (theta, M_est, rounded count)."""
    t = params.phase_bits
    n_pairs = params.num_pairs
    theta = 2.0 * math.pi * b / (1 << t)
    m_est = 2.0 * n_pairs * math.sin(theta / 2.0) ** 2
    right = min(max(int(math.floor(m_est + 0.5)), 0), n_pairs)
    return theta, m_est, right


def _counting_circuit(marked: np.ndarray, params: CountingParams) -> tuple[StateVector, Register]:
    t = params.phase_bits
    n = params.index_bits
    regs = RegisterMap(("phase", t), ("index", n + 1))
    if marked.size != 1 << (n + 1):
        raise ValueError("marked table must cover the padded 2N index space")
    state = StateVector.uniform(regs.total_qubits)
    index_reg = regs["index"]
    phase_reg = regs["phase"]

    def g(sv: StateVector) -> None:
        grover_iteration(sv, index_reg, marked)

    for j in range(t):
        state.apply_controlled_unitary_power(phase_reg.offset + j, g, 1 << j)
    state.inverse_qft(phase_reg)
    return state, phase_reg


def quantum_count(x: int, params: CountingParams, ctx: AttackContext,
                  rng: np.random.Generator) -> CountEstimate:
    """Estimate the number of right pairs of subkey x by phase estimation."""
    if ctx.index_bits != params.index_bits:
        raise ValueError("params and context disagree on the index width")
    return count_marked(ctx.marked_table(x), params, rng)


def count_marked(marked: np.ndarray, params: CountingParams,
                 rng: np.random.Generator) -> CountEstimate:
    """Counting circuit over an explicit marked-item table."""
    state, phase_reg = _counting_circuit(marked, params)
    g_gates = state.counters.oracle_calls
    qft_gates = state.counters.qft_gates
    b = state.measure(phase_reg, rng)
    theta, m_est, right = estimate_from_outcome(b, params)
    assert g_gates == (1 << params.phase_bits) - 1
    return CountEstimate(b, theta, m_est, right, g_gates, qft_gates,
                         params.init_steps)


def counting_distribution(marked: np.ndarray, params: CountingParams) -> np.ndarray:
    """Exact outcome distribution over b, by amplitude readout (no sampling)."""
    state, phase_reg = _counting_circuit(marked, params)
    return state.probabilities(phase_reg)


def coherent_counting_distribution(x: int, params: CountingParams,
                                   ctx: AttackContext) -> np.ndarray:
    """Cross-check mode: the subkey register is simulated explicitly.

    The subkey register holds the basis state |x> and the Grover oracle reads
    it coherently (one combined predicate over subkey+index), the diffusion
    still acting on the index register alone. Capped to tiny widths: the
    point is equality with the classically parameterized circuit, not scale.
    """
    k = ctx.subkey_bits
    n = params.index_bits
    if k > COHERENT_MAX_SUBKEY_BITS or n > COHERENT_MAX_INDEX_BITS:
        raise ValueError("coherent mode is a small-size cross-check only")
    t = params.phase_bits
    regs = RegisterMap(("phase", t), ("index", n + 1), ("subkey", k))
    joint = Register("index+subkey", regs["index"].offset, (n + 1) + k)

    pair_space = 1 << (n + 1)
    table = np.zeros(1 << joint.width, dtype=bool)
    for xv in range(1 << k):
        table[xv * pair_space:(xv + 1) * pair_space] = ctx.marked_table(xv)

    # phase and index registers uniform, subkey register pinned to |x>
    uniform = np.full(pair_space * (1 << t), 1.0 / math.sqrt(pair_space * (1 << t)),
                      dtype=np.complex128)
    amps = np.zeros(1 << regs.total_qubits, dtype=np.complex128)
    base = x * (pair_space * (1 << t))
    amps[base:base + uniform.size] = uniform
    state = StateVector.from_amplitudes(amps)

    def g(sv: StateVector) -> None:
        sv.apply_phase_oracle(joint, table)
        sv.apply_diffusion(regs["index"])

    for j in range(t):
        state.apply_controlled_unitary_power(regs["phase"].offset + j, g, 1 << j)
    state.inverse_qft(regs["phase"])
    return state.probabilities(regs["phase"])


def counting_error_bound(m_true: float, num_pairs: int, accuracy_bits: int) -> float:
    """Estimation-accuracy bound (sqrt(2*M*N) + N/2**(m+1)) * 2**-m."""
    if m_true < 0 or num_pairs < 1 or accuracy_bits < 1:
        raise ValueError("bound arguments out of domain")
    m = accuracy_bits
    return (math.sqrt(2.0 * m_true * num_pairs)
            + num_pairs / (1 << (m + 1))) * 2.0 ** (-m)


def profile_error_bound(m_true: float) -> float:
    """The bound under the default profile m = ceil(n/2)+1: sqrt(M/2) + 1/8.

    Independent of the pair count; equals the general bound evaluated over
    the full padded 2N-item index space whenever 2**(m-1) = sqrt(2N).
    """
    if m_true < 0:
        raise ValueError("negative count")
    return math.sqrt(m_true / 2.0) + 0.125
