"""Dense statevector simulator with exactly the gate set the attack needs.

Qubit order is little-endian: qubit 0 is the least significant bit of the
basis-state index, and a register's value is read the same way from its
qubit range. Registers are contiguous qubit ranges.

Oracles and the diffusion operator are applied as direct amplitude
transforms (the predicates are classical), not synthesized to elementary
gates; the inverse Fourier transform IS applied gate by gate so its gate
count can be reported exactly.

A StateVector is owned by one execution context while it mutates.
Measurement probabilities are accumulated in a fixed reduction order, so
seeded runs are bit-reproducible.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_QUBITS = 24
NORM_TOL = 1e-9


class CorruptedStateError(RuntimeError):
    """State norm drifted or collapsed below recoverable bounds."""


@dataclass(frozen=True)
class Register:
    """A named contiguous qubit range inside a StateVector."""

    name: str
    offset: int
    width: int

    @property
    def size(self) -> int:
        return 1 << self.width

    @property
    def qubits(self) -> range:
        return range(self.offset, self.offset + self.width)


class RegisterMap:
    """Disjoint named registers assigned consecutively from qubit 0."""

    def __init__(self, *specs: tuple[str, int]):
        self._regs: dict[str, Register] = {}
        offset = 0
        for name, width in specs:
            if width < 0:
                raise ValueError(f"register {name!r} has negative width")
            if name in self._regs:
                raise ValueError(f"duplicate register name {name!r}")
            self._regs[name] = Register(name, offset, width)
            offset += width
        self.total_qubits = offset

    def __getitem__(self, name: str) -> Register:
        return self._regs[name]

    def __iter__(self):
        return iter(self._regs.values())


@dataclass
class GateCounters:
    """Exact per-state instrumentation of applied operations."""

    oracle_calls: int = 0
    diffusion_calls: int = 0
    qft_gates: int = 0
    phase_gates: int = 0

    def snapshot(self) -> "GateCounters":
        return GateCounters(self.oracle_calls, self.diffusion_calls,
                            self.qft_gates, self.phase_gates)


class StateVector:
    """2**q complex amplitudes with a norm-preservation invariant."""

    def __init__(self, num_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS):
        if not 1 <= num_qubits <= max_qubits:
            raise ValueError(f"qubit count {num_qubits} outside [1, {max_qubits}]")
        self.num_qubits = num_qubits
        self.amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        self.amps[0] = 1.0
        self.counters = GateCounters()
        self._controls: list[int] = []
        self._idx = np.arange(1 << num_qubits)

    @classmethod
    def uniform(cls, num_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> "StateVector":
        """Equal superposition of all 2**q basis states."""
        s = cls(num_qubits, max_qubits)
        s.amps[:] = 1.0 / math.sqrt(1 << num_qubits)
        return s

    @classmethod
    def from_amplitudes(cls, amps, max_qubits: int = DEFAULT_MAX_QUBITS) -> "StateVector":
        amps = np.asarray(amps, dtype=np.complex128)
        q = int(amps.size).bit_length() - 1
        if 1 << q != amps.size:
            raise ValueError("amplitude array length must be a power of two")
        s = cls(q, max_qubits)
        s.amps = amps.copy()
        s._assert_norm()
        return s

    # ---- invariants ----------------------------------------------------

    def norm_squared(self) -> float:
        return float(np.real(np.vdot(self.amps, self.amps)))

    def _assert_norm(self):
        if abs(self.norm_squared() - 1.0) > NORM_TOL:
            raise CorruptedStateError(f"norm drift: |amps|^2 = {self.norm_squared()!r}")

    def _check_register(self, reg: Register):
        if reg.offset < 0 or reg.offset + reg.width > self.num_qubits:
            raise ValueError(f"register {reg.name!r} outside state")
        for c in self._controls:
            if c in reg.qubits:
                raise ValueError(f"register {reg.name!r} overlaps control qubit {c}")

    def _control_mask(self):
        if not self._controls:
            return None
        mask = np.ones(self.amps.size, dtype=bool)
        for c in self._controls:
            mask &= (self._idx >> c) & 1 == 1
        return mask

    def _register_values(self, reg: Register) -> np.ndarray:
        return (self._idx >> reg.offset) & (reg.size - 1)

    @staticmethod
    def _predicate_table(reg: Register, pred) -> np.ndarray:
        if isinstance(pred, np.ndarray):
            if pred.size != reg.size:
                raise ValueError("predicate table length must be 2**width")
            return pred.astype(bool)
        return np.fromiter((bool(pred(v)) for v in range(reg.size)),
                           dtype=bool, count=reg.size)

    # ---- gates ---------------------------------------------------------

    def apply_phase_oracle(self, reg: Register, pred):
        """Negate the amplitude of basis states whose register content
        satisfies pred (a callable on [0, 2**width) or a boolean table)."""
        self._check_register(reg)
        table = self._predicate_table(reg, pred)
        sel = table[self._register_values(reg)]
        cm = self._control_mask()
        if cm is not None:
            sel &= cm
        self.amps[sel] *= -1.0
        self.counters.oracle_calls += 1
        self._assert_norm()

    def apply_conditional_phase(self, reg: Register, pred, angle: float):
        """Multiply satisfying basis states by exp(i*angle)."""
        self._check_register(reg)
        table = self._predicate_table(reg, pred)
        sel = table[self._register_values(reg)]
        cm = self._control_mask()
        if cm is not None:
            sel &= cm
        self.amps[sel] *= np.exp(1j * angle)
        self.counters.phase_gates += 1
        self._assert_norm()

    def _reg_view(self, reg: Register) -> np.ndarray:
        high = 1 << (self.num_qubits - reg.offset - reg.width)
        low = 1 << reg.offset
        return self.amps.reshape(high, reg.size, low)

    def apply_diffusion(self, reg: Register):
        """Inversion about the register's uniform state: 2|u><u| - I."""
        self._check_register(reg)
        view = self._reg_view(reg)
        cm = self._control_mask()
        if cm is None:
            view[...] = 2.0 * view.mean(axis=1, keepdims=True) - view
        else:
            mask = cm.reshape(view.shape)[:, :1, :]
            reflected = 2.0 * view.mean(axis=1, keepdims=True) - view
            view[...] = np.where(mask, reflected, view)
        self.counters.diffusion_calls += 1
        self._assert_norm()

    def apply_controlled_unitary_power(self, control: int, unitary, power: int):
        """Apply ``unitary`` (a callable acting on this state through the
        public gate API) ``power`` times, conditioned on the control qubit.

        ``power`` must be a power of two (the phase-estimation ladder shape).
        """
        if power < 1 or power & (power - 1):
            raise ValueError("power must be a power of two")
        if not 0 <= control < self.num_qubits:
            raise ValueError(f"control qubit {control} outside state")
        if control in self._controls:
            raise ValueError(f"qubit {control} is already a control")
        self._controls.append(control)
        try:
            for _ in range(power):
                unitary(self)
        finally:
            self._controls.pop()

    # ---- Fourier transforms (gate-by-gate, counted) ---------------------

    def _hadamard(self, qubit: int, counted: bool):
        high = 1 << (self.num_qubits - qubit - 1)
        view = self.amps.reshape(high, 2, 1 << qubit)
        a0 = view[:, 0, :].copy()
        a1 = view[:, 1, :]
        inv_sqrt2 = 1.0 / math.sqrt(2.0)
        cm = self._control_mask()
        if cm is None:
            view[:, 0, :] = (a0 + a1) * inv_sqrt2
            view[:, 1, :] = (a0 - a1) * inv_sqrt2
        else:
            mask = cm.reshape(high, 2, 1 << qubit)[:, 0, :]
            view[:, 0, :] = np.where(mask, (a0 + a1) * inv_sqrt2, view[:, 0, :])
            view[:, 1, :] = np.where(mask, (a0 - a1) * inv_sqrt2, view[:, 1, :])
        if counted:
            self.counters.qft_gates += 1

    def _controlled_phase(self, qa: int, qb: int, angle: float, counted: bool):
        sel = ((self._idx >> qa) & 1 == 1) & ((self._idx >> qb) & 1 == 1)
        cm = self._control_mask()
        if cm is not None:
            sel &= cm
        self.amps[sel] *= np.exp(1j * angle)
        if counted:
            self.counters.qft_gates += 1

    def _swap(self, qa: int, qb: int, counted: bool):
        if self._controls:
            raise ValueError("swap under external control is not supported")
        a = (self._idx >> qa) & 1
        b = (self._idx >> qb) & 1
        sel = (a == 1) & (b == 0)
        partner = self._idx[sel] - (1 << qa) + (1 << qb)
        tmp = self.amps[sel].copy()
        self.amps[sel] = self.amps[partner]
        self.amps[partner] = tmp
        if counted:
            self.counters.qft_gates += 1

    def _qft_gates(self, reg: Register, inverse: bool):
        """Textbook QFT circuit on the register (little-endian value order).

        Gate count: width Hadamards + width*(width-1)/2 controlled phases
        + floor(width/2) swaps.
        """
        self._check_register(reg)
        qs = list(reg.qubits)
        t = len(qs)
        ops = []
        for i in reversed(range(t)):
            ops.append(("h", i))
            for j in range(i):
                ops.append(("cp", i, j, math.pi / (1 << (i - j))))
        swaps = [("swap", i, t - 1 - i) for i in range(t // 2)]
        sequence = ops + swaps
        if inverse:
            sequence = [(op[0], *op[1:]) for op in reversed(sequence)]
        for op in sequence:
            if op[0] == "h":
                self._hadamard(qs[op[1]], counted=True)
            elif op[0] == "cp":
                angle = -op[3] if inverse else op[3]
                self._controlled_phase(qs[op[1]], qs[op[2]], angle, counted=True)
            else:
                self._swap(qs[op[1]], qs[op[2]], counted=True)
        self._assert_norm()

    def forward_qft(self, reg: Register):
        """|j> -> (1/sqrt(T)) sum_k exp(2*pi*i*j*k/T) |k> on the register."""
        self._qft_gates(reg, inverse=False)

    def inverse_qft(self, reg: Register):
        """Exact inverse discrete Fourier transform on the register."""
        self._qft_gates(reg, inverse=True)

    # ---- measurement -----------------------------------------------------

    def probabilities(self, reg: Register) -> np.ndarray:
        """Marginal outcome distribution of the register (no collapse)."""
        self._check_register(reg)
        view = self._reg_view(reg)
        return np.einsum("irj,irj->r", view, view.conj()).real

    def measure(self, reg: Register, rng: np.random.Generator) -> int:
        """Sample the register, collapse and renormalize. Deterministic per seed."""
        if self.norm_squared() < 1e-12:
            raise CorruptedStateError("state norm below 1e-12 before measurement")
        probs = self.probabilities(reg)
        total = probs.sum()
        outcome = int(rng.choice(reg.size, p=probs / total))
        sel = self._register_values(reg) != outcome
        p_outcome = probs[outcome]
        if p_outcome <= 0:
            raise CorruptedStateError("sampled zero-probability outcome")
        self.amps[sel] = 0.0
        self.amps /= math.sqrt(p_outcome)
        self._assert_norm()
        return outcome

    # ---- debugging -------------------------------------------------------

    def write_amplitudes_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("# schema=amplitudes-v1\n")
            w = csv.writer(fh)
            w.writerow(["index", "re", "im"])
            for i, a in enumerate(self.amps):
                w.writerow([i, f"{a.real:.17g}", f"{a.imag:.17g}"])


def new_uniform(num_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Equal-superposition initialization (H on every qubit of |0...0>)."""
    return StateVector.uniform(num_qubits, max_qubits)
