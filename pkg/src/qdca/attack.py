"""End-to-end attack drivers, Monte Carlo runner and CSV reports.

Pair generation and characteristic measurement run inside the driver but
are excluded from the attack's time-step accounting (they are the
cryptosystem's work, not the attacker's); their wall time is reported
separately on stdout.

Reproducibility: trial i draws every random decision from a generator
seeded by (master_seed, i), so identical configurations produce
byte-identical CSV outputs. Wall times are therefore kept out of the CSVs.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import toy_cipher
from .classical_dca import classical_attack
from .max_finding import (ExactCounter, MaxFindingConfig, MaxFindingResult,
                          QuantumCounter, find_max_subkey)
from .quantum_counting import CountingParams, counting_error_bound, quantum_count
from .toy_cipher import (AttackContext, Characteristic, ToyCipher,
                         characteristic_from_dict, cipher_from_dict,
                         default_characteristic, gen_pairs, true_subkey)

MODES = ("classical", "quantum", "both")


class ConfigError(ValueError):
    """Invalid attack configuration."""


@dataclass
class AttackConfig:
    subkey_bits: int = 4
    index_bits: int = 6
    accuracy_bits: int | None = None   # default: ceil(n/2) + 1
    epsilon: float = 0.1
    confidence: int = 4
    master_seed: int = 2024
    trials: int = 100
    mode: str = "quantum"
    planted_key: int | None = toy_cipher.DEFAULT_PLANTED_KEY
    expected_steps: int | None = None  # m0 override
    out_dir: str = "out"
    cipher_doc: dict = field(default_factory=dict)
    characteristic_doc: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.subkey_bits not in (4, 8):
            raise ConfigError("subkey_bits must be 4 or 8")
        if self.trials < 1:
            raise ConfigError("at least one trial")
        if self.confidence < 1:
            raise ConfigError("confidence must be >= 1")
        cipher = self.cipher()
        if self.subkey_bits > cipher.block_width:
            raise ConfigError("subkey_bits exceeds block width")
        if not 1 <= self.index_bits <= cipher.block_width:
            raise ConfigError("index_bits outside block capacity")
        if self.planted_key is not None and not 0 <= self.planted_key < cipher.block_size:
            raise ConfigError("planted_key outside block range")
        self.counting_params()  # raises on a bad (m, epsilon) combination

    def cipher(self) -> ToyCipher:
        try:
            return cipher_from_dict(self.cipher_doc)
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def counting_params(self) -> CountingParams:
        m = self.accuracy_bits
        if m is None:
            m = math.ceil(self.index_bits / 2) + 1
        try:
            return CountingParams(self.index_bits, m, self.epsilon)
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def characteristic(self, cipher: ToyCipher, key: int) -> Characteristic:
        doc = dict(self.characteristic_doc)
        if self.subkey_bits == 8 and not doc:
            raise ConfigError("subkey_bits=8 needs an explicit characteristic")
        try:
            ch = characteristic_from_dict(doc, cipher, key)
        except ValueError as err:
            raise ConfigError(str(err)) from err
        if ch.subkey_bits != self.subkey_bits:
            raise ConfigError("characteristic does not target subkey_bits key bits")
        return ch

    @classmethod
    def from_dict(cls, doc: dict) -> "AttackConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class AttackResult:
    trial: int
    mode: str
    recovered_subkey: int
    ground_truth: int
    steps_init: int = 0
    steps_counting: int = 0
    steps_oracle: int = 0
    steps_search: int = 0
    steps_observe: int = 0
    counting_invocations: int = 0
    g_gates_total: int = 0
    bound_hit_rate: float = 0.0
    loop_iterations: int = 0
    budget_spent: int = 0
    budget_limit: int = 0
    qubits_model: int = 0
    qubits_simulated: int = 0
    wall_time_s: float = 0.0   # stdout only; never written to CSV
    prep_time_s: float = 0.0   # pair generation / characteristic measurement

    @property
    def success(self) -> bool:
        return self.recovered_subkey == self.ground_truth

    @property
    def steps_total(self) -> int:
        return (self.steps_init + self.steps_counting + self.steps_oracle
                + self.steps_search + self.steps_observe)


def _trial_rng(master_seed: int, trial: int, purpose: int = 0) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(trial, purpose)))


def plant_instance(config: AttackConfig, trial: int):
    """Planted instance of one trial: (context, master key, true subkey)."""
    cipher = config.cipher()

    def build(key):
        if config.characteristic_doc or config.subkey_bits != 4:
            return config.characteristic(cipher, key)
        return default_characteristic(cipher, key)

    if config.planted_key is not None:
        key = config.planted_key
        ch = build(key)
    else:
        # some keys carry no signal under the configured differential; redraw
        rng = _trial_rng(config.master_seed, trial, purpose=1)
        for _ in range(4 * cipher.block_size):
            key = int(rng.integers(cipher.block_size))
            try:
                ch = build(key)
                break
            except ConfigError:
                raise
            except ValueError:
                continue
        else:
            raise ConfigError("no key with a usable characteristic found")
    pairs = gen_pairs(cipher, key, ch.plaintext_diff, config.index_bits)
    ctx = AttackContext(cipher, ch, pairs)
    return ctx, key, true_subkey(cipher, key, ch)


def run_quantum_attack(config: AttackConfig, trial: int = 0) -> tuple[AttackResult, MaxFindingResult]:
    """One quantum attack trial: counting-backed threshold maximum finding."""
    prep0 = time.perf_counter()
    ctx, _, z = plant_instance(config, trial)
    t0 = time.perf_counter()
    params = config.counting_params()
    rng = _trial_rng(config.master_seed, trial)
    counter = QuantumCounter(ctx, params, rng)
    mf = find_max_subkey(counter, config.subkey_bits,
                         MaxFindingConfig(config.confidence, config.expected_steps), rng)
    t = params.phase_bits
    k, n = config.subkey_bits, config.index_bits
    result = AttackResult(
        trial=trial, mode="quantum", recovered_subkey=mf.subkey, ground_truth=z,
        steps_init=mf.stages.init, steps_counting=mf.stages.counting,
        steps_oracle=mf.stages.oracle, steps_search=mf.stages.search,
        steps_observe=mf.stages.observe,
        counting_invocations=counter.invocations,
        g_gates_total=sum(e.g_gate_count for e in counter.estimates.values()),
        bound_hit_rate=_bound_hit_rate(ctx, params, counter),
        loop_iterations=mf.loop_iterations,
        budget_spent=mf.budget.spent, budget_limit=mf.budget.limit,
        qubits_model=2 * k + n + t + 1,   # four-register layout; see README
        qubits_simulated=t + n + 1,       # subkey register is read classically
        wall_time_s=time.perf_counter() - t0,
        prep_time_s=t0 - prep0,
    )
    return result, mf


def _bound_hit_rate(ctx: AttackContext, params: CountingParams, counter) -> float:
    hits = 0
    for x, est in counter.estimates.items():
        m_true = int(ctx.marked_table(x).sum())
        bound = counting_error_bound(m_true, params.num_pairs, params.accuracy_bits)
        hits += abs(est.m_estimate - m_true) <= bound
    return hits / len(counter.estimates) if counter.estimates else 0.0


def run_classical_attack(config: AttackConfig, trial: int = 0) -> AttackResult:
    """Exhaustive counting baseline on the same planted instance."""
    prep0 = time.perf_counter()
    ctx, _, z = plant_instance(config, trial)
    t0 = time.perf_counter()
    winner, table = classical_attack(ctx.pairs, ctx.cipher, ctx.characteristic)
    evaluations = table.counts.size * ctx.pairs.num_pairs  # exactly K*N
    return AttackResult(
        trial=trial, mode="classical", recovered_subkey=winner, ground_truth=z,
        steps_counting=evaluations,
        wall_time_s=time.perf_counter() - t0,
        prep_time_s=t0 - prep0,
    )


def run_trials(config: AttackConfig):
    """All trials of the configured mode; returns (results, trace rows)."""
    results: list[AttackResult] = []
    trace_rows: list[dict] = []
    for trial in range(config.trials):
        if config.mode in ("classical", "both"):
            results.append(run_classical_attack(config, trial))
        if config.mode in ("quantum", "both"):
            res, mf = run_quantum_attack(config, trial)
            results.append(res)
            for row in mf.trace:
                trace_rows.append({"trial": trial, **row})
    return results, trace_rows


# ---- counting report ----------------------------------------------------


def run_count_report(config: AttackConfig, trial: int = 0) -> list[dict]:
    """One counting estimate per candidate subkey on the planted instance."""
    ctx, _, _ = plant_instance(config, trial)
    params = config.counting_params()
    rng = _trial_rng(config.master_seed, trial)
    rows = []
    for x in range(1 << config.subkey_bits):
        est = quantum_count(x, params, ctx, rng)
        m_true = int(ctx.marked_table(x).sum())
        bound = counting_error_bound(m_true, params.num_pairs, params.accuracy_bits)
        rows.append({
            "x_hex": f"{x:02x}", "b": est.raw_outcome, "theta": est.theta,
            "m_est": est.m_estimate, "right_pairs": est.right_pairs,
            "m_true": m_true, "in_bound": abs(est.m_estimate - m_true) <= bound,
        })
    return rows


# ---- scaling report ------------------------------------------------------


def run_scaling_report(config: AttackConfig, search_bits=(4, 6, 8),
                       counting_index_bits=(4, 6, 8), seeds: int = 50) -> list[dict]:
    """Measured step counts per stage across problem sizes.

    The search sweep injects exact count tables (a seeded permutation with a
    planted maximum) so the K sizes are not tied to S-box boundaries; the
    counting sweep runs the real cipher-backed circuit.
    """
    rows: list[dict] = []
    prev_mean = None
    for k in search_bits:
        K = 1 << k
        totals = []
        for seed in range(seeds):
            rng = _trial_rng(config.master_seed, seed, purpose=2 + k)
            counts = rng.permutation(K)
            counter = ExactCounter(counts)
            mf = find_max_subkey(counter, k, MaxFindingConfig(config.confidence), rng)
            # growth-law measurand: search work until the maximum was reached;
            # the budget tail spent confirming it is excluded
            totals.append(mf.search_steps_to_max)
        mean = float(np.mean(totals))
        rows.append({
            "sweep": "search", "size": K, "index_bits": "", "phase_bits": "",
            "mean_search_steps": round(mean, 4),
            "ratio_vs_prev": round(mean / prev_mean, 4) if prev_mean else "",
            "g_gates": "", "g_gates_expected": "", "qft_gates": "", "seeds": seeds,
        })
        prev_mean = mean
    for n in counting_index_bits:
        params = CountingParams.default(n)
        sub = AttackConfig(subkey_bits=config.subkey_bits, index_bits=n,
                           master_seed=config.master_seed, trials=1,
                           planted_key=config.planted_key,
                           cipher_doc=config.cipher_doc,
                           characteristic_doc=config.characteristic_doc)
        ctx, _, _ = plant_instance(sub, 0)
        rng = _trial_rng(config.master_seed, 0, purpose=99)
        est = quantum_count(0, params, ctx, rng)
        rows.append({
            "sweep": "counting", "size": "", "index_bits": n,
            "phase_bits": params.phase_bits, "mean_search_steps": "",
            "ratio_vs_prev": "",
            "g_gates": est.g_gate_count,
            "g_gates_expected": (1 << params.phase_bits) - 1,
            "qft_gates": est.qft_gate_count, "seeds": 1,
        })
    return rows


# ---- CSV emission --------------------------------------------------------

RESULTS_FIELDS = [
    "trial", "mode", "recovered_subkey_hex", "ground_truth_hex", "success",
    "steps_init", "steps_counting", "steps_oracle", "steps_search",
    "steps_observe", "steps_total", "counting_invocations", "g_gates_total",
    "bound_hit_rate", "loop_iterations", "budget_spent", "budget_limit",
    "qubits_model", "qubits_simulated",
]

TRACE_FIELDS = ["trial", "loop_iter", "y", "r_y", "y_prime", "r_y_prime",
                "accepted", "steps_spent"]

COUNTS_FIELDS = ["x_hex", "b", "theta", "m_est", "right_pairs", "m_true", "in_bound"]

SCALE_FIELDS = ["sweep", "size", "index_bits", "phase_bits", "mean_search_steps",
                "ratio_vs_prev", "g_gates", "g_gates_expected", "qft_gates", "seeds"]


def _fmt(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return f"{value:.10g}"
    if value is None:
        return ""
    return value


def _write_csv(path, schema: str, fields: list[str], rows: list[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={schema}\n")
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) for k, v in row.items()})


def write_results_csv(path, results: list[AttackResult]):
    rows = []
    for r in results:
        rows.append({
            "trial": r.trial, "mode": r.mode,
            "recovered_subkey_hex": f"{r.recovered_subkey:02x}",
            "ground_truth_hex": f"{r.ground_truth:02x}", "success": r.success,
            "steps_init": r.steps_init, "steps_counting": r.steps_counting,
            "steps_oracle": r.steps_oracle, "steps_search": r.steps_search,
            "steps_observe": r.steps_observe, "steps_total": r.steps_total,
            "counting_invocations": r.counting_invocations,
            "g_gates_total": r.g_gates_total, "bound_hit_rate": r.bound_hit_rate,
            "loop_iterations": r.loop_iterations, "budget_spent": r.budget_spent,
            "budget_limit": r.budget_limit, "qubits_model": r.qubits_model,
            "qubits_simulated": r.qubits_simulated,
        })
    _write_csv(path, "results-v1", RESULTS_FIELDS, rows)


def write_trace_csv(path, trace_rows: list[dict]):
    _write_csv(path, "trace-v1", TRACE_FIELDS, trace_rows)


def write_counts_csv(path, rows: list[dict]):
    _write_csv(path, "counts-v1", COUNTS_FIELDS, rows)


def write_scale_csv(path, rows: list[dict]):
    _write_csv(path, "scale-v1", SCALE_FIELDS, rows)
