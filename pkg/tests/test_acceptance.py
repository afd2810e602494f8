"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with -s or check the selftest CLI
verb for the same output).
"""

from qdca import acceptance


def _run(check):
    result = check()
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] {result.name}: {result.detail}")
    assert result.passed, f"{result.name}: {result.detail}"


def test_criterion_1_bound_intervals():
    # published accuracy-bound values reproduced exactly
    _run(acceptance.check_bound_intervals)


def test_criterion_2_counting_coverage():
    # amplitude-exact in-bound probability >= 0.9 for every M at n=3
    _run(acceptance.check_counting_coverage)


def test_criterion_3_gate_accounting():
    # exactly 2^t - 1 Grover steps, Fourier gates within t(t+1)/2 + t/2
    _run(acceptance.check_gate_accounting)


def test_criterion_4_end_to_end_attack():
    # planted instance, k=4, n=6, c=4, 100 seeded trials, rate >= 0.8875
    _run(acceptance.check_end_to_end_attack)


def test_criterion_5_max_finding_isolation():
    # injected exact counts: argmax recovery rate and strict threshold growth
    _run(acceptance.check_max_finding_isolation)


def test_criterion_6_oracle_equivalence():
    # sum_j e(x, j) equals the exhaustive classical count for every candidate
    _run(acceptance.check_oracle_equivalence)


def test_criterion_7_scaling():
    # sqrt(K) growth of search steps; counting gates equal 2^t - 1 exactly
    _run(acceptance.check_scaling)


def test_criterion_8_grover_micro():
    # K=4, one marked item, one iteration: certainty within 1e-9
    _run(acceptance.check_grover_micro)


def test_criterion_9_determinism():
    # identical config and master seed give byte-identical CSV outputs
    _run(acceptance.check_determinism)
