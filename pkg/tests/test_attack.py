import json

import pytest

from qdca.attack import (AttackConfig, ConfigError, plant_instance,
                         run_classical_attack, run_count_report,
                         run_quantum_attack, run_scaling_report, run_trials,
                         write_counts_csv, write_results_csv, write_scale_csv,
                         write_trace_csv)
from qdca.cli import main


# ---- configuration ---------------------------------------------------------


@pytest.mark.parametrize("bad", [
    dict(mode="psychic"),
    dict(subkey_bits=5),
    dict(index_bits=0),
    dict(index_bits=9),
    dict(planted_key=300),
    dict(trials=0),
    dict(confidence=0),
    dict(epsilon=0.7),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        AttackConfig(**bad)


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        AttackConfig.from_dict({"subkey_bits": 4, "phase_of_moon": "full"})


def test_config_k8_requires_characteristic():
    with pytest.raises(ConfigError):
        AttackConfig(subkey_bits=8).characteristic(AttackConfig().cipher(), 0x7D)
    cfg = AttackConfig(subkey_bits=8, planted_key=0x7D, characteristic_doc={
        "plaintext_diff": "10", "output_diff": "28"})
    ctx, _, z = plant_instance(cfg, 0)
    assert ctx.subkey_bits == 8
    assert 0 <= z < 256


def test_derived_counting_params():
    cfg = AttackConfig(index_bits=6)
    params = cfg.counting_params()
    assert params.accuracy_bits == 4 and params.phase_bits == 7


# ---- drivers ------------------------------------------------------------------


def test_quantum_and_classical_agree_on_seed_42():
    cfg = AttackConfig(subkey_bits=4, index_bits=6, master_seed=42, trials=1)
    quantum, _ = run_quantum_attack(cfg, 0)
    classical = run_classical_attack(cfg, 0)
    assert quantum.success == classical.success
    assert quantum.success and classical.success


def test_classical_counters_exact():
    cfg = AttackConfig(index_bits=6, trials=1)
    res = run_classical_attack(cfg, 0)
    assert res.steps_counting == 16 * 64  # exactly K*N right-pair evaluations
    assert res.steps_total == res.steps_counting


def test_quantum_result_counters_consistent():
    cfg = AttackConfig(index_bits=6, master_seed=42, trials=1)
    res, mf = run_quantum_attack(cfg, 0)
    assert res.steps_total == (res.steps_init + res.steps_counting + res.steps_oracle
                               + res.steps_search + res.steps_observe)
    assert res.budget_spent <= res.budget_limit
    assert res.g_gates_total == res.counting_invocations * 127  # 2^7 - 1 each
    params = cfg.counting_params()
    t = params.phase_bits
    assert res.qubits_model == 2 * 4 + 6 + t + 1
    assert res.qubits_simulated == t + 6 + 1
    assert 0 <= res.bound_hit_rate <= 1


def test_degenerate_certain_characteristic_always_recovers():
    # one round: the expected difference equals the plaintext difference with
    # probability 1, so every pair is right for the true subkey
    cfg = AttackConfig(
        index_bits=6, trials=3, master_seed=11, planted_key=0x5A,
        cipher_doc={"rounds": 1},
        characteristic_doc={"plaintext_diff": "0B", "output_diff": "0B"})
    ctx, key, z = plant_instance(cfg, 0)
    assert ctx.characteristic.probability == 1.0
    assert int(ctx.marked_table(z).sum()) == ctx.pairs.num_pairs
    for trial in range(3):
        res, _ = run_quantum_attack(cfg, trial)
        assert res.recovered_subkey == z


def test_weak_instance_is_recorded_not_asserted():
    # N*p = 0.5 at n=3: signal below noise, so recovery is not guaranteed;
    # the run must still complete and report honestly
    cfg = AttackConfig(index_bits=3, master_seed=4, trials=1)
    for res in (run_classical_attack(cfg, 0), run_quantum_attack(cfg, 0)[0]):
        assert 0 <= res.recovered_subkey < 16
        assert res.success == (res.recovered_subkey == res.ground_truth)


def test_two_seeds_split_deterministic_and_random_counters():
    # per-invocation gate counts are seed-independent; search work is not
    a, _ = run_quantum_attack(AttackConfig(index_bits=6, master_seed=42, trials=1), 0)
    b, _ = run_quantum_attack(AttackConfig(index_bits=6, master_seed=43, trials=1), 0)
    assert a.g_gates_total // a.counting_invocations == 127
    assert b.g_gates_total // b.counting_invocations == 127
    assert a.steps_search != b.steps_search


def test_random_key_mode_varies_instances():
    # per-trial derived keys; keys without signal are redrawn internally
    cfg = AttackConfig(index_bits=6, trials=8, planted_key=None, master_seed=5)
    keys = set()
    for trial in range(8):
        ctx, key, z = plant_instance(cfg, trial)
        assert ctx.characteristic.probability > 0
        assert z == (ctx.cipher.last_round_key(key) & 0xF)
        keys.add(key)
    assert len(keys) >= 2
    results, _ = run_trials(AttackConfig(index_bits=6, trials=2, planted_key=None,
                                         master_seed=5, mode="both"))
    assert len(results) == 4


def test_run_trials_both_modes():
    cfg = AttackConfig(index_bits=5, trials=2, mode="both", master_seed=77)
    results, trace = run_trials(cfg)
    assert [r.mode for r in results] == ["classical", "quantum"] * 2
    assert all(row["trial"] in (0, 1) for row in trace)


# ---- reports --------------------------------------------------------------------


def test_count_report_flags_in_bound_rows():
    cfg = AttackConfig(index_bits=6, master_seed=42, trials=1)
    rows = run_count_report(cfg)
    assert len(rows) == 16
    z_row = rows[0]  # planted true subkey is 0 for the stock instance
    assert z_row["m_true"] == 8
    assert any(r["in_bound"] for r in rows)


def test_scaling_report_shapes():
    cfg = AttackConfig(trials=1, master_seed=31)
    rows = run_scaling_report(cfg, search_bits=(4, 6), counting_index_bits=(4,),
                              seeds=8)
    search = [r for r in rows if r["sweep"] == "search"]
    counting = [r for r in rows if r["sweep"] == "counting"]
    assert [r["size"] for r in search] == [16, 64]
    assert search[1]["ratio_vs_prev"] != ""
    assert counting[0]["g_gates"] == counting[0]["g_gates_expected"] == 63


# ---- CSV emission ------------------------------------------------------------------


def test_csv_files_have_versioned_schema(tmp_path):
    cfg = AttackConfig(index_bits=5, trials=2, master_seed=9)
    results, trace = run_trials(cfg)
    write_results_csv(tmp_path / "results.csv", results)
    write_trace_csv(tmp_path / "trace.csv", trace)
    write_counts_csv(tmp_path / "counts.csv", run_count_report(cfg))
    for name, schema in (("results.csv", "results-v1"), ("trace.csv", "trace-v1"),
                         ("counts.csv", "counts-v1")):
        first = (tmp_path / name).read_text().splitlines()[0]
        assert first == f"# schema={schema}"
    header = (tmp_path / "results.csv").read_text().splitlines()[1]
    assert "wall" not in header  # timing kept out of deterministic outputs


def test_results_csv_byte_identical_across_runs(tmp_path):
    cfg = AttackConfig(index_bits=5, trials=3, master_seed=99)
    for name in ("a", "b"):
        results, trace = run_trials(cfg)
        write_results_csv(tmp_path / f"results_{name}.csv", results)
        write_trace_csv(tmp_path / f"trace_{name}.csv", trace)
    assert (tmp_path / "results_a.csv").read_bytes() == (tmp_path / "results_b.csv").read_bytes()
    assert (tmp_path / "trace_a.csv").read_bytes() == (tmp_path / "trace_b.csv").read_bytes()


# ---- CLI -----------------------------------------------------------------------------


def test_cli_bound_reproduces_published_interval(capsys):
    assert main(["bound", "-M", "8"]) == 0
    out = capsys.readouterr().out
    assert "(5.875, 10.125)" in out


def test_cli_attack_writes_outputs(tmp_path, capsys):
    rc = main(["attack", "-n", "5", "--trials", "2", "--master-seed", "7",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "results.csv").exists()
    assert (tmp_path / "trace.csv").exists()
    assert "quantum" in capsys.readouterr().out


def test_cli_count_writes_counts(tmp_path, capsys):
    rc = main(["count", "-n", "5", "--master-seed", "7", "--out-dir", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "counts.csv").exists()


def test_cli_config_file_overrides_flags(tmp_path):
    config = {"index_bits": 5, "trials": 1, "master_seed": 3,
              "out_dir": str(tmp_path / "from_config")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    rc = main(["attack", "-n", "6", "--trials", "4", "--config", str(cfg_path),
               "--out-dir", str(tmp_path / "ignored")])
    assert rc == 0
    assert (tmp_path / "from_config" / "results.csv").exists()
    rows = (tmp_path / "from_config" / "results.csv").read_text().splitlines()
    assert len(rows) == 2 + 1  # schema + header + one trial


def test_cli_rejects_bad_config(tmp_path):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"mode": "sideways"}))
    assert main(["attack", "--config", str(cfg_path)]) == 1
    assert main(["attack", "--config", str(tmp_path / "missing.json")]) == 1


def test_cli_random_keys_flag(tmp_path):
    rc = main(["attack", "-n", "5", "--trials", "2", "--master-seed", "6",
               "--random-keys", "--out-dir", str(tmp_path)])
    assert rc == 0
    rows = (tmp_path / "results.csv").read_text().splitlines()[2:]
    truths = {row.split(",")[3] for row in rows}
    assert len(rows) == 2 and truths  # distinct trials ran to completion
