from dataclasses import dataclass, replace

import pytest

from interplay.configspace import ConfigSpace, full_space, trainings_for
from interplay.harness import (
    SweepInvariantError,
    SweepResult,
    accuracy,
    check_sweep,
    count_ratio,
    degeneracy_errors,
    error_pct,
    model_cpis,
    oracle_cpis,
    policy_analysis,
    predict_all,
    run_exhaustive_sweep,
    run_training_sweep,
    training_data,
    validate,
)
from interplay.predictor import DataError, PredictorMode, l2_penalty
from interplay.simulator import PreparedTrace, SimStats
from interplay.trace import generate_arrays

from conftest import mixed_spec

SPACE = ConfigSpace((8, 4, 4))


@pytest.fixture(scope="module")
def sweeps():
    from interplay.cache import CacheGeometry
    from interplay.simulator import HierarchyParams

    params = HierarchyParams(CacheGeometry(2048, 4, 64), CacheGeometry(2048, 4, 64), CacheGeometry(8192, 8, 64))
    trace = PreparedTrace(generate_arrays(mixed_spec(seed=31, n=12000)), params.block_bytes)
    training = run_training_sweep(trace, params, workload="w")
    oracle = run_exhaustive_sweep(trace, params, workload="w")
    return params, trace, training, oracle


def test_sweep_counts(sweeps):
    params, trace, training, oracle = sweeps
    assert training.simulation_count == 14
    assert oracle.simulation_count == 128
    assert list(oracle.stats)[0] == "8_4_4" and list(oracle.stats)[-1] == "1_1_1"
    assert count_ratio(SPACE) == 128 / 14


def test_training_is_subset_of_oracle(sweeps):
    _, _, training, oracle = sweeps
    for lab, s in training.stats.items():
        assert oracle.stats[lab] == s


def test_degenerate_space_sweep(sweeps):
    params, trace, _, _ = sweeps
    r = run_training_sweep(trace, params, space=ConfigSpace((1, 1, 1)))
    assert list(r.stats) == ["1_1_1"]


def test_parallel_matches_serial(sweeps):
    params, trace, _, oracle = sweeps
    par = run_exhaustive_sweep(trace, params, workload="w", workers=4)
    assert list(par.stats.items()) == list(oracle.stats.items())


def test_sweep_post_conditions_catch_bad_stats(sweeps):
    _, _, _, oracle = sweeps
    bad = dict(oracle.stats)
    s = bad["1_4_4"]
    bad["1_4_4"] = replace(s, m_l2=s.m_l2 + 1, m_l2_from_d=s.m_l2_from_d + 1, m_d=s.m_d + 1, a_l2_from_d=s.a_l2_from_d + 1)
    with pytest.raises(SweepInvariantError, match="L1 misses vary"):
        check_sweep(SweepResult("w", bad))
    bad["1_4_4"] = replace(s, m_l2=s.m_l2 + 1)
    with pytest.raises(SweepInvariantError, match="m_l2"):
        check_sweep(SweepResult("w", bad))


def test_predict_all_counts(sweeps):
    _, _, training, _ = sweeps
    assert len(predict_all(SPACE, training)) == 114
    rows = predict_all(SPACE, training, include_training=True)
    assert len(rows) == 128
    assert [p.config for p in rows] == [c.label for c in full_space(SPACE)]


def test_predict_all_missing_label(sweeps):
    _, _, training, _ = sweeps
    stats = {k: v for k, v in training.stats.items() if k != "1_4_4"}
    with pytest.raises(DataError, match="1_4_4"):
        predict_all(SPACE, SweepResult("w", stats))


def test_consistent_penalty_is_latency_gap(sweeps):
    # same L1 misses in L2T and B, so each extra L2 miss costs exactly lat_mem - lat_l2_hit
    params, _, training, _ = sweeps
    for l2 in range(1, 8):
        t = training_data(SPACE, training, (l2, 2, 2))
        if t.stats_l2t.m_l2 != t.stats_b.m_l2:
            assert l2_penalty(t, PredictorMode.CONSISTENT) == params.lat_mem - params.lat_l2_hit


def test_degeneracy_consistent(sweeps):
    _, _, training, _ = sweeps
    errors = degeneracy_errors(SPACE, training)
    assert len(errors) == 14 and set(errors.values()) == {0.0}


def test_predictions_use_right_training_runs(sweeps):
    _, _, training, _ = sweeps
    t = training_data(SPACE, training, (7, 2, 3))
    roles = trainings_for(SPACE, (7, 2, 3))
    assert t.stats_l2t is training.get(roles["L2T"])
    assert t.stats_it is training.get("8_4_3")


def test_error_pct_and_accuracy():
    assert error_pct(1.05, 1.00) == pytest.approx(5.0)
    assert accuracy([error_pct(1.05, 1.00)], 5) == 100.0
    assert accuracy([3, -6, 2, 7], 5) == 50.0
    assert accuracy([], 5) == 0.0


@dataclass
class P:
    config: str
    cpi_p: float
    cpi_l: float
    tm_l2: float
    clamped: bool = False


def _oracle(cpis, m_l2=5):
    return SweepResult("w", {lab: SimStats(1000, round(1000 * c), 1, 1, m_l2, 0, m_l2, 1, 1) for lab, c in cpis.items()})


def test_validate_counting():
    oracle = _oracle({"4_2_2": 1.0, "4_2_1": 1.0, "4_1_2": 1.0, "4_1_1": 1.0})
    preds = [P("4_2_2", 1.03, 1.0, 5), P("4_2_1", 0.94, 1.0, 5), P("4_1_2", 1.02, 1.0, 5), P("4_1_1", 1.07, 1.0, 5)]
    r = validate({"w": preds}, {"w": oracle}, [5, 2, 1])
    assert r.summary["accuracy_pct"]["5"] == 50.0
    assert r.summary["accuracy_pct"]["2"] == 25.0  # 1.02 sits on the 2% band edge
    assert r.linear_summary["accuracy_pct"]["1"] == 100.0
    assert r.summary["clamp_count"] == 0
    assert r.miss_summary["mean_abs_error_pct"] == 0.0


def test_validate_nesting_any_thresholds():
    oracle = _oracle({"4_2_2": 1.0, "4_2_1": 2.0})
    preds = [P("4_2_2", 1.015, 1.0, 0), P("4_2_1", 2.06, 2.0, 0)]
    r = validate({"w": preds}, {"w": oracle}, [1, 5, 2])
    acc = r.summary["accuracy_pct"]
    assert list(acc) == ["5", "2", "1"]
    assert acc["5"] >= acc["2"] >= acc["1"]


def test_validate_coverage_gaps():
    oracle = _oracle({"4_2_2": 1.0})
    with pytest.raises(DataError, match="4_1_1"):
        validate({"w": [P("4_1_1", 1.0, 1.0, 0)]}, {"w": oracle})
    with pytest.raises(DataError, match="other"):
        validate({"other": []}, {"w": oracle})
    with pytest.raises(DataError, match="twice"):
        validate({"w": [P("4_2_2", 1, 1, 0), P("4_2_2", 1, 1, 0)]}, {"w": oracle})


def test_validate_undefined_miss_error():
    oracle = _oracle({"4_2_2": 1.0}, m_l2=0)
    r = validate({"w": [P("4_2_2", 1.0, 1.0, 3.0)]}, {"w": oracle})
    assert r.rows[0].miss_error_pct is None
    assert r.miss_summary["undefined_rows"] == 1


def test_validate_oracle_self_identity(sweeps):
    _, _, _, oracle = sweeps
    # predictions equal to the oracle CPI
    preds = [P(lab, s.cycles / s.instructions, s.cycles / s.instructions, s.m_l2) for lab, s in oracle.stats.items()]
    r = validate({"w": preds}, {"w": oracle})
    assert r.summary["accuracy_pct"]["1"] == 100.0
    assert r.summary["mean_abs_error_pct"] == 0.0


def test_policy_examples():
    rep = policy_analysis({"a": {"8_4_4": 1.0, "4_4_4": 1.25, "8_2_4": 1.1}}, 20)
    rows = {r.config: r for r in rep.rows}
    assert rows["4_4_4"].flagged and rows["4_4_4"].max_pd_pct == pytest.approx(25.0)
    assert rows["8_4_4"].max_pd_pct == 0.0 and not rows["8_4_4"].flagged
    assert not rows["8_2_4"].flagged
    assert [r.config for r in rep.rows] == ["8_4_4", "8_2_4", "4_4_4"]
    assert rep.flagged == ["4_4_4"]


def test_policy_worst_case_across_workloads():
    rep = policy_analysis({"a": {"8_4_4": 1.0, "4_4_4": 1.1}, "b": {"8_4_4": 2.0, "4_4_4": 2.6}}, 20)
    row = rep.rows[-1]
    assert row.config == "4_4_4" and row.worst_workload == "b" and row.flagged


def test_policy_missing_baseline():
    with pytest.raises(DataError, match="baseline"):
        policy_analysis({"a": {"4_4_4": 1.0}})


def test_model_cpis_prefer_simulation_for_training(sweeps):
    _, _, training, oracle = sweeps
    preds = {"w": predict_all(SPACE, training)}
    model = model_cpis({"w": training}, preds)["w"]
    real = oracle_cpis({"w": oracle})["w"]
    assert set(model) == set(real)
    for lab in training.stats:
        assert model[lab] == real[lab]
