import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mabsobs import (CalibrationMap, CalibrationPlan, ConfigurationError,
                     MissingMeasurementError, ObservationMethod, Scenario, SimConfig,
                     SurveyPlan, TimingRecord, fastest_method_map, run_calibration, run_once,
                     surface_from_records, time_run, time_scenarios)
from mabsobs.bench import TimingCSVWriter, prepare_config, read_timing_csv, write_summary_line

BF = ObservationMethod.BRUTE_FORCE
SELF = ObservationMethod.SELF_OBSERVATION
SURVEY = ObservationMethod.SURVEY


def record(n, p, method, *elapsed):
    sim = SimConfig(agents=n, zone=None).replace()
    from mabsobs import Zone
    sim = sim.replace(zone=Zone.with_coverage(sim.grid, p))
    plan = SurveyPlan.design(n, p, 0.08) if method is SURVEY else None
    return TimingRecord(Scenario(sim, method, plan, len(elapsed)), list(elapsed))


def test_replicate_count_is_honoured():
    rec = time_run(Scenario(SimConfig(agents=100, steps=20), BF, replicates=3))
    assert len(rec.elapsed) == 3
    assert all(e > 0 for e in rec.elapsed)
    assert rec.median == float(np.median(rec.elapsed))


@pytest.mark.timing
def test_observation_costs_extra():
    sim = SimConfig(agents=20_000, steps=1000)
    base, brute = time_scenarios([Scenario(sim, None, replicates=7),
                                  Scenario(sim, BF, replicates=7)])
    assert brute.median >= base.median


def test_scenario_validation():
    sim = SimConfig(agents=100)
    with pytest.raises(ConfigurationError):
        Scenario(sim, SURVEY)
    with pytest.raises(ConfigurationError):
        Scenario(sim, BF, SurveyPlan.design(100, 0.2, 0.08))
    with pytest.raises(ConfigurationError):
        Scenario(sim, BF, replicates=0)
    with pytest.raises(ConfigurationError):
        Scenario(sim, ObservationMethod.ADAPTIVE)


def test_runs_only_pay_for_their_bookkeeping():
    sim = SimConfig(agents=10)
    assert not prepare_config(sim, BF).trace and not prepare_config(sim, BF).membership
    assert prepare_config(sim, SELF).membership
    assert prepare_config(sim, ObservationMethod.INDIRECT).trace


def test_run_once_reports_every_step():
    seen = []
    run_once(SimConfig(agents=50, steps=30, trace=False, membership=False), BF,
             on_observation=seen.append)
    assert [o.step for o in seen] == list(range(1, 31))


def test_single_method_gives_uniform_map():
    cmap = fastest_method_map([record(n, p, SURVEY, 1.0) for n in (10, 20) for p in (0.1, 0.5)])
    assert cmap.methods() == {SURVEY}


def test_uniformly_faster_method_takes_every_cell():
    recs = []
    for n in (10, 20):
        for p in (0.1, 0.5):
            recs += [record(n, p, BF, 2.0, 2.1), record(n, p, SELF, 1.0, 1.1)]
    assert fastest_method_map(recs).methods() == {SELF}


def test_ties_go_to_exact_methods():
    recs = [record(10, 0.2, SURVEY, 1.0), record(10, 0.2, SELF, 1.0), record(10, 0.2, BF, 1.0)]
    assert fastest_method_map(recs).label_at(0, 0) is BF
    recs = [record(10, 0.2, SURVEY, 1.0), record(10, 0.2, BF, 1.04)]
    assert fastest_method_map(recs).label_at(0, 0) is SURVEY
    assert fastest_method_map(recs, tie_tolerance=0.05).label_at(0, 0) is BF


def test_missing_combination_is_named():
    recs = [record(10, 0.2, BF, 1.0), record(10, 0.2, SELF, 1.0),
            record(20, 0.2, BF, 1.0)]
    with pytest.raises(MissingMeasurementError, match="N=20.*self-observation"):
        fastest_method_map(recs)


@given(st.lists(st.floats(0.1, 10), min_size=12, max_size=12), st.floats(1.01, 10),
       st.sampled_from([BF, SELF, SURVEY]))
def test_slowing_a_method_never_wins_it_cells(times, factor, slowed):
    cells = [(n, p) for n in (10, 20) for p in (0.1, 0.5)]
    methods = [BF, SELF, SURVEY]
    recs, scaled = [], []
    for k, (n, p) in enumerate(cells):
        for m_i, m in enumerate(methods):
            t = times[3 * k + m_i]
            recs.append(record(n, p, m, t))
            scaled.append(record(n, p, m, t * factor if m is slowed else t))
    before = fastest_method_map(recs).counts()[slowed]
    after = fastest_method_map(scaled).counts()[slowed]
    assert after <= before


def test_surface_from_records_keeps_the_lattice():
    recs = [record(n, p, BF, n * p) for n in (10, 20, 30) for p in (0.1, 0.5)]
    s = surface_from_records(recs, BF)
    assert s.cells.shape == (2, 3)
    assert s.at(20, 0.5) == pytest.approx(10)


def test_small_calibration_end_to_end():
    plan = CalibrationPlan(n_values=(200, 400), p_values=(0.1, 0.5), replicates=2, steps=20)
    records = run_calibration(plan)
    assert len(records) == 2 * 2 * 3
    cmap = fastest_method_map(records)
    assert cmap.shape == (2, 2)
    assert cmap.methods() <= set(plan.methods)


def test_single_cell_plan_labels_one_cell():
    plan = CalibrationPlan(n_values=(100,), p_values=(0.2,), replicates=1, steps=5)
    assert fastest_method_map(run_calibration(plan)).shape == (1, 1)


def test_plan_validation():
    with pytest.raises(ConfigurationError):
        CalibrationPlan(n_values=(200, 100))
    with pytest.raises(ConfigurationError):
        CalibrationPlan(methods=(ObservationMethod.ADAPTIVE,))


def test_timing_csv_round_trip(tmp_path):
    recs = [record(100, 0.2, BF, 0.5, 0.7), record(100, 0.2, SURVEY, 0.25, 0.3, 0.2)]
    path = tmp_path / "t.csv"
    with TimingCSVWriter(path) as w:
        for r in recs:
            w.add_record(r)
    back = read_timing_csv(path)
    assert [(r.scenario.method, r.elapsed) for r in back] == [(r.scenario.method, r.elapsed)
                                                              for r in recs]
    assert back[1].scenario.survey.n == recs[1].scenario.survey.n
    assert fastest_method_map(back).label_at(0, 0) is SURVEY


def test_map_files_round_trip(tmp_path):
    cmap = CalibrationMap([10, 20], [0.1, 0.2], [[BF, SELF], [SURVEY, BF]], {"seed": 1})
    for name in ("m.json", "m.csv"):
        cmap.save(tmp_path / name)
        back = CalibrationMap.load(tmp_path / name)
        assert back.agreement(cmap) == 1.0
    assert CalibrationMap.load(tmp_path / "m.json").provenance == {"seed": 1}


def test_summary_line_is_flat():
    line = write_summary_line(method="survey", agents=10, median_s=0.123456789, note="a b")
    assert line == "method=survey agents=10 median_s=0.123457 note=a_b"
