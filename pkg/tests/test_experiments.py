import math

import pytest

from rainbowtree.experiments import (
    CELL_FIELDS,
    TRIAL_FIELDS,
    CellEstimate,
    SweepSpec,
    TrialResult,
    UnsupportedCaseError,
    c_for_m,
    c_transform,
    default_c_grid,
    dump_records,
    estimate_cells,
    identity_rate,
    ks_distance,
    limit_cdf,
    load_records,
    m_for_c,
    m_window,
    metadata,
    read_cells,
    read_trials,
    run_batch,
    run_trial,
    trial_seed,
    write_cells,
    write_trials,
)
from rainbowtree.intersection import first_rainbow_time
from rainbowtree.oracle import edmonds_bruteforce
from rainbowtree.process import ProcessConfig, generate_trace


def test_limit_cdf_values():
    assert limit_cdf(0, 2, "rainbow") == pytest.approx(0.135335, abs=1e-6)
    assert limit_cdf(0, 3, "rainbow") == pytest.approx(0.367879, abs=1e-6)
    assert limit_cdf(0, 2, "coverage") == pytest.approx(math.exp(-1))
    assert limit_cdf(1, 5, "connectivity") == pytest.approx(0.692201, abs=1e-6)
    for event, k in [("connectivity", 1), ("coverage", 2), ("rainbow", 2), ("rainbow", 4)]:
        assert abs(limit_cdf(20, k, event) - 1) <= 1e-8
        assert limit_cdf(-20, k, event) <= 1e-8


def test_limit_cdf_errors():
    with pytest.raises(UnsupportedCaseError):
        limit_cdf(0, 1, "rainbow")
    with pytest.raises(ValueError):
        limit_cdf(0, 2, "diameter")
    with pytest.raises(ValueError):
        limit_cdf(0, 0, "coverage")


def test_c_transform():
    assert c_transform(4000, 1000, 2) == pytest.approx(1.0922, abs=1e-4)
    assert c_transform(4000, 1000, 2) == pytest.approx(8 - math.log(1000), abs=1e-12)
    n, k = 5000, 2
    assert c_transform(n / k * math.log(n), n, k) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        c_transform(1, 1, 1)


@pytest.mark.parametrize("n,k", [(100, 1), (1000, 2), (30000, 2), (777, 5)])
def test_c_round_trip(n, k):
    for i in range(-30, 31):
        c = i / 10
        m = m_for_c(c, n, k)
        assert abs(c_transform(m, n, k) - c) <= k / n
        assert c_for_m(m, n, k) == pytest.approx(c_transform(m, n, k))


def test_window_and_default_grid():
    n = 1000
    lo, hi = m_window(n)
    w = math.log(math.log(n))
    assert lo == math.floor(n / 2 * (math.log(n) - w))
    assert hi == math.ceil(n / 2 * (math.log(n) + w))
    for event in ("connectivity", "coverage", "rainbow"):
        grid = default_c_grid(n, 2, event)
        assert grid == sorted(grid)
        assert all(lo <= m_for_c(c, n, 2, event) <= hi for c in grid)


def test_rainbow_scaling_at_k3_uses_connectivity_scale():
    n = 2000
    assert m_for_c(0, n, 3, "rainbow") == m_for_c(0, n, 3, "connectivity")
    assert m_for_c(0, n, 2, "rainbow") == m_for_c(0, n, 2, "coverage")


def test_run_trial_n2():
    r = run_trial(ProcessConfig(2, 1, seed=9))
    assert (r.m_C, r.m_N, r.m_R, r.identity_holds) == (1, 1, 1, True)


@pytest.mark.parametrize("n,k", [(5, 1), (12, 2), (40, 2), (60, 3), (200, 2)])
def test_run_trial_inequality(n, k):
    for t in range(25):
        r = run_trial(ProcessConfig(n, k, seed=trial_seed(3, n, k, t)))
        assert r.m_C >= n - 1
        if r.m_N is not None:
            assert r.m_N >= math.ceil(r.w_size / k)
        if r.m_R is not None:
            assert r.m_R >= max(r.m_C, r.m_N)
        assert r.identity_holds == (r.m_R is not None and r.m_R == max(r.m_C, r.m_N))


def test_run_trial_matches_full_trace():
    for t in range(20):
        config = ProcessConfig(30, 2, seed=trial_seed(11, 30, 2, t))
        r = run_trial(config)
        assert r.m_R == first_rainbow_time(generate_trace(config))


def test_run_trial_event_subsets():
    config = ProcessConfig(50, 2, seed=4)
    full = run_trial(config)
    only_c = run_trial(config, "C")
    assert only_c.m_C == full.m_C and only_c.m_N is None and only_c.m_R is None
    assert only_c.identity_holds is None
    assert run_trial(config, "N").m_N == full.m_N


def oracle_first_rainbow(trace):
    for m in range(len(trace) + 1):
        if edmonds_bruteforce(trace, m).exists:
            return m
    return None


def test_identity_frequency_matches_oracle_rerun():
    n, k = 7, 2
    fast = []
    slow = []
    for t in range(500):
        config = ProcessConfig(n, k, seed=trial_seed(0, n, k, t))
        r = run_trial(config)
        fast.append(r.identity_holds)
        m_R = oracle_first_rainbow(generate_trace(config))
        assert m_R == r.m_R
        slow.append(m_R is not None and m_R == max(r.m_C, r.m_N))
    assert sum(fast) == sum(slow)


def test_run_batch_single_trial_reproduces_run_trial():
    sweep = SweepSpec(n_values=(40,), k=2, c_values=(0.0,), trials=1, master_seed=5)
    result = run_batch(sweep)
    assert result.trials == [run_trial(ProcessConfig(40, 2, seed=trial_seed(5, 40, 2, 0)))]


def test_run_batch_worker_count_invariant():
    sweep = SweepSpec(n_values=(30, 60), k=2, c_values=(-1.0, 0.0, 1.0), trials=12, master_seed=1)
    one = run_batch(sweep, workers=1)
    two = run_batch(sweep, workers=2)
    assert one.cells == two.cells and one.trials == two.trials
    assert dump_records(one.cells, CELL_FIELDS, one.meta, "csv") == dump_records(
        two.cells, CELL_FIELDS, two.meta, "csv"
    )


def test_run_batch_k1_has_no_rainbow_cells():
    result = run_batch(SweepSpec(n_values=(20,), k=1, c_values=(0.0,), trials=3))
    assert {c.event for c in result.cells} == {"connectivity", "coverage"}


def test_doubling_trials_scales_stderr():
    def cell(trials):
        sweep = SweepSpec((400,), 2, (0.0,), trials, 2, events=("coverage",))
        return run_batch(sweep).cells[0]

    small, big = cell(400), cell(800)
    assert small.stderr / big.stderr == pytest.approx(math.sqrt(2), rel=0.05)


def test_estimates_monotone_in_c():
    result = run_batch(SweepSpec((300,), 2, tuple(x / 4 for x in range(-8, 9)), 60, 7))
    for event in ("connectivity", "coverage", "rainbow"):
        ps = [c.p_hat for c in result.cells if c.event == event]
        assert ps == sorted(ps)


def test_estimate_cells_counts():
    trials = [
        TrialResult(0, 10, 2, 9, 20, 10, 22, 45, False),
        TrialResult(1, 10, 2, 9, 30, 12, 30, 45, True),
        TrialResult(2, 10, 2, 9, 25, None, None, 45, False),
    ]
    (cell,) = estimate_cells(trials, 10, 2, "connectivity", [c_for_m(25, 10, 2, "connectivity")])
    assert cell.m == 25
    assert cell.p_hat == pytest.approx(2 / 3)
    assert cell.stderr == pytest.approx(math.sqrt(2 / 9 / 3))


def make_cell(c, p, limit):
    return CellEstimate(100, 2, c, 1, "coverage", p, 10, 0.0, limit)


def test_ks_distance():
    exact = [make_cell(c, limit_cdf(c, 2, "coverage"), limit_cdf(c, 2, "coverage")) for c in (-1, 0, 1)]
    assert ks_distance(exact) == 0
    zeros = [make_cell(c, 0.0, limit_cdf(c, 2, "coverage")) for c in (-1, 0)]
    assert ks_distance(zeros) == pytest.approx(math.exp(-1))
    with pytest.raises(ValueError):
        ks_distance(exact[:1])


def test_ks_distance_finite_size_trend():
    c_values = tuple(x / 2 for x in range(-4, 5))

    def ks(n):
        sweep = SweepSpec((n,), 2, c_values, 2000, 21, events=("coverage",))
        return ks_distance(run_batch(sweep).cells)

    assert ks(300) > ks(3000)


def test_identity_rate():
    trials = [TrialResult(i, 5, 2, 4, 5, 5, 5 + i % 2, 10, i % 2 == 0) for i in range(4)]
    p, se = identity_rate(trials)
    assert p == 0.5 and se == pytest.approx(0.25)
    with pytest.raises(ValueError):
        identity_rate([TrialResult(0, 5, 1, 4, 5, None, None, 10, None)])


@pytest.mark.parametrize("fmt", ["csv", "jsonl"])
def test_persistence_round_trip(tmp_path, fmt):
    sweep = SweepSpec((20, 25), 2, (-0.5, 0.0, 1 / 3), 6, 3)
    result = run_batch(sweep)
    extra = TrialResult(2**64 - 1, 8, 3, 7, 12, None, None, 28, False)
    trials = result.trials + [extra]
    write_trials(tmp_path / f"t.{fmt}", trials, result.meta)
    write_cells(tmp_path / f"c.{fmt}", result.cells, result.meta)
    back_trials, meta = read_trials(tmp_path / f"t.{fmt}")
    back_cells, meta2 = read_cells(tmp_path / f"c.{fmt}")
    assert back_trials == trials
    assert back_cells == result.cells
    assert meta == meta2 == result.meta
    text = dump_records(trials, TRIAL_FIELDS, meta, fmt)
    assert load_records(text, TrialResult, TRIAL_FIELDS, fmt)[0] == trials


def test_metadata_contents():
    meta = metadata(SweepSpec((10,), 2, w_size=15))
    assert meta["generator"].startswith("pcg64")
    assert meta["default_palette"] is False
    assert {"master_seed", "format_version", "omega"} <= set(meta)
