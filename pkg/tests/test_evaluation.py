import math

import numpy as np
import pytest

from arrows.evaluation import (
    TrialTrace,
    aggregate_seeds,
    dynamic_regret,
    per_n_rows,
    run_algorithm,
    scaling_slope,
    sweep,
)
from arrows.sequences import NoiseSpec, add_noise, gen_hybrid, make_generator


def trace(x, theta, **kw):
    x = np.asarray(x, float)
    return TrialTrace(y=np.zeros_like(x), x=x, restart=np.zeros(x.size, bool), theta=np.asarray(theta, float), **kw)


def test_regret_examples():
    assert dynamic_regret(trace([1, 2, 3], [1, 2, 3])) == 0
    assert dynamic_regret(trace([0], [3])) == 9
    assert dynamic_regret(trace([0, 1], [1, 3])) == 5


def test_regret_additive_over_segments():
    rng = np.random.default_rng(0)
    x, th = rng.normal(size=50), rng.normal(size=50)
    whole = dynamic_regret(trace(x, th))
    parts = dynamic_regret(trace(x[:20], th[:20])) + dynamic_regret(trace(x[20:], th[20:]))
    assert whole == pytest.approx(parts, abs=1e-12)
    assert math.fsum(trace(x, th).loss) == pytest.approx(whole, abs=1e-9)


def test_trace_without_truth():
    with pytest.raises(ValueError):
        TrialTrace(y=np.zeros(2), x=np.zeros(2), restart=np.zeros(2, bool)).loss
    with pytest.raises(ValueError):
        TrialTrace(y=np.zeros(2), x=np.zeros(3), restart=np.zeros(2, bool))


def oracle_slope(ns, rs):
    # independent route: numpy polyfit on log-log data
    return np.polyfit(np.log(ns), np.log(rs), 1)[0]


def test_slope_exact_power_laws():
    ns = np.array([2.0**k for k in range(10, 18)])
    assert scaling_slope(list(zip(ns, ns))) == pytest.approx(1.0, abs=1e-9)
    assert scaling_slope(list(zip(ns, 7 * ns ** (1 / 3)))) == pytest.approx(1 / 3, abs=1e-9)


def test_slope_sqrt_n_log_n():
    ns = np.array([2.0**k for k in range(10, 18)])
    rs = np.sqrt(ns * np.log(ns))
    s = scaling_slope(list(zip(ns, rs)))
    assert s == pytest.approx(oracle_slope(ns, rs), abs=1e-12)
    assert 0.5 <= s <= 0.58


def test_slope_errors():
    with pytest.raises(ValueError):
        scaling_slope([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        scaling_slope([(1, 1), (2, 0), (4, 3)])
    with pytest.raises(ValueError):
        scaling_slope([(1, 1), (4, 2), (2, 3)])


def test_aggregate_examples():
    t = trace([0, 2], [0, 0], algo="a")
    rep = aggregate_seeds([t])
    assert rep.total_regret == 4 and rep.std == 0
    assert aggregate_seeds([t, t]).std == 0
    t6 = trace([0, math.sqrt(6)], [0, 0], algo="a")
    rep = aggregate_seeds([t, t6])
    assert rep.total_regret == pytest.approx(5)
    assert rep.std == pytest.approx(math.sqrt(2))


def test_aggregate_rejects_heterogeneous():
    with pytest.raises(ValueError):
        aggregate_seeds([trace([0], [1], algo="a"), trace([0], [1], algo="b")])
    with pytest.raises(ValueError):
        aggregate_seeds([trace([0], [1], algo="a"), trace([0, 0], [1, 1], algo="a")])
    with pytest.raises(ValueError):
        aggregate_seeds([])


def test_aggregate_order_invariant():
    ts = [trace(np.random.default_rng(s).normal(size=10), np.zeros(10), algo="a") for s in range(4)]
    a, b = aggregate_seeds(ts), aggregate_seeds(ts[::-1])
    assert a.total_regret == pytest.approx(b.total_regret, abs=1e-12)
    assert a.std == pytest.approx(b.std, abs=1e-12)


@pytest.mark.parametrize("algo", ["arrows", "ogd-tv", "ogd-sobolev", "ma-tv"])
def test_run_algorithm(algo):
    truth = gen_hybrid(1024)
    y = add_noise(truth, NoiseSpec(1.0, 0))
    tr = run_algorithm(algo, truth, y, 1.0, seed=0)
    assert tr.n == 1024 and tr.algo == algo
    assert dynamic_regret(tr) > 0


def test_run_algorithm_unknown():
    truth = gen_hybrid(16)
    with pytest.raises(ValueError):
        run_algorithm("kalman", truth, truth.theta, 1.0)


def test_sweep_order_and_parallel_equivalence():
    gen = make_generator("hybrid")
    grid, seeds, algos = [256, 512, 1024], [0, 1], ["arrows", "ogd-tv", "ma-tv"]
    serial = sweep(algos, gen, grid, seeds)
    assert [(t.n, t.seed, t.algo) for t in serial] == [(n, s, a) for n in grid for s in seeds for a in algos]
    parallel = sweep(algos, gen, grid, seeds, workers=2)
    for a, b in zip(serial, parallel):
        assert a.x.tobytes() == b.x.tobytes()
    rows = per_n_rows(serial)
    assert set(rows) == set(algos)
    assert [n for n, _, _ in rows["arrows"]] == grid
