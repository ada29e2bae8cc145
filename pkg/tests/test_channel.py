from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import stats

from aerocov import channel
from aerocov.config import SystemConfig
from golden_values import GOLDEN


@pytest.mark.parametrize("args, expected", GOLDEN)
def test_golden_values(args, expected):
    r, h, f_c = args
    cfg = SystemConfig(f_c=f_c)
    assert abs(channel.pathloss_los(r, h, cfg) - expected[0]) <= 1e-6
    assert abs(channel.pathloss_nlos(r, h, cfg) - expected[1]) <= 1e-6
    assert abs(channel.los_probability(r, h, cfg) - expected[2]) <= 1e-9


def test_breakpoint_examples():
    assert channel.breakpoint_distance(25, 1.5, 5) == pytest.approx(2500.0)
    assert channel.breakpoint_distance(25, 1.5, 28) == pytest.approx(14000.0)


@pytest.mark.parametrize("f_c", [5.0, 28.0])
@pytest.mark.parametrize("h", [1.5, 10.0, 22.5])
def test_los_continuous_at_breakpoint(f_c, h):
    cfg = SystemConfig(f_c=f_c)
    d_b = channel.breakpoint_distance(cfg.h_bs, h, f_c)
    eps = 1e-7 * d_b
    assert abs(channel.pathloss_los(d_b - eps, h, cfg) - channel.pathloss_los(d_b + eps, h, cfg)) < 1e-5


def test_los_probability_regimes():
    cfg = SystemConfig()
    assert channel.los_probability(10.0, 1.5, cfg) == 1.0
    assert channel.los_probability(18.0, 1.5, cfg) == 1.0
    assert channel.los_probability(50.0, 150.0, cfg) == 1.0
    assert channel.los_probability(4000.0, 150.0, cfg) == 1.0
    p1, d1 = channel.aerial_los_params(50.0)
    assert p1 == pytest.approx(4300 * np.log10(50) - 3800)
    assert d1 == pytest.approx(max(460 * np.log10(50) - 700, 18.0))
    assert channel.los_probability(d1 * 0.99, 50.0, cfg) == 1.0


@settings(max_examples=200, deadline=None)
@given(r=st.floats(1.0, 5000.0), h=st.sampled_from([1.5, 5.0, 13.0, 18.0, 22.5, 23.0, 50.0, 75.0, 100.0, 200.0]))
def test_los_probability_in_unit_interval(r, h):
    p = channel.los_probability(r, h, SystemConfig())
    assert 0.0 <= p <= 1.0


@settings(max_examples=200, deadline=None)
@given(r=st.floats(10.0, 5000.0), h=st.floats(1.5, 22.5))
def test_nlos_never_below_los_low_regime(r, h):
    cfg = SystemConfig()
    assert channel.pathloss_nlos(r, h, cfg) >= channel.pathloss_los(r, h, cfg)


@settings(max_examples=100, deadline=None)
@given(h=st.floats(1.5, 300.0), f_c=st.sampled_from([5.0, 28.0]))
def test_path_loss_increases_with_distance(h, f_c):
    cfg = SystemConfig(f_c=f_c)
    r = np.linspace(10.0, 5000.0, 400)
    assert np.all(np.diff(channel.pathloss_los(r, h, cfg)) > 0)


@pytest.mark.parametrize("h", [1.5, 22.5, 22.5001, 100.0, 100.0001])
def test_regime_boundaries_are_finite(h):
    r = np.array([1.0, 18.0, 100.0, 5000.0])
    cfg = SystemConfig()
    res = channel.path_loss(r, h, cfg)
    for arr in (res.pl_los, res.pl_nlos, res.p_los, res.expected_loss_db):
        assert np.all(np.isfinite(arr))


@pytest.mark.parametrize("mix", ["linear", "db"])
def test_expected_loss_mixture(mix):
    cfg = SystemConfig(mix_scale=mix)
    r = np.geomspace(5.0, 5000.0, 50)
    for h in (1.5, 50.0, 150.0):
        g = channel.expected_total_loss(r, h, cfg)
        assert np.all((g > 0) & (g <= 1))
        lo = 10 ** (-np.asarray(channel.pathloss_nlos(r, h, cfg)) / 10)
        hi = 10 ** (-np.asarray(channel.pathloss_los(r, h, cfg)) / 10)
        assert np.all(g <= hi * (1 + 1e-12)) and np.all(g >= lo * (1 - 1e-12))
    # P_LOS = 1 close in: pure LOS
    assert channel.expected_total_loss(10.0, 1.5, cfg) == pytest.approx(10 ** (-channel.pathloss_los(10.0, 1.5, cfg) / 10))


def test_mixture_scales_differ_only_in_averaging():
    r, h = 300.0, 1.5
    p = channel.los_probability(r, h)
    lin = channel.expected_total_loss(r, h, SystemConfig(mix_scale="linear"))
    db = channel.expected_total_loss(r, h, SystemConfig(mix_scale="db"))
    pl, pn = channel.pathloss_los(r, h, SystemConfig()), channel.pathloss_nlos(r, h, SystemConfig())
    assert lin == pytest.approx(p * 10 ** (-pl / 10) + (1 - p) * 10 ** (-pn / 10))
    assert db == pytest.approx(10 ** (-(p * pl + (1 - p) * pn) / 10))
    assert db <= lin  # Jensen


def test_diagnostics_counter():
    diag = Counter()
    channel.pathloss_los(np.array([5.0, 100.0, 6000.0]), 1.5, SystemConfig(), diag)
    assert diag["los_below_10m"] == 1
    assert diag["los_beyond_5km"] == 1


def test_nakagami_unit_mean_and_variance():
    rng = np.random.default_rng(1)
    for m in (1, 2, 4):
        g = channel.sample_nakagami_power(m, rng, 200_000)
        assert g.mean() == pytest.approx(1.0, abs=0.01)
        assert g.var() == pytest.approx(1.0 / m, rel=0.03)


def test_nakagami_m1_is_exponential():
    g = channel.sample_nakagami_power(1, np.random.default_rng(7), 100_000)
    assert stats.kstest(g, "expon").pvalue > 0.01


@pytest.mark.parametrize("m", [0, 1.5, -2])
def test_nakagami_rejects_bad_m(m):
    with pytest.raises(ValueError):
        channel.sample_nakagami_power(m, np.random.default_rng(0), 3)


def test_golden_csv_round_trip(tmp_path):
    rows = channel.golden_table([100.0, 500.0], [1.5, 50.0], [28.0])
    path = channel.write_golden_csv(tmp_path / "g.csv", rows)
    back = channel.read_golden_csv(path)
    assert [tuple(r) for r in back] == [channel.GOLDEN_COLUMNS] * 4
    assert_allclose([r["pl_los"] for r in back], [r["pl_los"] for r in rows], atol=1e-9)
    assert back[0]["pl_los"] == pytest.approx(GOLDEN[0][1][0], abs=1e-6)
