import math

import pytest

import dfsqkd


def test_pair_distribution():
    d = dfsqkd.PairDistribution.build(0.1)
    assert abs(d.total() - 1.0) <= 1e-12
    assert d.mean_pairs() == pytest.approx(0.2, rel=1e-9)
    assert dfsqkd.pair_probability(0.1, 1) == pytest.approx(0.15026296018031555, rel=1e-14)


def test_invalid_intensity_raises():
    with pytest.raises(ValueError):
        dfsqkd.pair_probability(-1.0, 0)


def test_channel_and_observation():
    p = dfsqkd.ChannelParams(0.2, 50.0, 1e-6)
    assert p.eta == pytest.approx(0.1)
    closed = dfsqkd.observed_closed_form(0.1, p)
    series = dfsqkd.observed_series(0.1, p)
    assert series.gain == pytest.approx(closed.gain, rel=1e-8)
    assert series.qber == pytest.approx(closed.qber, abs=1e-8)


def test_rate_and_distance():
    m = dfsqkd.RateModel("three_intensity", 0.1, 0.01)
    assert m.at(10.0).rate.value == pytest.approx(0.022863296696785166, rel=1e-9)
    assert m.max_secure_distance() == pytest.approx(39.3, abs=0.1)
    none = dfsqkd.RateModel("no_decoy", 0.1)
    assert none.max_secure_distance() < m.max_secure_distance()
    assert dfsqkd.RateModel("three_intensity", 0.1, 0.01, dark_count=0.3).max_secure_distance() is None


def test_entropy_and_pns():
    assert dfsqkd.binary_entropy(0.11) == pytest.approx(0.499916, abs=5e-7)
    assert dfsqkd.pns_limit_distance(0.1, 0.2, 0.3) == pytest.approx(34.7045, abs=1e-4)
    assert math.isinf(dfsqkd.pns_limit_distance(0.1, 0.2, 0.0))


def test_attack_trace():
    for code in ("minus", "plus", "zero", "one"):
        t = dfsqkd.run_full_attack(code)
        assert t.postselect_probability == pytest.approx(0.25, abs=1e-12)
        assert t.first_probability == pytest.approx(5 / 6, abs=1e-12)
        assert t.second_probability == pytest.approx(0.4, abs=1e-12)
        assert t.final_fidelity == pytest.approx(1.0, abs=1e-12)
    assert dfsqkd.encoded_pair_state("plus").norm2() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        dfsqkd.run_full_attack("sideways")


def test_batch_front_end():
    text, ok = dfsqkd.run("l_end=5\n")
    assert ok
    assert text.splitlines()[0] == dfsqkd.FIG1_HEADER
    assert len(text.splitlines()) == 7
    text, ok = dfsqkd.run("", {"mode": "attack_verify", "attack_tolerance": "0"})
    assert not ok
    assert "VERDICT: FAIL" in text
    with pytest.raises(Exception):
        dfsqkd.run("bogus=1\n")
