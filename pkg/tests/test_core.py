import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpsu.core import (Database, Mechanism, MechanismConfig, Norm, PrivacyParams,
                       UserRecord, WeightedHistogram, dominates, lp_distance)


@pytest.mark.parametrize("h1, h2, p, expected", [
    ({"a": 1.0}, {"a": 1.0}, Norm.L1, 0.0),
    ({"a": 1.0}, {"a": 1.0}, Norm.L2, 0.0),
    ({"a": 1, "b": 2}, {"a": 0, "b": 0}, Norm.L1, 3.0),
    ({"a": 3, "b": 4}, {}, Norm.L2, 5.0),
    ({"a": 1}, {"b": 1}, "l1", 2.0),
])
def test_lp_distance_examples(h1, h2, p, expected):
    assert lp_distance(h1, h2, p) == expected


@pytest.mark.parametrize("h1, h2, expected", [
    ({"a": 2}, {"a": 1}, True),
    ({"a": 1}, {"a": 1, "b": 0.5}, False),
    ({}, {}, True),
    ({"a": 1, "b": 0.1}, {"a": 1}, True),
])
def test_dominates_examples(h1, h2, expected):
    assert dominates(h1, h2) is expected


items = st.sampled_from("abcdefgh")
hists = st.dictionaries(items, st.floats(0, 100, allow_nan=False), max_size=8)


@settings(max_examples=300, deadline=None)
@given(hists, hists, hists, st.sampled_from([Norm.L1, Norm.L2]))
def test_lp_distance_is_metric(x, y, z, p):
    dxy, dyx = lp_distance(x, y, p), lp_distance(y, x, p)
    assert dxy == pytest.approx(dyx, rel=1e-12, abs=0)
    assert lp_distance(x, x, p) == 0.0
    scale = max(dxy, 1.0)
    assert dxy <= lp_distance(x, z, p) + lp_distance(z, y, p) + 1e-12 * scale


@settings(max_examples=200, deadline=None)
@given(hists, hists)
def test_mutual_dominance_means_equal(x, y):
    if dominates(x, y) and dominates(y, x):
        assert lp_distance(x, y, Norm.L1) == 0.0
        assert lp_distance(x, y, Norm.L2) == 0.0


def test_histogram_missing_items_read_as_zero():
    h = WeightedHistogram({"a": 1.0})
    assert h["zzz"] == 0.0
    assert "zzz" not in h
    assert h.support == {"a"}


def test_histogram_validate_rejects_bad_weights():
    WeightedHistogram({"a": 1.0}).validate()
    with pytest.raises(ValueError):
        WeightedHistogram({"a": math.inf}).validate()
    with pytest.raises(ValueError):
        WeightedHistogram({"a": -1.0}).validate()


def test_database_invariants():
    db = Database.from_mapping({"u1": ["a", "b", "a"], "u2": ["c"]})
    assert len(db) == 2
    assert db.union() == {"a", "b", "c"}
    assert db.without("u1").union() == {"c"}
    with pytest.raises(ValueError):
        Database((UserRecord("x", frozenset({"a"})), UserRecord("x", frozenset({"b"}))))
    with pytest.raises(ValueError):
        Database((UserRecord("x", frozenset()),))


def test_database_canonical_ignores_order():
    a = Database.from_mapping({"u1": ["a"], "u2": ["b"]})
    b = Database.from_mapping({"u2": ["b"], "u1": ["a"]})
    assert a != b
    assert a.canonical() == b.canonical()


@pytest.mark.parametrize("eps, delta", [(0, 0.1), (-1, 0.1), (1, 0), (1, 1), (math.nan, 0.1)])
def test_privacy_params_validation(eps, delta):
    with pytest.raises(ValueError):
        PrivacyParams(eps, delta)


def test_mechanism_config_coerces_and_validates():
    cfg = MechanismConfig("policy-gaussian")
    assert cfg.mechanism is Mechanism.POLICY_GAUSSIAN
    assert cfg.mechanism.norm is Norm.L2 and cfg.mechanism.is_policy
    assert Mechanism.COUNT_LAPLACE.norm is Norm.L1
    with pytest.raises(ValueError):
        MechanismConfig("policy-laplace", alpha=-1)
    with pytest.raises(ValueError):
        MechanismConfig("policy-laplace", passes=0)
