import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvh.distance_boost import (
    MATCHING, NONMATCHING, BoostModel, DistancePair, build_triplets, d_boost, d_fh,
    hinge_objective, solve_hinge_lp, split_pairs, train,
)
from tvh.errors import DataError, DegenerateTripletWarning, EmptyTripletSet, LengthMismatch
from tvh.flow_hash import FlowHash

from .oracles import hinge_grid


def pair(dd, df, label, ref="r", q="q"):
    return DistancePair(dd, df, (ref, q), label)


def test_single_triplet_separable_by_dtw():
    pairs = [pair(0.0, 1.0, MATCHING), pair(1.0, 1.0, NONMATCHING)]
    m = train(pairs)
    assert m.train_loss == pytest.approx(0.0, abs=1e-9)
    assert m.alpha1 == pytest.approx(1.0, abs=1e-6)
    assert m.alpha2 == pytest.approx(0.0, abs=1e-6)


def test_single_triplet_separable_by_fh():
    pairs = [pair(2.0, 0.1, MATCHING), pair(2.0, 0.6, NONMATCHING)]
    m = train(pairs)
    assert m.train_loss == pytest.approx(0.0, abs=1e-9)
    assert m.alpha2 == pytest.approx(2.0, abs=1e-6)
    assert d_boost(pairs[0], m) < d_boost(pairs[1], m)


def test_inseparable_gives_zero_weights():
    # matching farther on both axes: any positive weight raises the loss
    pairs = [pair(1.0, 1.0, MATCHING), pair(0.5, 0.5, NONMATCHING)]
    m = train(pairs)
    assert (m.alpha1, m.alpha2) == pytest.approx((0.0, 0.0), abs=1e-9)
    assert m.train_loss == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_lp_no_worse_than_grid(seed):
    r = np.random.default_rng(seed)
    diff = r.normal(scale=0.5, size=(20, 2))
    alpha = solve_hinge_lp(diff)
    assert np.all(alpha >= 0)
    _, obj = hinge_grid(diff, 0.0, 10.0, 200)
    assert hinge_objective(alpha, diff) <= obj.min() + 1e-6


def test_degenerate_triplets_warn():
    pairs = [pair(0.5, 0.5, MATCHING), pair(0.5, 0.5, NONMATCHING)]
    with pytest.warns(DegenerateTripletWarning):
        m = train(pairs)
    assert m.degenerate and (m.alpha1, m.alpha2) == (0.0, 0.0) and m.train_loss == 1.0


def test_no_nonmatching_pairs():
    with pytest.raises(EmptyTripletSet):
        train([pair(0.1, 0.1, MATCHING)])


def test_scaling_distances_keeps_ranking():
    r = np.random.default_rng(5)
    pairs = []
    for k in range(10):
        pairs.append(pair(r.uniform(0, 1), r.uniform(0, 0.5), MATCHING, f"r{k}", f"q{k}"))
        pairs.append(pair(r.uniform(0.5, 2), r.uniform(0.3, 1), NONMATCHING, f"r{k}", f"x{k}"))
    m1 = train(pairs)
    scaled = [DistancePair(3 * p.d_dtw, 3 * p.d_fh, p.pair_id, p.label) for p in pairs]
    m3 = train(scaled)
    s1 = np.argsort([d_boost(p, m1) for p in pairs])
    s3 = np.argsort([d_boost(p, m3) for p in scaled])
    assert s1.tolist() == s3.tolist()
    assert m3.train_loss == pytest.approx(m1.train_loss, abs=1e-6)


def test_model_text_round_trip(tmp_path):
    m = BoostModel(0.125, 3.5, 0.25, 1e-6)
    assert BoostModel.from_text(m.to_text()) == m
    m.save(tmp_path / "m.txt")
    assert BoostModel.load(tmp_path / "m.txt") == m
    assert (tmp_path / "m.txt").read_text().startswith("alpha1 0.125 alpha2 3.5")
    with pytest.raises(DataError):
        BoostModel.from_text("alpha1 x")
    with pytest.raises(ValueError):
        BoostModel(-1.0, 0.0)


def test_triplets_share_reference():
    pairs = [pair(0, 0, MATCHING, "a", "qa"), pair(1, 1, NONMATCHING, "a", "qb"),
             pair(0, 0, MATCHING, "b", "qb"), pair(1, 1, NONMATCHING, "c", "qc")]
    t = build_triplets(pairs, seed=0)
    assert ("a", 0, 1) in t
    # "b" has no nonmatching pair of its own and falls back to a random one
    assert [x for x in t if x[0] == "b"][0][2] in (1, 3)
    assert build_triplets(pairs, seed=0) == t


def test_split_keeps_references_together():
    pairs = [pair(0, 0, lab, f"r{k}", f"q{k}{lab}") for k in range(10) for lab in (MATCHING, NONMATCHING)]
    tr, te = split_pairs(pairs, seed=3)
    assert len(tr) == len(te) == 10
    assert not ({p.pair_id[0] for p in tr} & {p.pair_id[0] for p in te})
    assert split_pairs(pairs, seed=3) == (tr, te)


def test_flow_distance():
    a = FlowHash(np.array([1.0, 0.0]), 2)
    b = FlowHash(np.array([0.0, 1.0]), 2)
    assert d_fh(a, b) == pytest.approx(np.sqrt(2))
    assert d_fh(a, a) == 0
    with pytest.raises(LengthMismatch):
        d_fh(a, FlowHash(np.zeros(4), 2))


def test_pair_validation():
    with pytest.raises(ValueError):
        pair(-1.0, 0.0, MATCHING)
    with pytest.raises(ValueError):
        pair(float("nan"), 0.0, MATCHING)
    with pytest.raises(ValueError):
        pair(0.0, 0.0, "maybe")


def test_hand_case_equal_gaps():
    m = train([pair(0.0, 0.0, MATCHING), pair(1.0, 1.0, NONMATCHING)])
    assert m.train_loss == pytest.approx(0.0, abs=1e-12)
    assert m.alpha1 + m.alpha2 == pytest.approx(1.0, abs=1e-12)


def test_hand_case_inverted():
    m = train([pair(2.0, 2.0, MATCHING), pair(1.0, 1.0, NONMATCHING)])
    assert (m.alpha1, m.alpha2) == (0.0, 0.0)
    assert m.train_loss == pytest.approx(1.0, abs=1e-12)


def test_d_boost_arithmetic():
    p = pair(4.0, 1.0, MATCHING)
    assert d_boost(p, BoostModel(0.5, 2.0)) == 4.0
    assert d_boost(p, BoostModel(1.0, 0.0)) == 4.0
    assert d_boost(p, BoostModel(0.0, 1.0)) == 1.0


def test_sentinel_is_unit_distance_from_any_hash():
    a = FlowHash(np.array([1.0, 0, 0, 0]), 2)
    b = FlowHash(np.array([0, 1.0, 0, 0]), 2)
    assert d_fh(a, b) == pytest.approx(np.sqrt(2))
    z = FlowHash(np.zeros(4), 2)
    assert d_fh(z, a) == 1.0
    u = FlowHash(np.full(4, 0.5), 2)
    assert d_fh(z, u) == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_fused_ranking_not_worse_on_separable_data(seed):
    r = np.random.default_rng(seed)
    pairs = []
    for k in range(15):
        # each metric alone misorders some triplets; their sum never does
        a = r.uniform(0, 1)
        pairs.append(pair(a, 1 - a, MATCHING, f"r{k}", "m"))
        b = r.uniform(0, 1)
        pairs.append(pair(b + 0.3, 1.3 - b, NONMATCHING, f"r{k}", "n"))
    trip = build_triplets(pairs)
    m = train(pairs, trip)

    def ordered(f):
        return sum(f(pairs[j]) < f(pairs[k]) for _, j, k in trip)

    fused = ordered(lambda p: d_boost(p, m))
    assert fused >= max(ordered(lambda p: p.d_dtw), ordered(lambda p: p.d_fh))
    assert fused == len(trip)
