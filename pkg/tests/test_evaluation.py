import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvh import attacks, synthetic
from tvh.distance_boost import MATCHING, NONMATCHING
from tvh.errors import CorpusTooSmall, MissingLabelClass
from tvh.evaluation import ScoredPair, error_rates, histogram, roc, run_experiment

from .oracles import count_histogram

labels = st.sampled_from([MATCHING, NONMATCHING])
scored_lists = st.lists(st.tuples(st.integers(0, 640).map(lambda k: k / 64), labels), min_size=2, max_size=40).filter(
    lambda xs: {lab for _, lab in xs} == {MATCHING, NONMATCHING})


def sp(pairs):
    return [ScoredPair(d, lab) for d, lab in pairs]


def test_error_rates_example():
    pairs = sp([(0.1, MATCHING), (0.4, MATCHING), (0.3, NONMATCHING), (0.9, NONMATCHING)])
    assert error_rates(pairs, 0.35) == (0.5, 0.5)
    assert error_rates(pairs, 0.4) == (0.5, 0.5)
    assert error_rates(pairs, 0.0) == (1.0, 0.0)
    assert error_rates(pairs, 1.0) == (0.0, 1.0)


def test_perfect_separation():
    curve = roc(sp([(0.1, MATCHING), (0.2, MATCHING), (0.8, NONMATCHING)]))
    assert curve.auc == 1.0
    assert curve.points[0][:2] == (0.0, 1.0) and curve.points[-1][:2] == (1.0, 0.0)


def test_inverted_and_tied():
    assert roc(sp([(0.9, MATCHING), (0.1, NONMATCHING)])).auc == 0.0
    assert roc(sp([(0.5, MATCHING), (0.5, NONMATCHING)])).auc == 0.5


def test_identical_distributions_near_half():
    pairs = sp([(0.2, MATCHING), (0.6, MATCHING), (0.2, NONMATCHING), (0.6, NONMATCHING)])
    assert roc(pairs).auc == 0.5


def test_single_pair_operating_point():
    curve = roc(sp([(0.0, MATCHING), (1.0, NONMATCHING)]))
    assert (0.0, 0.0, 1.0) in curve.points
    assert error_rates(sp([(0.0, MATCHING), (1.0, NONMATCHING)]), 0.5) == (0.0, 0.0)


def test_histogram_examples():
    h = histogram(sp([(0.3, MATCHING), (0.3, NONMATCHING)]), 5)
    assert int(np.count_nonzero(h.matching + h.nonmatching)) == 1
    h = histogram(sp([(0.0, MATCHING), (1.0, NONMATCHING)]), 2)
    assert h.matching.tolist() == [1, 0] and h.nonmatching.tolist() == [0, 1]
    h = histogram(sp([(2.0, MATCHING), (4.0, NONMATCHING)]), 2, normalize=True)
    assert h.edges.tolist() == [0.5, 0.75, 1.0]


def test_missing_label():
    with pytest.raises(MissingLabelClass):
        roc(sp([(0.1, MATCHING)]))


@settings(max_examples=100, deadline=None)
@given(scored_lists)
def test_roc_monotone_and_bounded(pairs):
    curve = roc(sp(pairs))
    p_fa = [p[0] for p in curve.points]
    p_m = [p[1] for p in curve.points]
    assert all(b >= a for a, b in zip(p_fa, p_fa[1:]))
    assert all(b <= a for a, b in zip(p_m, p_m[1:]))
    assert 0.0 <= curve.auc <= 1.0


@settings(max_examples=100, deadline=None)
@given(scored_lists)
def test_auc_invariant_under_increasing_map(pairs):
    a = roc(sp(pairs)).auc
    b = roc(sp([(2 * d + 1, lab) for d, lab in pairs])).auc
    assert abs(a - b) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(scored_lists, st.integers(2, 12))
def test_histogram_matches_counting(pairs, bins):
    h = histogram(sp(pairs), bins)
    counts = count_histogram([d for d, _ in pairs], [lab for _, lab in pairs], h.edges)
    assert h.matching.tolist() == counts[MATCHING]
    assert h.nonmatching.tolist() == counts[NONMATCHING]
    assert h.matching.sum() + h.nonmatching.sum() == len(pairs)


@pytest.fixture(scope="module")
def small_corpus():
    return synthetic.corpus(4, seed=2, n_frames=36)


def test_identity_attack_scores_matches_at_zero(small_corpus):
    spec = attacks.AttackSpec.identity()
    report = run_experiment(small_corpus[:2], spec, metrics=("dtw", "fh"))
    assert report.auc("dtw", "fh") == 1.0
    for case in ("dtw", "oracle", "none"):
        for p in report.cases[case].pairs:
            if p.label == MATCHING:
                assert p.d_dtw == 0 and p.d_fh == 0
            else:
                assert p.d_dtw > 0


def test_reports_are_byte_identical(tmp_path, small_corpus):
    spec = attacks.AttackSpec(kind=attacks.TEMPORAL)
    a = run_experiment(small_corpus, spec).write(tmp_path / "a")
    b = run_experiment(small_corpus, spec).write(tmp_path / "b")
    assert [p.name for p in a] == [p.name for p in b]
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()
    names = {p.name for p in a}
    assert {"summary.txt", "pairs_dtw.csv", "roc_oracle_fh.csv", "hist_none_boost.csv",
            "model_dtw.txt"} <= names
    assert (tmp_path / "a" / "pairs_dtw.csv").read_text().startswith(
        "ref_id,query_id,label,d_dtw,d_fh,split\n")


def test_corpus_too_small(small_corpus):
    with pytest.raises(CorpusTooSmall):
        run_experiment(small_corpus[:1], attacks.AttackSpec())
