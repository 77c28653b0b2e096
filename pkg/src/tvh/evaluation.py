"""Detection-error evaluation: empirical miss / false-alarm rates, ROC
curves, distance histograms, and the three-way synchronization experiment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import attacks
from .config import PipelineConfig
from .distance_boost import MATCHING, NONMATCHING, BoostModel, DistancePair, d_fh, split_pairs, train
from .dtw_sync import MatchTable, sync_distance, sync_video, synchronize
from .errors import CorpusTooSmall, MissingLabelClass
from .flow_hash import flow_hash_or_sentinel
from .frame_hash import extract_frame_hashes

CASES = ("dtw", "oracle", "none")
METRICS = ("dtw", "fh", "boost")


@dataclass(frozen=True)
class ScoredPair:
    distance: float
    label: str
    metric_id: str = "fh"

    def __post_init__(self):
        if not math.isfinite(self.distance):
            raise ValueError("distance must be finite")
        if self.label not in (MATCHING, NONMATCHING):
            raise ValueError(f"unknown label {self.label!r}")


@dataclass(frozen=True)
class RocCurve:
    points: tuple  # ((p_fa, p_m, tau), ...) with tau ascending
    auc: float


def _split(pairs):
    pos = np.sort([p.distance for p in pairs if p.label == MATCHING])
    neg = np.sort([p.distance for p in pairs if p.label == NONMATCHING])
    if pos.size == 0 or neg.size == 0:
        raise MissingLabelClass("need at least one matching and one nonmatching pair")
    return pos, neg


def _rates(pos, neg, tau):
    """p_m: matching at or above tau; p_fa: nonmatching below tau."""
    p_m = 1.0 - np.searchsorted(pos, tau, side="left") / pos.size
    p_fa = np.searchsorted(neg, tau, side="left") / neg.size
    return p_m, p_fa


def error_rates(pairs, tau):
    pos, neg = _split(pairs)
    p_m, p_fa = _rates(pos, neg, tau)
    return float(p_m), float(p_fa)


def roc(pairs) -> RocCurve:
    """Sweep tau over every observed distance plus both infinities; the AUC
    integrates 1 - P_M against P_FA with the trapezoid rule."""
    pos, neg = _split(pairs)
    taus = np.concatenate([[-np.inf], np.unique(np.concatenate([pos, neg])), [np.inf]])
    p_m, p_fa = _rates(pos, neg, taus)
    tpr = 1.0 - p_m
    auc = float(np.sum(np.diff(p_fa) * (tpr[1:] + tpr[:-1]) / 2.0))
    points = tuple((float(a), float(m), float(t)) for a, m, t in zip(p_fa, p_m, taus))
    return RocCurve(points, auc)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    matching: np.ndarray
    nonmatching: np.ndarray


def histogram(pairs, bins: int = 20, normalize: bool = False) -> Histogram:
    """Equal-width bins over the pooled distance range, counted per label.

    With ``normalize`` the distances are first divided by their maximum.
    """
    if bins < 2:
        raise ValueError("need at least 2 bins")
    d = np.array([p.distance for p in pairs], dtype=np.float64)
    labels = np.array([p.label for p in pairs])
    if normalize and d.size and d.max() > 0:
        d = d / d.max()
    lo, hi = (float(d.min()), float(d.max())) if d.size else (0.0, 1.0)
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    match, _ = np.histogram(d[labels == MATCHING], edges)
    non, _ = np.histogram(d[labels == NONMATCHING], edges)
    return Histogram(edges, match, non)


# -- experiment --------------------------------------------------------------

def video_seed(seed: int, index: int) -> int:
    """Per-video attack seed derived from the experiment seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


@dataclass
class CaseResult:
    case: str
    pairs: list  # DistancePair
    split: dict  # pair_id -> "train" | "test"
    model: BoostModel | None = None
    scored: dict = field(default_factory=dict)  # metric -> list[ScoredPair]
    rocs: dict = field(default_factory=dict)
    test_auc: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    attack: attacks.AttackSpec
    cases: dict  # case -> CaseResult
    metrics: tuple

    def auc(self, case, metric):
        return self.cases[case].rocs[metric].auc

    def write(self, out_dir) -> list[Path]:
        return write_report(self, out_dir)


def _oracle_table(survivors, ref_len):
    return MatchTable(tuple((q, r) for q, r in enumerate(survivors) if r < ref_len))


def run_experiment(corpus, spec: attacks.AttackSpec, pipeline: PipelineConfig | None = None,
                   cases=CASES, metrics=METRICS, hist_bins=20) -> ExperimentReport:
    """Attack every reference, pair its query with itself (matching) and with
    the next reference (nonmatching), and score each pair under each
    synchronization case."""
    pipeline = pipeline or PipelineConfig()
    corpus = list(corpus)
    n = len(corpus)
    if n < 2:
        raise CorpusTooSmall("need at least two videos")
    ids = [v.source_id or f"video{k}" for k, v in enumerate(corpus)]
    if len(set(ids)) != n:
        ids = [f"{k:04d}:{sid}" for k, sid in enumerate(ids)]
    ref_fh = [extract_frame_hashes(v) for v in corpus]
    ref_flow = [flow_hash_or_sentinel(v, pipeline.flow) for v in corpus]
    queries = [attacks.apply(v, replace(spec, seed=video_seed(pipeline.seed, k)))
               for k, v in enumerate(corpus)]
    q_fh = [extract_frame_hashes(a.video) for a in queries]
    plan = []
    for k in range(n):
        plan.append((k, k, MATCHING))
        plan.append(((k + 1) % n, k, NONMATCHING))
    d_dtw = {(r, q): sync_distance(q_fh[q], ref_fh[r], pipeline.dtw_band) for r, q, _ in plan}
    none_flow = {}
    results = {}
    for case in cases:
        if case not in CASES:
            raise ValueError(f"unknown case {case!r}")
        pairs = []
        for r, q, label in plan:
            qv = queries[q].video
            if case == "none":
                if q not in none_flow:
                    none_flow[q] = flow_hash_or_sentinel(qv, pipeline.flow)
                qflow = none_flow[q]
            elif case == "dtw":
                synced = sync_video(qv, q_fh[q], ref_fh[r], pipeline.dtw_band).video
                qflow = flow_hash_or_sentinel(synced, pipeline.flow)
            else:
                table = _oracle_table(queries[q].survivors, len(corpus[r]))
                synced = synchronize(qv, table, len(corpus[r]))
                qflow = flow_hash_or_sentinel(synced, pipeline.flow)
            pairs.append(DistancePair(d_dtw[(r, q)], d_fh(ref_flow[r], qflow),
                                      (ids[r], ids[q]), label))
        results[case] = _score_case(case, pairs, metrics, pipeline.seed, hist_bins)
    return ExperimentReport(spec, results, tuple(metrics))


def _score_case(case, pairs, metrics, seed, hist_bins):
    train_set, test_set = split_pairs(pairs, seed)
    split = {p.pair_id: "train" for p in train_set}
    split.update({p.pair_id: "test" for p in test_set})
    res = CaseResult(case, pairs, split)
    for metric in metrics:
        if metric == "dtw":
            scored_all = [ScoredPair(p.d_dtw, p.label, metric) for p in pairs]
            scored_test = [ScoredPair(p.d_dtw, p.label, metric) for p in test_set]
        elif metric == "fh":
            scored_all = [ScoredPair(p.d_fh, p.label, metric) for p in pairs]
            scored_test = [ScoredPair(p.d_fh, p.label, metric) for p in test_set]
        elif metric == "boost":
            res.model = train(train_set, seed=seed)
            m = res.model
            scored_test = [ScoredPair(m.alpha1 * p.d_dtw + m.alpha2 * p.d_fh, p.label, metric)
                           for p in test_set]
            scored_all = scored_test
        else:
            raise ValueError(f"unknown metric {metric!r}")
        res.scored[metric] = scored_all
        res.rocs[metric] = roc(scored_all)
        res.test_auc[metric] = roc(scored_test).auc
        res.histograms[metric] = histogram(scored_all, hist_bins, normalize=True)
    return res


# -- report files ------------------------------------------------------------

def _fmt(x) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_report(report: ExperimentReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, text):
        path = out / name
        path.write_text(text)
        written.append(path)

    summary = [f"attack={report.attack.kind}"]
    for case, res in report.cases.items():
        rows = ["ref_id,query_id,label,d_dtw,d_fh,split"]
        for p in res.pairs:
            rows.append(f"{p.pair_id[0]},{p.pair_id[1]},{p.label},{_fmt(p.d_dtw)},"
                        f"{_fmt(p.d_fh)},{res.split[p.pair_id]}")
        emit(f"pairs_{case}.csv", "\n".join(rows) + "\n")
        for metric in report.metrics:
            curve = res.rocs[metric]
            lines = ["tau,p_fa,p_m"] + [f"{_fmt(t)},{_fmt(a)},{_fmt(m)}" for a, m, t in curve.points]
            emit(f"roc_{case}_{metric}.csv", "\n".join(lines) + "\n")
            h = res.histograms[metric]
            lines = ["bin_low,bin_high,count_matching,count_nonmatching"]
            lines += [f"{_fmt(lo)},{_fmt(hi)},{int(cm)},{int(cn)}"
                      for lo, hi, cm, cn in zip(h.edges[:-1], h.edges[1:], h.matching, h.nonmatching)]
            emit(f"hist_{case}_{metric}.csv", "\n".join(lines) + "\n")
            summary.append(f"auc.{case}.{metric}={_fmt(curve.auc)}")
            summary.append(f"auc_test.{case}.{metric}={_fmt(res.test_auc[metric])}")
        if res.model is not None:
            emit(f"model_{case}.txt", res.model.to_text())
            summary.append(f"alpha1.{case}={_fmt(res.model.alpha1)}")
            summary.append(f"alpha2.{case}={_fmt(res.model.alpha2)}")
    emit("summary.txt", "\n".join(summary) + "\n")
    return written
