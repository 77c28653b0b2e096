"""Distance fusion: d_boost = alpha1 * d_dtw + alpha2 * d_fh, with the
weights fitted by minimizing a triplet hinge loss as a linear program."""
from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

from .errors import (
    ComputeError, DataError, DegenerateTripletWarning, EmptyTripletSet, LengthMismatch,
)

MATCHING = "matching"
NONMATCHING = "nonmatching"


@dataclass(frozen=True)
class DistancePair:
    d_dtw: float
    d_fh: float
    pair_id: tuple  # (reference id, query id)
    label: str

    def __post_init__(self):
        if not (np.isfinite(self.d_dtw) and np.isfinite(self.d_fh)):
            raise ValueError("distances must be finite")
        if self.d_dtw < 0 or self.d_fh < 0:
            raise ValueError("distances must be non-negative")
        if self.label not in (MATCHING, NONMATCHING):
            raise ValueError(f"unknown label {self.label!r}")

    @property
    def vector(self):
        return np.array([self.d_dtw, self.d_fh])


@dataclass(frozen=True)
class BoostModel:
    alpha1: float
    alpha2: float
    train_loss: float = 0.0
    regularization_eps: float = 1e-6
    degenerate: bool = False

    def __post_init__(self):
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError("fusion weights must be non-negative")

    def to_text(self) -> str:
        return (f"alpha1 {self.alpha1!r} alpha2 {self.alpha2!r} "
                f"eps {self.regularization_eps!r} loss {self.train_loss!r}\n")

    @classmethod
    def from_text(cls, text: str) -> "BoostModel":
        tokens = text.split()
        if len(tokens) != 8 or tokens[0::2] != ["alpha1", "alpha2", "eps", "loss"]:
            raise DataError("model file must read 'alpha1 <f> alpha2 <f> eps <f> loss <f>'")
        a1, a2, eps, loss = (float(t) for t in tokens[1::2])
        return cls(a1, a2, loss, eps)

    def save(self, path):
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path):
        return cls.from_text(Path(path).read_text())


def d_fh(a, b) -> float:
    """Euclidean distance between two flow hashes."""
    a = np.asarray(getattr(a, "values", a), dtype=np.float64)
    b = np.asarray(getattr(b, "values", b), dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"flow hashes differ in length: {a.size} vs {b.size}")
    return float(np.linalg.norm(a - b))


def d_boost(pair: DistancePair, model: BoostModel) -> float:
    return model.alpha1 * pair.d_dtw + model.alpha2 * pair.d_fh


def build_triplets(pairs, seed=0):
    """Index triples (anchor, positive, negative) over ``pairs``.

    Each matching pair is combined with every nonmatching pair that shares
    its reference; if none does, one nonmatching pair is drawn at random.
    """
    pairs = list(pairs)
    by_ref = defaultdict(list)
    negatives = []
    for k, p in enumerate(pairs):
        if p.label == NONMATCHING:
            by_ref[p.pair_id[0]].append(k)
            negatives.append(k)
    rng = np.random.default_rng(seed)
    triplets = []
    for k, p in enumerate(pairs):
        if p.label != MATCHING:
            continue
        shared = by_ref.get(p.pair_id[0])
        if shared:
            triplets.extend((p.pair_id[0], k, n) for n in shared)
        elif negatives:
            triplets.append((p.pair_id[0], k, negatives[int(rng.integers(len(negatives)))]))
    return triplets


def _difference_rows(pairs, triplets):
    """margin_t(alpha) = diff[t] @ alpha, with diff = d(i,j) - d(i,k)."""
    vec = np.array([[p.d_dtw, p.d_fh] for p in pairs], dtype=np.float64)
    pos = np.array([t[1] for t in triplets])
    neg = np.array([t[2] for t in triplets])
    return vec[pos] - vec[neg]


def hinge_objective(alpha, diff):
    """Sum of [margin + 1]_+ over triplets; ``alpha`` may be (..., 2)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    margins = alpha @ np.asarray(diff).T
    return np.maximum(margins + 1.0, 0.0).sum(axis=-1)


def solve_hinge_lp(diff, eps=1e-6):
    """Minimize sum_t xi_t + eps * (a1 + a2) subject to xi_t >= 0,
    xi_t >= 1 + diff_t . alpha, alpha >= 0. Returns alpha."""
    diff = np.asarray(diff, dtype=np.float64)
    T = len(diff)
    c = np.concatenate([[eps, eps], np.ones(T)])
    # diff_t . alpha - xi_t <= -1
    A = np.hstack([diff, -np.eye(T)])
    b = -np.ones(T)
    res = linprog(c, A_ub=A, b_ub=b, bounds=[(0, None)] * (T + 2), method="highs")
    if res.status != 0:
        raise ComputeError(f"LP solve failed: {res.message}")
    return np.maximum(res.x[:2], 0.0)


def train(pairs, triplets=None, eps: float = 1e-6, seed: int = 0) -> BoostModel:
    """Fit fusion weights on ``pairs``.

    ``triplets`` are (anchor, positive index, negative index) into
    ``pairs``; built with ``build_triplets`` when omitted.
    """
    pairs = list(pairs)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if triplets is None:
        triplets = build_triplets(pairs, seed)
    if not triplets:
        raise EmptyTripletSet("no (matching, nonmatching) triplets to train on")
    for _, j, k in triplets:
        if pairs[j].label != MATCHING or pairs[k].label != NONMATCHING:
            raise ValueError(f"triplet ({j}, {k}) does not pair matching with nonmatching")
    diff = _difference_rows(pairs, triplets)
    if not np.any(diff):
        warnings.warn("matching and nonmatching distances coincide in every triplet",
                      DegenerateTripletWarning, stacklevel=2)
        return BoostModel(0.0, 0.0, float(len(triplets)), eps, degenerate=True)
    alpha = solve_hinge_lp(diff, eps)
    loss = float(hinge_objective(alpha, diff))
    return BoostModel(float(alpha[0]), float(alpha[1]), loss, eps)


def split_pairs(pairs, seed=0):
    """50/50 split by reference id so both labels of one reference stay on
    the same side. Returns (train, test)."""
    pairs = list(pairs)
    refs = sorted({p.pair_id[0] for p in pairs})
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(refs))
    train_refs = {refs[k] for k in order[:len(refs) // 2]}
    train_set = [p for p in pairs if p.pair_id[0] in train_refs]
    test_set = [p for p in pairs if p.pair_id[0] not in train_refs]
    return train_set, test_set
