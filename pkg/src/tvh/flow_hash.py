"""Flow hashing: frame averaging, optical flow between successive averaged
images, magnitude-weighted orientation histograms, L2 normalization."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import cv2
import numpy as np
from scipy.ndimage import correlate1d

from .errors import AllZeroFlow, DimensionMismatch, VideoTooShort

# Horn & Schunck's neighbourhood average (centre excluded).
_HS_AVG = np.array([[1 / 12, 1 / 6, 1 / 12],
                    [1 / 6, 0.0, 1 / 6],
                    [1 / 12, 1 / 6, 1 / 12]])


@dataclass(frozen=True)
class FlowParams:
    hs_lambda: float = 15.0
    n_iter: int = 200
    # The solver works on 8-bit intensity units so hs_lambda keeps its
    # customary meaning; [0, 1] inputs are multiplied by this.
    intensity_scale: float = 255.0


@dataclass(frozen=True)
class FlowHashConfig:
    bins: int = 8
    segments: int = 9
    hs_lambda: float = 15.0
    hs_iters: int = 200
    overlap_stride: int | None = None

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("need at least 2 orientation bins")
        if self.segments < 2:
            raise ValueError("need at least 2 segments")
        if self.hs_iters < 0:
            raise ValueError("hs_iters must be non-negative")
        if self.overlap_stride is not None and self.overlap_stride < 1:
            raise ValueError("overlap_stride must be positive")

    @property
    def flow_params(self) -> FlowParams:
        return FlowParams(self.hs_lambda, self.hs_iters)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class FlowField:
    u: np.ndarray
    v_comp: np.ndarray

    @property
    def magnitude(self):
        return np.hypot(self.u, self.v_comp)


@dataclass(frozen=True, eq=False)
class FlowHash:
    values: np.ndarray
    bins: int

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True).ravel()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def transitions(self) -> int:
        return len(self.values) // self.bins

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        if not isinstance(other, FlowHash):
            return NotImplemented
        return self.bins == other.bins and np.array_equal(self.values, other.values)

    __hash__ = None

    @property
    def is_sentinel(self) -> bool:
        return not np.any(self.values)

    @classmethod
    def sentinel(cls, cfg: FlowHashConfig | None = None):
        """All-zero hash substituted for static videos."""
        cfg = cfg or FlowHashConfig()
        return cls(np.zeros(cfg.bins * (cfg.segments - 1)), cfg.bins)


def frame_average(v, J: int, stride: int | None = None):
    """Mean of each run of ``J`` consecutive frames (TIRIs).

    Segments start every ``stride`` frames (``J`` by default, i.e. no
    overlap); a trailing partial segment is dropped. Callers that need a
    transition check for at least two images themselves.
    """
    frames = v.frames if hasattr(v, "frames") else np.asarray(v, dtype=np.float64)
    if J < 1:
        raise ValueError("segment length must be positive")
    stride = J if stride is None else stride
    n = len(frames)
    if n < J:
        raise VideoTooShort(f"{n} frames hold no full segment at J={J}")
    starts = range(0, n - J + 1, stride)
    return np.stack([frames[s:s + J].mean(axis=0) for s in starts])


def _gradients(img):
    # central differences inside, one-sided at the border
    gx = correlate1d(img, [-0.5, 0.0, 0.5], axis=1, mode="nearest")
    gy = correlate1d(img, [-0.5, 0.0, 0.5], axis=0, mode="nearest")
    return gx, gy


def _smooth(x):
    return cv2.filter2D(x, -1, _HS_AVG, borderType=cv2.BORDER_REPLICATE)


def optical_flow(a, b, params: FlowParams | None = None) -> FlowField:
    """Horn-Schunck flow from image ``a`` to image ``b``.

    Fixed-point sweeps of the classic update, starting from zero flow::

        u = u_avg - Ix (Ix u_avg + Iy v_avg + It) / (lambda^2 + Ix^2 + Iy^2)

    Spatial derivatives are central differences of the mean of both images,
    the temporal derivative is ``b - a``. ``u`` is the displacement along
    columns, ``v_comp`` along rows.
    """
    params = params or FlowParams()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"flow inputs differ in shape: {a.shape} vs {b.shape}")
    if a.ndim != 2 or min(a.shape) < 8:
        raise DimensionMismatch(f"flow inputs must be 2-D and at least 8x8, got {a.shape}")
    a = a * params.intensity_scale
    b = b * params.intensity_scale
    ix, iy = _gradients(0.5 * (a + b))
    it = b - a
    u = np.zeros_like(a)
    v = np.zeros_like(a)
    denom = params.hs_lambda ** 2 + ix * ix + iy * iy
    for _ in range(params.n_iter):
        u_avg = _smooth(u)
        v_avg = _smooth(v)
        t = (ix * u_avg + iy * v_avg + it) / denom
        u = u_avg - ix * t
        v = v_avg - iy * t
    return FlowField(u, v)


def hoof(f: FlowField, B: int):
    """Histogram of flow orientations over the full circle, each pixel
    weighted by its flow magnitude. Not normalized."""
    if B < 2:
        raise ValueError("need at least 2 bins")
    u = np.ravel(f.u)
    v = np.ravel(f.v_comp)
    mag = np.hypot(u, v)
    theta = np.arctan2(v, u)
    idx = np.floor(B * (theta + math.pi) / (2 * math.pi)).astype(np.intp)
    idx = np.clip(idx, 0, B - 1)
    moving = mag > 0
    return np.bincount(idx[moving], weights=mag[moving], minlength=B).astype(np.float64)


def segment_length(n_frames: int, segments: int) -> int:
    return n_frames // segments


def transition_histograms(v, cfg: FlowHashConfig | None = None):
    """Raw (unnormalized) orientation histograms, one row per transition."""
    cfg = cfg or FlowHashConfig()
    n = len(v.frames if hasattr(v, "frames") else v)
    J = segment_length(n, cfg.segments)
    if J < 1:
        raise VideoTooShort(f"{n} frames cannot be split into {cfg.segments} segments")
    tiris = frame_average(v, J, cfg.overlap_stride)[:cfg.segments]
    if len(tiris) < 2:
        raise VideoTooShort(f"{n} frames give fewer than 2 averaged images at J={J}")
    params = cfg.flow_params
    return np.stack([hoof(optical_flow(tiris[k], tiris[k + 1], params), cfg.bins)
                     for k in range(len(tiris) - 1)])


def flow_hash(v, cfg: FlowHashConfig | None = None) -> FlowHash:
    """Unit-norm concatenation of per-transition orientation histograms.

    Raises AllZeroFlow for videos with no detectable motion; see
    ``flow_hash_or_sentinel`` for the substituting variant.
    """
    cfg = cfg or FlowHashConfig()
    h = transition_histograms(v, cfg).ravel()
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise AllZeroFlow("no motion between averaged frames")
    return FlowHash(h / norm, cfg.bins)


def flow_hash_or_sentinel(v, cfg: FlowHashConfig | None = None) -> FlowHash:
    try:
        return flow_hash(v, cfg)
    except AllZeroFlow:
        return FlowHash.sentinel(cfg)
