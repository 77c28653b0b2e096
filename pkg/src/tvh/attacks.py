"""Content-preserving attacks used to derive query videos from references.

Randomness comes from numpy's PCG64 bit generator seeded with the
AttackSpec's 64-bit seed; golden tests pin its output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._imaging import resize_bilinear, sample_bilinear
from .errors import TooShortAfterDrop

SPATIAL = "spatial"
TEMPORAL = "temporal"
SPATIO_TEMPORAL = "spatio-temporal"
KINDS = (SPATIAL, TEMPORAL, SPATIO_TEMPORAL)


@dataclass(frozen=True)
class AttackSpec:
    kind: str = SPATIO_TEMPORAL
    rotation_deg: float = 5.0
    crop_fraction: float = 0.75
    intensity_src: tuple = (0.2, 0.8)
    intensity_dst: tuple = (0.0, 1.0)
    drop_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"attack kind must be one of {KINDS}, got {self.kind!r}")
        if not 0 < self.crop_fraction <= 1:
            raise ValueError("crop_fraction must be in (0, 1]")
        if not 0 <= self.drop_fraction < 1:
            raise ValueError("drop_fraction must be in [0, 1)")
        for lo, hi in (self.intensity_src, self.intensity_dst):
            if not lo < hi:
                raise ValueError("intensity ranges need low < high")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def identity(cls, kind=SPATIAL, **kw):
        base = dict(rotation_deg=0.0, crop_fraction=1.0, intensity_src=(0.0, 1.0),
                    intensity_dst=(0.0, 1.0), drop_fraction=0.0)
        base.update(kw)
        return cls(kind=kind, **base)


@dataclass(frozen=True, eq=False)
class AttackedVideo:
    video: object
    dropped: tuple = field(default=())

    @property
    def survivors(self):
        """Original indices of the kept frames, in order."""
        n = len(self.video) + len(self.dropped)
        gone = set(self.dropped)
        return tuple(k for k in range(n) if k not in gone)


def rotate(frame, degrees):
    """Rotate about the frame centre; samples outside the frame repeat the
    nearest edge pixel."""
    if degrees == 0:
        return np.array(frame, dtype=np.float64, copy=True)
    h, w = frame.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    t = math.radians(degrees)
    cos_t, sin_t = math.cos(t), math.sin(t)
    rr, cc = np.mgrid[0:h, 0:w].astype(np.float64)
    dy, dx = rr - cy, cc - cx
    # inverse map: output pixel -> source location (counter-clockwise on screen)
    src_c = cx + cos_t * dx - sin_t * dy
    src_r = cy + sin_t * dx + cos_t * dy
    return sample_bilinear(np.asarray(frame, dtype=np.float64), src_r, src_c)


def center_crop_resize(frame, fraction):
    h, w = frame.shape
    ch = max(1, int(round(h * fraction)))
    cw = max(1, int(round(w * fraction)))
    if (ch, cw) == (h, w):
        return np.array(frame, dtype=np.float64, copy=True)
    top = (h - ch) // 2
    left = (w - cw) // 2
    return resize_bilinear(frame[top:top + ch, left:left + cw], h, w)


def remap_intensity(x, src=(0.2, 0.8), dst=(0.0, 1.0)):
    """Linear map of ``src`` onto ``dst``, clamped to [0, 1]."""
    (sl, sh), (dl, dh) = src, dst
    y = (np.asarray(x, dtype=np.float64) - sl) / (sh - sl) * (dh - dl) + dl
    return np.clip(y, 0.0, 1.0)


def spatial_attack(v, spec: AttackSpec):
    if spec.kind not in (SPATIAL, SPATIO_TEMPORAL):
        raise ValueError(f"spatial attack requested with kind {spec.kind!r}")
    out = []
    for frame in v.frames:
        f = rotate(frame, spec.rotation_deg)
        f = center_crop_resize(f, spec.crop_fraction)
        out.append(remap_intensity(f, spec.intensity_src, spec.intensity_dst))
    return v.with_frames(np.stack(out))


def drop_count(n, fraction):
    return math.floor(round(fraction * n, 9))


def temporal_attack(v, spec: AttackSpec):
    """Remove floor(drop_fraction * n) frames chosen uniformly without
    replacement. Returns (survivors, sorted dropped indices)."""
    if spec.kind not in (TEMPORAL, SPATIO_TEMPORAL):
        raise ValueError(f"temporal attack requested with kind {spec.kind!r}")
    n = len(v)
    k = drop_count(n, spec.drop_fraction)
    if n - k < 2:
        raise TooShortAfterDrop(f"only {n - k} of {n} frames would survive")
    if k == 0:
        return v.with_frames(v.frames), ()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    dropped = np.sort(rng.choice(n, size=k, replace=False))
    keep = np.setdiff1d(np.arange(n), dropped)
    return v.with_frames(v.frames[keep]), tuple(int(d) for d in dropped)


def apply(v, spec: AttackSpec) -> AttackedVideo:
    """Run the attack ``spec.kind`` describes; spatial distortion goes first
    when both are requested."""
    if spec.kind == SPATIAL:
        return AttackedVideo(spatial_attack(v, spec))
    if spec.kind == TEMPORAL:
        return AttackedVideo(*temporal_attack(v, spec))
    return AttackedVideo(*temporal_attack(spatial_attack(v, spec), spec))
