"""Per-frame DCT hashes used as the time series for synchronization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn

from .errors import DegenerateFrame


def dct2(frame):
    """Orthonormal 2-D DCT-II of a single frame."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or min(frame.shape) < 2:
        raise DegenerateFrame(f"DCT needs a 2-D frame of at least 2x2, got {frame.shape}")
    return dctn(frame, type=2, norm="ortho")


@dataclass(frozen=True, eq=False)
class FrameHashSeries:
    """One (horizontal AC, vertical AC) pair per frame, shape (frames, 2)."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.float64, copy=True).reshape(-1, 2)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def frame_count(self) -> int:
        return self.coeffs.shape[0]

    def __len__(self):
        return self.frame_count

    def flatten(self):
        return self.coeffs.ravel()

    def __eq__(self, other):
        if not isinstance(other, FrameHashSeries):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None


def frame_hash(frame):
    c = dct2(frame)
    # (0, 1): first column frequency, i.e. horizontal variation
    return np.array([c[0, 1], c[1, 0]])


def extract_frame_hashes(v) -> FrameHashSeries:
    """Hash every frame of a video (or a raw (frames, H, W) array)."""
    frames = v.frames if hasattr(v, "frames") else np.asarray(v, dtype=np.float64)
    if frames.ndim != 3 or min(frames.shape[1:]) < 2:
        raise DegenerateFrame(f"frames of shape {frames.shape[1:]} are too small for a DCT")
    c = dctn(frames, type=2, norm="ortho", axes=(1, 2))
    return FrameHashSeries(np.stack([c[:, 0, 1], c[:, 1, 0]], axis=1))
