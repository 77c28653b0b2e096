"""Video ingestion into a canonical grayscale tensor, plus the raw container.

Every source is reduced to luma, resampled to the target frame rate by
nearest-frame selection, resized bilinearly and snapped to the 8-bit grid
(``k / 255``), so the raw container can hold any ingested tensor exactly.

Raw container layout (all integers unsigned 32-bit little-endian)::

    b"TVH0" | height | width | frame_count | fps_num | fps_den | frames

where ``frames`` is ``frame_count * height * width`` bytes of row-major
8-bit luma.
"""
from __future__ import annotations

import os
import re
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ._imaging import resize_bilinear
from .errors import CorruptStream, EmptyVideo, IoFailure, UnsupportedFormat

RAW_MAGIC = b"TVH0"
Y4M_MAGIC = b"YUV4MPEG2"
_RAW_HEADER = struct.Struct("<4s5I")


@dataclass(frozen=True, eq=False)
class VideoTensor:
    """Immutable stack of luma frames with values in [0, 1]."""

    frames: np.ndarray
    fps: Fraction = Fraction(2)
    source_id: str = ""

    def __post_init__(self):
        frames = np.array(self.frames, dtype=np.float64, copy=True)
        if frames.ndim != 3:
            raise ValueError(f"frames must be (count, height, width), got shape {frames.shape}")
        if frames.shape[0] == 0:
            raise EmptyVideo("video has no frames")
        if not np.all(np.isfinite(frames)) or frames.min() < 0.0 or frames.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")
        fps = Fraction(self.fps)
        if fps <= 0:
            raise ValueError("fps must be positive")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", fps)

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def __len__(self):
        return self.frames.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VideoTensor):
            return NotImplemented
        return (self.fps == other.fps and self.frames.shape == other.frames.shape
                and np.array_equal(self.frames, other.frames))

    __hash__ = None

    def with_frames(self, frames, source_id=None) -> "VideoTensor":
        return VideoTensor(frames, self.fps, self.source_id if source_id is None else source_id)


@dataclass(frozen=True)
class IngestConfig:
    target_height: int = 64
    target_width: int = 64
    target_fps: Fraction = field(default=Fraction(2))
    luma_only: bool = True

    def __post_init__(self):
        if self.target_height < 8 or self.target_width < 8:
            raise ValueError("target dimensions must be at least 8")
        fps = Fraction(self.target_fps)
        if fps <= 0:
            raise ValueError("target_fps must be positive")
        object.__setattr__(self, "target_fps", fps)


def quantize(frames):
    """Snap intensities to the 8-bit grid k/255."""
    return np.round(np.clip(frames, 0.0, 1.0) * 255.0) / 255.0


def nearest_frame_indices(n_frames: int, src_fps, dst_fps) -> list[int]:
    """Source frame index for each output frame at ``dst_fps``.

    Output frame k sits at time k / dst_fps and takes the source frame
    nearest to it (halves round up). Output stops at the first time whose
    nearest source frame does not exist.
    """
    ratio = Fraction(src_fps) / Fraction(dst_fps)
    out = []
    k = 0
    while True:
        idx = int(k * ratio + Fraction(1, 2))  # floor(x + 1/2), x >= 0
        if idx > n_frames - 1:
            break
        out.append(idx)
        k += 1
    return out


# -- readers -----------------------------------------------------------------

def _read_raw(data: bytes):
    if len(data) < _RAW_HEADER.size:
        raise CorruptStream("raw header truncated")
    _, h, w, n, num, den = _RAW_HEADER.unpack_from(data)
    if den == 0 or num == 0:
        raise CorruptStream("raw header has zero fps term")
    payload = data[_RAW_HEADER.size:]
    expected = n * h * w
    if len(payload) != expected:
        raise CorruptStream(f"expected {expected} frame bytes, found {len(payload)}")
    if n == 0:
        raise EmptyVideo("raw file holds zero frames")
    frames = np.frombuffer(payload, dtype=np.uint8).reshape(n, h, w)
    return frames.astype(np.float64) / 255.0, Fraction(num, den)


_Y4M_CHROMA = {
    "420": lambda w, h: 2 * ((w + 1) // 2) * ((h + 1) // 2),
    "420jpeg": lambda w, h: 2 * ((w + 1) // 2) * ((h + 1) // 2),
    "420paldv": lambda w, h: 2 * ((w + 1) // 2) * ((h + 1) // 2),
    "420mpeg2": lambda w, h: 2 * ((w + 1) // 2) * ((h + 1) // 2),
    "422": lambda w, h: 2 * ((w + 1) // 2) * h,
    "444": lambda w, h: 2 * w * h,
    "mono": lambda w, h: 0,
}


def _read_y4m(data: bytes):
    eol = data.find(b"\n")
    if eol < 0:
        raise CorruptStream("Y4M header has no terminating newline")
    tokens = data[:eol].decode("ascii", errors="replace").split()
    width = height = None
    fps = Fraction(25)
    colorspace = "420"
    for tok in tokens[1:]:
        tag, val = tok[0], tok[1:]
        if tag == "W":
            width = int(val)
        elif tag == "H":
            height = int(val)
        elif tag == "F":
            num, den = val.split(":")
            fps = Fraction(int(num), int(den))
        elif tag == "C":
            colorspace = val
    if width is None or height is None:
        raise CorruptStream("Y4M header lacks W or H")
    if colorspace not in _Y4M_CHROMA:
        raise UnsupportedFormat(f"Y4M colorspace C{colorspace} is not supported")
    luma = width * height
    chroma = _Y4M_CHROMA[colorspace](width, height)
    frames = []
    pos = eol + 1
    while pos < len(data):
        if not data.startswith(b"FRAME", pos):
            raise CorruptStream(f"missing FRAME marker at byte {pos}")
        eol = data.find(b"\n", pos)
        if eol < 0:
            raise CorruptStream("FRAME header truncated")
        start = eol + 1
        if start + luma + chroma > len(data):
            raise CorruptStream("frame payload truncated")
        y = np.frombuffer(data, dtype=np.uint8, count=luma, offset=start)
        frames.append(y.reshape(height, width))
        pos = start + luma + chroma
    if not frames:
        raise EmptyVideo("Y4M stream holds zero frames")
    return np.stack(frames).astype(np.float64) / 255.0, fps


_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def _read_pgm(path: Path):
    data = path.read_bytes()
    fields = []
    pos = 0
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise CorruptStream(f"{path.name}: PGM header truncated")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise UnsupportedFormat(f"{path.name}: only binary PGM (P5) is supported")
    width, height, maxval = (int(f) for f in fields[1:])
    if not 0 < maxval < 65536:
        raise CorruptStream(f"{path.name}: bad maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    count = width * height
    if len(data) - pos < count * dtype.itemsize:
        raise CorruptStream(f"{path.name}: pixel payload truncated")
    img = np.frombuffer(data, dtype=dtype, count=count, offset=pos).reshape(height, width)
    return img.astype(np.float64) / maxval


def _read_pgm_dir(path: Path):
    files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".pgm")
    if not files:
        raise EmptyVideo(f"{path} contains no .pgm files")
    frames = [_read_pgm(p) for p in files]
    if len({f.shape for f in frames}) != 1:
        raise CorruptStream(f"{path}: PGM frames differ in size")
    return np.stack(frames)


def read_source(path, source_fps=None):
    """Decode ``path`` to (luma frames in [0, 1], fps) without resampling."""
    path = Path(path)
    if path.is_dir():
        return _read_pgm_dir(path), Fraction(source_fps if source_fps is not None else 2)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if data.startswith(RAW_MAGIC):
        return _read_raw(data)
    if data.startswith(Y4M_MAGIC):
        return _read_y4m(data)
    raise UnsupportedFormat(f"{path}: unrecognized container")


def normalize(frames, fps, cfg: IngestConfig, source_id=""):
    """Resample decoded frames to ``cfg`` and build the tensor."""
    idx = nearest_frame_indices(len(frames), fps, cfg.target_fps)
    out = np.stack([resize_bilinear(frames[i], cfg.target_height, cfg.target_width) for i in idx])
    return VideoTensor(quantize(out), cfg.target_fps, source_id)


def ingest(path, cfg: IngestConfig | None = None, source_fps=None) -> VideoTensor:
    """Load a raw, Y4M or PGM-directory video as a normalized tensor.

    ``source_fps`` only applies to PGM directories, which carry no timing.
    """
    cfg = cfg or IngestConfig()
    frames, fps = read_source(path, source_fps)
    return normalize(frames, fps, cfg, source_id=Path(path).stem)


def write_raw(v: VideoTensor, path) -> None:
    """Write ``v`` to the raw container, rounding to 8-bit luma."""
    if not isinstance(v, VideoTensor):
        raise TypeError("write_raw expects a VideoTensor")
    payload = np.round(v.frames * 255.0).astype(np.uint8).tobytes()
    header = _RAW_HEADER.pack(RAW_MAGIC, v.height, v.width, len(v),
                              v.fps.numerator, v.fps.denominator)
    tmp = f"{path}.part"
    try:
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def write_y4m(v: VideoTensor, path) -> None:
    """Write a monochrome Y4M stream (used by tests and the synth command)."""
    header = f"YUV4MPEG2 W{v.width} H{v.height} F{v.fps.numerator}:{v.fps.denominator} Ip A1:1 Cmono\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for frame in v.frames:
            fh.write(b"FRAME\n")
            fh.write(np.round(frame * 255.0).astype(np.uint8).tobytes())


def write_pgm_dir(v: VideoTensor, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for k, frame in enumerate(v.frames):
        with open(directory / f"frame_{k:05d}.pgm", "wb") as fh:
            fh.write(f"P5\n{v.width} {v.height}\n255\n".encode("ascii"))
            fh.write(np.round(frame * 255.0).astype(np.uint8).tobytes())
