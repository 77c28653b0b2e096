"""Seeded synthetic videos: smooth textures drifting and spinning along
random piecewise constant velocity paths. Stand-in for a real corpus in tests and the
``synth`` command."""
from __future__ import annotations

import numpy as np

from .video_io import VideoTensor, quantize


def _texture(rng, n_waves=6, max_freq=4):
    amps = rng.uniform(0.3, 1.0, n_waves)
    fx = rng.integers(-max_freq, max_freq + 1, n_waves)
    fy = rng.integers(-max_freq, max_freq + 1, n_waves)
    fx[(fx == 0) & (fy == 0)] = 1
    phase = rng.uniform(0, 2 * np.pi, n_waves)
    return amps / amps.sum(), fx, fy, phase


def _render(tex, size, dx, dy, angle=0.0):
    """Texture rotated by ``angle`` about the frame centre, then shifted."""
    amps, fx, fy, phase = tex
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    c, s = np.cos(angle), np.sin(angle)
    px, py = xx - cx - dx, yy - cy - dy
    tx = c * px + s * py
    ty = -s * px + c * py
    img = np.zeros((h, w))
    for a, kx, ky, ph in zip(amps, fx, fy, phase):
        img += a * np.sin(2 * np.pi * (kx * tx / w + ky * ty / h) + ph)
    return 0.5 + 0.3 * img


def velocity_path(rng, n_frames, speed=(0.5, 2.0), run=(3, 8), spin=0.05):
    """Per-frame (dx, dy, dangle) steps, constant within runs of random
    length. ``spin`` bounds the rotation rate in radians per frame."""
    steps = np.empty((n_frames, 3))
    k = 0
    while k < n_frames:
        length = int(rng.integers(run[0], run[1] + 1))
        angle = rng.uniform(0, 2 * np.pi)
        s = rng.uniform(*speed)
        steps[k:k + length] = s * np.cos(angle), s * np.sin(angle), rng.uniform(-spin, spin)
        k += length
    return steps


def perturb_path(rng, steps, angle_sd, speed_sd):
    """Rotate and rescale each translation step and rescale each rotation
    step, independently per frame."""
    ang = rng.normal(0.0, angle_sd, len(steps))
    gain = np.exp(rng.normal(0.0, speed_sd, len(steps)))
    spin_gain = np.exp(rng.normal(0.0, speed_sd, len(steps)))
    c, s = np.cos(ang), np.sin(ang)
    dx, dy, da = steps[:, 0], steps[:, 1], steps[:, 2]
    return np.stack([gain * (c * dx - s * dy), gain * (s * dx + c * dy), spin_gain * da], axis=1)


def moving_texture(seed, n_frames=40, size=(64, 64), speed=(0.5, 2.0), run=(3, 8),
                   spin=0.05, base_steps=None, angle_sd=0.0, speed_sd=0.0,
                   source_id=None) -> VideoTensor:
    """Render one video. With ``base_steps`` the motion is that shared path
    perturbed per frame instead of a fresh random one."""
    rng = np.random.default_rng(seed)
    tex = _texture(rng)
    if base_steps is None:
        steps = velocity_path(rng, n_frames, speed, run, spin)
    else:
        steps = perturb_path(rng, np.asarray(base_steps)[:n_frames], angle_sd, speed_sd)
    pos = np.cumsum(steps, axis=0)
    pos -= pos[0]
    frames = np.stack([_render(tex, size, dx, dy, da) for dx, dy, da in pos])
    sid = source_id if source_id is not None else f"synth{seed:04d}"
    return VideoTensor(quantize(frames), 2, sid)


def corpus(n_videos, seed=0, n_frames=80, shared_motion=True, angle_sd=1.0, speed_sd=0.5,
           speed=(0.3, 1.0), spin=0.03, run=(3, 8), size=(64, 64)):
    """``n_videos`` distinct textures. With ``shared_motion`` they all follow
    perturbed copies of one base path, so motion alone only partly
    separates them."""
    base = None
    if shared_motion:
        base = velocity_path(np.random.default_rng([seed, 2 ** 31]), n_frames, speed, run, spin)
    else:
        angle_sd = speed_sd = 0.0
    return [moving_texture(seed * 100_003 + k, n_frames=n_frames, size=size, speed=speed,
                           run=run, spin=spin, base_steps=base, angle_sd=angle_sd,
                           speed_sd=speed_sd, source_id=f"synth{k:04d}")
            for k in range(n_videos)]
