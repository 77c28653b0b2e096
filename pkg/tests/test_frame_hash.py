import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tvh.errors import DegenerateFrame
from tvh.frame_hash import dct2, extract_frame_hashes
from tvh.video_io import VideoTensor

from .oracles import naive_dct2

frames_8x8 = arrays(np.float64, (8, 8), elements=st.floats(0, 1))


def test_constant_frame_is_dc_only():
    c = 0.3
    out = dct2(np.full((6, 10), c))
    assert out[0, 0] == pytest.approx(c * math.sqrt(60), abs=1e-12)
    out[0, 0] = 0
    assert np.abs(out).max() < 1e-12


def test_basis_function_hits_one_coefficient():
    h, w = 8, 12
    y = np.arange(w)
    frame = np.tile(np.cos(math.pi * (2 * y + 1) / (2 * w)), (h, 1))
    out = dct2(frame)
    assert abs(out[0, 1]) > 1
    out[0, 1] = 0
    assert np.abs(out).max() < 1e-12


def test_matches_naive_sum(rng):
    for _ in range(5):
        f = rng.random((8, 8))
        assert np.abs(dct2(f) - naive_dct2(f)).max() < 1e-9


def test_rejects_tiny_frames():
    with pytest.raises(DegenerateFrame):
        dct2(np.zeros((1, 8)))
    with pytest.raises(DegenerateFrame):
        extract_frame_hashes(VideoTensor(np.zeros((2, 8, 1))))


def test_constant_video_hashes_to_zero():
    h = extract_frame_hashes(VideoTensor(np.full((4, 16, 16), 0.7)))
    assert h.frame_count == 4 and len(h.flatten()) == 8
    assert np.abs(h.coeffs).max() < 1e-12


def test_horizontal_ramp():
    w = 16
    frame = np.tile(np.arange(w) / w, (16, 1))
    h = extract_frame_hashes(VideoTensor(np.stack([frame] * 3)))
    assert np.all(np.abs(h.coeffs[:, 0]) > 0.1)
    assert np.all(h.coeffs[:, 0] == h.coeffs[0, 0])
    assert np.abs(h.coeffs[:, 1]).max() < 1e-12


def test_agrees_with_per_frame_oracle(rng):
    frames = rng.random((3, 8, 8))
    h = extract_frame_hashes(VideoTensor(frames))
    for k in range(3):
        ref = naive_dct2(frames[k])
        assert np.allclose(h.coeffs[k], [ref[0, 1], ref[1, 0]], atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(frames_8x8, st.floats(-0.5, 0.5))
def test_brightness_offset_invariance(frame, offset):
    a = extract_frame_hashes(frame[None])
    b = extract_frame_hashes((frame + offset)[None])
    assert np.allclose(a.coeffs, b.coeffs, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(frames_8x8, st.floats(-3, 3))
def test_linearity(frame, scale):
    a = extract_frame_hashes(frame[None])
    b = extract_frame_hashes((scale * frame)[None])
    assert np.allclose(scale * a.coeffs, b.coeffs, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(frames_8x8)
def test_horizontal_flip_negates_first_coefficient(frame):
    a = extract_frame_hashes(frame[None]).coeffs[0]
    b = extract_frame_hashes(frame[:, ::-1][None]).coeffs[0]
    assert abs(b[0] + a[0]) < 1e-9
    assert abs(b[1] - a[1]) < 1e-9
