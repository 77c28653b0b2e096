import numpy as np
import pytest

from tvh import synthetic
from tvh.video_io import VideoTensor

_acceptance_lines = []


def record_acceptance(line):
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def moving_video():
    return synthetic.moving_texture(7, n_frames=40)


def grid_video(rng, n=3, h=16, w=16, fps=2):
    """Random tensor on the 8-bit grid."""
    return VideoTensor(rng.integers(0, 256, (n, h, w)) / 255.0, fps, "grid")
