"""Bilinear sampling shared by ingest resizing and the spatial attack."""
import numpy as np


def sample_bilinear(img, rows, cols):
    """Sample ``img`` at fractional coordinates, clamping out-of-range reads
    to the nearest edge pixel.

    Interpolation is written as ``a + w * (b - a)`` so a constant image
    samples back to the exact same constant.
    """
    h, w = img.shape
    rows = np.clip(np.asarray(rows, dtype=np.float64), 0.0, h - 1)
    cols = np.clip(np.asarray(cols, dtype=np.float64), 0.0, w - 1)
    r0 = np.floor(rows).astype(np.intp)
    c0 = np.floor(cols).astype(np.intp)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    wr = rows - r0
    wc = cols - c0
    top = img[r0, c0] + wc * (img[r0, c1] - img[r0, c0])
    bot = img[r1, c0] + wc * (img[r1, c1] - img[r1, c0])
    return top + wr * (bot - top)


def resize_bilinear(img, height, width):
    """Resize with pixel-center alignment (the OpenCV/PIL convention)."""
    h, w = img.shape
    if (h, w) == (height, width):
        return np.array(img, dtype=np.float64, copy=True)
    rows = (np.arange(height) + 0.5) * (h / height) - 0.5
    cols = (np.arange(width) + 0.5) * (w / width) - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return sample_bilinear(np.asarray(img, dtype=np.float64), rr, cc)
