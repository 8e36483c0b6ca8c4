"""Deterministic in-loop denoising filters and the noise-variance estimator.

Every filter is a pure function of (frame, config, noise estimate): encoder
and decoder run it on signals both possess and must get bit-identical
output, which is what keeps the lifting transform lossless. Filter strength
is h = xi * sigma_n^2. All internal arithmetic is float64 with fixed
evaluation order; the exp() in NLM and the whole BM3D transform stage run in
shared (backend-independent) code so the compiled and fallback kernels agree
to the last bit. The final step of every filter rounds half away from zero
to integer gray levels.

Boundary handling is clamp-to-edge throughout. Structural parameters are
fixed module constants, not part of the bitstream:

  awf   5x5 window, Wiener gain max(0, var - h) / var on the local mean
  nlm   7x7 search window, 3x3 patches, weight exp(-max(0, d^2 - 2h) / h)
        where d^2 is the mean squared patch difference
  gif   guided filter with the input as its own guide, radius 4, eps = h
  bm3d_simplified
        single-stage collaborative filtering: 8x8 blocks on a stride-4
        reference grid, 16 best SSD matches within +-8, orthonormal 3-D DCT,
        hard threshold 2.7 * sqrt(h), uniform-weight aggregation
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import backend
from .errors import ParameterError
from .volume import Frame

KINDS = ("identity", "awf", "nlm", "gif", "bm3d_simplified")

AWF_RADIUS = 2
NLM_SEARCH_RADIUS = 3
NLM_PATCH_RADIUS = 1
GIF_RADIUS = 4
BM3D_BLOCK = 8
BM3D_STRIDE = 4
BM3D_SEARCH_RADIUS = 8
BM3D_GROUP = 16
BM3D_THRESHOLD_FACTOR = 2.7


@dataclass(frozen=True)
class DenoiseConfig:
    kind: str = "identity"
    xi: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown denoiser kind {self.kind!r}")
        object.__setattr__(self, "xi", Fraction(self.xi))
        if self.xi < 0:
            raise ParameterError("xi must be >= 0")


@dataclass(frozen=True)
class NoiseEstimate:
    sigma_sq: float


def estimate_noise_variance(frame: Frame) -> NoiseEstimate:
    """Laplacian-difference noise estimate on the 3x3 interior responses.

    The absolute responses are accumulated as exact integers, so encoder and
    decoder agree regardless of summation order; only the final scalar
    arithmetic is floating point.
    """
    a = frame.data.astype(np.int64)
    h, w = a.shape
    if h < 3 or w < 3:
        raise ParameterError("noise estimation needs a frame of at least 3x3")
    resp = (
        a[:-2, :-2] - 2 * a[:-2, 1:-1] + a[:-2, 2:]
        - 2 * a[1:-1, :-2] + 4 * a[1:-1, 1:-1] - 2 * a[1:-1, 2:]
        + a[2:, :-2] - 2 * a[2:, 1:-1] + a[2:, 2:]
    )
    total = int(np.abs(resp).sum())
    sigma = math.sqrt(math.pi / 2.0) * total / (6.0 * (w - 2) * (h - 2))
    return NoiseEstimate(sigma * sigma)


def _round_half_away(x: np.ndarray) -> np.ndarray:
    mag = np.floor(np.abs(x) + 0.5)
    return np.where(x < 0.0, -mag, mag).astype(np.int32)


def _awf(a: np.ndarray, h: float) -> np.ndarray:
    r = AWF_RADIUS
    n = float((2 * r + 1) ** 2)
    pad = np.pad(a, r, mode="edge")
    kern = backend.get_backend()
    s1 = kern.box_sum(pad, r)
    s2 = kern.box_sum(pad * pad, r)
    mean = s1 / n
    var = s2 / n - mean * mean
    safe = np.where(var > 0.0, var, 1.0)
    gain = np.where(var > 0.0, np.maximum(var - h, 0.0) / safe, 0.0)
    return mean + gain * (a - mean)


def _nlm(a: np.ndarray, h: float) -> np.ndarray:
    height, width = a.shape
    s = NLM_SEARCH_RADIUS
    p = s + NLM_PATCH_RADIUS
    pad = np.pad(a, p, mode="edge")
    kern = backend.get_backend()
    num = np.zeros((height, width), dtype=np.float64)
    den = np.zeros((height, width), dtype=np.float64)
    for oy in range(-s, s + 1):
        for ox in range(-s, s + 1):
            d2 = kern.nlm_offset_sqdist(pad, oy, ox, height, width)
            w = np.exp(-np.maximum(d2 - 2.0 * h, 0.0) / h)
            v = pad[p + oy:p + oy + height, p + ox:p + ox + width]
            num += w * v
            den += w
    return num / den


def _gif(a: np.ndarray, h: float) -> np.ndarray:
    r = GIF_RADIUS
    n = float((2 * r + 1) ** 2)
    kern = backend.get_backend()
    pad = np.pad(a, r, mode="edge")
    mean = kern.box_sum(pad, r) / n
    mean_sq = kern.box_sum(pad * pad, r) / n
    var = mean_sq - mean * mean
    denom = var + h
    coef_a = np.where((var > 0.0) & (denom > 0.0),
                      var / np.where(denom > 0.0, denom, 1.0), 0.0)
    coef_b = mean - coef_a * mean
    mean_a = kern.box_sum(np.pad(coef_a, r, mode="edge"), r) / n
    mean_b = kern.box_sum(np.pad(coef_b, r, mode="edge"), r) / n
    return mean_a * a + mean_b


def _dct_matrix(n: int) -> np.ndarray:
    m = np.empty((n, n), dtype=np.float64)
    for u in range(n):
        c = math.sqrt(1.0 / n) if u == 0 else math.sqrt(2.0 / n)
        for k in range(n):
            m[u, k] = c * math.cos(math.pi * (2 * k + 1) * u / (2.0 * n))
    return m


def _apply_mat(x: np.ndarray, m: np.ndarray, axis: int) -> np.ndarray:
    """out[.., u, ..] = sum_k m[u, k] x[.., k, ..], accumulated ascending k."""
    xm = np.moveaxis(x, axis, -1)
    out = np.empty(xm.shape[:-1] + (m.shape[0],), dtype=np.float64)
    for u in range(m.shape[0]):
        acc = m[u, 0] * xm[..., 0]
        for k in range(1, m.shape[1]):
            acc += m[u, k] * xm[..., k]
        out[..., u] = acc
    return np.moveaxis(out, -1, axis)


def _ref_grid(extent: int) -> list[int]:
    last = extent - BM3D_BLOCK
    grid = list(range(0, last + 1, BM3D_STRIDE))
    if grid[-1] != last:
        grid.append(last)
    return grid


def _bm3d(a: np.ndarray, h: float) -> np.ndarray:
    height, width = a.shape
    if height < BM3D_BLOCK or width < BM3D_BLOCK:
        return a.copy()
    b = BM3D_BLOCK
    ys = _ref_grid(height)
    xs = _ref_grid(width)
    ref_ys = np.repeat(np.array(ys, dtype=np.int32), len(xs))
    ref_xs = np.tile(np.array(xs, dtype=np.int32), len(ys))
    ai = np.ascontiguousarray(a.astype(np.int64))
    coords, counts = backend.get_backend().bm3d_match(
        ai, ref_ys, ref_xs, b, BM3D_SEARCH_RADIUS, BM3D_GROUP
    )
    thr = BM3D_THRESHOLD_FACTOR * math.sqrt(h)
    windows = sliding_window_view(a, (b, b))
    mat2d = _dct_matrix(b)
    total = len(ref_ys)
    estimates = [None] * total
    for cnt in np.unique(counts):
        cnt = int(cnt)
        idx = np.where(counts == cnt)[0]
        blocks = windows[coords[idx, :cnt, 0], coords[idx, :cnt, 1]].astype(np.float64)
        spec = _apply_mat(blocks, mat2d, 3)
        spec = _apply_mat(spec, mat2d, 2)
        matg = _dct_matrix(cnt)
        spec = _apply_mat(spec, matg, 1)
        spec = np.where(np.abs(spec) > thr, spec, 0.0)
        spec = _apply_mat(spec, matg.T, 1)
        spec = _apply_mat(spec, mat2d.T, 2)
        est = _apply_mat(spec, mat2d.T, 3)
        for j, gi in enumerate(idx):
            estimates[int(gi)] = est[j]
    num = np.zeros((height, width), dtype=np.float64)
    den = np.zeros((height, width), dtype=np.float64)
    for gi in range(total):
        est = estimates[gi]
        for n in range(int(counts[gi])):
            y = int(coords[gi, n, 0])
            x = int(coords[gi, n, 1])
            num[y:y + b, x:x + b] += est[n]
            den[y:y + b, x:x + b] += 1.0
    return num / den


_FILTERS = {"awf": _awf, "nlm": _nlm, "gif": _gif, "bm3d_simplified": _bm3d}


def strength(cfg: DenoiseConfig, noise: NoiseEstimate) -> float:
    return noise.sigma_sq * (cfg.xi.numerator / cfg.xi.denominator)


def denoise(frame: Frame, cfg: DenoiseConfig, noise: NoiseEstimate) -> Frame:
    """Run the configured filter at strength h = xi * sigma_n^2.

    identity kind or h == 0 returns the input unchanged. Input may be a
    signed subband frame; filters operate on the signed workspace and the
    result is rounded half away from zero as the final step.
    """
    if cfg.kind == "identity":
        return frame
    h = strength(cfg, noise)
    if h == 0.0:
        return frame
    out = _FILTERS[cfg.kind](frame.data.astype(np.float64), h)
    return Frame(_round_half_away(out), frame.bit_depth)
