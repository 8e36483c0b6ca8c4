"""Quality and rate metrics.

PSNR_LP and SSIM_LP rate an LP frame against BOTH original frames of its
pair: a good base layer must represent the even frames too, not just the
odd ones it was built from. PSNR_LP averages the two MSEs before the log
(one distortion power against both references); SSIM_LP averages the two
SSIM values. Identical frames yield the lossless marker float('inf') for
PSNR and exactly 1.0 for SSIM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .volume import Frame, Sequence

LOSSLESS = float("inf")

SSIM_WINDOW = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_dims(*frames: Frame):
    shape = frames[0].data.shape
    for f in frames[1:]:
        if f.data.shape != shape:
            raise ParameterError("frames must share dimensions")


def mse(a: Frame, b: Frame) -> float:
    _check_dims(a, b)
    d = a.data.astype(np.int64) - b.data.astype(np.int64)
    return float(np.sum(d * d)) / d.size


def psnr(a: Frame, b: Frame, max_value: int) -> float:
    m = mse(a, b)
    if m == 0.0:
        return LOSSLESS
    return 10.0 * math.log10(max_value * max_value / m)


def psnr_lp(lp: Frame, f_odd: Frame, f_even: Frame, max_value: int) -> float:
    _check_dims(lp, f_odd, f_even)
    m = (mse(lp, f_odd) + mse(lp, f_even)) / 2.0
    if m == 0.0:
        return LOSSLESS
    return 10.0 * math.log10(max_value * max_value / m)


def _window_sums(a: np.ndarray, size: int) -> np.ndarray:
    """Sums over all size x size windows (valid positions) via cumsum;
    integer input keeps these exact."""
    c = np.cumsum(np.cumsum(a, axis=0, dtype=np.int64), axis=1, dtype=np.int64)
    c = np.pad(c, ((1, 0), (1, 0)))
    return (c[size:, size:] - c[:-size, size:]
            - c[size:, :-size] + c[:-size, :-size])


def ssim(a: Frame, b: Frame, max_value: int) -> float:
    """Mean SSIM over sliding 8x8 windows, uniform weighting."""
    _check_dims(a, b)
    x = a.data.astype(np.int64)
    y = b.data.astype(np.int64)
    h, w = x.shape
    n = SSIM_WINDOW
    if h < n or w < n:
        raise ParameterError(f"SSIM needs frames of at least {n}x{n}")
    c1 = (SSIM_K1 * max_value) ** 2
    c2 = (SSIM_K2 * max_value) ** 2
    cnt = float(n * n)
    sx = _window_sums(x, n).astype(np.float64)
    sy = _window_sums(y, n).astype(np.float64)
    sxx = _window_sums(x * x, n).astype(np.float64)
    syy = _window_sums(y * y, n).astype(np.float64)
    sxy = _window_sums(x * y, n).astype(np.float64)
    mx = sx / cnt
    my = sy / cnt
    vx = sxx / cnt - mx * mx
    vy = syy / cnt - my * my
    cov = sxy / cnt - mx * my
    score = ((2.0 * mx * my + c1) * (2.0 * cov + c2)
             / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return float(np.mean(score))


def ssim_lp(lp: Frame, f_odd: Frame, f_even: Frame, max_value: int) -> float:
    return (ssim(lp, f_odd, max_value) + ssim(lp, f_even, max_value)) / 2.0


@dataclass
class QualityReport:
    psnr_lp: float
    ssim_lp: float
    per_pair_psnr: list[float]
    per_pair_ssim: list[float]


def evaluate_lp(lp_frames: list[Frame], original: Sequence) -> QualityReport:
    """Rate every LP frame against its originating pair; aggregate by
    arithmetic mean (the lossless marker propagates)."""
    if 2 * len(lp_frames) != original.frame_count:
        raise ParameterError("LP frame count does not match the sequence")
    max_value = (1 << original.bit_depth) - 1
    ps, ss = [], []
    for i, lp in enumerate(lp_frames):
        f_odd = original.frames[2 * i]
        f_even = original.frames[2 * i + 1]
        ps.append(psnr_lp(lp, f_odd, f_even, max_value))
        ss.append(ssim_lp(lp, f_odd, f_even, max_value))
    return QualityReport(
        psnr_lp=sum(ps) / len(ps),
        ssim_lp=sum(ss) / len(ss),
        per_pair_psnr=ps,
        per_pair_ssim=ss,
    )


@dataclass
class CompressionReport:
    """Rate/quality record with optional deltas against a baseline run."""

    label: str
    total_size: float
    psnr_lp: float
    ssim_lp: float
    abs_delta: float | None = None
    rel_delta_pct: float | None = None
    psnr_delta_db: float | None = None


def compression_report(label: str, total_size: float, quality: QualityReport,
                       baseline: CompressionReport | None = None) -> CompressionReport:
    report = CompressionReport(label, total_size, quality.psnr_lp, quality.ssim_lp)
    if baseline is not None:
        report.abs_delta = total_size - baseline.total_size
        report.rel_delta_pct = (total_size - baseline.total_size) / baseline.total_size * 100.0
        if math.isinf(quality.psnr_lp) and math.isinf(baseline.psnr_lp):
            report.psnr_delta_db = 0.0
        else:
            report.psnr_delta_db = quality.psnr_lp - baseline.psnr_lp
    return report
