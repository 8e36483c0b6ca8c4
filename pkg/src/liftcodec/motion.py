"""Block-translational motion estimation and the warping operators.

The warp indexed forward predicts the even frame from the odd one; the
inverse warp carries highpass data back to the odd frame's time instant.
Both are integer clamped fetches, so any motion field shared by encoder and
decoder keeps the lifting transform losslessly invertible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ParameterError
from .volume import Frame


@dataclass(frozen=True)
class MotionConfig:
    grid_size: int = 8
    search_range: int = 8

    def __post_init__(self):
        if self.grid_size < 1:
            raise ParameterError("grid_size must be >= 1")
        if self.search_range < 0:
            raise ParameterError("search_range must be >= 0")


@dataclass
class MotionField:
    """Per-block integer displacements (dx, dy) on a fixed grid.

    A vector v_b is stored such that the prediction of a current-frame pixel
    p in block b is reference[p + v_b]; the inverse warp fetches at p - v_b.
    """

    grid_size: int
    vectors: np.ndarray  # int32, shape (blocks_y, blocks_x, 2)

    @property
    def blocks_y(self) -> int:
        return self.vectors.shape[0]

    @property
    def blocks_x(self) -> int:
        return self.vectors.shape[1]


def zero_motion_field(width: int, height: int, grid_size: int) -> MotionField:
    by = -(-height // grid_size)
    bx = -(-width // grid_size)
    return MotionField(grid_size, np.zeros((by, bx, 2), dtype=np.int32))


def estimate_motion(reference: Frame, current: Frame, cfg: MotionConfig) -> MotionField:
    """Full-search SAD estimation over +-search_range, per grid block.

    Border fetches clamp to the frame edge. Partial blocks at the right and
    bottom edges are matched over their clipped extent. Deterministic
    tie-break: smallest SAD, then smallest |dx|+|dy|, then (dy, dx) scan
    order from (-r, -r).
    """
    if reference.data.shape != current.data.shape:
        raise ParameterError("reference and current frame dimensions differ")
    r = cfg.search_range
    ref_pad = np.pad(reference.data, r, mode="edge") if r else reference.data
    vectors = backend.get_backend().sad_full_search(
        np.ascontiguousarray(ref_pad), current.data, cfg.grid_size, r
    )
    return MotionField(cfg.grid_size, vectors)


def warp_array(data: np.ndarray, mf: MotionField, direction: str) -> np.ndarray:
    if direction not in ("forward", "inverse"):
        raise ParameterError(f"unknown warp direction {direction!r}")
    h, w = data.shape
    g = mf.grid_size
    if mf.blocks_y != -(-h // g) or mf.blocks_x != -(-w // g):
        raise ParameterError("motion field grid does not cover the frame")
    sign = 1 if direction == "forward" else -1
    vx = np.repeat(np.repeat(mf.vectors[:, :, 0], g, axis=0), g, axis=1)[:h, :w]
    vy = np.repeat(np.repeat(mf.vectors[:, :, 1], g, axis=0), g, axis=1)[:h, :w]
    ys, xs = np.indices((h, w), dtype=np.int64)
    fy = np.clip(ys + sign * vy, 0, h - 1)
    fx = np.clip(xs + sign * vx, 0, w - 1)
    return np.ascontiguousarray(data[fy, fx])


def warp(frame: Frame, mf: MotionField, direction: str) -> Frame:
    """Apply the motion field: forward fetches at p + v_b, inverse at p - v_b,
    coordinates clamped to the frame. Output is integer-valued, so the
    flooring in the lifting equations is a formal no-op here."""
    return Frame(warp_array(frame.data, mf, direction), frame.bit_depth)
