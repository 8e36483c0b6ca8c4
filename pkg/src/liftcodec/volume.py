"""Sample data model, raw file I/O and synthetic test sequences.

Raw files are headerless little-endian u16 planes, frame-major; the
dimensions travel out-of-band (CLI flags). Phantom sequences stand in for
dynamic CT data and are bit-reproducible from (seed, parameters) on any
platform: the noise generator is a fully specified xorshift64* stream (see
:class:`Xorshift64Star`) fed through the Box-Muller transform.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, ParameterError, RangeError

DEFAULT_BIT_DEPTH = 12


@dataclass
class Frame:
    """One 2-D grid of integer samples.

    ``data`` is a row-major int32 array. ``bit_depth`` declares the payload
    precision of *input* frames; subband frames reuse the container with
    values outside [0, 2^bit_depth) and rely on the int32 workspace.
    """

    data: np.ndarray
    bit_depth: int = DEFAULT_BIT_DEPTH

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.int32)
        if arr.ndim != 2 or arr.size == 0:
            raise ParameterError("frame data must be a non-empty 2-D array")
        self.data = arr

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1

    def check_payload_range(self, label: str = "frame"):
        """Raise RangeError unless all samples lie in [0, 2^bit_depth)."""
        lo = int(self.data.min())
        hi = int(self.data.max())
        if lo < 0 or hi > self.max_value:
            raise RangeError(
                f"{label}: sample {lo if lo < 0 else hi} outside "
                f"[0, {self.max_value}] for bit depth {self.bit_depth}"
            )


@dataclass
class Sequence:
    """Ordered list of frames sharing dimensions and bit depth."""

    frames: list[Frame] = field(default_factory=list)

    def __post_init__(self):
        if not self.frames:
            raise ParameterError("sequence needs at least one frame")
        f0 = self.frames[0]
        for i, f in enumerate(self.frames):
            if (f.width, f.height, f.bit_depth) != (f0.width, f0.height, f0.bit_depth):
                raise ParameterError(f"frame {i} dimensions/bit depth differ from frame 0")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def bit_depth(self) -> int:
        return self.frames[0].bit_depth

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sequence):
            return NotImplemented
        return (
            self.frame_count == other.frame_count
            and self.bit_depth == other.bit_depth
            and all(np.array_equal(a.data, b.data) for a, b in zip(self.frames, other.frames))
        )


def load_raw(path, width: int, height: int, frame_count: int,
             bit_depth: int = DEFAULT_BIT_DEPTH) -> Sequence:
    """Read a headerless little-endian u16 volume into a Sequence."""
    with open(path, "rb") as fh:
        blob = fh.read()
    expected = width * height * frame_count * 2
    if len(blob) != expected:
        raise FormatError(
            f"{path}: file is {len(blob)} bytes, expected {expected} "
            f"({width}x{height}x{frame_count} u16 samples)"
        )
    flat = np.frombuffer(blob, dtype="<u2").astype(np.int32)
    limit = 1 << bit_depth
    frames = []
    for t in range(frame_count):
        plane = flat[t * width * height:(t + 1) * width * height]
        hi = int(plane.max())
        if hi >= limit:
            raise RangeError(f"{path}: sample {hi} in frame {t} exceeds bit depth {bit_depth}")
        frames.append(Frame(plane.reshape(height, width), bit_depth))
    return Sequence(frames)


def save_raw(seq: Sequence, path):
    """Write a Sequence as headerless little-endian u16, frame-major."""
    planes = []
    for t, f in enumerate(seq.frames):
        f.check_payload_range(f"frame {t}")
        planes.append(f.data.astype("<u2").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(planes))


def save_pgm(frame: Frame, path):
    """Export one frame as binary 16-bit PGM (big-endian, maxval 65535)."""
    if int(frame.data.min()) < 0 or int(frame.data.max()) > 65535:
        raise RangeError("PGM export needs samples in [0, 65535]")
    header = f"P5\n{frame.width} {frame.height}\n65535\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(frame.data.astype(">u2").tobytes())


class Xorshift64Star:
    """Marsaglia xorshift64* generator, fully pinned for reproducibility.

    State seeding: one SplitMix64 scramble of the user seed; a zero state is
    replaced by the SplitMix64 increment constant. Each step:

        x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27       (mod 2^64)
        output = x * 0x2545F4914F6CDD1D                   (mod 2^64)

    ``uniform`` maps the top 53 output bits to (0, 1) via
    ((output >> 11) + 0.5) * 2^-53. ``gauss`` draws two uniforms u1, u2 and
    returns sqrt(-2 ln u1) * cos(2 pi u2); no second Box-Muller output is
    cached, so every Gaussian consumes exactly two uniforms.
    """

    _MASK = (1 << 64) - 1
    _MULT = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        z = (seed + 0x9E3779B97F4A7C15) & self._MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        z ^= z >> 31
        self._state = z or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & self._MASK
        x ^= x >> 27
        self._state = x
        return (x * self._MULT) & self._MASK

    def uniform(self) -> float:
        return ((self.next_u64() >> 11) + 0.5) * 2.0 ** -53

    def gauss(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class PhantomObject:
    """Moving object added onto the background.

    Shapes: 'disk' (cx, cy, r) with a flat profile, 'rect' (x0, y0, w, h),
    and 'dome' (cx, cy, r) with the smooth profile
    intensity * (1 - d^2/r^2), a stand-in for soft-tissue structure.
    Position at frame t is the geometry translated by t * velocity.
    """

    shape: str
    geometry: tuple
    intensity: int
    velocity: tuple = (0.0, 0.0)


def _object_bounds(obj: PhantomObject, t: int):
    vx, vy = obj.velocity
    ox, oy = t * vx, t * vy
    if obj.shape in ("disk", "dome"):
        cx, cy, r = obj.geometry
        return cx + ox - r, cx + ox + r, cy + oy - r, cy + oy + r
    if obj.shape == "rect":
        x0, y0, w, h = obj.geometry
        return x0 + ox, x0 + ox + w - 1, y0 + oy, y0 + oy + h - 1
    raise ParameterError(f"unknown phantom shape {obj.shape!r}")


def _rasterize(obj: PhantomObject, t: int, xs, ys):
    """Integer contribution of one object at frame t (rounded half away
    from zero for the smooth profile)."""
    vx, vy = obj.velocity
    ox, oy = t * vx, t * vy
    if obj.shape == "disk":
        cx, cy, r = obj.geometry
        mask = (xs - (cx + ox)) ** 2 + (ys - (cy + oy)) ** 2 <= r * r
        return mask * int(obj.intensity)
    if obj.shape == "dome":
        cx, cy, r = obj.geometry
        d2 = (xs - (cx + ox)) ** 2 + (ys - (cy + oy)) ** 2
        profile = obj.intensity * np.maximum(1.0 - d2 / (r * r), 0.0)
        return np.floor(profile + 0.5).astype(np.int64)
    x0, y0, w, h = obj.geometry
    mask = (xs >= x0 + ox) & (xs < x0 + ox + w) & (ys >= y0 + oy) & (ys < y0 + oy + h)
    return mask * int(obj.intensity)


def synthesize_phantom(width: int, height: int, frame_count: int,
                       objects: list[PhantomObject], noise_sigma: float,
                       seed: int, background: int = 1024,
                       bit_depth: int = DEFAULT_BIT_DEPTH) -> Sequence:
    """Deterministic noisy test sequence: background + moving objects + noise.

    Noise is i.i.d. per pixel per frame, N(0, noise_sigma^2), drawn in raster
    order frame by frame from Xorshift64Star(seed) and rounded half away from
    zero to whole gray levels; the sum is clamped to [0, 2^bit_depth - 1].
    When noise_sigma == 0 no random draws are consumed.
    """
    if noise_sigma < 0:
        raise ParameterError("noise_sigma must be >= 0")
    for obj in objects:
        for t in range(frame_count):
            x_lo, x_hi, y_lo, y_hi = _object_bounds(obj, t)
            if x_lo < 0 or y_lo < 0 or x_hi > width - 1 or y_hi > height - 1:
                raise ParameterError(
                    f"{obj.shape} object leaves frame bounds at frame {t}"
                )
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float64),
                         np.arange(height, dtype=np.float64))
    rng = Xorshift64Star(seed)
    limit = (1 << bit_depth) - 1
    frames = []
    for t in range(frame_count):
        base = np.full((height, width), background, dtype=np.int64)
        for obj in objects:
            base += _rasterize(obj, t, xs, ys) * int(obj.intensity)
        if noise_sigma > 0:
            draws = [rng.gauss() for _ in range(width * height)]
            z = np.array(draws, dtype=np.float64).reshape(height, width)
            mag = np.floor(np.abs(noise_sigma * z) + 0.5)
            base += np.where(z < 0, -mag, mag).astype(np.int64)
        frames.append(Frame(np.clip(base, 0, limit).astype(np.int32), bit_depth))
    return Sequence(frames)
