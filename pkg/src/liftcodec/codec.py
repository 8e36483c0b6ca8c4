"""Spatial transform, entropy coding and the WLPC bitstream container.

Container layout (all multi-byte fields little-endian, see docs/FORMAT.md):

    header (21 bytes):
        magic  "WLPC" | version u8 | width u16 | height u16 | T u16
        bit_depth u8 | mode u8 | dn_kind u8 | xi_num u16 | xi_den u16
        grid_size u8 | search_range u8 | spatial_levels u8
    base layer section, per pair in temporal order:
        mv_chunk, lp_chunk
    enhancement layer section, per pair:
        hp_chunk

Every chunk is a u32 length prefix plus payload and is byte-aligned, so the
base layer is a plain prefix of the stream: cutting after the last lp_chunk
still decodes to the exact LP frames. Within a chunk, bits pack MSB-first.

Planes (LP and HP frames) go through ``spatial_levels`` of reversible
integer 5/3 lifting, then each dyadic subband is Rice-coded: values map to
unsigned via the zigzag 0,-1,1,-2,... -> 0,1,2,3,..., a 5-bit Rice
parameter k (chosen by exhaustive exact bit count over k in [0, 24]) is
followed by the codes in raster order. Motion vectors are coded as deltas
from the left neighbour (first column: from above, first block: from zero),
zigzag-mapped, order-0 exp-Golomb.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import backend
from .denoise import DenoiseConfig, KINDS
from .errors import DecodeError, ParameterError
from .lifting import LiftingMode, SubbandPair, analyze_sequence, synthesize_pair
from .motion import MotionConfig, MotionField
from .volume import Frame, Sequence

MAGIC = b"WLPC"
VERSION = 1
HEADER_FMT = "<4sBHHHBBBHHBBB"
HEADER_BYTES = struct.calcsize(HEADER_FMT)
RICE_K_MAX = 24

_MODE_CODES = {
    LiftingMode.MCTF: 0,
    LiftingMode.WLDU: 1,
    LiftingMode.WLDUR: 2,
    LiftingMode.WLDP: 3,
    LiftingMode.WLDPU: 4,
    LiftingMode.TRUNCATED: 5,
    LiftingMode.HAAR_PLAIN: 6,
}
_MODE_FROM_CODE = {v: k for k, v in _MODE_CODES.items()}
_DN_CODES = {kind: i for i, kind in enumerate(KINDS)}
_DN_FROM_CODE = {i: kind for kind, i in _DN_CODES.items()}


class BitWriter:
    """MSB-first bit packer with support for splicing pre-packed chunks."""

    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._n = 0

    def write_bits(self, value: int, count: int):
        self._acc = (self._acc << count) | (value & ((1 << count) - 1))
        self._n += count
        while self._n >= 8:
            self._n -= 8
            self._buf.append((self._acc >> self._n) & 0xFF)
        self._acc &= (1 << self._n) - 1

    def write_chunk(self, data: bytes, nbits: int):
        if nbits == 0:
            return
        value = int.from_bytes(data, "big") >> (8 * len(data) - nbits)
        total = (self._acc << nbits) | value
        total_bits = self._n + nbits
        nbytes, self._n = divmod(total_bits, 8)
        if nbytes:
            self._buf += (total >> self._n).to_bytes(nbytes, "big")
        self._acc = total & ((1 << self._n) - 1)

    def flush(self) -> bytes:
        if self._n:
            self._buf.append((self._acc << (8 - self._n)) & 0xFF)
            self._acc = 0
            self._n = 0
        return bytes(self._buf)


class BitReader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def read_bits(self, count: int) -> int:
        if self.pos + count > 8 * len(self.data):
            raise DecodeError("bitstream truncated")
        value = 0
        for _ in range(count):
            byte = self.data[self.pos >> 3]
            value = (value << 1) | ((byte >> (7 - (self.pos & 7))) & 1)
            self.pos += 1
        return value


def write_eg0(w: BitWriter, value: int):
    n = value + 1
    length = n.bit_length()
    w.write_bits(0, length - 1)
    w.write_bits(n, length)


def read_eg0(r: BitReader) -> int:
    zeros = 0
    while r.read_bits(1) == 0:
        zeros += 1
        if zeros > 64:
            raise DecodeError("corrupt exp-Golomb code")
    return ((1 << zeros) | r.read_bits(zeros)) - 1


def zigzag_scalar(v: int) -> int:
    return 2 * v if v >= 0 else -2 * v - 1


def unzigzag_scalar(u: int) -> int:
    return (u >> 1) if u % 2 == 0 else -((u + 1) >> 1)


def _zigzag(values: np.ndarray) -> np.ndarray:
    v = values.astype(np.int64)
    return np.where(v >= 0, 2 * v, -2 * v - 1).astype(np.uint64)


def _unzigzag(u: np.ndarray) -> np.ndarray:
    ui = u.astype(np.int64)
    return np.where(ui & 1, -((ui + 1) >> 1), ui >> 1)


# ---------------------------------------------------------------------------
# Reversible integer 5/3 wavelet


def _split_length(n: int) -> int:
    return (n + 1) // 2 if n >= 2 else n


def _dims_chain(h: int, w: int, levels: int) -> list[tuple[int, int]]:
    dims = [(h, w)]
    for _ in range(levels):
        h, w = _split_length(h), _split_length(w)
        dims.append((h, w))
    return dims


def _lift_rows_forward(s: np.ndarray) -> np.ndarray:
    n = s.shape[1]
    nd = n // 2
    na = n - nd
    even = s[:, 0::2]
    odd = s[:, 1::2]
    if n % 2 == 0:
        right = np.concatenate([even[:, 1:], even[:, na - 1:na]], axis=1)
    else:
        right = even[:, 1:na]
    d = odd - ((even[:, :nd] + right) >> 1)
    de = d if n % 2 == 0 else np.concatenate([d, d[:, nd - 1:nd]], axis=1)
    prev = np.concatenate([de[:, :1], de[:, :-1]], axis=1)
    a = even + ((prev + de + 2) >> 2)
    return np.concatenate([a, d], axis=1)


def _lift_rows_inverse(p: np.ndarray) -> np.ndarray:
    n = p.shape[1]
    nd = n // 2
    na = n - nd
    a = p[:, :na]
    d = p[:, na:]
    de = d if n % 2 == 0 else np.concatenate([d, d[:, nd - 1:nd]], axis=1)
    prev = np.concatenate([de[:, :1], de[:, :-1]], axis=1)
    even = a - ((prev + de + 2) >> 2)
    if n % 2 == 0:
        right = np.concatenate([even[:, 1:], even[:, na - 1:na]], axis=1)
    else:
        right = even[:, 1:na]
    odd = d + ((even[:, :nd] + right) >> 1)
    out = np.empty_like(p)
    out[:, 0::2] = even
    out[:, 1::2] = odd
    return out


def _level_forward(a: np.ndarray) -> np.ndarray:
    if a.shape[1] >= 2:
        a = _lift_rows_forward(a)
    if a.shape[0] >= 2:
        a = _lift_rows_forward(np.ascontiguousarray(a.T)).T
    return np.ascontiguousarray(a)


def _level_inverse(a: np.ndarray) -> np.ndarray:
    if a.shape[0] >= 2:
        a = _lift_rows_inverse(np.ascontiguousarray(a.T)).T
    if a.shape[1] >= 2:
        a = _lift_rows_inverse(np.ascontiguousarray(a))
    return np.ascontiguousarray(a)


def dwt53_forward(arr: np.ndarray, levels: int) -> np.ndarray:
    """In-place-style forward transform; returns the packed coefficient
    plane. Axes of length 1 pass through a level unchanged."""
    out = arr.astype(np.int32).copy()
    h, w = out.shape
    for _ in range(levels):
        out[:h, :w] = _level_forward(out[:h, :w])
        h, w = _split_length(h), _split_length(w)
    return out


def dwt53_inverse(arr: np.ndarray, levels: int) -> np.ndarray:
    out = arr.astype(np.int32).copy()
    dims = _dims_chain(*out.shape, levels)
    for h, w in reversed(dims[:-1]):
        out[:h, :w] = _level_inverse(out[:h, :w])
    return out


def spatial_dwt_53(frame: Frame, levels: int, direction: str) -> Frame:
    """Reversible integer 5/3 DWT of a frame (dyadic subband layout)."""
    if levels < 0:
        raise ParameterError("levels must be >= 0")
    if direction == "forward":
        return Frame(dwt53_forward(frame.data, levels), frame.bit_depth)
    if direction == "inverse":
        return Frame(dwt53_inverse(frame.data, levels), frame.bit_depth)
    raise ParameterError(f"unknown direction {direction!r}")


def subband_regions(h: int, w: int, levels: int) -> list[tuple[int, int, int, int]]:
    """Coding order of (y0, y1, x0, x1) regions: deepest LL first, then
    HL/LH/HH from the deepest level outward. Empty regions are dropped."""
    dims = _dims_chain(h, w, levels)
    regions = [(0, dims[levels][0], 0, dims[levels][1])]
    for lvl in range(levels, 0, -1):
        ph, pw = dims[lvl - 1]
        lh, lw = dims[lvl]
        regions.append((0, lh, lw, pw))    # HL
        regions.append((lh, ph, 0, lw))    # LH
        regions.append((lh, ph, lw, pw))   # HH
    return [(y0, y1, x0, x1) for y0, y1, x0, x1 in regions if y1 > y0 and x1 > x0]


# ---------------------------------------------------------------------------
# Plane (subband) entropy coding


def _best_rice_k(u: np.ndarray) -> int:
    n = len(u)
    best_k = 0
    best_cost = None
    for k in range(RICE_K_MAX + 1):
        cost = int(np.sum(u >> np.uint64(k))) + n * (1 + k)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_k = k
    return best_k


def encode_plane(coefs: np.ndarray, levels: int) -> bytes:
    """Rice-code a coefficient plane subband by subband."""
    kern = backend.get_backend()
    w = BitWriter()
    for y0, y1, x0, x1 in subband_regions(*coefs.shape, levels):
        u = _zigzag(coefs[y0:y1, x0:x1].ravel())
        k = _best_rice_k(u)
        w.write_bits(k, 5)
        chunk, nbits = kern.rice_encode_chunk(u, k)
        w.write_chunk(chunk, nbits)
    return w.flush()


def decode_plane(data: bytes, h: int, w: int, levels: int) -> np.ndarray:
    kern = backend.get_backend()
    out = np.zeros((h, w), dtype=np.int32)
    reader = BitReader(data)
    for y0, y1, x0, x1 in subband_regions(h, w, levels):
        k = reader.read_bits(5)
        n = (y1 - y0) * (x1 - x0)
        try:
            u, reader.pos = kern.rice_decode_chunk(data, reader.pos, n, k)
        except ValueError as exc:
            raise DecodeError(f"plane payload truncated: {exc}") from exc
        out[y0:y1, x0:x1] = _unzigzag(u).reshape(y1 - y0, x1 - x0).astype(np.int32)
    return out


# ---------------------------------------------------------------------------
# Motion vector coding


def encode_motion_field(mf: MotionField) -> bytes:
    vec = mf.vectors
    w = BitWriter()
    for by in range(vec.shape[0]):
        for bx in range(vec.shape[1]):
            if bx > 0:
                pdx, pdy = int(vec[by, bx - 1, 0]), int(vec[by, bx - 1, 1])
            elif by > 0:
                pdx, pdy = int(vec[by - 1, 0, 0]), int(vec[by - 1, 0, 1])
            else:
                pdx = pdy = 0
            write_eg0(w, zigzag_scalar(int(vec[by, bx, 0]) - pdx))
            write_eg0(w, zigzag_scalar(int(vec[by, bx, 1]) - pdy))
    return w.flush()


def decode_motion_field(data: bytes, width: int, height: int,
                        grid_size: int) -> MotionField:
    by = -(-height // grid_size)
    bx = -(-width // grid_size)
    vec = np.zeros((by, bx, 2), dtype=np.int32)
    r = BitReader(data)
    for yb in range(by):
        for xb in range(bx):
            if xb > 0:
                pdx, pdy = int(vec[yb, xb - 1, 0]), int(vec[yb, xb - 1, 1])
            elif yb > 0:
                pdx, pdy = int(vec[yb - 1, 0, 0]), int(vec[yb - 1, 0, 1])
            else:
                pdx = pdy = 0
            vec[yb, xb, 0] = unzigzag_scalar(read_eg0(r)) + pdx
            vec[yb, xb, 1] = unzigzag_scalar(read_eg0(r)) + pdy
    return MotionField(grid_size, vec)


# ---------------------------------------------------------------------------
# Container


@dataclass(frozen=True)
class StreamBreakdown:
    header_bytes: int
    mv_bytes: int
    lp_bytes: int
    hp_bytes: int

    @property
    def total_bytes(self) -> int:
        return self.header_bytes + self.mv_bytes + self.lp_bytes + self.hp_bytes


def _pack_header(seq: Sequence, mode: LiftingMode, dn: DenoiseConfig,
                 mc: MotionConfig, levels: int) -> bytes:
    xi = Fraction(dn.xi)
    for name, value, limit in (
        ("width", seq.width, 0xFFFF), ("height", seq.height, 0xFFFF),
        ("frame count", seq.frame_count, 0xFFFF),
        ("xi numerator", xi.numerator, 0xFFFF),
        ("xi denominator", xi.denominator, 0xFFFF),
        ("grid_size", mc.grid_size, 0xFF),
        ("search_range", mc.search_range, 0xFF),
        ("spatial levels", levels, 0xFF),
    ):
        if not 0 <= value <= limit:
            raise ParameterError(f"{name} {value} does not fit the header field")
    return struct.pack(
        HEADER_FMT, MAGIC, VERSION, seq.width, seq.height, seq.frame_count,
        seq.bit_depth, _MODE_CODES[mode], _DN_CODES[dn.kind],
        xi.numerator, xi.denominator, mc.grid_size, mc.search_range, levels,
    )


@dataclass(frozen=True)
class StreamConfig:
    width: int
    height: int
    frame_count: int
    bit_depth: int
    mode: LiftingMode
    dn: DenoiseConfig
    mc: MotionConfig
    spatial_levels: int


def parse_header(data: bytes) -> StreamConfig:
    if len(data) < HEADER_BYTES:
        raise DecodeError(f"stream truncated inside header at offset {len(data)}")
    (magic, version, width, height, t, bit_depth, mode_code, dn_code,
     xi_num, xi_den, grid, search, levels) = struct.unpack_from(HEADER_FMT, data)
    if magic != MAGIC:
        raise DecodeError("bad magic at offset 0")
    if version != VERSION:
        raise DecodeError(f"unsupported version {version} at offset 4")
    if mode_code not in _MODE_FROM_CODE:
        raise DecodeError(f"unknown mode {mode_code} at offset 12")
    if dn_code not in _DN_FROM_CODE:
        raise DecodeError(f"unknown denoiser {dn_code} at offset 13")
    if xi_den == 0:
        raise DecodeError("zero xi denominator at offset 16")
    if t < 2 or t % 2:
        raise DecodeError(f"invalid frame count {t} at offset 9")
    return StreamConfig(
        width, height, t, bit_depth, _MODE_FROM_CODE[mode_code],
        DenoiseConfig(_DN_FROM_CODE[dn_code], Fraction(xi_num, xi_den)),
        MotionConfig(grid, search), levels,
    )


def _chunk(payload: bytes) -> bytes:
    return struct.pack("<I", len(payload)) + payload


def _read_chunk(data: bytes, offset: int) -> tuple[bytes, int]:
    if offset + 4 > len(data):
        raise DecodeError(f"stream truncated at chunk length, offset {offset}")
    (length,) = struct.unpack_from("<I", data, offset)
    end = offset + 4 + length
    if end > len(data):
        raise DecodeError(f"stream truncated inside chunk at offset {offset + 4}")
    return data[offset + 4:end], end


def encode_sequence(seq: Sequence, mode: LiftingMode, dn: DenoiseConfig,
                    mc: MotionConfig, spatial_levels: int = 4) -> bytes:
    """Full pipeline: temporal lifting, spatial DWT, entropy coding,
    layered container. The result decodes bit-exactly with the same
    backend-independent arithmetic on any machine."""
    header = _pack_header(seq, mode, dn, mc, spatial_levels)
    pairs = analyze_sequence(seq, mode, dn, mc)
    bl = bytearray()
    el = bytearray()
    for sp in pairs:
        bl += _chunk(encode_motion_field(sp.mf))
        bl += _chunk(encode_plane(dwt53_forward(sp.lp.data, spatial_levels),
                                  spatial_levels))
        el += _chunk(encode_plane(dwt53_forward(sp.hp.data, spatial_levels),
                                  spatial_levels))
    return header + bytes(bl) + bytes(el)


def decode_sequence(data: bytes, layers: str = "full") -> Sequence:
    """Decode a WLPC stream.

    layers="full" reproduces the original sequence bit-exactly and requires
    the enhancement layer; layers="bl" returns the LP frames (half frame
    rate) and never reads past the base layer section.
    """
    if layers not in ("full", "bl"):
        raise ParameterError(f"unknown layers selection {layers!r}")
    cfg = parse_header(data)
    offset = HEADER_BYTES
    n_pairs = cfg.frame_count // 2
    motion_fields = []
    lp_frames = []
    for _ in range(n_pairs):
        mv_payload, offset = _read_chunk(data, offset)
        motion_fields.append(decode_motion_field(
            mv_payload, cfg.width, cfg.height, cfg.mc.grid_size))
        lp_payload, offset = _read_chunk(data, offset)
        coefs = decode_plane(lp_payload, cfg.height, cfg.width, cfg.spatial_levels)
        lp_frames.append(Frame(dwt53_inverse(coefs, cfg.spatial_levels),
                               cfg.bit_depth))
    if layers == "bl":
        return Sequence(lp_frames)
    frames = []
    for i in range(n_pairs):
        hp_payload, offset = _read_chunk(data, offset)
        coefs = decode_plane(hp_payload, cfg.height, cfg.width, cfg.spatial_levels)
        hp = Frame(dwt53_inverse(coefs, cfg.spatial_levels), cfg.bit_depth)
        sp = SubbandPair(lp_frames[i], hp, motion_fields[i], {})
        f_odd, f_even = synthesize_pair(sp, cfg.mode, cfg.dn, cfg.mc)
        frames.extend([f_odd, f_even])
    if offset != len(data):
        raise DecodeError(f"trailing data at offset {offset}")
    return Sequence(frames)


def stream_breakdown(data: bytes) -> StreamBreakdown:
    """Exact byte accounting: header + MV + LP (base layer) + HP chunks."""
    cfg = parse_header(data)
    offset = HEADER_BYTES
    mv = lp = hp = 0
    for _ in range(cfg.frame_count // 2):
        payload, new_offset = _read_chunk(data, offset)
        mv += new_offset - offset
        offset = new_offset
        payload, new_offset = _read_chunk(data, offset)
        lp += new_offset - offset
        offset = new_offset
    for _ in range(cfg.frame_count // 2):
        payload, new_offset = _read_chunk(data, offset)
        hp += new_offset - offset
        offset = new_offset
    if offset != len(data):
        raise DecodeError(f"trailing data at offset {offset}")
    return StreamBreakdown(HEADER_BYTES, mv, lp, hp)


def base_layer_length(data: bytes) -> int:
    """Byte length of the decodable prefix (header + MV + LP chunks)."""
    b = stream_breakdown(data)
    return b.header_bytes + b.mv_bytes + b.lp_bytes
