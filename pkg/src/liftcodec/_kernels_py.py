"""Pure numpy/Python fallback for the hot kernels.

The compiled extension (``liftcodec._kernels``) mirrors every function here
and must produce bit-identical results. Integer kernels are exact by
construction; the float kernel (``box_sum``) pins its accumulation order
(horizontal pass in ascending dx, then vertical pass in ascending dy) so the
scalar loops in the extension replay the same IEEE operation sequence.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def sad_full_search(ref_pad: np.ndarray, cur: np.ndarray,
                    grid_size: int, search_range: int) -> np.ndarray:
    """Full-search block motion estimation against an edge-padded reference.

    ``ref_pad`` is ``cur`` 's reference padded by ``search_range`` on every
    side (edge mode), so a candidate fetch is a plain shifted slice. Returns
    per-block (dx, dy) as int32 of shape (blocks_y, blocks_x, 2). Tie-break:
    smallest SAD, then smallest |dx|+|dy|, then first in (dy, dx) scan order
    from (-r, -r).
    """
    h, w = cur.shape
    r = search_range
    by = -(-h // grid_size)
    bx = -(-w // grid_size)
    row_starts = np.arange(0, h, grid_size)
    col_starts = np.arange(0, w, grid_size)

    best_sad = np.full((by, bx), np.iinfo(np.int64).max, dtype=np.int64)
    best_cost = np.zeros((by, bx), dtype=np.int64)
    best_dx = np.zeros((by, bx), dtype=np.int32)
    best_dy = np.zeros((by, bx), dtype=np.int32)

    cur64 = cur.astype(np.int64)
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            shifted = ref_pad[r + dy:r + dy + h, r + dx:r + dx + w].astype(np.int64)
            diff = np.abs(cur64 - shifted)
            rows = np.add.reduceat(diff, row_starts, axis=0)
            sad = np.add.reduceat(rows, col_starts, axis=1)
            cost = abs(dx) + abs(dy)
            better = (sad < best_sad) | ((sad == best_sad) & (cost < best_cost))
            best_sad = np.where(better, sad, best_sad)
            best_cost = np.where(better, cost, best_cost)
            best_dx = np.where(better, np.int32(dx), best_dx)
            best_dy = np.where(better, np.int32(dy), best_dy)

    return np.stack([best_dx, best_dy], axis=-1)


def box_sum(padded: np.ndarray, radius: int) -> np.ndarray:
    """Sliding (2r+1)^2 window sum over an edge-padded float64 array.

    Accumulation order is load-bearing: horizontal offsets ascending, then
    vertical offsets ascending, one add at a time.
    """
    size = 2 * radius + 1
    ph, pw = padded.shape
    h = ph - 2 * radius
    w = pw - 2 * radius
    hs = np.zeros((ph, w), dtype=np.float64)
    for dx in range(size):
        hs += padded[:, dx:dx + w]
    out = np.zeros((h, w), dtype=np.float64)
    for dy in range(size):
        out += hs[dy:dy + h, :]
    return out


def nlm_offset_sqdist(padded: np.ndarray, oy: int, ox: int,
                      height: int, width: int) -> np.ndarray:
    """Mean squared 3x3-patch distance to the patch displaced by (oy, ox).

    ``padded`` is the frame padded by 4 (edge mode) as float64 holding exact
    integers, so the sums are exact and only the final /9 rounds.
    """
    eh = height + 2
    ew = width + 2
    d = padded[3:3 + eh, 3:3 + ew] - padded[3 + oy:3 + oy + eh, 3 + ox:3 + ox + ew]
    d *= d
    acc = np.zeros((height, width), dtype=np.float64)
    for qy in range(3):
        for qx in range(3):
            acc += d[qy:qy + height, qx:qx + width]
    return acc / 9.0


def bm3d_match(frame: np.ndarray, ref_ys: np.ndarray, ref_xs: np.ndarray,
               block: int, radius: int, count: int):
    """Per reference block, the ``count`` best SSD matches nearby.

    Candidates are every in-frame block whose top-left lies within
    ``radius`` of the reference top-left, scanned in ascending (cy, cx).
    Selection is stable: ties keep the earlier candidate. Returns
    (coords, counts): coords int32 (G, count, 2) as (y, x) padded with -1,
    counts int32 (G,).
    """
    h, w = frame.shape
    f64 = frame.astype(np.int64)
    g = len(ref_ys)
    coords = np.full((g, count, 2), -1, dtype=np.int32)
    counts = np.zeros(g, dtype=np.int32)
    for i in range(g):
        ry = int(ref_ys[i])
        rx = int(ref_xs[i])
        y0 = max(0, ry - radius)
        y1 = min(h - block, ry + radius)
        x0 = max(0, rx - radius)
        x1 = min(w - block, rx + radius)
        ref = f64[ry:ry + block, rx:rx + block]
        ny = y1 - y0 + 1
        nx = x1 - x0 + 1
        ssd = np.empty((ny, nx), dtype=np.int64)
        for cy in range(ny):
            strip = f64[y0 + cy:y0 + cy + block, x0:x1 + block]
            for cx in range(nx):
                d = strip[:, cx:cx + block] - ref
                ssd[cy, cx] = np.sum(d * d)
        order = np.argsort(ssd.ravel(), kind="stable")[:count]
        n = len(order)
        coords[i, :n, 0] = y0 + order // nx
        coords[i, :n, 1] = x0 + order % nx
        counts[i] = n
    return coords, counts


def rice_encode_chunk(values: np.ndarray, k: int):
    """Rice-code unsigned values MSB-first: q one-bits, a zero, k low bits.

    Returns (bytes padded with zero bits to a whole byte, true bit count).
    """
    acc = 0
    nacc = 0
    out = bytearray()
    mask = (1 << k) - 1
    total_bits = 0
    for v in values.tolist():
        q = v >> k
        length = q + 1 + k
        code = (((1 << q) - 1) << (k + 1)) | (v & mask)
        acc = (acc << length) | code
        nacc += length
        total_bits += length
        while nacc >= 8:
            nacc -= 8
            out.append((acc >> nacc) & 0xFF)
        acc &= (1 << nacc) - 1
    if nacc:
        out.append((acc << (8 - nacc)) & 0xFF)
    return bytes(out), total_bits


def rice_decode_chunk(buf, bit_offset: int, n: int, k: int):
    """Decode ``n`` Rice codes starting at ``bit_offset``. Inverse of
    rice_encode_chunk; raises ValueError when the buffer runs out."""
    data = bytes(buf)
    limit = len(data) * 8
    pos = bit_offset
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        q = 0
        while True:
            if pos >= limit:
                raise ValueError("bitstream exhausted in unary run")
            bit = (data[pos >> 3] >> (7 - (pos & 7))) & 1
            pos += 1
            if not bit:
                break
            q += 1
        if pos + k > limit:
            raise ValueError("bitstream exhausted in remainder bits")
        rem = 0
        for _ in range(k):
            rem = (rem << 1) | ((data[pos >> 3] >> (7 - (pos & 7))) & 1)
            pos += 1
        out[i] = (q << k) | rem
    return out, pos
