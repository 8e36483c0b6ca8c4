# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; bit-compatible twin of ``_kernels_py``.

Every function replays the fallback's arithmetic exactly: integer kernels
are exact anyway, and the float kernels accumulate in the same pinned order
(the build disables FMA contraction so a*b+c rounds like numpy's separate
multiply and add).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def sad_full_search(cnp.int32_t[:, ::1] ref_pad, cnp.int32_t[:, ::1] cur,
                    int grid_size, int search_range):
    cdef int h = cur.shape[0]
    cdef int w = cur.shape[1]
    cdef int r = search_range
    cdef int by = (h + grid_size - 1) // grid_size
    cdef int bx = (w + grid_size - 1) // grid_size
    out = np.zeros((by, bx, 2), dtype=np.int32)
    cdef cnp.int32_t[:, :, ::1] vec = out
    cdef int iby, ibx, y0, y1, x0, x1, dy, dx, y, x
    cdef int best_dx, best_dy
    cdef long long sad, best_sad, cost, best_cost, diff
    for iby in range(by):
        y0 = iby * grid_size
        y1 = y0 + grid_size
        if y1 > h:
            y1 = h
        for ibx in range(bx):
            x0 = ibx * grid_size
            x1 = x0 + grid_size
            if x1 > w:
                x1 = w
            best_sad = -1
            best_cost = 0
            best_dx = 0
            best_dy = 0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    sad = 0
                    for y in range(y0, y1):
                        for x in range(x0, x1):
                            diff = cur[y, x] - ref_pad[y + dy + r, x + dx + r]
                            sad += diff if diff >= 0 else -diff
                    cost = (dx if dx >= 0 else -dx) + (dy if dy >= 0 else -dy)
                    if (best_sad < 0 or sad < best_sad
                            or (sad == best_sad and cost < best_cost)):
                        best_sad = sad
                        best_cost = cost
                        best_dx = dx
                        best_dy = dy
            vec[iby, ibx, 0] = best_dx
            vec[iby, ibx, 1] = best_dy
    return out


def box_sum(cnp.float64_t[:, ::1] padded, int radius):
    cdef int size = 2 * radius + 1
    cdef int ph = padded.shape[0]
    cdef int pw = padded.shape[1]
    cdef int h = ph - 2 * radius
    cdef int w = pw - 2 * radius
    hs_arr = np.zeros((ph, w), dtype=np.float64)
    out_arr = np.zeros((h, w), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] hs = hs_arr
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef int y, x, dx, dy
    cdef double s
    for y in range(ph):
        for x in range(w):
            s = 0.0
            for dx in range(size):
                s += padded[y, x + dx]
            hs[y, x] = s
    for y in range(h):
        for x in range(w):
            s = 0.0
            for dy in range(size):
                s += hs[y + dy, x]
            out[y, x] = s
    return out_arr


def nlm_offset_sqdist(cnp.float64_t[:, ::1] padded, int oy, int ox,
                      int height, int width):
    out_arr = np.empty((height, width), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef int y, x, qy, qx
    cdef double s, t
    for y in range(height):
        for x in range(width):
            s = 0.0
            for qy in range(3):
                for qx in range(3):
                    t = (padded[y + qy + 3, x + qx + 3]
                         - padded[y + qy + 3 + oy, x + qx + 3 + ox])
                    s += t * t
            out[y, x] = s / 9.0
    return out_arr


def bm3d_match(cnp.int64_t[:, ::1] frame, cnp.int32_t[::1] ref_ys,
               cnp.int32_t[::1] ref_xs, int block, int radius, int count):
    cdef int h = frame.shape[0]
    cdef int w = frame.shape[1]
    cdef Py_ssize_t g = ref_ys.shape[0]
    coords_arr = np.full((g, count, 2), -1, dtype=np.int32)
    counts_arr = np.zeros(g, dtype=np.int32)
    cdef cnp.int32_t[:, :, ::1] coords = coords_arr
    cdef cnp.int32_t[::1] counts = counts_arr
    best_ssd_arr = np.zeros(count, dtype=np.int64)
    best_y_arr = np.zeros(count, dtype=np.int32)
    best_x_arr = np.zeros(count, dtype=np.int32)
    cdef cnp.int64_t[::1] best_ssd = best_ssd_arr
    cdef cnp.int32_t[::1] best_y = best_y_arr
    cdef cnp.int32_t[::1] best_x = best_x_arr
    cdef Py_ssize_t i
    cdef int ry, rx, y0, y1, x0, x1, cy, cx, yy, xx, m, j, kk
    cdef long long ssd, d
    for i in range(g):
        ry = ref_ys[i]
        rx = ref_xs[i]
        y0 = ry - radius
        if y0 < 0:
            y0 = 0
        y1 = ry + radius
        if y1 > h - block:
            y1 = h - block
        x0 = rx - radius
        if x0 < 0:
            x0 = 0
        x1 = rx + radius
        if x1 > w - block:
            x1 = w - block
        m = 0
        for cy in range(y0, y1 + 1):
            for cx in range(x0, x1 + 1):
                ssd = 0
                for yy in range(block):
                    for xx in range(block):
                        d = frame[cy + yy, cx + xx] - frame[ry + yy, rx + xx]
                        ssd += d * d
                # stable insertion: ties keep the earlier candidate
                j = m
                while j > 0 and best_ssd[j - 1] > ssd:
                    j -= 1
                if j < count:
                    kk = m if m < count else count - 1
                    while kk > j:
                        best_ssd[kk] = best_ssd[kk - 1]
                        best_y[kk] = best_y[kk - 1]
                        best_x[kk] = best_x[kk - 1]
                        kk -= 1
                    best_ssd[j] = ssd
                    best_y[j] = cy
                    best_x[j] = cx
                    if m < count:
                        m += 1
        for j in range(m):
            coords[i, j, 0] = best_y[j]
            coords[i, j, 1] = best_x[j]
        counts[i] = m
    return coords_arr, counts_arr


def rice_encode_chunk(cnp.uint64_t[::1] values, int k):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t i
    cdef long long total = 0
    for i in range(n):
        total += <long long>(values[i] >> k)
    total += n * (1 + k)
    cdef Py_ssize_t nbytes = (total + 7) // 8
    buf_arr = np.zeros(nbytes, dtype=np.uint8)
    cdef cnp.uint8_t[::1] buf = buf_arr
    cdef Py_ssize_t pos = 0
    cdef unsigned long long acc = 0
    cdef unsigned long long v, q, mask
    cdef int na = 0
    mask = (<unsigned long long>1 << k) - 1
    for i in range(n):
        v = values[i]
        q = v >> k
        while q >= 32:
            acc = (acc << 32) | <unsigned long long>0xFFFFFFFF
            na += 32
            while na >= 8:
                na -= 8
                buf[pos] = <cnp.uint8_t>((acc >> na) & 0xFF)
                pos += 1
            acc &= (<unsigned long long>1 << na) - 1
            q -= 32
        # q one-bits, a zero terminator, then k remainder bits
        acc = (acc << (q + 1)) | ((((<unsigned long long>1 << q) - 1)) << 1)
        na += <int>q + 1
        while na >= 8:
            na -= 8
            buf[pos] = <cnp.uint8_t>((acc >> na) & 0xFF)
            pos += 1
        acc &= (<unsigned long long>1 << na) - 1
        if k:
            acc = (acc << k) | (v & mask)
            na += k
            while na >= 8:
                na -= 8
                buf[pos] = <cnp.uint8_t>((acc >> na) & 0xFF)
                pos += 1
            acc &= (<unsigned long long>1 << na) - 1
    if na:
        buf[pos] = <cnp.uint8_t>((acc << (8 - na)) & 0xFF)
        pos += 1
    return buf_arr.tobytes(), total


def rice_decode_chunk(object data, long long bit_offset, Py_ssize_t n, int k):
    cdef const unsigned char[::1] d = data
    cdef long long limit = <long long>d.shape[0] * 8
    cdef long long pos = bit_offset
    out_arr = np.empty(n, dtype=np.uint64)
    cdef cnp.uint64_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef int j, bit
    cdef unsigned long long q, rem
    for i in range(n):
        q = 0
        while True:
            if pos >= limit:
                raise ValueError("bitstream exhausted in unary run")
            bit = (d[pos >> 3] >> (7 - (pos & 7))) & 1
            pos += 1
            if bit == 0:
                break
            q += 1
        if pos + k > limit:
            raise ValueError("bitstream exhausted in remainder bits")
        rem = 0
        for j in range(k):
            rem = (rem << 1) | <unsigned long long>((d[pos >> 3] >> (7 - (pos & 7))) & 1)
            pos += 1
        out[i] = (q << k) | rem
    return out_arr, pos
