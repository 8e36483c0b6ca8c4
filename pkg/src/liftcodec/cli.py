"""Command-line harness: encode | decode | verify | sweep | synth.

Raw input is the headerless u16 format, so every command that reads one
takes explicit --width/--height/--frames/--bit-depth flags. ``sweep`` runs
a (mode, filter, xi) grid against one input and writes a CSV of rate and
LP-quality columns; points run in a process pool sized by LIFTCODEC_THREADS
(default: all cores) and the CSV order is the spec order regardless of
completion order.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import os
import sys
from fractions import Fraction

from . import backend, codec, metrics, volume
from .denoise import KINDS, DenoiseConfig
from .errors import CodecError, ParameterError, RangeError
from .lifting import LiftingMode
from .motion import MotionConfig

MODE_NAMES = [m.value for m in LiftingMode]


def _add_raw_input_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="raw u16 little-endian file")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--bit-depth", type=int, default=12)


def _add_codec_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=MODE_NAMES, default="mctf")
    p.add_argument("--filter", dest="filter_kind", choices=KINDS, default="identity")
    p.add_argument("--xi", default="0", help="noise parameter, integer or a/b fraction")
    p.add_argument("--grid-size", type=int, default=8)
    p.add_argument("--search-range", type=int, default=8)
    p.add_argument("--levels", type=int, default=4, help="spatial DWT levels")


def _parse_xi(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"bad xi value {text!r}: {exc}") from exc


def _parse_xi_list(text: str) -> list[Fraction]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if ":" in item:
            lo, hi = item.split(":", 1)
            out.extend(Fraction(v) for v in range(int(lo), int(hi) + 1))
        else:
            out.append(_parse_xi(item))
    if not out:
        raise ParameterError("empty xi list")
    return out


def _load_input(args) -> volume.Sequence:
    return volume.load_raw(args.input, args.width, args.height,
                           args.frames, args.bit_depth)


def _configs(args):
    mode = LiftingMode(args.mode)
    dn = DenoiseConfig(args.filter_kind, _parse_xi(args.xi))
    mc = MotionConfig(args.grid_size, args.search_range)
    return mode, dn, mc


def _print_breakdown(b: codec.StreamBreakdown):
    print(f"header_bytes={b.header_bytes} mv_bytes={b.mv_bytes} "
          f"lp_bytes={b.lp_bytes} hp_bytes={b.hp_bytes} total_bytes={b.total_bytes}")


def _save_wide_u16(seq: volume.Sequence, path):
    """Raw export for subband (LP) frames: u16 bound check, not bit depth."""
    planes = []
    for t, f in enumerate(seq.frames):
        lo, hi = int(f.data.min()), int(f.data.max())
        if lo < 0 or hi > 0xFFFF:
            raise RangeError(f"frame {t}: value {lo if lo < 0 else hi} "
                             "does not fit the u16 raw format")
        planes.append(f.data.astype("<u2").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(planes))


def cmd_encode(args) -> int:
    seq = _load_input(args)
    mode, dn, mc = _configs(args)
    stream = codec.encode_sequence(seq, mode, dn, mc, args.levels)
    with open(args.out, "wb") as fh:
        fh.write(stream)
    _print_breakdown(codec.stream_breakdown(stream))
    return 0


def cmd_decode(args) -> int:
    with open(args.input, "rb") as fh:
        stream = fh.read()
    seq = codec.decode_sequence(stream, layers=args.layers)
    if args.layers == "bl":
        _save_wide_u16(seq, args.out)
    else:
        volume.save_raw(seq, args.out)
    print(f"decoded {seq.frame_count} frames "
          f"({seq.width}x{seq.height}, layers={args.layers})")
    return 0


def cmd_verify(args) -> int:
    seq = _load_input(args)
    mode, dn, mc = _configs(args)
    stream = codec.encode_sequence(seq, mode, dn, mc, args.levels)
    _print_breakdown(codec.stream_breakdown(stream))
    decoded = codec.decode_sequence(stream, layers="full")
    lp_frames = codec.decode_sequence(stream, layers="bl").frames
    quality = metrics.evaluate_lp(lp_frames, seq)
    print(f"psnr_lp_db={quality.psnr_lp:.4f} ssim_lp={quality.ssim_lp:.6f}")
    if decoded == seq:
        print("lossless: OK")
        return 0
    print("lossless: MISMATCH", file=sys.stderr)
    return 1


def cmd_synth(args) -> int:
    objects = [_parse_object(spec) for spec in args.object] if args.object \
        else [_default_object(args.width, args.height, args.frames)]
    seq = volume.synthesize_phantom(
        args.width, args.height, args.frames, objects,
        args.noise_sigma, args.seed, args.background, args.bit_depth)
    volume.save_raw(seq, args.out)
    if args.pgm_preview:
        volume.save_pgm(seq.frames[0], args.pgm_preview)
    print(f"wrote {args.frames} frames {args.width}x{args.height} "
          f"noise_sigma={args.noise_sigma}")
    return 0


def _default_object(width: int, height: int, frames: int) -> volume.PhantomObject:
    r = max(2, min(width, height) // 5)
    cx = (width - frames) / 2.0
    return volume.PhantomObject("disk", (cx, height / 2.0, r), 1024, (1.0, 0.0))


def _parse_object(spec: str) -> volume.PhantomObject:
    try:
        shape, rest = spec.split(":", 1)
        values = [float(v) for v in rest.split(",")]
        if shape == "disk":
            cx, cy, r, intensity, vx, vy = values
            return volume.PhantomObject("disk", (cx, cy, r), int(intensity), (vx, vy))
        if shape == "rect":
            x0, y0, w, h, intensity, vx, vy = values
            return volume.PhantomObject("rect", (x0, y0, w, h), int(intensity), (vx, vy))
    except ValueError as exc:
        raise ParameterError(f"bad object spec {spec!r}: {exc}") from exc
    raise ParameterError(f"unknown object shape in {spec!r}")


# ---------------------------------------------------------------------------
# Sweep

CSV_COLUMNS = ["mode", "filter", "xi", "lp_bytes", "hp_bytes", "mv_bytes",
               "total_bytes", "psnr_lp_db", "ssim_lp", "rel_delta_vs_mctf_pct"]

_BASELINE_POINT = ("mctf", "identity", Fraction(0))


def _sweep_point(task):
    (path, width, height, frames, bit_depth, mode_name, kind, xi_str,
     grid, search, levels) = task
    seq = volume.load_raw(path, width, height, frames, bit_depth)
    mode = LiftingMode(mode_name)
    dn = DenoiseConfig(kind, Fraction(xi_str))
    mc = MotionConfig(grid, search)
    stream = codec.encode_sequence(seq, mode, dn, mc, levels)
    b = codec.stream_breakdown(stream)
    quality = metrics.evaluate_lp(codec.decode_sequence(stream, "bl").frames, seq)
    return {
        "mode": mode_name, "filter": kind, "xi": xi_str,
        "lp_bytes": b.lp_bytes, "hp_bytes": b.hp_bytes, "mv_bytes": b.mv_bytes,
        "total_bytes": b.total_bytes,
        "psnr_lp_db": quality.psnr_lp, "ssim_lp": quality.ssim_lp,
    }


def cmd_sweep(args) -> int:
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    filters = [f.strip() for f in args.filters.split(",") if f.strip()]
    xis = _parse_xi_list(args.xi)
    for m in modes:
        if m not in MODE_NAMES:
            raise ParameterError(f"unknown mode {m!r}")
    for f in filters:
        if f not in KINDS:
            raise ParameterError(f"unknown filter {f!r}")
    if not modes or not filters:
        raise ParameterError("sweep needs non-empty mode and filter lists")

    points = [_BASELINE_POINT]
    for mode in modes:
        for kind in filters:
            for xi in xis:
                point = (mode, kind, xi)
                if point != _BASELINE_POINT:
                    points.append(point)

    tasks = [(args.input, args.width, args.height, args.frames, args.bit_depth,
              mode, kind, str(xi), args.grid_size, args.search_range, args.levels)
             for mode, kind, xi in points]

    workers = int(os.environ.get("LIFTCODEC_THREADS", 0)) or os.cpu_count() or 1
    if workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]

    base_total = rows[0]["total_bytes"]
    for row in rows:
        row["rel_delta_vs_mctf_pct"] = (
            (row["total_bytes"] - base_total) / base_total * 100.0)

    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftcodec",
        description="Lossless temporally scalable codec with in-loop denoising "
                    f"(kernel backend: {backend.backend_name()})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a raw sequence to a .wlpc stream")
    _add_raw_input_flags(p)
    _add_codec_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a .wlpc stream to raw")
    p.add_argument("--input", required=True)
    p.add_argument("--layers", choices=["full", "bl"], default="full")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("verify", help="encode, decode and compare in one process")
    _add_raw_input_flags(p)
    _add_codec_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="rate/quality grid over modes, filters, xi")
    _add_raw_input_flags(p)
    p.add_argument("--modes", required=True, help="comma list, e.g. wldu,wldpu")
    p.add_argument("--filters", required=True, help="comma list of filter kinds")
    p.add_argument("--xi", default=",".join(str(v) for v in range(1, 101)),
                   help="comma list and a:b ranges (default 1:100)")
    p.add_argument("--grid-size", type=int, default=8)
    p.add_argument("--search-range", type=int, default=8)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a phantom raw sequence")
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--bit-depth", type=int, default=12)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--background", type=int, default=1024)
    p.add_argument("--object", action="append",
                   help="disk:cx,cy,r,intensity,vx,vy or rect:x0,y0,w,h,intensity,vx,vy")
    p.add_argument("--pgm-preview", help="write frame 0 as 16-bit PGM")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
