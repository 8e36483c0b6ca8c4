"""Temporal Haar lifting with motion compensation and in-loop denoising.

One decomposition level over frame pairs (f_odd, f_even):

    HP = f_even - floor(P)          P: prediction signal
    LP = f_odd + floor(U / 2)       U: update signal

The mode decides where (and in which order) the denoiser sits:

    mctf        P = W(f_odd)            U = W^-1(HP)
    wldu        P = W(f_odd)            U = W^-1(DN(HP))
    wldur       P = W(f_odd)            U = DN(W^-1(HP))
    wldp        P = DN(W(f_odd))        U = W^-1(HP)
    wldpu       P = DN(W(f_odd))        U = DN(W^-1(HP))
    truncated   P = W(f_odd)            U = 0
    haar_plain  P = f_odd               U = HP          (no motion, no DN)

Synthesis recomputes U from (HP, motion field) and P from the recovered
f_odd with exactly the analysis dataflow, so reconstruction is bit-exact
for every mode, filter and strength: the denoiser only ever touches signals
both sides possess. The noise variance feeding h is estimated on the filter
input frame at the point of use, for the same reason.

Motion is estimated once per pair on the original frames (f_odd as
reference) and shipped in the bitstream; it is never re-derived from
denoised data. The halved update is floored toward -infinity per pixel
after the mode's DN/warp chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .denoise import DenoiseConfig, denoise, estimate_noise_variance
from .errors import ParameterError
from .motion import MotionConfig, MotionField, estimate_motion, warp, zero_motion_field
from .volume import Frame, Sequence


class LiftingMode(str, Enum):
    MCTF = "mctf"
    WLDU = "wldu"
    WLDUR = "wldur"
    WLDP = "wldp"
    WLDPU = "wldpu"
    TRUNCATED = "truncated"
    HAAR_PLAIN = "haar_plain"


_PREDICTION_DN = {LiftingMode.WLDP, LiftingMode.WLDPU}
_UPDATE_DN_BEFORE_WARP = {LiftingMode.WLDU}
_UPDATE_DN_AFTER_WARP = {LiftingMode.WLDUR, LiftingMode.WLDPU}


@dataclass
class SubbandPair:
    """(LP, HP, motion) for one temporal pair; the scalable representation.

    ``noise_snapshot`` records the sigma^2 values the encoder used, for
    diagnostics only; the decoder re-estimates them from decoded signals.
    """

    lp: Frame
    hp: Frame
    mf: MotionField
    noise_snapshot: dict


def _check_pair(f_odd: Frame, f_even: Frame):
    if f_odd.data.shape != f_even.data.shape or f_odd.bit_depth != f_even.bit_depth:
        raise ParameterError("pair frames must share dimensions and bit depth")


def _prediction(f_odd: Frame, mf: MotionField, mode: LiftingMode,
                dn: DenoiseConfig, snapshot: dict) -> np.ndarray:
    if mode is LiftingMode.HAAR_PLAIN:
        return f_odd.data
    pred = warp(f_odd, mf, "forward")
    if mode in _PREDICTION_DN and dn.kind != "identity":
        noise = estimate_noise_variance(pred)
        snapshot["prediction_sigma_sq"] = noise.sigma_sq
        pred = denoise(pred, dn, noise)
    return pred.data


def _update(hp: Frame, mf: MotionField, mode: LiftingMode,
            dn: DenoiseConfig, snapshot: dict) -> np.ndarray:
    if mode is LiftingMode.TRUNCATED:
        return np.zeros_like(hp.data)
    if mode is LiftingMode.HAAR_PLAIN:
        return hp.data
    if mode in _UPDATE_DN_BEFORE_WARP and dn.kind != "identity":
        noise = estimate_noise_variance(hp)
        snapshot["update_sigma_sq"] = noise.sigma_sq
        hp = denoise(hp, dn, noise)
    upd = warp(hp, mf, "inverse")
    if mode in _UPDATE_DN_AFTER_WARP and dn.kind != "identity":
        noise = estimate_noise_variance(upd)
        snapshot["update_sigma_sq"] = noise.sigma_sq
        upd = denoise(upd, dn, noise)
    return upd.data


def analyze_pair(f_odd: Frame, f_even: Frame, mode: LiftingMode,
                 dn: DenoiseConfig, mc: MotionConfig) -> SubbandPair:
    """Forward lifting of one pair. Motion comes from the original frames
    (all-zero for haar_plain) and is carried in the result."""
    _check_pair(f_odd, f_even)
    if mode is LiftingMode.HAAR_PLAIN:
        mf = zero_motion_field(f_odd.width, f_odd.height, mc.grid_size)
    else:
        mf = estimate_motion(f_odd, f_even, mc)
    snapshot = {}
    pred = _prediction(f_odd, mf, mode, dn, snapshot)
    hp = Frame(f_even.data - pred, f_odd.bit_depth)
    upd = _update(hp, mf, mode, dn, snapshot)
    lp = Frame(f_odd.data + (upd >> 1), f_odd.bit_depth)
    return SubbandPair(lp, hp, mf, snapshot)


def synthesize_pair(sp: SubbandPair, mode: LiftingMode,
                    dn: DenoiseConfig, mc: MotionConfig) -> tuple[Frame, Frame]:
    """Exact inverse of analyze_pair given the same (mode, dn, mc)."""
    del mc  # motion travels inside the pair; config kept for symmetry
    if sp.lp.data.shape != sp.hp.data.shape:
        raise ParameterError("LP/HP dimensions differ")
    snapshot = {}
    upd = _update(sp.hp, sp.mf, mode, dn, snapshot)
    f_odd = Frame(sp.lp.data - (upd >> 1), sp.lp.bit_depth)
    pred = _prediction(f_odd, sp.mf, mode, dn, snapshot)
    f_even = Frame(sp.hp.data + pred, sp.lp.bit_depth)
    return f_odd, f_even


def analyze_sequence(seq: Sequence, mode: LiftingMode, dn: DenoiseConfig,
                     mc: MotionConfig) -> list[SubbandPair]:
    if seq.frame_count < 2 or seq.frame_count % 2:
        raise ParameterError("temporal analysis needs an even frame count >= 2")
    return [
        analyze_pair(seq.frames[2 * t], seq.frames[2 * t + 1], mode, dn, mc)
        for t in range(seq.frame_count // 2)
    ]


def synthesize_sequence(pairs: list[SubbandPair], mode: LiftingMode,
                        dn: DenoiseConfig, mc: MotionConfig) -> Sequence:
    frames = []
    for sp in pairs:
        f_odd, f_even = synthesize_pair(sp, mode, dn, mc)
        frames.extend([f_odd, f_even])
    return Sequence(frames)
