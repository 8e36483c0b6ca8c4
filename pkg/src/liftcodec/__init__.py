"""Lossless temporally scalable codec for 12-bit grayscale sequences.

Motion-compensated Haar wavelet lifting with deterministic in-loop
denoising in the prediction and/or update steps, an integer 5/3 spatial
transform with Rice coding, and a base/enhancement layer container.
"""

from .backend import available_backends, backend_name, set_backend
from .codec import (
    decode_sequence,
    encode_sequence,
    spatial_dwt_53,
    stream_breakdown,
)
from .denoise import DenoiseConfig, NoiseEstimate, denoise, estimate_noise_variance
from .errors import (
    CodecError,
    DecodeError,
    FormatError,
    ParameterError,
    RangeError,
)
from .lifting import (
    LiftingMode,
    SubbandPair,
    analyze_pair,
    analyze_sequence,
    synthesize_pair,
    synthesize_sequence,
)
from .metrics import psnr, psnr_lp, ssim, ssim_lp
from .motion import MotionConfig, MotionField, estimate_motion, warp
from .volume import (
    Frame,
    PhantomObject,
    Sequence,
    load_raw,
    save_pgm,
    save_raw,
    synthesize_phantom,
)

__version__ = "0.1.0"
