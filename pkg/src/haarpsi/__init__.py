"""Haar wavelet-based perceptual similarity index (HaarPSI) for
full-reference image quality assessment, with the evaluation harness and
parameter-tuning procedure needed to benchmark it against opinion scores.
"""

from .image import (
    CorruptStreamError,
    ImageDecodeError,
    UnreadableFileError,
    UnsupportedFormatError,
    decode_image,
    encode_image,
    mean_pool_2x2,
    rgb_to_gray,
    rgb_to_yiq,
)
from .filters import (
    FilterBank,
    WaveletPair,
    WAVELETS,
    build_filterbank,
    cascade_1d,
    convolve2d_same,
    get_wavelet,
)
from .metric import (
    MetricParams,
    ScoreResult,
    dump_maps,
    haarpsi_color,
    haarpsi_gray,
    local_similarity_map,
    logistic,
    logistic_inverse,
    psnr,
    scalar_similarity,
    weight_map,
)
from .stats import (
    SignificanceResult,
    UndefinedCorrelationError,
    kendall_tau,
    pearson,
    significance,
    spearman,
)
from .harness import (
    ManifestEntry,
    ManifestError,
    MetricSpec,
    ScoreRow,
    build_report,
    load_manifest,
    score_manifest,
    write_scores_csv,
)
from .tuner import TuneConfig, TuneResult, TuningError, tune

__version__ = "0.1.0"

__all__ = [
    "CorruptStreamError", "ImageDecodeError", "UnreadableFileError",
    "UnsupportedFormatError", "decode_image", "encode_image", "mean_pool_2x2",
    "rgb_to_gray", "rgb_to_yiq",
    "FilterBank", "WaveletPair", "WAVELETS", "build_filterbank", "cascade_1d",
    "convolve2d_same", "get_wavelet",
    "MetricParams", "ScoreResult", "dump_maps", "haarpsi_color", "haarpsi_gray",
    "local_similarity_map", "logistic", "logistic_inverse", "psnr",
    "scalar_similarity", "weight_map",
    "SignificanceResult", "UndefinedCorrelationError", "kendall_tau", "pearson",
    "significance", "spearman",
    "ManifestEntry", "ManifestError", "MetricSpec", "ScoreRow", "build_report",
    "load_manifest", "score_manifest", "write_scores_csv",
    "TuneConfig", "TuneResult", "TuningError", "tune",
    "__version__",
]
