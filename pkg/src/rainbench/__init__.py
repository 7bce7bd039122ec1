"""rainbench: paired rain/clean dataset tooling, SSIM / PSNR-HVS-M scoring,
and a real-vs-fake perception survey for de-raining benchmarks."""

from .dataset import (
    AnnotationRecord,
    DatasetManifest,
    PairEntry,
    assign_splits,
    build_manifest,
    load_manifest,
    merge_pair,
    parse_annotations,
    partition_by_weather,
    persist_manifest,
    sample_subset,
    split_merged,
)
from .imaging import ImageBuffer, decode_image, encode_image, to_luma
from .metrics import (
    DEFAULT_HVS_TABLES,
    HvsTables,
    QualityScore,
    SsimParams,
    dct8x8,
    idct8x8,
    kernel_backend,
    mse,
    psnr,
    psnr_hvs_m,
    ssim,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord",
    "DatasetManifest",
    "DEFAULT_HVS_TABLES",
    "HvsTables",
    "ImageBuffer",
    "PairEntry",
    "QualityScore",
    "SsimParams",
    "assign_splits",
    "build_manifest",
    "dct8x8",
    "decode_image",
    "encode_image",
    "idct8x8",
    "kernel_backend",
    "load_manifest",
    "merge_pair",
    "mse",
    "parse_annotations",
    "partition_by_weather",
    "persist_manifest",
    "psnr",
    "psnr_hvs_m",
    "sample_subset",
    "split_merged",
    "ssim",
    "to_luma",
    "__version__",
]
