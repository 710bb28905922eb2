"""Reduced-reference quality assessment for deblurring methods."""

from ._core import (
    FEATURE_NAMES,
    BasedError,
    ConfigError,
    ConvergenceError,
    DataError,
    DegenerateError,
    DimensionError,
    FeatureError,
    FormatError,
    HighpassError,
    IdenticalError,
    IoError,
    LengthError,
    Model,
    ParamError,
    SchemaError,
    SizeError,
    ValidationError,
    bt_fit,
    crossval,
    extract_features,
    kendall_tau_b,
    load_png,
    pearson,
    psnr,
    save_png,
    spearman,
    ssim,
    ssim_m,
    to_luma,
)

__all__ = [name for name in dir() if not name.startswith("_")]
