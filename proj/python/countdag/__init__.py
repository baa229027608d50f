from ._core import (
    GlmFit,
    InvalidData,
    RowRejectionLimit,
    SingularInformation,
    WaldTest,
    alpha_schedule,
    compare,
    fisher_information,
    fit,
    gradient,
    nll,
    or_lpgm,
    or_ppgm,
    outlier_filter,
    pk2,
    simulate,
    wald,
)

__all__ = [
    "GlmFit",
    "InvalidData",
    "RowRejectionLimit",
    "SingularInformation",
    "WaldTest",
    "alpha_schedule",
    "compare",
    "fisher_information",
    "fit",
    "gradient",
    "nll",
    "or_lpgm",
    "or_ppgm",
    "outlier_filter",
    "pk2",
    "simulate",
    "wald",
]
