from ._core import (
    FitError,
    GapforgeError,
    Model,
    ParseError,
    PlanError,
    SpecError,
    Table,
    classification_report,
    fit,
    impute,
    inject,
    load_csv,
    mask_value_dependence,
    mse,
    profile,
    read_csv,
    rmse,
    rmsle,
    run_benchmark,
    synthesize,
    write_csv,
)

__all__ = [
    "FitError",
    "GapforgeError",
    "Model",
    "ParseError",
    "PlanError",
    "SpecError",
    "Table",
    "classification_report",
    "fit",
    "impute",
    "inject",
    "load_csv",
    "mask_value_dependence",
    "mse",
    "profile",
    "read_csv",
    "rmse",
    "rmsle",
    "run_benchmark",
    "synthesize",
    "write_csv",
]
