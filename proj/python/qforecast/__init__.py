"""Hybrid quantum-classical traffic flow forecasting.

The heavy lifting lives in the compiled ``_core`` extension: a dense
statevector simulator with parameter-shift gradients, an LSTM autoencoder
and the classic/hybrid regressor pairs, gap k-fold cross-validation, and
the experiment runner.
"""

from qforecast._core import (
    Autoencoder,
    ConfigError,
    Fold,
    FoldPlan,
    IndexRange,
    IngestError,
    Regressor,
    StateVector,
    TimeSeries,
    UsageError,
    __version__,
    build_model,
    circuit_gradient,
    compute_metrics,
    gap_kfold_split,
    generate_synthetic,
    load_csv,
    make_windows,
    run_cli,
    run_reupload_circuit,
    save_csv,
)

__all__ = [
    "Autoencoder",
    "ConfigError",
    "Fold",
    "FoldPlan",
    "IndexRange",
    "IngestError",
    "Regressor",
    "StateVector",
    "TimeSeries",
    "UsageError",
    "__version__",
    "build_model",
    "circuit_gradient",
    "compute_metrics",
    "gap_kfold_split",
    "generate_synthetic",
    "load_csv",
    "make_windows",
    "run_cli",
    "run_reupload_circuit",
    "save_csv",
]
