"""Training loop, metrics, evaluation across resolutions and reporting."""
from .config import ExperimentConfig, TrainConfig, format_config, load_config, parse_config
from .report import plot_rl2e, read_metrics_csv, report, write_metrics_csv
from .training import (
    EpochRecord,
    MetricRecord,
    evaluate_multi_resolution,
    predict,
    rl2e,
    split_dataset,
    train,
)

__all__ = [
    "EpochRecord",
    "ExperimentConfig",
    "MetricRecord",
    "TrainConfig",
    "evaluate_multi_resolution",
    "format_config",
    "load_config",
    "parse_config",
    "plot_rl2e",
    "predict",
    "read_metrics_csv",
    "report",
    "rl2e",
    "split_dataset",
    "train",
    "write_metrics_csv",
]
