"""Glue between datasets, configs, models and files used by the CLI."""
import csv
import os

from ..checkpoint import read_checkpoint, write_checkpoint
from ..errors import ConfigError
from ..models import build_model
from .config import format_config, load_config
from .training import evaluate_multi_resolution, split_dataset, train


def descriptor_path(model_path):
    return os.path.splitext(model_path)[0] + ".arch"


def history_path(model_path):
    return os.path.splitext(model_path)[0] + ".history.csv"


def check_compatible(cfg, dataset):
    if cfg.id != dataset.experiment:
        raise ConfigError(f"config is for {cfg.id!r} but the dataset holds {dataset.experiment!r}")
    if cfg.train_resolution not in dataset.blocks:
        raise ConfigError(
            f"train resolution {cfg.train_resolution} not in dataset {dataset.resolutions}"
        )
    if cfg.model.kind == "fno" and cfg.id != "sbvp":
        raise ConfigError("the FNO baseline needs identical input and output grids (sbvp only)")


def fit(cfg, dataset, callback=None):
    """Split, build and train the configured model; returns ``(model, history, split)``."""
    check_compatible(cfg, dataset)
    split = split_dataset(len(dataset), cfg.train.ratios, cfg.train.seed)
    model = build_model(cfg.model, cfg.train.seed)
    block = dataset.block(cfg.train_resolution)
    model, history = train(
        model, block.take(split[0]), block.take(split[1]),
        dataset.grid(cfg.train_resolution), cfg.train, callback,
    )
    return model, history, split


def save_trained(model, cfg, history, path):
    write_checkpoint(path, model.state_dict())
    with open(descriptor_path(path), "w", encoding="utf-8") as fh:
        fh.write(format_config(cfg))
    with open(history_path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epoch", "train_loss", "val_rl2e", "lr"))
        for h in history:
            w.writerow((h.epoch, repr(h.train_loss), repr(h.val_rl2e), repr(h.lr)))


def load_trained(path):
    cfg = load_config(descriptor_path(path))
    model = build_model(cfg.model, cfg.train.seed)
    model.load_state_dict(read_checkpoint(path))
    return model, cfg


def evaluate_trained(model, cfg, dataset, resolutions, timing=True):
    """Metric records on the test split recorded in ``cfg``."""
    check_compatible(cfg, dataset)
    test_idx = split_dataset(len(dataset), cfg.train.ratios, cfg.train.seed)[2]
    return evaluate_multi_resolution(
        model, dataset.take(test_idx), resolutions, cfg.id, cfg.model.kind,
        cfg.train_resolution, timing,
    )
