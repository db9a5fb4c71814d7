"""Splits, the relative L2 metric, the training loop with early stopping, and evaluation."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, RdoError
from ..optim import Adam, step_decay_lr
from ..seeding import SHUFFLE, SPLIT, rng_for
from ..tensor import Tensor, backward, mean, no_grad

log = logging.getLogger(__name__)


def split_dataset(n, ratios=(0.6, 0.2, 0.2), seed=0):
    """Seeded permutation of ``range(n)`` cut into train/validation/test index arrays.

    Sizes are ``round(n * r_train)``, ``round(n * r_val)`` and the remainder.
    """
    ratios = np.asarray(ratios, dtype=np.float64)
    if ratios.shape != (3,) or np.any(ratios <= 0):
        raise ValueError(f"need three positive split ratios, got {ratios}")
    ratios = ratios / ratios.sum()
    n_train = int(round(n * ratios[0]))
    n_val = int(round(n * ratios[1]))
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(f"split of {n} samples by {ratios} leaves an empty partition")
    perm = rng_for(seed, SPLIT).permutation(n)
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def rl2e(prediction, truth):
    """``||prediction - truth||_2 / ||truth||_2`` over the last axis."""
    prediction = np.asarray(prediction, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if prediction.shape != truth.shape:
        raise ValueError(f"shape mismatch {prediction.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth, axis=-1)
    if np.any(denom == 0):
        raise ValueError("relative L2 error undefined for an all-zero reference")
    out = np.linalg.norm(prediction - truth, axis=-1) / denom
    return float(out) if out.ndim == 0 else out


def predict(model, inputs, grid, queries, chunk=64):
    """Model outputs ``[N, n]`` without recording a graph."""
    outs = []
    with no_grad():
        for i in range(0, inputs.shape[0], chunk):
            outs.append(model(inputs[i : i + chunk], grid, queries).data)
    return np.concatenate(outs, axis=0)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_rl2e: float
    lr: float


def train(model, train_block, val_block, grid, config, callback=None):
    """Minimize the query-averaged squared error with Adam and step-decayed LR.

    After every epoch the mean validation RL2E is computed; with early stopping
    on, the parameters of the best validation epoch are restored at the end.
    Returns ``(model, history)``.
    """
    params = model.parameters()
    opt = Adam(params, lr=config.lr)
    rng = rng_for(config.seed, SHUFFLE)
    x_all, y_all, queries = train_block.inputs, train_block.targets, train_block.queries
    n = x_all.shape[0]
    history = []
    best = (np.inf, None, -1)
    for epoch in range(config.epochs):
        opt.lr = step_decay_lr(epoch, config.lr, config.lr_decay, config.lr_step)
        order = rng.permutation(n)
        total = 0.0
        for bi, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            pred = model(x_all[idx], grid, queries)
            diff = pred - Tensor(y_all[idx])
            loss = mean(diff * diff)
            value = float(loss.data)
            if not np.isfinite(value):
                raise NumericalError(f"non-finite loss at epoch {epoch}, batch {bi}")
            opt.zero_grad()
            backward(loss, params)
            opt.step()
            total += value * len(idx)
        val = float(np.mean(rl2e(predict(model, val_block.inputs, grid, val_block.queries),
                                 val_block.targets)))
        rec = EpochRecord(epoch, total / n, val, opt.lr)
        history.append(rec)
        if val < best[0]:
            best = (val, model.state_dict(), epoch)
        if callback is not None:
            callback(rec, model)
        if epoch % 10 == 0 or epoch == config.epochs - 1:
            log.info("epoch %d loss %.3e val-rl2e %.4f lr %.2e", epoch, rec.train_loss, val, opt.lr)
    if config.early_stopping and best[1] is not None:
        model.load_state_dict(best[1])
        log.info("restored epoch %d (val-rl2e %.4f)", best[2], best[0])
    return model, history


@dataclass
class MetricRecord:
    experiment: str
    model: str
    train_res: int
    test_res: int
    rl2e: float | None
    n: int
    seconds: float | None = None


def evaluate_multi_resolution(model, dataset, resolutions, experiment=None, model_kind=None,
                              train_res=None, timing=True):
    """Mean test RL2E per resolution; models that reject a resolution give ``rl2e=None``."""
    experiment = experiment or dataset.experiment
    model_kind = model_kind or getattr(getattr(model, "spec", None), "kind", type(model).__name__)
    records = []
    for res in resolutions:
        block = dataset.block(res)
        t0 = time.perf_counter()
        try:
            pred = predict(model, block.inputs, dataset.grid(res), block.queries)
            value = float(np.mean(rl2e(pred, block.targets)))
        except RdoError as exc:
            log.info("%s at resolution %d not applicable: %s", model_kind, res, exc)
            value = None
        seconds = time.perf_counter() - t0 if timing else None
        records.append(MetricRecord(experiment, model_kind, train_res, int(res), value, len(block), seconds))
    return records
