import numpy as np
import pytest

from rdolab.errors import ConfigError, NumericalError
from rdolab.harness.config import ExperimentConfig, TrainConfig, format_config, parse_config
from rdolab.harness.training import evaluate_multi_resolution, predict, rl2e, split_dataset, train
from rdolab.models import GridSpec, ModelSpec, build_model
from rdolab.nn import Module
from rdolab.optim import step_decay_lr
from rdolab.pdegen.dataset import ResolutionBlock, make_dataset
from rdolab.tensor import Tensor


class Linear1(Module):
    """``u = theta * a`` with a single scalar parameter."""

    def __init__(self, theta=0.0):
        self.theta = Tensor(np.array(theta), requires_grad=True)

    def __call__(self, a, grid, queries):
        return Tensor(np.asarray(a)) * self.theta


class Oracle:
    """Returns the stored truth for any input it has seen."""

    def __init__(self, dataset):
        self.table = {}
        for b in dataset.blocks.values():
            for x, y in zip(b.inputs, b.targets):
                self.table[x.tobytes()] = y

    def __call__(self, a, grid, queries):
        return Tensor(np.stack([self.table[row.tobytes()] for row in np.asarray(a)]))


def linear_block(n=40, slope=2.0, seed=0):
    x = np.random.default_rng(seed).uniform(0.5, 1.5, (n, 5))
    return ResolutionBlock(5, x, np.zeros((5, 1)), slope * x)


# -- splits and metric -----------------------------------------------------------
def test_split_sizes_full_scale():
    tr, va, te = split_dataset(1000, (6, 2, 2), seed=0)
    assert (len(tr), len(va), len(te)) == (600, 200, 200)


def test_split_disjoint_exhaustive_deterministic():
    parts = split_dataset(10, (6, 2, 2), seed=3)
    assert [len(p) for p in parts] == [6, 2, 2]
    assert sorted(np.concatenate(parts)) == list(range(10))
    again = split_dataset(10, (6, 2, 2), seed=3)
    assert all(np.array_equal(a, b) for a, b in zip(parts, again))


def test_split_errors():
    with pytest.raises(ValueError):
        split_dataset(3, (6, 2, 0.1))
    with pytest.raises(ValueError):
        split_dataset(10, (6, 2, -1))


def test_rl2e_values():
    u = np.array([3.0, -1.0, 2.0])
    assert rl2e(u, u) == 0.0
    assert rl2e(2 * u, u) == pytest.approx(1.0, rel=1e-15)
    assert rl2e(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(1 / np.sqrt(2), rel=1e-15)
    for alpha in (-2.0, 0.0, 0.3, 5.0):
        assert rl2e(alpha * u, u) == pytest.approx(abs(alpha - 1), rel=1e-14, abs=1e-15)
    with pytest.raises(ValueError):
        rl2e(u, np.zeros(3))


def test_rl2e_batched():
    t = np.array([[1.0, 0.0], [0.0, 2.0]])
    np.testing.assert_allclose(rl2e(2 * t, t), [1.0, 1.0])


# -- training -------------------------------------------------------------------
def test_lr_schedule():
    assert step_decay_lr(250, 1e-3, 0.5, 100) == pytest.approx(2.5e-4, rel=1e-15)
    block = linear_block()
    _, hist = train(Linear1(), block, block, GridSpec(0, 1, 5), TrainConfig(epochs=260, lr=1e-3))
    assert hist[99].lr == 1e-3 and hist[100].lr == 5e-4 and hist[250].lr == pytest.approx(2.5e-4)


def test_convex_fit_monotone_to_tiny_loss():
    block = linear_block()
    cfg = TrainConfig(epochs=400, batch_size=8, lr=0.02, lr_step=50)
    model, hist = train(Linear1(), block, block, GridSpec(0, 1, 5), cfg)
    losses = np.array([h.train_loss for h in hist])
    assert np.all(np.diff(losses) <= 0)
    assert losses[-1] < 1e-10
    assert float(model.theta.data) == pytest.approx(2.0, abs=1e-6)


def test_early_stopping_restores_best_epoch():
    # training pulls theta toward 2, validation data prefers 1.5; the best
    # validation epoch is passed on the way and must be restored
    grid = GridSpec(0, 1, 5)
    tr, va = linear_block(slope=2.0), linear_block(slope=1.5, seed=1)
    seen = []
    cfg = TrainConfig(epochs=80, batch_size=8, lr=0.05, lr_step=1000)
    model, hist = train(Linear1(), tr, va, grid, cfg,
                        callback=lambda rec, m: seen.append(float(m.theta.data)))
    vals = [h.val_rl2e for h in hist]
    k = int(np.argmin(vals))
    assert 0 < k < len(vals) - 1 and vals[-1] > vals[k]
    assert float(model.theta.data) == seen[k]
    restored = float(np.mean(rl2e(predict(model, va.inputs, grid, va.queries), va.targets)))
    assert restored == pytest.approx(min(vals), rel=1e-12)
    off = train(Linear1(), tr, va, grid, TrainConfig(epochs=80, batch_size=8, lr=0.05, lr_step=1000,
                                                     early_stopping=False))[0]
    assert float(off.theta.data) == seen[-1]


def test_nan_loss_aborts_with_location():
    block = linear_block()
    block.targets[3, 0] = np.nan
    with pytest.raises(NumericalError, match="epoch 0, batch 0"):
        train(Linear1(), block, block, GridSpec(0, 1, 5), TrainConfig(epochs=2, batch_size=40))


def test_rdo_training_reduces_validation_error():
    ds = make_dataset("sbvp", 30, [17], seed=0)
    tr, va, _ = split_dataset(30, (6, 2, 2), 0)
    model = build_model(ModelSpec(kind="rdo", width=8, modes=4, p=8, trunk=(1, 16, 8)), 0)
    b = ds.block(17)
    _, hist = train(model, b.take(tr), b.take(va), ds.grid(17), TrainConfig(epochs=8, batch_size=6))
    assert min(h.val_rl2e for h in hist) < hist[0].val_rl2e


# -- evaluation -------------------------------------------------------------------
@pytest.fixture(scope="module")
def small_sbvp():
    return make_dataset("sbvp", 8, [33, 65, 129], seed=4)


def test_oracle_scores_zero(small_sbvp):
    recs = evaluate_multi_resolution(Oracle(small_sbvp), small_sbvp, [33, 65, 129], model_kind="oracle")
    assert [r.rl2e for r in recs] == [0.0, 0.0, 0.0]
    assert [r.test_res for r in recs] == [33, 65, 129]
    assert all(r.n == 8 and r.seconds >= 0 for r in recs)


def test_deeponet_not_applicable_cells(small_sbvp):
    model = build_model(ModelSpec(kind="deeponet"), 0)
    recs = evaluate_multi_resolution(model, small_sbvp, [33, 65, 129], train_res=33, timing=False)
    assert recs[0].rl2e is not None and recs[0].rl2e >= 0
    assert recs[1].rl2e is None and recs[2].rl2e is None
    assert all(r.seconds is None and r.model == "deeponet" for r in recs)


# -- configuration ----------------------------------------------------------------
CONFIG = """
[experiment]
id = sbvp
train_resolution = 33
test_resolutions = 33, 65, 129

[model]
kind = rdo
t1 = 3
trunk = 1, 100, 100, 100

[train]
epochs = 50
early_stopping = yes
split = 6, 2, 2
"""


def test_parse_config():
    cfg = parse_config(CONFIG)
    assert cfg.model.t1 == 3 and cfg.model.trunk == (1, 100, 100, 100)
    assert cfg.train.epochs == 50 and cfg.train.lr == 1e-3
    assert cfg.train.ratios == pytest.approx((0.6, 0.2, 0.2))
    assert cfg.test_resolutions == (33, 65, 129)


def test_format_roundtrip_is_stable():
    cfg = parse_config(CONFIG)
    text = format_config(cfg)
    assert format_config(parse_config(text)) == text
    assert "kind = rdo" in text and "modes = 16" in text and "activation = gelu" in text


def test_config_errors():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(CONFIG.replace("t1 = 3", "tl = 3"))
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(CONFIG + "\n[optim]\nx = 1\n")
    with pytest.raises(ConfigError):
        parse_config(CONFIG.replace("epochs = 50", "epochs = 0"))
    with pytest.raises(ConfigError):
        parse_config(CONFIG.replace("epochs = 50", "epochs = many"))
    with pytest.raises(ConfigError):
        parse_config(CONFIG.replace("kind = rdo", "kind = unet"))


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.train.lr == 1e-3 and cfg.train.lr_decay == 0.5 and cfg.train.lr_step == 100
    assert cfg.train.early_stopping and cfg.train.split == (6.0, 2.0, 2.0)
