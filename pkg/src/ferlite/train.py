"""Training, two-stage fine-tuning, and evaluation.

All randomness (shuffle order, augmentation draws, dropout masks) comes
from generators derived from (seed, purpose, epoch, ...) so a run is
reproducible bit for bit and independent of batch processing order.
"""

import math
from dataclasses import dataclass

import numpy as np

from ferlite import nn, rng as _rng
from ferlite.augment import AugmentConfig, augment
from ferlite.errors import ConfigError, InputError, TrainingError
from ferlite.metrics import confusion_matrix
from ferlite.model import FerModel

EVAL_BATCH = 64


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    lr: float = 0.01
    momentum: float = 0.9
    seed: int = 0
    augment: AugmentConfig = None   # None disables augmentation
    report_interval: int = 1        # progress callback every n epochs; 0 = never
    target_train_acc: float = None  # stop early once reached

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be at least 1, got {self.batch_size}")
        if not self.lr > 0:
            raise ConfigError(f"learning rate must be positive, got {self.lr}")
        if not 0 <= self.momentum < 1:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.report_interval < 0:
            raise ConfigError(f"report interval must be non-negative, got {self.report_interval}")
        if self.target_train_acc is not None and not 0 < self.target_train_acc <= 1:
            raise ConfigError(
                f"target train accuracy must be in (0, 1], got {self.target_train_acc}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int        # 1-based
    train_acc: float
    val_acc: float    # None when no validation split is given
    loss: float       # mean training cross-entropy
    lr: float         # effective learning rate for this epoch


class _MomentumSGD:
    """Classical momentum: v <- mu*v + g, p <- p - lr*v, per named layer."""

    def __init__(self, model: FerModel, momentum):
        self.momentum = momentum
        self.velocity = {
            name: {k: np.zeros_like(p) for k, p in layer.params().items()}
            for name, layer in model.param_layers()
        }

    def step(self, model, lr):
        for name, layer in model.param_layers():
            if layer.frozen:
                continue
            grads = layer.grads()
            vel = self.velocity[name]
            for k, g in grads.items():
                v = vel[k]
                v *= self.momentum
                v += g
            nn.sgd_step(layer.params(), vel, lr)


def _batch_inputs(data, order, cfg, epoch):
    """Yield (x [B,1,48,48] float32, labels [B] int64, batch_index)."""
    bs = cfg.batch_size
    for b, start in enumerate(range(0, len(order), bs)):
        idx = order[start:start + bs]
        xs = np.empty((len(idx), 1, 48, 48), dtype=np.float32)
        ys = np.empty(len(idx), dtype=np.int64)
        for row, j in enumerate(idx):
            sample = data[int(j)]
            pixels = sample.pixels
            if cfg.augment is not None:
                # keyed by the sample's dataset index, not its batch slot,
                # so the variant does not depend on shuffle order
                pixels = augment(pixels, cfg.augment,
                                 _rng.make_rng(cfg.augment.seed, _rng.AUGMENT, epoch, int(j)))
            xs[row, 0] = pixels.astype(np.float32) / np.float32(255.0)
            ys[row] = sample.label
        yield xs, ys, b


def train(model: FerModel, train_data, val_data, cfg: TrainConfig,
          start_epoch=0, progress=None):
    """Run cfg.epochs of SGD; returns the per-epoch history.

    start_epoch offsets epoch numbering (and the RNG streams) so a
    fine-tuning stage can continue where the first stage stopped.
    progress, if given, is called with each EpochStats every
    cfg.report_interval epochs.
    """
    if not train_data:
        raise InputError("training set is empty")
    n = len(train_data)
    optimizer = _MomentumSGD(model, cfg.momentum)
    history = []
    for e in range(cfg.epochs):
        epoch = start_epoch + e + 1
        order = _rng.make_rng(cfg.seed, _rng.SHUFFLE, epoch).permutation(n)
        loss_sum = 0.0
        correct = 0
        for xs, ys, b in _batch_inputs(train_data, order, cfg, epoch):
            drop_rng = _rng.make_rng(cfg.seed, _rng.DROPOUT, epoch, b)
            logits = model.logits(xs, mode="train", rng=drop_rng)
            loss, grad = nn.softmax_cross_entropy(logits, ys)
            if not math.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {b}")
            try:
                model.backward(grad)
                optimizer.step(model, cfg.lr)
            except TrainingError as exc:
                raise TrainingError(f"epoch {epoch}, batch {b}: {exc}") from exc
            loss_sum += loss * len(ys)
            correct += int((logits.argmax(axis=1) == ys).sum())
        train_acc = correct / n
        val_acc = None
        if val_data:
            val_acc, _, _ = evaluate(model, val_data)
        stats = EpochStats(epoch=epoch, train_acc=train_acc,
                           val_acc=val_acc, loss=loss_sum / n, lr=cfg.lr)
        history.append(stats)
        if progress is not None and cfg.report_interval and (e + 1) % cfg.report_interval == 0:
            progress(stats)
        if cfg.target_train_acc is not None and train_acc >= cfg.target_train_acc:
            break
    return history


def fine_tune_stage2(model: FerModel, train_data, val_data, cfg: TrainConfig,
                     trainable_dense=2, start_epoch=0, progress=None):
    """Second training stage: freeze the conv blocks, train the last
    dense layers at a tenth of the configured rate.

    trainable_dense picks how many dense layers (counted from the
    output) stay trainable; the rest, and every conv block with its
    batchnorm, are frozen.  Frozen batchnorm layers normalize with their
    accumulated running statistics.  Layers stay frozen on return.
    """
    n_dense = len(model.config.dense_sizes)
    if not 1 <= trainable_dense <= n_dense:
        raise ConfigError(
            f"trainable_dense must be in 1..{n_dense}, got {trainable_dense}")
    frozen = [f"block{i}.bn" for i in range(1, 5)]
    frozen += [f"block{i}.conv" for i in range(1, 5)]
    frozen += [f"dense{j}" for j in range(1, n_dense - trainable_dense + 1)]
    model.set_frozen(frozen)
    stage_cfg = TrainConfig(
        epochs=cfg.epochs, batch_size=cfg.batch_size, lr=cfg.lr / 10.0,
        momentum=cfg.momentum, seed=cfg.seed, augment=cfg.augment,
        report_interval=cfg.report_interval,
        target_train_acc=cfg.target_train_acc)
    return train(model, train_data, val_data, stage_cfg,
                 start_epoch=start_epoch, progress=progress)


def evaluate(model: FerModel, data, batch_size=EVAL_BATCH):
    """Eval-mode metrics over a labeled dataset.

    Returns (accuracy, ConfusionMatrix, per-class list of
    (name, recall, precision)).  Parameters are not touched.
    """
    if not data:
        raise InputError("evaluation set is empty")
    preds = np.empty(len(data), dtype=np.int64)
    labels = np.empty(len(data), dtype=np.int64)
    for start in range(0, len(data), batch_size):
        chunk = data[start:start + batch_size]
        xs = np.stack([s.as_input() for s in chunk])
        probs = model.forward(xs, mode="eval")
        preds[start:start + len(chunk)] = probs.argmax(axis=1)
        labels[start:start + len(chunk)] = [s.label for s in chunk]
    cm = confusion_matrix(preds, labels, n_classes=model.config.dense_sizes[-1])
    return cm.accuracy(), cm, cm.per_class()


def write_history_csv(history, fh):
    """epoch,train_acc,val_acc,loss rows; val_acc empty when absent."""
    fh.write("epoch,train_acc,val_acc,loss\n")
    for h in history:
        val = "" if h.val_acc is None else f"{h.val_acc:.6f}"
        fh.write(f"{h.epoch},{h.train_acc:.6f},{val},{h.loss:.6f}\n")
