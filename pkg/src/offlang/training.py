"""Training loop with early stopping, MSE regression pre-training on
confidence scores, Adam, and finite-difference gradient verification.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .autodiff import Tensor
from .corpus import LabeledExample, ScoredExample
from .evaluation import macro_f1
from .mtl import (
    MtlModel,
    LossWeights,
    TASK_CLASSES,
    batch_targets,
    mtl_loss,
)
from .tokenizer import Vocabulary, encode_batch


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3   # full-scale runs use 3e-6
    batch_size: int = 32
    max_epochs: int = 20
    patience: int = 3
    loss_weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    use_dropout: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("learning_rate and batch_size must be positive")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be positive")

    def to_dict(self):
        d = asdict(self)
        d["loss_weights"] = self.loss_weights.as_tuple()
        return d


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_f1: dict[str, list[float]] = field(
        default_factory=lambda: {"a": [], "b": [], "c": []}
    )
    best_epoch: int = 0
    stopped_epoch: int = 0

    def to_lines(self) -> list[str]:
        lines = ["epoch\ttrain_loss\tval_f1_a\tval_f1_b\tval_f1_c"]
        for i, loss in enumerate(self.train_loss):
            lines.append(
                f"{i + 1}\t{loss:.6f}\t"
                + "\t".join(f"{self.val_f1[t][i]:.6f}" for t in ("a", "b", "c"))
            )
        lines.append(f"best_epoch\t{self.best_epoch}")
        lines.append(f"stopped_epoch\t{self.stopped_epoch}")
        return lines


class EarlyStopper:
    """Stop when the monitored metric fails to strictly improve for
    `patience` consecutive epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = -np.inf
        self.best_epoch = 0
        self.since_best = 0

    def update(self, metric: float, epoch: int) -> bool:
        """Record one epoch; True means training should stop now."""
        if metric > self.best:
            self.best = metric
            self.best_epoch = epoch
            self.since_best = 0
        else:
            self.since_best += 1
        return self.since_best >= self.patience


class Adam:
    """Adaptive moment estimation with the standard defaults."""

    def __init__(self, params: dict[str, Tensor], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {n: np.zeros_like(t.data) for n, t in params.items()}
        self.v = {n: np.zeros_like(t.data) for n, t in params.items()}
        self.t = 0

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, tensor in self.params.items():
            g = tensor.grad
            if g is None:
                continue
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1 ** self.t)
            v_hat = self.v[name] / (1 - b2 ** self.t)
            tensor.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class NonFiniteLossError(RuntimeError):
    pass


def _encode_examples(examples, vocab, max_len):
    texts = [ex.tweet.text for ex in examples]
    return encode_batch(texts, vocab, max_len)


def _minibatches(n, batch_size, rng):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train_accuracy(model, ids, mask, targets):
    """Per-task argmax accuracy over an encoded batch."""
    preds = model.forward_mtl(ids, mask)
    out = {}
    for task in ("a", "b", "c"):
        hit = sum(
            1
            for p, t in zip(preds, targets[task])
            if np.argmax(p.probs(task)) == t
        )
        out[task] = hit / len(preds)
    return out


def validation_f1(model, examples, vocab):
    """Macro-F1 per task on a labeled corpus."""
    ids, mask = _encode_examples(examples, vocab, model.encoder_config.max_len)
    preds = model.forward_mtl(ids, mask)
    scores = {}
    for task in ("a", "b", "c"):
        golds = [getattr(ex.labels, task).value for ex in examples]
        scores[task] = macro_f1(
            golds, [p.label(task) for p in preds], TASK_CLASSES[task]
        )
    return scores


def train(model: MtlModel, vocab: Vocabulary,
          train_examples: list[LabeledExample],
          val_examples: list[LabeledExample],
          config: TrainConfig) -> tuple[MtlModel, TrainHistory]:
    """Adam epochs over shuffled mini-batches with early stopping on
    sub-task A validation macro-F1.

    Stops when F1(A) fails to strictly improve for `patience` consecutive
    epochs; returns the parameters from the best epoch.
    """
    if not train_examples or not val_examples:
        raise ValueError("train and validation corpora must be non-empty")
    rng = np.random.default_rng(config.seed)
    max_len = model.encoder_config.max_len
    ids, mask = _encode_examples(train_examples, vocab, max_len)
    targets, real = batch_targets(train_examples)

    optimizer = Adam(model.params, config.learning_rate)
    history = TrainHistory()
    stopper = EarlyStopper(config.patience)
    best_state = model.state_arrays()

    for epoch in range(1, config.max_epochs + 1):
        epoch_losses = []
        for batch in _minibatches(len(train_examples), config.batch_size, rng):
            drop_rng = rng if config.use_dropout else None
            logits = model.logits_mtl(ids[batch], mask[batch], drop_rng)
            batch_targets_ = {t: targets[t][batch] for t in targets}
            loss, _, _ = mtl_loss(logits, batch_targets_, config.loss_weights,
                                  real[batch])
            if not np.isfinite(loss.data):
                raise NonFiniteLossError(f"non-finite loss at epoch {epoch}")
            model.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.data))

        history.train_loss.append(float(np.mean(epoch_losses)))
        scores = validation_f1(model, val_examples, vocab)
        for task in ("a", "b", "c"):
            history.val_f1[task].append(scores[task])

        improved = scores["a"] > stopper.best
        stop = stopper.update(scores["a"], epoch)
        if improved:
            history.best_epoch = epoch
            best_state = model.state_arrays()
        history.stopped_epoch = epoch
        if stop:
            break

    model.load_state_arrays(best_state)
    return model, history


def train_baseline(model: MtlModel, vocab: Vocabulary,
                   train_examples: list[LabeledExample],
                   val_examples: list[LabeledExample],
                   config: TrainConfig) -> tuple[MtlModel, TrainHistory]:
    """Single-task reference: cross-entropy on the linear CLS head for task A
    only, same optimizer and early-stopping protocol as the MTL loop."""
    if not train_examples or not val_examples:
        raise ValueError("train and validation corpora must be non-empty")
    from .autodiff import cross_entropy
    from .evaluation import macro_f1 as _macro_f1

    rng = np.random.default_rng(config.seed)
    max_len = model.encoder_config.max_len
    ids, mask = _encode_examples(train_examples, vocab, max_len)
    targets, _ = batch_targets(train_examples)
    val_ids, val_mask = _encode_examples(val_examples, vocab, max_len)
    val_golds = [ex.labels.a.value for ex in val_examples]

    optimizer = Adam(model.params, config.learning_rate)
    history = TrainHistory()
    stopper = EarlyStopper(config.patience)
    best_state = model.state_arrays()

    for epoch in range(1, config.max_epochs + 1):
        epoch_losses = []
        for batch in _minibatches(len(train_examples), config.batch_size, rng):
            drop_rng = rng if config.use_dropout else None
            logits = model.logits_baseline(ids[batch], mask[batch], drop_rng)
            loss = cross_entropy(logits, targets["a"][batch], np.ones(len(batch)))
            if not np.isfinite(loss.data):
                raise NonFiniteLossError(f"non-finite loss at epoch {epoch}")
            model.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_losses.append(float(loss.data))

        history.train_loss.append(float(np.mean(epoch_losses)))
        probs = model.forward_baseline(val_ids, val_mask)
        preds = [TASK_CLASSES["a"][int(i)] for i in probs.argmax(axis=1)]
        f1_a = _macro_f1(val_golds, preds, TASK_CLASSES["a"])
        for task in ("a", "b", "c"):
            history.val_f1[task].append(f1_a if task == "a" else 0.0)

        improved = f1_a > stopper.best
        stop = stopper.update(f1_a, epoch)
        if improved:
            history.best_epoch = epoch
            best_state = model.state_arrays()
        history.stopped_epoch = epoch
        if stop:
            break

    model.load_state_arrays(best_state)
    return model, history


def pretrain_regression(model: MtlModel, vocab: Vocabulary,
                        scored: list[ScoredExample], config: TrainConfig,
                        epochs: int | None = None) -> tuple[MtlModel, list[float]]:
    """Regression pre-training on confidence scores.

    A throwaway head (sigmoid of a linear map on the CLS embedding) is
    trained with mean squared error against avg_conf; the encoder keeps the
    updates, the head is discarded. Returns per-epoch mean MSE.
    """
    if not scored:
        raise ValueError("scored corpus must be non-empty")
    rng = np.random.default_rng(config.seed)
    d = model.encoder_config.d_model
    head_w = Tensor(rng.uniform(-1, 1, (d, 1)) / np.sqrt(d), requires_grad=True)
    head_b = Tensor(np.zeros(1), requires_grad=True)

    ids, mask = _encode_examples(scored, vocab, model.encoder_config.max_len)
    targets = np.array([ex.avg_conf for ex in scored])

    trainable = dict(model.params)
    trainable["__regression.w"] = head_w
    trainable["__regression.b"] = head_b
    optimizer = Adam(trainable, config.learning_rate)

    n_epochs = epochs if epochs is not None else config.max_epochs
    epoch_mse = []
    for _ in range(n_epochs):
        losses = []
        for batch in _minibatches(len(scored), config.batch_size, rng):
            drop_rng = rng if config.use_dropout else None
            emb = model.encode(ids[batch], mask[batch], drop_rng)
            pred = (emb[:, 0, :] @ head_w + head_b).sigmoid().reshape(-1)
            err = pred - Tensor(targets[batch])
            loss = (err ** 2.0).mean()
            if not np.isfinite(loss.data):
                raise NonFiniteLossError("non-finite regression loss")
            model.zero_grad()
            head_w.grad = None
            head_b.grad = None
            loss.backward()
            optimizer.step()
            losses.append(float(loss.data))
        epoch_mse.append(float(np.mean(losses)))
    return model, epoch_mse


def check_gradients(model: MtlModel, examples: list[LabeledExample],
                    vocab: Vocabulary, weights: LossWeights,
                    epsilon: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients
    of the multi-task loss, over every parameter entry. Dropout is off."""
    ids, mask = _encode_examples(examples, vocab, model.encoder_config.max_len)
    targets, real = batch_targets(examples)

    def loss_value() -> float:
        logits = model.logits_mtl(ids, mask, rng=None)
        loss, _, _ = mtl_loss(logits, targets, weights, real)
        return float(loss.data)

    logits = model.logits_mtl(ids, mask, rng=None)
    loss, _, _ = mtl_loss(logits, targets, weights, real)
    if not np.isfinite(loss.data):
        raise NonFiniteLossError("non-finite loss in gradient check")
    model.zero_grad()
    loss.backward()

    worst = 0.0
    for name, tensor in model.params.items():
        analytic = tensor.grad if tensor.grad is not None \
            else np.zeros_like(tensor.data)
        flat = tensor.data.reshape(-1)
        a_flat = analytic.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            up = loss_value()
            flat[i] = orig - epsilon
            down = loss_value()
            flat[i] = orig
            numeric = (up - down) / (2 * epsilon)
            denom = max(abs(a_flat[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(a_flat[i] - numeric) / denom)
    return worst
