"""Multi-task model: shared encoder, three LSTM task heads, weighted loss,
plus the single-task linear baseline.

Each head runs a unidirectional LSTM over the unmasked embedding sequence
and projects its final hidden state to class logits. The baseline projects
the CLS embedding directly. NULL is an ordinary class for heads B and C.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .autodiff import Tensor, cross_entropy
from .corpus import LabeledExample, TaskLabelA, TaskLabelB, TaskLabelC
from .encoder import EncoderConfig, encode as encoder_forward, init_encoder
from .tokenizer import Vocabulary, encode_batch

TASKS = ("a", "b", "c")
TASK_CLASSES = {
    "a": [l.value for l in TaskLabelA],
    "b": [l.value for l in TaskLabelB],
    "c": [l.value for l in TaskLabelC],
}
TASK_ENUMS = {"a": TaskLabelA, "b": TaskLabelB, "c": TaskLabelC}


@dataclass(frozen=True)
class HeadConfig:
    hidden: int = 64

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LossWeights:
    w_a: float = 0.4
    w_b: float = 0.3
    w_c: float = 0.3

    def __post_init__(self):
        if min(self.w_a, self.w_b, self.w_c) < 0:
            raise ValueError("loss weights must be nonnegative")
        if abs(self.w_a + self.w_b + self.w_c - 1.0) > 1e-9:
            raise ValueError("loss weights must sum to 1")

    def as_tuple(self):
        return (self.w_a, self.w_b, self.w_c)


@dataclass(frozen=True)
class PredictionTriple:
    probs_a: np.ndarray
    probs_b: np.ndarray
    probs_c: np.ndarray

    @property
    def label_a(self) -> str:
        return TASK_CLASSES["a"][int(np.argmax(self.probs_a))]

    @property
    def label_b(self) -> str:
        return TASK_CLASSES["b"][int(np.argmax(self.probs_b))]

    @property
    def label_c(self) -> str:
        return TASK_CLASSES["c"][int(np.argmax(self.probs_c))]

    def label(self, task: str) -> str:
        return {"a": self.label_a, "b": self.label_b, "c": self.label_c}[task]

    def probs(self, task: str) -> np.ndarray:
        return {"a": self.probs_a, "b": self.probs_b, "c": self.probs_c}[task]


class MtlModel:
    """Shared encoder parameters plus per-task head parameters.

    Parameters live in a flat name -> Tensor dict so the optimizer and the
    gradient checker can treat the whole model uniformly.
    """

    def __init__(self, encoder_config: EncoderConfig, head_config: HeadConfig,
                 seed: int):
        encoder_config.validate()
        self.encoder_config = encoder_config
        self.head_config = head_config
        self.params: dict[str, Tensor] = init_encoder(encoder_config, seed)
        rng = np.random.default_rng(seed + 1)
        d, h = encoder_config.d_model, head_config.hidden
        for task in TASKS:
            n_classes = len(TASK_CLASSES[task])
            self._init_linear(rng, f"head_{task}.lstm.x", d, 4 * h)
            self._init_linear(rng, f"head_{task}.lstm.h", h, 4 * h)
            self._init_linear(rng, f"head_{task}.out", h, n_classes)
        self._init_linear(rng, "baseline.out", d, 2)

    def _init_linear(self, rng, name, fan_in, fan_out):
        scale = 1.0 / np.sqrt(fan_in)
        self.params[f"{name}.w"] = Tensor(
            rng.uniform(-scale, scale, (fan_in, fan_out)), requires_grad=True
        )
        self.params[f"{name}.b"] = Tensor(np.zeros(fan_out), requires_grad=True)

    # -- forward -------------------------------------------------------------

    def encode(self, ids, mask, rng=None) -> Tensor:
        return encoder_forward(self.params, self.encoder_config, ids, mask, rng)

    def _run_lstm(self, task: str, embeddings: Tensor, mask: np.ndarray) -> Tensor:
        B, T, _ = embeddings.shape
        h = self.head_config.hidden
        wx = self.params[f"head_{task}.lstm.x.w"]
        bx = self.params[f"head_{task}.lstm.x.b"]
        wh = self.params[f"head_{task}.lstm.h.w"]
        bh = self.params[f"head_{task}.lstm.h.b"]
        h_t = Tensor(np.zeros((B, h)))
        c_t = Tensor(np.zeros((B, h)))
        mask = np.asarray(mask, dtype=np.float64)
        for t in range(T):
            if mask[:, t].sum() == 0.0:
                break  # everything past here is padding
            x_t = embeddings[:, t, :]
            gates = x_t @ wx + bx + h_t @ wh + bh
            i_g = gates[:, 0 * h:1 * h].sigmoid()
            f_g = gates[:, 1 * h:2 * h].sigmoid()
            g_g = gates[:, 2 * h:3 * h].tanh()
            o_g = gates[:, 3 * h:4 * h].sigmoid()
            c_new = f_g * c_t + i_g * g_g
            h_new = o_g * c_new.tanh()
            m = Tensor(mask[:, t:t + 1])
            # padded steps carry the previous state forward, so the final
            # state is the state at each sequence's last real token
            c_t = m * c_new + (1.0 - m) * c_t
            h_t = m * h_new + (1.0 - m) * h_t
        return h_t

    def logits_mtl(self, ids, mask, rng=None) -> dict[str, Tensor]:
        if len(np.asarray(ids)) == 0:
            raise ValueError("empty batch")
        emb = self.encode(ids, mask, rng)
        out = {}
        for task in TASKS:
            h_final = self._run_lstm(task, emb, mask)
            out[task] = h_final @ self.params[f"head_{task}.out.w"] \
                + self.params[f"head_{task}.out.b"]
        return out

    def logits_baseline(self, ids, mask, rng=None) -> Tensor:
        if len(np.asarray(ids)) == 0:
            raise ValueError("empty batch")
        emb = self.encode(ids, mask, rng)
        cls = emb[:, 0, :]
        return cls @ self.params["baseline.out.w"] + self.params["baseline.out.b"]

    def forward_mtl(self, ids, mask) -> list[PredictionTriple]:
        logits = self.logits_mtl(ids, mask)
        probs = {task: logits[task].softmax().data for task in TASKS}
        return [
            PredictionTriple(probs["a"][i], probs["b"][i], probs["c"][i])
            for i in range(len(probs["a"]))
        ]

    def forward_baseline(self, ids, mask) -> np.ndarray:
        return self.logits_baseline(ids, mask).softmax().data

    # -- parameter plumbing ----------------------------------------------------

    def n_params(self) -> int:
        return sum(t.data.size for t in self.params.values())

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.params.items()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        if set(arrays) != set(self.params):
            raise ValueError("parameter names do not match the model")
        for name, arr in arrays.items():
            if arr.shape != self.params[name].data.shape:
                raise ValueError(f"shape mismatch for {name}")
            self.params[name].data = arr.astype(np.float64).copy()

    def zero_grad(self) -> None:
        for t in self.params.values():
            t.grad = None


def batch_targets(examples: list[LabeledExample]):
    """Per-task integer targets plus the synthetic mask (1 = real B/C labels)."""
    targets = {
        task: np.array(
            [TASK_CLASSES[task].index(getattr(ex.labels, task).value) for ex in examples],
            dtype=np.int64,
        )
        for task in TASKS
    }
    real = np.array([0.0 if ex.synthetic else 1.0 for ex in examples])
    return targets, real


def mtl_loss(logits: dict[str, Tensor], targets: dict[str, np.ndarray],
             weights: LossWeights, real_mask: np.ndarray | None = None):
    """Weighted sum of per-task mean cross-entropies.

    Synthetic examples (real_mask 0) contribute only to task A. A task with
    no contributing examples gets loss 0 and is reported in the flags.
    """
    n = len(targets["a"])
    if real_mask is None:
        real_mask = np.ones(n)
    ones = np.ones(n)
    task_weights = {"a": ones, "b": real_mask, "c": real_mask}
    per_task = {}
    empty = []
    for task in TASKS:
        if task_weights[task].sum() == 0.0:
            empty.append(task)
        per_task[task] = cross_entropy(logits[task], targets[task], task_weights[task])
    w = weights.as_tuple()
    total = w[0] * per_task["a"] + w[1] * per_task["b"] + w[2] * per_task["c"]
    return total, per_task, empty


def weighted_total(l_a: float, l_b: float, l_c: float, weights: LossWeights) -> float:
    """The overall loss as plain arithmetic on already-computed task losses."""
    w = weights.as_tuple()
    return w[0] * l_a + w[1] * l_b + w[2] * l_c


def predict(model: MtlModel, vocab: Vocabulary, context, raw_text: str,
            tweet_id: str = "query") -> PredictionTriple:
    """End-to-end single-input inference: normalize, encode, forward."""
    from .textnorm import RawTweet

    tweet = context.normalize(RawTweet(id=tweet_id, text=raw_text))
    ids, mask = encode_batch([tweet.text], vocab, model.encoder_config.max_len)
    return model.forward_mtl(ids, mask)[0]
