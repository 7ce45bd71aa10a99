"""Versioned model checkpoint container.

A single .npz holding named parameter arrays plus a JSON metadata blob with
the encoder config, head config, loss weights, and the vocabulary. Save/load
round-trips bit-exactly (arrays are float64 end to end).
"""

from __future__ import annotations

import io
import json

import numpy as np

from .encoder import EncoderConfig
from .mtl import HeadConfig, LossWeights, MtlModel
from .tokenizer import Vocabulary

FORMAT_VERSION = 1


def save_checkpoint(path, model: MtlModel, vocab: Vocabulary,
                    loss_weights: LossWeights) -> None:
    meta = {
        "version": FORMAT_VERSION,
        "encoder": model.encoder_config.to_dict(),
        "head": model.head_config.to_dict(),
        "loss_weights": loss_weights.as_tuple(),
        "vocab": vocab.to_lines(),
    }
    arrays = {f"param/{name}": arr for name, arr in model.state_arrays().items()}
    arrays["meta"] = np.frombuffer(
        json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8
    )
    with open(path, "wb") as handle:
        np.savez(handle, **arrays)


def load_checkpoint(path) -> tuple[MtlModel, Vocabulary, LossWeights]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta["version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        arrays = {
            key[len("param/"):]: data[key]
            for key in data.files
            if key.startswith("param/")
        }
    model = MtlModel(
        EncoderConfig(**meta["encoder"]), HeadConfig(**meta["head"]), seed=0
    )
    model.load_state_arrays(arrays)
    vocab = Vocabulary.from_lines(meta["vocab"])
    weights = LossWeights(*meta["loss_weights"])
    return model, vocab, weights
