"""Prompt-conditioned character generation.

The prompt is left-padded with the corpus's most frequent character (or
truncated) to fill the model's window, then characters are sampled one at a
time, sliding the window after each. Greedy decoding is a pure function of
the checkpoint; stochastic modes are reproducible from the seed.
"""
from dataclasses import dataclass

import numpy as np

from . import nn
from .corpus import decode, encode
from .errors import ConfigError, DataError


@dataclass
class SamplingConfig:
    mode: str = "temperature"  # greedy | temperature | top_k
    temperature: float = 0.8
    top_k: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("greedy", "temperature", "top_k"):
            raise ConfigError(f"unknown sampling mode {self.mode!r}")
        if self.temperature <= 0:
            raise ConfigError("temperature must be > 0")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")


def sample_id(probs: np.ndarray, cfg: SamplingConfig, rng: np.random.Generator) -> int:
    """Draw one character id from the predictive distribution."""
    if cfg.mode == "greedy":
        return int(np.argmax(probs))
    if cfg.mode == "temperature":
        # Work in the log domain: probs**(1/tau) underflows for small tau.
        logq = np.log(probs + nn.LOG_EPS) / cfg.temperature
        logq -= logq.max()
        q = np.exp(logq)
        q /= q.sum()
    else:  # top_k
        k = min(cfg.top_k, probs.shape[0])
        keep = np.argsort(probs)[-k:]
        q = np.zeros_like(probs)
        q[keep] = probs[keep]
        q /= q.sum()
    return int(rng.choice(probs.shape[0], p=q))


def generate(checkpoint, prompt: str, length: int, cfg: SamplingConfig = None) -> str:
    """Return prompt + `length` generated characters.

    Raises on an empty prompt or prompt characters outside the checkpoint's
    vocabulary (the offenders are listed).
    """
    cfg = cfg or SamplingConfig()
    if not prompt:
        raise DataError("prompt must contain at least one character")
    vocab = checkpoint.vocab
    offenders = sorted({ch for ch in prompt if ch not in vocab})
    if offenders:
        raise DataError(f"prompt characters not in vocabulary: {offenders}")

    seq_len = checkpoint.config.seq_len
    params = checkpoint.params
    pad_id = vocab.id(checkpoint.pad_char) if checkpoint.pad_char in vocab else 0
    prompt_ids = encode(prompt, vocab)
    if prompt_ids.shape[0] >= seq_len:
        window = prompt_ids[-seq_len:].copy()
    else:
        window = np.concatenate([
            np.full(seq_len - prompt_ids.shape[0], pad_id, dtype=np.int64),
            prompt_ids,
        ])

    rng = np.random.default_rng(cfg.seed)
    out_ids = []
    for _ in range(length):
        probs = nn.forward(params, window).probs
        next_id = sample_id(probs, cfg, rng)
        out_ids.append(next_id)
        window = np.concatenate([window[1:], [next_id]])
    return prompt + decode(out_ids, vocab)
