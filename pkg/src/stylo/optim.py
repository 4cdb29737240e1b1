"""Parameter updates: global-norm gradient clipping, SGD and Adam steps, and
the finite-difference gradient checker the test suite is built on.

Clipping happens before the optimizer step; 100-step BPTT is prone to
exploding gradients and the clip keeps single bad windows from derailing a
run.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .nn.params import ModelParams


@dataclass
class OptimConfig:
    algorithm: str = "adam"  # adam | sgd
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.algorithm not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.algorithm!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ConfigError("beta1 and beta2 must be in (0, 1)")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")


class OptimState:
    """Adam moment accumulators congruent with the parameter set, plus the
    step counter. SGD uses only the counter."""

    def __init__(self, params: ModelParams, algorithm: str = "adam"):
        self.algorithm = algorithm
        self.t = 0
        if algorithm == "adam":
            self.m = {name: np.zeros_like(arr) for name, arr in params.tensors()}
            self.v = {name: np.zeros_like(arr) for name, arr in params.tensors()}
        else:
            self.m = {}
            self.v = {}


def global_norm(grads: dict) -> float:
    """L2 norm over all gradient tensors jointly."""
    total = 0.0
    for arr in grads.values():
        total += float(np.sum(arr * arr))
    return math.sqrt(total)


def clip_gradients(grads: dict, clip_norm: float) -> dict:
    """Scale all tensors by clip_norm/|g| when the global norm exceeds the
    threshold; otherwise return the input unchanged. Idempotent."""
    if clip_norm <= 0:
        raise ConfigError("clip_norm must be positive")
    norm = global_norm(grads)
    if norm <= clip_norm:
        return grads
    scale = clip_norm / norm
    return {name: arr * scale for name, arr in grads.items()}


def _check_finite(grads: dict):
    for name, arr in grads.items():
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"divergence detected: non-finite gradient in tensor {name}")


def adam_step(params: ModelParams, grads: dict, state: OptimState, cfg: OptimConfig):
    """Standard bias-corrected Adam update, in place; increments state.t."""
    _check_finite(grads)
    state.t += 1
    b1, b2 = cfg.beta1, cfg.beta2
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    for name, arr in params.tensors():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        arr -= cfg.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)


def sgd_step(params: ModelParams, grads: dict, state: OptimState, cfg: OptimConfig):
    """Plain gradient descent, in place; increments state.t."""
    _check_finite(grads)
    state.t += 1
    for name, arr in params.tensors():
        arr -= cfg.learning_rate * grads[name]


def apply_update(params: ModelParams, grads: dict, state: OptimState, cfg: OptimConfig):
    """Clip by global norm, take one optimizer step, and reject a parameter
    set that left the finite range."""
    grads = clip_gradients(grads, cfg.clip_norm)
    if cfg.algorithm == "adam":
        adam_step(params, grads, state, cfg)
    else:
        sgd_step(params, grads, state, cfg)
    for name, arr in params.tensors():
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"divergence detected: non-finite parameter in tensor {name}")


def gradient_check(model_forward_loss, params: ModelParams, probe_count: int,
                   h: float = 1e-5, seed: int = 0) -> float:
    """Compare analytic gradients against central finite differences.

    model_forward_loss(params) must return (loss, grads) deterministically.
    Probes `probe_count` randomly chosen coordinates; returns the maximum
    relative error |a - n| / max(|a|, |n|, 1e-8).
    """
    rng = np.random.default_rng(seed)
    _, grads = model_forward_loss(params)
    names = [name for name, _ in params.tensors()]
    worst = 0.0
    for _ in range(probe_count):
        name = names[rng.integers(len(names))]
        arr = params.tensor(name)
        flat = arr.reshape(-1)
        idx = int(rng.integers(flat.shape[0]))
        orig = flat[idx]
        flat[idx] = orig + h
        loss_plus, _ = model_forward_loss(params)
        flat[idx] = orig - h
        loss_minus, _ = model_forward_loss(params)
        flat[idx] = orig
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        analytic = grads[name].reshape(-1)[idx]
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, err)
    return worst
