"""Restricted Boltzmann machine.

Bipartite energy model over binary visible/hidden units,
E(v, h) = -(v^T W h + b.v + c.h), sampled as exp(-beta*E)/Z. The visible
distribution marginalizes the hiddens analytically (softplus free energy);
the brute-force configuration sum exists in the tests as an independent
oracle. Training maximizes data log-likelihood by moment matching, with
hidden moments Rao-Blackwellized through the exact conditionals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit, logsumexp

from .samples import SampleSet, codes_to_bits

MAX_UNITS = 24

TRAINABLE_MASKS = ("biases_only", "biases_and_weights")


@dataclass
class RbmModel:
    weights: np.ndarray        # (n_visible, n_hidden)
    visible_bias: np.ndarray   # (n_visible,)
    hidden_bias: np.ndarray    # (n_hidden,)
    beta: float = 1.0
    trainable_mask: str = "biases_only"

    def __post_init__(self) -> None:
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        self.visible_bias = np.asarray(self.visible_bias, dtype=np.float64)
        self.hidden_bias = np.asarray(self.hidden_bias, dtype=np.float64)
        if self.weights.shape != (self.visible_bias.size, self.hidden_bias.size):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match bias sizes "
                f"({self.visible_bias.size}, {self.hidden_bias.size})")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.trainable_mask not in TRAINABLE_MASKS:
            raise ValueError(f"trainable_mask must be one of {TRAINABLE_MASKS}")

    @property
    def n_visible(self) -> int:
        return self.visible_bias.size

    @property
    def n_hidden(self) -> int:
        return self.hidden_bias.size

    @property
    def n_units(self) -> int:
        return self.n_visible + self.n_hidden

    @classmethod
    def random(cls, n_visible: int, n_hidden: int, rng: np.random.Generator,
               weight_scale: float = 1.0, bias_scale: float = 0.0,
               beta: float = 1.0, trainable_mask: str = "biases_only") -> "RbmModel":
        """Random fixed weights uniform in [-weight_scale, weight_scale]."""
        return cls(
            weights=rng.uniform(-weight_scale, weight_scale, (n_visible, n_hidden)),
            visible_bias=rng.uniform(-bias_scale, bias_scale, n_visible) if bias_scale
            else np.zeros(n_visible),
            hidden_bias=rng.uniform(-bias_scale, bias_scale, n_hidden) if bias_scale
            else np.zeros(n_hidden),
            beta=beta, trainable_mask=trainable_mask)

    def to_json(self) -> str:
        return json.dumps({
            "n_visible": self.n_visible, "n_hidden": self.n_hidden,
            "beta": self.beta, "trainable_mask": self.trainable_mask,
            "weights": self.weights.tolist(),
            "visible_bias": self.visible_bias.tolist(),
            "hidden_bias": self.hidden_bias.tolist(),
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RbmModel":
        blob = json.loads(text)
        return cls(weights=np.array(blob["weights"], dtype=np.float64).reshape(
                       blob["n_visible"], blob["n_hidden"]),
                   visible_bias=np.array(blob["visible_bias"]),
                   hidden_bias=np.array(blob["hidden_bias"]),
                   beta=blob["beta"], trainable_mask=blob["trainable_mask"])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "RbmModel":
        return cls.from_json(Path(path).read_text())


def energy(model: RbmModel, full_config: np.ndarray) -> float:
    """E(v, h) of one joint configuration (visibles first, then hiddens)."""
    cfg = np.asarray(full_config, dtype=np.float64)
    if cfg.shape != (model.n_units,):
        raise ValueError(f"configuration must have length {model.n_units}")
    v, h = cfg[:model.n_visible], cfg[model.n_visible:]
    return float(-(v @ model.weights @ h + model.visible_bias @ v + model.hidden_bias @ h))


def _visible_grid(n_visible: int) -> np.ndarray:
    """All 2**n_v visible configurations as rows, basis order."""
    return codes_to_bits(np.arange(1 << n_visible), n_visible).astype(np.float64)


def _log_unnormalized_visible(model: RbmModel) -> np.ndarray:
    """log sum_h exp(-beta E(v, h)) for every v, via the softplus free energy."""
    v = _visible_grid(model.n_visible)
    fields = model.beta * (model.hidden_bias[None, :] + v @ model.weights)
    return model.beta * (v @ model.visible_bias) + np.logaddexp(0.0, fields).sum(axis=1)


def _check_units(model: RbmModel) -> None:
    if model.n_units > MAX_UNITS:
        raise ValueError(f"model has {model.n_units} units, exact path supports <= {MAX_UNITS}")


def log_partition_function(model: RbmModel) -> float:
    _check_units(model)
    return float(logsumexp(_log_unnormalized_visible(model)))


def partition_function_exact(model: RbmModel) -> float:
    """Z = sum over all joint configurations of exp(-beta E), via the log domain."""
    return float(np.exp(log_partition_function(model)))


def exact_visible_distribution(model: RbmModel) -> np.ndarray:
    """p(v) over all 2**n_visible codes, hiddens marginalized exactly."""
    _check_units(model)
    log_pt = _log_unnormalized_visible(model)
    return np.exp(log_pt - logsumexp(log_pt))


def hidden_activation(model: RbmModel, v_bits: np.ndarray) -> np.ndarray:
    """p(h_j = 1 | v) for each row of v_bits."""
    return expit(model.beta * (model.hidden_bias[None, :]
                               + v_bits.astype(np.float64) @ model.weights))


def _visible_activation(model: RbmModel, h_bits: np.ndarray) -> np.ndarray:
    return expit(model.beta * (model.visible_bias[None, :]
                               + h_bits.astype(np.float64) @ model.weights.T))


def gibbs_sample(model: RbmModel, sweeps: int, n_chains: int, burn_in: int,
                 rng: np.random.Generator, beta: float | None = None) -> SampleSet:
    """Block Gibbs: alternate h|v and v|h; collect one visible per chain per
    post-burn-in sweep, so the output holds sweeps * n_chains samples."""
    if sweeps < 1 or n_chains < 1 or burn_in < 0:
        raise ValueError("need sweeps >= 1, n_chains >= 1, burn_in >= 0")
    beta_eff = model.beta if beta is None else beta
    run = RbmModel(model.weights, model.visible_bias, model.hidden_bias,
                   beta=beta_eff, trainable_mask=model.trainable_mask)
    v = (rng.random((n_chains, model.n_visible)) < 0.5).astype(np.float64)
    collected = []
    for sweep in range(burn_in + sweeps):
        h = (rng.random((n_chains, model.n_hidden))
             < hidden_activation(run, v)).astype(np.float64)
        v = (rng.random((n_chains, model.n_visible))
             < _visible_activation(run, h)).astype(np.float64)
        if sweep >= burn_in:
            collected.append(v.astype(np.int64))
    bits = np.concatenate(collected, axis=0)
    shifts = 1 << np.arange(model.n_visible - 1, -1, -1, dtype=np.int64)
    return SampleSet.from_codes(bits @ shifts, model.n_visible)


def annealed_sample(model: RbmModel, schedule: list[float], sweeps_per_stage: int,
                    n_chains: int, rng: np.random.Generator) -> SampleSet:
    """Simulated annealing over inverse temperature: Gibbs sweeps at each beta
    in the (increasing) schedule, returning the final-stage visibles sampled at
    the model's target beta."""
    schedule = list(schedule)
    if not schedule:
        raise ValueError("schedule must be nonempty")
    if any(b2 <= b1 for b1, b2 in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    v = (rng.random((n_chains, model.n_visible)) < 0.5).astype(np.float64)
    stage = RbmModel(model.weights, model.visible_bias, model.hidden_bias,
                     beta=model.beta, trainable_mask=model.trainable_mask)
    for beta in schedule[:-1]:
        stage.beta = beta
        for _ in range(sweeps_per_stage):
            h = (rng.random((n_chains, model.n_hidden))
                 < hidden_activation(stage, v)).astype(np.float64)
            v = (rng.random((n_chains, model.n_visible))
                 < _visible_activation(stage, h)).astype(np.float64)
    stage.beta = model.beta
    collected = []
    for _ in range(sweeps_per_stage):
        h = (rng.random((n_chains, model.n_hidden))
             < hidden_activation(stage, v)).astype(np.float64)
        v = (rng.random((n_chains, model.n_visible))
             < _visible_activation(stage, h)).astype(np.float64)
        collected.append(v.astype(np.int64))
    bits = np.concatenate(collected, axis=0)
    shifts = 1 << np.arange(model.n_visible - 1, -1, -1, dtype=np.int64)
    return SampleSet.from_codes(bits @ shifts, model.n_visible)


@dataclass
class RbmMoments:
    """Rao-Blackwellized sufficient statistics of a visible ensemble."""

    visible: np.ndarray  # <v_i>
    hidden: np.ndarray   # <p(h_j = 1 | v)>
    pair: np.ndarray     # <v_i p(h_j = 1 | v)>


def moments_from_weighted(model: RbmModel, v_bits: np.ndarray,
                          weights: np.ndarray) -> RbmMoments:
    v = v_bits.astype(np.float64)
    act = hidden_activation(model, v)
    return RbmMoments(visible=weights @ v, hidden=weights @ act,
                      pair=(v * weights[:, None]).T @ act)


def moments_from_samples(model: RbmModel, samples: SampleSet) -> RbmMoments:
    if samples.total == 0:
        raise ValueError("empty sample set")
    v_bits = codes_to_bits(samples.codes, model.n_visible)
    return moments_from_weighted(model, v_bits, samples.frequencies())


def exact_model_moments(model: RbmModel) -> RbmMoments:
    probs = exact_visible_distribution(model)
    return moments_from_weighted(model, _visible_grid(model.n_visible), probs)


@dataclass
class RbmGradient:
    """Log-likelihood ascent direction; weight block zero under biases_only."""

    visible_bias: np.ndarray
    hidden_bias: np.ndarray
    weights: np.ndarray


def loglik_gradient(model: RbmModel, data: SampleSet,
                    model_samples: SampleSet | None = None,
                    exact_model: bool = False) -> RbmGradient:
    """d log L / d params = beta * (data moments - model moments).

    The positive phase always uses the exact hidden conditionals on the data
    visibles; the negative phase comes from ``model_samples`` or, with
    ``exact_model=True``, from the enumerated visible distribution.
    """
    if data.total == 0:
        raise ValueError("empty data sample set")
    if exact_model == (model_samples is not None):
        raise ValueError("provide exactly one of model_samples / exact_model")
    pos = moments_from_samples(model, data)
    neg = exact_model_moments(model) if exact_model else moments_from_samples(
        model, model_samples)
    b = model.beta
    grad_w = (b * (pos.pair - neg.pair)
              if model.trainable_mask == "biases_and_weights"
              else np.zeros_like(model.weights))
    return RbmGradient(visible_bias=b * (pos.visible - neg.visible),
                       hidden_bias=b * (pos.hidden - neg.hidden),
                       weights=grad_w)


def mean_log_likelihood(model: RbmModel, data: SampleSet) -> float:
    """Average per-sample log p(v) of the data under the model (exact path)."""
    log_pt = _log_unnormalized_visible(model)
    log_p = log_pt - logsumexp(log_pt)
    return float(log_p[data.codes] @ data.frequencies())
