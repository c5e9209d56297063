"""Training loops and optimizers.

Gradient-based training follows theta <- theta - eta * grad (vanilla) or the
bias-corrected Adam update; the gradient-free path is a small genetic
algorithm (elitism + tournament selection + Gaussian mutation). Born machines
train against the Sinkhorn divergence, the MMD, or an adversarial forest;
Boltzmann machines ascend the data log-likelihood by moment matching. Every
epoch appends one record (state at epoch start) to a TrainingTrace; a fresh
discriminator is fitted at every evaluation, never reused.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .ansatz import ParameterVector
from .born import BornMachine, born_exact_distribution, born_gradient, born_sample
from .discriminator import Forest, ForestConfig, LabeledDataset, discriminator_error, fit, \
    predict_proba_batch
from .divergence import EmpiricalDistribution, KernelConfig, SinkhornConfig, mmd, \
    mmd_grad_functional, sinkhorn_grad_functional
from .rbm import RbmModel, exact_visible_distribution, gibbs_sample, annealed_sample, \
    loglik_gradient, mean_log_likelihood
from .samples import SampleSet, codes_to_bits
from .seeding import derive_rng, derive_seed

BORN_COSTS = ("sinkhorn", "mmd", "adversarial", "genetic")
RBM_SAMPLERS = ("exact", "gibbs", "annealed")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "adam"              # vanilla | adam | genetic
    learning_rate: float | None = None  # default 0.05 vanilla, 0.01 adam
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    epochs: int = 100
    mode: str = "exact"             # exact | sampled
    model_shots: int = 500          # N: model samples per epoch (sampled mode)
    data_shots: int = 500           # M: data samples per epoch (sampled mode)
    eval_every: int = 5             # 0 disables discriminator evaluation
    eval_samples: int = 2000
    snapshot_every: int = 0         # 0 disables parameter snapshots
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("vanilla", "adam", "genetic"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")

    @property
    def eta(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 0.05 if self.kind == "vanilla" else 0.01


@dataclass(frozen=True)
class GeneticConfig:
    population_size: int = 20
    elite_count: int = 2
    tournament_size: int = 3
    mutation_stddev: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.elite_count < self.population_size:
            raise ValueError("need 1 <= elite_count < population_size")
        if self.tournament_size < 1 or self.mutation_stddev < 0:
            raise ValueError("bad tournament size or mutation stddev")


def vanilla_step(params: np.ndarray, gradient: np.ndarray, eta: float) -> np.ndarray:
    if params.shape != gradient.shape:
        raise ValueError("parameter/gradient length mismatch")
    return params - eta * gradient


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def init(cls, n_params: int) -> "AdamState":
        return cls(m=np.zeros(n_params), v=np.zeros(n_params), t=0)


def adam_step(state: AdamState, params: np.ndarray, gradient: np.ndarray,
              cfg: OptimizerConfig) -> tuple[AdamState, np.ndarray]:
    """Bias-corrected first/second-moment update."""
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * gradient
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * gradient ** 2
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    new_params = params - cfg.eta * m_hat / (np.sqrt(v_hat) + cfg.eps_adam)
    return AdamState(m=m, v=v, t=t), new_params


@dataclass
class Individual:
    values: np.ndarray
    fitness: float


def genetic_generation(population: list[Individual], fitness, cfg: GeneticConfig,
                       rng: np.random.Generator) -> list[Individual]:
    """One generation: keep the elites, then tournament-select parents and
    mutate with Gaussian noise. Fitness is evaluated once per new individual
    and carried, so the best fitness never worsens."""
    if len(population) != cfg.population_size:
        raise ValueError("population size does not match config")
    ranked = sorted(population, key=lambda ind: ind.fitness)
    next_gen = [Individual(ind.values.copy(), ind.fitness)
                for ind in ranked[:cfg.elite_count]]
    while len(next_gen) < cfg.population_size:
        entrants = rng.integers(0, cfg.population_size, size=cfg.tournament_size)
        parent = min((ranked[i] for i in entrants), key=lambda ind: ind.fitness)
        child_values = parent.values + rng.normal(0.0, cfg.mutation_stddev,
                                                  size=parent.values.size)
        next_gen.append(Individual(child_values, float(fitness(child_values))))
    return next_gen


def adversarial_generator_phi(forest: Forest):
    """phi_adv(x) = 1 - D(x): high where the discriminator is confident the
    sample is fake, so descent pushes mass toward the data region."""

    def phi(x_codes: np.ndarray) -> np.ndarray:
        return 1.0 - predict_proba_batch(
            forest, codes_to_bits(x_codes, forest.n_bits))

    return phi


@dataclass
class EpochRecord:
    """State at the start of one epoch."""

    epoch: int
    cost: float | None
    disc_error: float | None = None
    params: list[float] | None = None
    grad_seed: int | None = None
    eval_seed: int | None = None
    sinkhorn_converged: bool | None = None
    wall_time: float | None = None  # kept in memory, not serialized

    def to_json(self) -> str:
        blob = {"epoch": self.epoch, "cost": self.cost, "disc_error": self.disc_error,
                "params": self.params, "grad_seed": self.grad_seed,
                "eval_seed": self.eval_seed,
                "sinkhorn_converged": self.sinkhorn_converged}
        return json.dumps(blob, sort_keys=True)


@dataclass
class TrainingTrace:
    model_kind: str
    root_seed: int
    records: list[EpochRecord] = field(default_factory=list)

    def append(self, record: EpochRecord) -> None:
        if self.records and record.epoch != self.records[-1].epoch + 1:
            raise ValueError("epoch indices must increase by one")
        self.records.append(record)

    def costs(self) -> list[float | None]:
        return [r.cost for r in self.records]

    def disc_errors(self) -> list[tuple[int, float]]:
        return [(r.epoch, r.disc_error) for r in self.records if r.disc_error is not None]

    def to_ndjson(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    @classmethod
    def from_ndjson(cls, text: str, model_kind: str = "",
                    root_seed: int = -1) -> "TrainingTrace":
        trace = cls(model_kind=model_kind, root_seed=root_seed)
        for line in text.splitlines():
            if line.strip():
                blob = json.loads(line)
                blob.pop("wall_time", None)
                trace.append(EpochRecord(**blob))
        return trace


def _resample_data(data: SampleSet, n: int, rng: np.random.Generator) -> SampleSet:
    return data.resample(n, rng) if n < data.total else data


def _evaluate_discriminator(model_samples: SampleSet, data: SampleSet,
                            eval_cfg: ForestConfig, opt: OptimizerConfig,
                            epoch: int) -> tuple[float, int]:
    eval_seed = derive_seed(opt.seed, "eval", epoch)
    data_draw = data.resample(opt.eval_samples, derive_rng(opt.seed, "eval-data", epoch))
    error = discriminator_error(
        model_samples, data_draw,
        replace(eval_cfg, seed=derive_seed(opt.seed, "eval-forest", epoch)),
        split_seed=eval_seed)
    return error, eval_seed


def _born_cost_and_phi(cost: str, machine: BornMachine, data: SampleSet,
                       opt: OptimizerConfig, epoch: int,
                       sinkhorn_cfg: SinkhornConfig, kernel_cfg: KernelConfig,
                       adv_cfg: ForestConfig):
    """Model/data snapshot for this epoch -> (cost value, phi, converged flag)."""
    if opt.mode == "exact":
        p_model = EmpiricalDistribution.from_probability_vector(
            born_exact_distribution(machine), machine.n_qubits)
        pi_hat = EmpiricalDistribution.from_sample_set(data)
    else:
        model_draw = born_sample(machine, opt.model_shots,
                                 derive_rng(opt.seed, "model-draw", epoch))
        p_model = EmpiricalDistribution.from_sample_set(model_draw)
        pi_hat = EmpiricalDistribution.from_sample_set(
            data.resample(opt.data_shots, derive_rng(opt.seed, "data-draw", epoch)))

    if cost == "sinkhorn":
        result, phi = sinkhorn_grad_functional(pi_hat, p_model, sinkhorn_cfg)
        return result.value, phi, result.converged
    if cost == "mmd":
        value = mmd(p_model, pi_hat, kernel_cfg)
        return value, mmd_grad_functional(pi_hat, p_model, kernel_cfg), True
    if cost == "adversarial":
        # variation used throughout: a fresh forest per iteration is the
        # discriminator update; the generator cost drops the log and uses 1 - D
        model_draw = (born_sample(machine, opt.model_shots,
                                  derive_rng(opt.seed, "adv-model", epoch))
                      if opt.mode == "sampled" else born_sample(
                          machine, opt.eval_samples,
                          derive_rng(opt.seed, "adv-model", epoch)))
        data_draw = data.resample(model_draw.total,
                                  derive_rng(opt.seed, "adv-data", epoch))
        forest = fit(LabeledDataset.from_sample_sets(model_draw, data_draw),
                     replace(adv_cfg, seed=derive_seed(opt.seed, "adv-forest", epoch)))
        phi = adversarial_generator_phi(forest)
        weights = (born_exact_distribution(machine) if opt.mode == "exact"
                   else p_model.weights)
        codes = (np.arange(1 << machine.n_qubits) if opt.mode == "exact"
                 else p_model.codes)
        value = float(phi(codes) @ weights)
        return value, phi, True
    raise ValueError(f"unknown Born cost {cost!r}")


def train_born(machine: BornMachine, cost: str, data: SampleSet,
               opt: OptimizerConfig, eval_cfg: ForestConfig | None = None,
               sinkhorn_cfg: SinkhornConfig = SinkhornConfig(),
               kernel_cfg: KernelConfig = KernelConfig(),
               genetic_cfg: GeneticConfig | None = None,
               adversarial_cfg: ForestConfig | None = None
               ) -> tuple[BornMachine, TrainingTrace]:
    """Train the Born machine; returns the final machine and the trace.

    Each record holds the cost of the distribution the gradient was computed
    from, i.e. the state at epoch start; evaluate the returned machine for
    post-training values.
    """
    if cost not in BORN_COSTS:
        raise ValueError(f"cost must be one of {BORN_COSTS}")
    if data.n_bits != machine.n_qubits:
        raise ValueError("data bit length must equal the qubit count")
    if cost == "genetic" or opt.kind == "genetic":
        return _train_born_genetic(machine, data, opt, eval_cfg,
                                   genetic_cfg or GeneticConfig(), sinkhorn_cfg,
                                   kernel_cfg, fitness_cost=(
                                       "mmd" if cost == "mmd" else "sinkhorn"))
    adv_cfg = adversarial_cfg or ForestConfig(n_estimators=100)
    trace = TrainingTrace(model_kind=f"born-{cost}", root_seed=opt.seed)
    params = machine.params.values.copy()
    adam = AdamState.init(params.size)
    for epoch in range(opt.epochs):
        started = time.perf_counter()
        current = machine.with_params(ParameterVector(params))
        value, phi, converged = _born_cost_and_phi(
            cost, current, data, opt, epoch, sinkhorn_cfg, kernel_cfg, adv_cfg)
        record = EpochRecord(epoch=epoch, cost=value, sinkhorn_converged=converged)
        if opt.eval_every and epoch % opt.eval_every == 0 and eval_cfg is not None:
            model_draw = born_sample(current, opt.eval_samples,
                                     derive_rng(opt.seed, "eval-model", epoch))
            record.disc_error, record.eval_seed = _evaluate_discriminator(
                model_draw, data, eval_cfg, opt, epoch)
        if opt.snapshot_every and epoch % opt.snapshot_every == 0:
            record.params = [float(x) for x in params]
        grad_seed = derive_seed(opt.seed, "grad", epoch)
        record.grad_seed = grad_seed
        gradient = born_gradient(current, phi, mode=opt.mode,
                                 shots=opt.model_shots if opt.mode == "sampled" else None,
                                 base_seed=grad_seed if opt.mode == "sampled" else None)
        if opt.kind == "adam":
            adam, params = adam_step(adam, params, gradient, opt)
        else:
            params = vanilla_step(params, gradient, opt.eta)
        record.wall_time = time.perf_counter() - started
        trace.append(record)
    return machine.with_params(ParameterVector(params)), trace


def _train_born_genetic(machine: BornMachine, data: SampleSet, opt: OptimizerConfig,
                        eval_cfg: ForestConfig | None, gen_cfg: GeneticConfig,
                        sinkhorn_cfg: SinkhornConfig, kernel_cfg: KernelConfig,
                        fitness_cost: str) -> tuple[BornMachine, TrainingTrace]:
    pi_hat = EmpiricalDistribution.from_sample_set(data)

    def fitness(values: np.ndarray) -> float:
        candidate = machine.with_params(ParameterVector(values))
        p_model = EmpiricalDistribution.from_probability_vector(
            born_exact_distribution(candidate), machine.n_qubits)
        if fitness_cost == "mmd":
            return mmd(p_model, pi_hat, kernel_cfg)
        from .divergence import sinkhorn_divergence
        return sinkhorn_divergence(p_model, pi_hat, sinkhorn_cfg).value

    rng = derive_rng(gen_cfg.seed, "genetic")
    population = [Individual(machine.params.values.copy(),
                             float(fitness(machine.params.values)))]
    population += [
        Individual(v := rng.uniform(0.0, 2.0 * np.pi, machine.params.values.size),
                   float(fitness(v)))
        for _ in range(gen_cfg.population_size - 1)]
    trace = TrainingTrace(model_kind=f"born-genetic-{fitness_cost}", root_seed=opt.seed)
    best = min(population, key=lambda ind: ind.fitness)
    for epoch in range(opt.epochs):
        started = time.perf_counter()
        record = EpochRecord(epoch=epoch, cost=best.fitness)
        if opt.eval_every and epoch % opt.eval_every == 0 and eval_cfg is not None:
            current = machine.with_params(ParameterVector(best.values))
            model_draw = born_sample(current, opt.eval_samples,
                                     derive_rng(opt.seed, "eval-model", epoch))
            record.disc_error, record.eval_seed = _evaluate_discriminator(
                model_draw, data, eval_cfg, opt, epoch)
        if opt.snapshot_every and epoch % opt.snapshot_every == 0:
            record.params = [float(x) for x in best.values]
        population = genetic_generation(population, fitness, gen_cfg, rng)
        best = min(population, key=lambda ind: ind.fitness)
        record.wall_time = time.perf_counter() - started
        trace.append(record)
    return machine.with_params(ParameterVector(best.values)), trace


def _pack_rbm(model: RbmModel) -> np.ndarray:
    parts = [model.visible_bias, model.hidden_bias]
    if model.trainable_mask == "biases_and_weights":
        parts.append(model.weights.ravel())
    return np.concatenate(parts)


def _unpack_rbm(model: RbmModel, packed: np.ndarray) -> RbmModel:
    nv, nh = model.n_visible, model.n_hidden
    vb, hb = packed[:nv], packed[nv:nv + nh]
    weights = (packed[nv + nh:].reshape(nv, nh)
               if model.trainable_mask == "biases_and_weights"
               else model.weights.copy())
    return RbmModel(weights=weights, visible_bias=vb.copy(), hidden_bias=hb.copy(),
                    beta=model.beta, trainable_mask=model.trainable_mask)


def _pack_rbm_gradient(model: RbmModel, grad) -> np.ndarray:
    parts = [grad.visible_bias, grad.hidden_bias]
    if model.trainable_mask == "biases_and_weights":
        parts.append(grad.weights.ravel())
    return np.concatenate(parts)


def train_rbm(model: RbmModel, data: SampleSet, opt: OptimizerConfig,
              sampler: str = "exact", eval_cfg: ForestConfig | None = None,
              sampler_options: dict | None = None) -> tuple[RbmModel, TrainingTrace]:
    """Log-likelihood ascent on the trainable parameters.

    Negative-phase moments come from the exact visible distribution or from
    the Gibbs / annealed samplers; the cost recorded per epoch is the mean
    data negative log-likelihood (exact enumeration path)."""
    if sampler not in RBM_SAMPLERS:
        raise ValueError(f"sampler must be one of {RBM_SAMPLERS}")
    if data.n_bits != model.n_visible:
        raise ValueError("data bit length must equal n_visible")
    options = {"sweeps": 10, "n_chains": 100, "burn_in": 200,
               "schedule": [0.25, 0.5, 0.75], "sweeps_per_stage": 50}
    options.update(sampler_options or {})
    trace = TrainingTrace(model_kind=f"rbm-{sampler}", root_seed=opt.seed)
    current = RbmModel(model.weights.copy(), model.visible_bias.copy(),
                       model.hidden_bias.copy(), beta=model.beta,
                       trainable_mask=model.trainable_mask)
    packed = _pack_rbm(current)
    adam = AdamState.init(packed.size)
    for epoch in range(opt.epochs):
        started = time.perf_counter()
        record = EpochRecord(epoch=epoch, cost=-mean_log_likelihood(current, data))
        if sampler == "exact":
            gradient = loglik_gradient(current, data, exact_model=True)
        else:
            rng = derive_rng(opt.seed, "rbm-sampler", epoch)
            if sampler == "gibbs":
                draw = gibbs_sample(current, sweeps=options["sweeps"],
                                    n_chains=options["n_chains"],
                                    burn_in=options["burn_in"], rng=rng)
            else:
                schedule = [b for b in options["schedule"] if b < current.beta]
                schedule.append(current.beta)
                draw = annealed_sample(current, schedule=schedule,
                                       sweeps_per_stage=options["sweeps_per_stage"],
                                       n_chains=options["n_chains"], rng=rng)
            gradient = loglik_gradient(current, data, model_samples=draw)
        if opt.eval_every and epoch % opt.eval_every == 0 and eval_cfg is not None:
            model_draw = _rbm_eval_samples(current, opt, epoch, options)
            record.disc_error, record.eval_seed = _evaluate_discriminator(
                model_draw, data, eval_cfg, opt, epoch)
        if opt.snapshot_every and epoch % opt.snapshot_every == 0:
            record.params = [float(x) for x in packed]
        # ascent: feed the negated gradient through the descent-shaped steps
        descent = -_pack_rbm_gradient(current, gradient)
        if opt.kind == "adam":
            adam, packed = adam_step(adam, packed, descent, opt)
        else:
            packed = vanilla_step(packed, descent, opt.eta)
        current = _unpack_rbm(current, packed)
        record.wall_time = time.perf_counter() - started
        trace.append(record)
    return current, trace


def _rbm_eval_samples(model: RbmModel, opt: OptimizerConfig, epoch: int,
                      options: dict) -> SampleSet:
    rng = derive_rng(opt.seed, "eval-model", epoch)
    if model.n_units <= 24:
        probs = exact_visible_distribution(model)
        drawn = rng.choice(probs.size, size=opt.eval_samples, p=probs)
        return SampleSet.from_codes(drawn, model.n_visible)
    n_chains = options["n_chains"]
    sweeps = -(-opt.eval_samples // n_chains)
    draw = gibbs_sample(model, sweeps=sweeps, n_chains=n_chains,
                        burn_in=options["burn_in"], rng=rng)
    codes = draw.expanded_codes()[:opt.eval_samples]
    return SampleSet.from_codes(codes, model.n_visible)
