"""Experiment configuration: a declarative JSON file mapped onto the module
configs, with the parameter-budget rule (RBM bias count == Born parameter
count) enforced at load time when both models run."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import AnsatzLayout, LatticeTopology, builtin_topology, load_topology
from .data import ProblemSpec
from .discriminator import ForestConfig
from .divergence import KernelConfig, SinkhornConfig
from .trainers import GeneticConfig, OptimizerConfig

MODEL_CHOICES = ("born", "rbm", "both")


@dataclass
class DataConfig:
    source: str = "synthetic"            # synthetic | csv | dataset
    n_samples: int = 5070
    correlation: list[list[float]] | None = None
    csv_paths: list[str] = field(default_factory=list)
    dataset_path: str | None = None

    def __post_init__(self) -> None:
        if self.source not in ("synthetic", "csv", "dataset"):
            raise ValueError(f"unknown data source {self.source!r}")
        if self.source == "csv" and not self.csv_paths:
            raise ValueError("csv source needs csv_paths")
        if self.source == "dataset" and not self.dataset_path:
            raise ValueError("dataset source needs dataset_path")


@dataclass
class BornConfig:
    topology: str = "chain4"             # builtin name or edge-list file path
    layers: int = 2

    def layout(self) -> AnsatzLayout:
        if Path(self.topology).is_file():
            topo = load_topology(self.topology)
        else:
            topo = builtin_topology(self.topology)
        return AnsatzLayout(topology=topo, layers=self.layers)


@dataclass
class RbmConfig:
    n_hidden: int | None = None          # default n_visible * (layers - 1)
    weight_scale: float = 1.0
    bias_init_scale: float = 0.0
    beta: float = 1.0
    train_weights: bool = False


@dataclass
class SamplerConfig:
    kind: str = "exact"                  # exact | gibbs | annealed
    sweeps: int = 10
    n_chains: int = 100
    burn_in: int = 200
    schedule: list[float] = field(default_factory=lambda: [0.25, 0.5, 0.75])
    sweeps_per_stage: int = 50

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "gibbs", "annealed"):
            raise ValueError(f"unknown sampler kind {self.kind!r}")

    def options(self) -> dict:
        return {"sweeps": self.sweeps, "n_chains": self.n_chains,
                "burn_in": self.burn_in, "schedule": list(self.schedule),
                "sweeps_per_stage": self.sweeps_per_stage}


@dataclass
class EntanglementConfig:
    enabled: bool = True
    n_instances: int = 100


@dataclass
class ExperimentConfig:
    run_id: str
    seed: int = 0
    model: str = "both"
    out_dir: str = "runs"
    cost: str = "sinkhorn"
    problem: ProblemSpec = field(default_factory=lambda: ProblemSpec(
        pairs=("EURUSD", "GBPUSD"), bits_per_pair=2))
    data: DataConfig = field(default_factory=DataConfig)
    born: BornConfig = field(default_factory=BornConfig)
    rbm: RbmConfig = field(default_factory=RbmConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    rbm_optimizer: OptimizerConfig | None = None
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    genetic: GeneticConfig = field(default_factory=GeneticConfig)
    rbm_sampler: SamplerConfig = field(default_factory=SamplerConfig)
    discriminator: ForestConfig = field(default_factory=ForestConfig)
    entanglement: EntanglementConfig = field(default_factory=EntanglementConfig)
    qq_quantiles: int = 50
    raw: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.model not in MODEL_CHOICES:
            raise ValueError(f"model must be one of {MODEL_CHOICES}")
        if not self.run_id:
            raise ValueError("run_id is required")
        layout = self.born.layout()
        n_bits = self.problem.n_bits
        if self.model in ("born", "both") and layout.n_qubits != n_bits:
            raise ValueError(
                f"problem needs {n_bits} qubits but topology "
                f"{self.born.topology!r} has {layout.n_qubits}")
        if self.rbm.n_hidden is None:
            self.rbm.n_hidden = n_bits * (self.born.layers - 1)
        if self.model == "both":
            born_params = layout.parameter_count()
            rbm_biases = n_bits + self.rbm.n_hidden
            if born_params != rbm_biases:
                raise ValueError(
                    "parameter budgets differ: Born machine has "
                    f"{born_params} angles but the RBM has {rbm_biases} biases; "
                    "set rbm.n_hidden = n_qubits * (layers - 1)")
        if self.rbm_optimizer is None:
            self.rbm_optimizer = OptimizerConfig(
                kind="vanilla", learning_rate=0.2,
                epochs=self.optimizer.epochs, mode=self.optimizer.mode,
                eval_every=self.optimizer.eval_every,
                eval_samples=self.optimizer.eval_samples,
                snapshot_every=self.optimizer.snapshot_every,
                seed=self.optimizer.seed)


def _build_section(cls, blob: dict, name: str):
    if not isinstance(blob, dict):
        raise ValueError(f"config section {name!r} must be an object")
    valid = {f for f in cls.__dataclass_fields__}
    unknown = set(blob) - valid
    if unknown:
        raise ValueError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    return cls(**blob)


def _tupled(blob: dict, key: str) -> dict:
    out = dict(blob)
    if key in out and isinstance(out[key], list):
        out[key] = tuple(out[key])
    return out


def parse_config(blob: dict) -> ExperimentConfig:
    blob = dict(blob)
    sections = {
        "problem": (ProblemSpec, lambda b: _tupled(_tupled(b, "pairs"), "clip")),
        "data": (DataConfig, dict),
        "born": (BornConfig, dict),
        "rbm": (RbmConfig, dict),
        "optimizer": (OptimizerConfig, dict),
        "rbm_optimizer": (OptimizerConfig, dict),
        "sinkhorn": (SinkhornConfig, dict),
        "kernel": (KernelConfig, lambda b: _tupled(b, "bandwidths")),
        "genetic": (GeneticConfig, dict),
        "rbm_sampler": (SamplerConfig, dict),
        "discriminator": (ForestConfig, dict),
        "entanglement": (EntanglementConfig, dict),
    }
    kwargs: dict = {"raw": dict(blob)}
    for key, (cls, normalize) in sections.items():
        if key in blob:
            kwargs[key] = _build_section(cls, normalize(blob.pop(key)), key)
    scalars = {"run_id", "seed", "model", "out_dir", "cost", "qq_quantiles"}
    unknown = set(blob) - scalars
    if unknown:
        raise ValueError(f"unknown top-level config keys: {sorted(unknown)}")
    kwargs.update(blob)
    if "run_id" not in kwargs:
        raise ValueError("config must set run_id")
    return ExperimentConfig(**kwargs)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        blob = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(blob)
