"""Quantum circuit Born machine.

The model distribution is |<x|psi_theta>|^2 over bitstrings, with psi_theta
prepared by the hardware-efficient ansatz. Gradients of any cost expressed
through a sample-space function phi are assembled with the two-term parameter
shift: dD/dtheta_k = (E_{theta_k + pi/2}[phi] - E_{theta_k - pi/2}[phi]) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ansatz import AnsatzLayout, ParameterVector, build_circuit, shifted_params
from .samples import SampleSet
from .statevector import PureState, apply_circuit, exact_probabilities, sample, zero_state

SHIFT = np.pi / 2

# phi maps an array of basis codes (m,) to per-sample values (m,)
PhiFunction = Callable[[np.ndarray], np.ndarray]


@dataclass
class BornMachine:
    layout: AnsatzLayout
    params: ParameterVector

    def __post_init__(self) -> None:
        if len(self.params) != self.layout.parameter_count():
            raise ValueError(
                f"layout wants {self.layout.parameter_count()} parameters, "
                f"got {len(self.params)}")

    @property
    def n_qubits(self) -> int:
        return self.layout.n_qubits

    def with_params(self, params: ParameterVector) -> "BornMachine":
        return BornMachine(self.layout, params)


def born_state(machine: BornMachine) -> PureState:
    """Prepared state: ansatz circuit applied to |0...0>."""
    circuit = build_circuit(machine.layout, machine.params)
    return apply_circuit(zero_state(machine.n_qubits), circuit)


def born_exact_distribution(machine: BornMachine) -> np.ndarray:
    """Exact outcome distribution over all 2**n basis codes."""
    return exact_probabilities(born_state(machine))


def born_sample(machine: BornMachine, shots: int, rng: np.random.Generator) -> SampleSet:
    return sample(born_state(machine), shots, rng)


def born_gradient(
    machine: BornMachine,
    phi: PhiFunction,
    mode: str = "exact",
    shots: int | None = None,
    base_seed: int | None = None,
) -> np.ndarray:
    """Parameter-shift gradient of E_{x ~ p_theta}[phi(x)].

    Exact mode evaluates the shifted expectations from the full shifted
    distributions. Sampled mode draws ``shots`` measurements per shifted
    circuit; parameter k uses its own stream seeded with base_seed XOR k, so
    the result does not depend on evaluation order.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown gradient mode {mode!r}")
    n_params = len(machine.params)
    grad = np.zeros(n_params)
    if mode == "exact":
        all_codes = np.arange(1 << machine.n_qubits)
        phi_values = np.asarray(phi(all_codes), dtype=np.float64)
        for k in range(n_params):
            up = born_exact_distribution(machine.with_params(
                shifted_params(machine.params, k, +SHIFT)))
            dn = born_exact_distribution(machine.with_params(
                shifted_params(machine.params, k, -SHIFT)))
            grad[k] = 0.5 * (up @ phi_values - dn @ phi_values)
        return grad
    if shots is None or shots < 1:
        raise ValueError("sampled mode needs shots >= 1")
    if base_seed is None:
        raise ValueError("sampled mode needs a base seed")
    for k in range(n_params):
        rng = np.random.default_rng(base_seed ^ k)
        up_machine = machine.with_params(shifted_params(machine.params, k, +SHIFT))
        dn_machine = machine.with_params(shifted_params(machine.params, k, -SHIFT))
        up = born_sample(up_machine, shots, rng)
        dn = born_sample(dn_machine, shots, rng)
        e_up = float(phi(up.codes) @ up.frequencies())
        e_dn = float(phi(dn.codes) @ dn.frequencies())
        grad[k] = 0.5 * (e_up - e_dn)
    return grad
