"""Dense pure-state simulator.

States are complex amplitude vectors of length 2**n over the computational
basis, ordered by the integer value of the bitstring with qubit 0 as the most
significant bit. Rotation gates follow the convention
``R_a(theta) = exp(-i * theta * A / 2)`` for A in {X, Y, Z}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .samples import SampleSet

MAX_QUBITS = 24

ROTATION_KINDS = ("RX", "RY", "RZ")


@dataclass
class PureState:
    """n-qubit pure state: dense complex amplitude vector of length 2**n."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitude vector must have length {1 << self.n_qubits}, "
                f"got {self.amplitudes.shape}")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass(frozen=True)
class Gate:
    """RX/RY/RZ rotation on one qubit, or CZ on a pair."""

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind in ROTATION_KINDS:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind} takes exactly one target")
            if self.angle is None:
                raise ValueError(f"{self.kind} requires an angle")
        elif self.kind == "CZ":
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValueError("CZ takes two distinct targets")
            if self.angle is not None:
                raise ValueError("CZ carries no angle")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")


def rotation_matrix(kind: str, theta: float) -> np.ndarray:
    """2x2 matrix of exp(-i*theta*A/2) for A in {X, Y, Z}."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "RZ":
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]],
                        dtype=np.complex128)
    raise ValueError(f"not a rotation kind: {kind!r}")


def zero_state(n_qubits: int, max_qubits: int = MAX_QUBITS) -> PureState:
    """|0...0> on n_qubits qubits."""
    if not 1 <= n_qubits <= max_qubits:
        raise ValueError(f"n_qubits must be in [1, {max_qubits}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return PureState(n_qubits, amps)


def _check_target(n: int, q: int) -> None:
    if not 0 <= q < n:
        raise IndexError(f"qubit index {q} out of range for {n} qubits")


def apply_gate(state: PureState, gate: Gate) -> PureState:
    """Apply one gate, returning a new state (value semantics)."""
    n = state.n_qubits
    for q in gate.targets:
        _check_target(n, q)
    if gate.kind == "CZ":
        i, j = gate.targets
        idx = np.arange(1 << n)
        both = ((idx >> (n - 1 - i)) & 1) & ((idx >> (n - 1 - j)) & 1)
        amps = state.amplitudes.copy()
        amps[both.astype(bool)] *= -1.0
        return PureState(n, amps)
    (q,) = gate.targets
    u = rotation_matrix(gate.kind, gate.angle)
    # view as (pre, 2, post) with the target qubit on the middle axis
    block = state.amplitudes.reshape(1 << q, 2, 1 << (n - q - 1))
    out = np.einsum("ab,xby->xay", u, block)
    return PureState(n, np.ascontiguousarray(out).reshape(-1))


def apply_circuit(state: PureState, gates: list[Gate]) -> PureState:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def exact_probabilities(state: PureState) -> np.ndarray:
    """Born-rule outcome probabilities |amplitude(x)|^2 over all basis states."""
    return np.abs(state.amplitudes) ** 2


def sample(state: PureState, shots: int, rng: np.random.Generator) -> SampleSet:
    """Draw i.i.d. measurement outcomes; deterministic given the generator state."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = exact_probabilities(state)
    probs = probs / probs.sum()
    drawn = rng.choice(probs.size, size=shots, p=probs)
    return SampleSet.from_codes(drawn, state.n_qubits)


def reduced_density_matrix(state: PureState, qubit: int) -> np.ndarray:
    """Single-qubit reduced density matrix by tracing out all other qubits."""
    n = state.n_qubits
    _check_target(n, qubit)
    block = state.amplitudes.reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    return np.einsum("aib,ajb->ij", block, block.conj())


def reduced_purity(state: PureState, qubit: int) -> float:
    """Tr[rho_k^2] of the single-qubit marginal; 1 iff the qubit is unentangled."""
    rho = reduced_density_matrix(state, qubit)
    purity = float(np.real(np.trace(rho @ rho)))
    return min(max(purity, 0.5), 1.0)


def project_drop(state: PureState, qubit: int, bit: int) -> np.ndarray:
    """Project the given qubit onto |bit> and drop it (unnormalized, length 2**(n-1))."""
    n = state.n_qubits
    _check_target(n, qubit)
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    block = state.amplitudes.reshape(1 << qubit, 2, 1 << (n - qubit - 1))
    return np.ascontiguousarray(block[:, bit, :]).reshape(-1)
