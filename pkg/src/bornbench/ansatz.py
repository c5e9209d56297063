"""Hardware-efficient circuit family.

A layout is a sparse entangling graph plus a layer count. The circuit is one
layer of RY rotations, then for each further layer the fixed CZ block followed
by another layer of RY rotations, so an n-qubit, l-layer circuit carries n*l
angles. Only the single-qubit rotations are parameterized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .statevector import Gate


@dataclass(frozen=True)
class LatticeTopology:
    """Qubit count plus the unordered CZ edge list of one entangling block."""

    n_qubits: int
    cz_edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen = set()
        for (i, j) in self.cz_edges:
            if i == j:
                raise ValueError(f"self-edge ({i},{j})")
            if not (0 <= i < self.n_qubits and 0 <= j < self.n_qubits):
                raise ValueError(f"edge ({i},{j}) out of range for {self.n_qubits} qubits")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        # canonical order: sorted pairs, sorted list (CZ gates commute)
        object.__setattr__(self, "cz_edges",
                           tuple(sorted((min(i, j), max(i, j)) for i, j in self.cz_edges)))


@dataclass(frozen=True)
class AnsatzLayout:
    topology: LatticeTopology
    layers: int

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ValueError("layers must be >= 1")

    @property
    def n_qubits(self) -> int:
        return self.topology.n_qubits

    def parameter_count(self) -> int:
        return self.n_qubits * self.layers


def _grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return edges


# Fixed desk-scale entangling graphs with the qubit counts used throughout:
# a 4-qubit chain, a 6-qubit ring, a 2x4 ladder, and 2x5 / 3x4 grids.
BUILTIN_TOPOLOGIES: dict[str, LatticeTopology] = {
    "chain4": LatticeTopology(4, ((0, 1), (1, 2), (2, 3))),
    "ring6": LatticeTopology(6, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0))),
    "ladder8": LatticeTopology(8, tuple(_grid_edges(2, 4))),
    "lattice10": LatticeTopology(10, tuple(_grid_edges(2, 5))),
    "lattice12": LatticeTopology(12, tuple(_grid_edges(3, 4))),
}


def builtin_topology(name: str) -> LatticeTopology:
    try:
        return BUILTIN_TOPOLOGIES[name]
    except KeyError:
        raise ValueError(
            f"unknown topology {name!r}; available: {sorted(BUILTIN_TOPOLOGIES)}") from None


def load_topology(path: str | Path) -> LatticeTopology:
    """Read an edge list ("i j" per line, # comments); qubit count = max index + 1."""
    edges = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        i, j = (int(tok) for tok in line.split())
        edges.append((i, j))
    if not edges:
        raise ValueError(f"no edges in {path}")
    n = max(max(e) for e in edges) + 1
    return LatticeTopology(n, tuple(edges))


def save_topology(topology: LatticeTopology, path: str | Path) -> None:
    Path(path).write_text("".join(f"{i} {j}\n" for i, j in topology.cz_edges))


@dataclass
class ParameterVector:
    """Rotation angles in radians, flattened layer-major: index = layer*n + qubit."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("parameter vector must be one-dimensional")

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def random_uniform(cls, layout: AnsatzLayout, rng: np.random.Generator) -> "ParameterVector":
        """Independent U(0, 2*pi) draws, the random-instance convention."""
        return cls(rng.uniform(0.0, 2.0 * np.pi, layout.parameter_count()))


def build_circuit(layout: AnsatzLayout, params: ParameterVector) -> list[Gate]:
    """Gate sequence: RY layer, then (CZ block + RY layer) per extra layer."""
    n, l = layout.n_qubits, layout.layers
    if len(params) != n * l:
        raise ValueError(f"expected {n * l} parameters, got {len(params)}")
    theta = params.values.reshape(l, n)
    gates: list[Gate] = [Gate("RY", (q,), float(theta[0, q])) for q in range(n)]
    for layer in range(1, l):
        gates.extend(Gate("CZ", edge) for edge in layout.topology.cz_edges)
        gates.extend(Gate("RY", (q,), float(theta[layer, q])) for q in range(n))
    return gates


def shifted_params(params: ParameterVector, index: int, shift: float) -> ParameterVector:
    """Copy of params with values[index] += shift (parameter-shift helper)."""
    if not 0 <= index < len(params):
        raise IndexError(f"parameter index {index} out of range")
    values = params.values.copy()
    values[index] += shift
    return ParameterVector(values)
