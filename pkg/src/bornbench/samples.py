"""Bitstring sample sets.

A ``SampleSet`` is a multiset of fixed-length bitstrings stored as unique
integer basis codes with counts. It is the common currency between the
generative models, the distribution costs and the discriminator. Bit order
convention everywhere: bit 0 is the most significant bit of the code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def codes_to_bits(codes: np.ndarray, n_bits: int) -> np.ndarray:
    """Expand integer codes to a (len, n_bits) uint8 array, MSB first."""
    codes = np.asarray(codes, dtype=np.int64)
    shifts = np.arange(n_bits - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def bits_to_codes(bits: np.ndarray) -> np.ndarray:
    """Inverse of :func:`codes_to_bits`."""
    bits = np.asarray(bits, dtype=np.int64)
    n_bits = bits.shape[1]
    weights = 1 << np.arange(n_bits - 1, -1, -1, dtype=np.int64)
    return bits @ weights


@dataclass
class SampleSet:
    """Multiset of n_bits-long bitstrings: unique codes plus positive counts."""

    n_bits: int
    codes: np.ndarray   # unique, ascending int64
    counts: np.ndarray  # positive int64, aligned with codes

    def __post_init__(self) -> None:
        self.codes = np.asarray(self.codes, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.codes.shape != self.counts.shape:
            raise ValueError("codes and counts must have the same length")
        if self.codes.size and (np.any(self.codes < 0) or np.any(self.codes >= 1 << self.n_bits)):
            raise ValueError(f"codes out of range for {self.n_bits} bits")
        if np.any(self.counts <= 0):
            raise ValueError("counts must be positive")
        if np.any(np.diff(self.codes) <= 0):
            raise ValueError("codes must be strictly ascending (unique)")

    @classmethod
    def from_codes(cls, codes: np.ndarray, n_bits: int) -> "SampleSet":
        """Aggregate a raw (possibly repeated) code array."""
        uniq, counts = np.unique(np.asarray(codes, dtype=np.int64), return_counts=True)
        return cls(n_bits=n_bits, codes=uniq, counts=counts)

    @classmethod
    def from_bitstrings(cls, strings: list[str]) -> "SampleSet":
        if not strings:
            raise ValueError("empty bitstring list")
        n_bits = len(strings[0])
        if any(len(s) != n_bits for s in strings):
            raise ValueError("bitstrings must have uniform length")
        return cls.from_codes(np.array([int(s, 2) for s in strings]), n_bits)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def expanded_codes(self) -> np.ndarray:
        """All samples as one code per row, ascending order."""
        return np.repeat(self.codes, self.counts)

    def expanded_bits(self) -> np.ndarray:
        """All samples as 0/1 feature rows (total, n_bits)."""
        return codes_to_bits(self.expanded_codes(), self.n_bits)

    def frequencies(self) -> np.ndarray:
        """Counts normalized to sum 1, aligned with ``codes``."""
        return self.counts / self.counts.sum()

    def bitstrings(self) -> list[str]:
        """Unique support as bitstrings (for display / serialization)."""
        return [format(c, f"0{self.n_bits}b") for c in self.codes]

    def resample(self, n: int, rng: np.random.Generator) -> "SampleSet":
        """Draw n samples with replacement from this multiset."""
        drawn = rng.choice(self.codes, size=n, p=self.frequencies())
        return SampleSet.from_codes(drawn, self.n_bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (self.n_bits == other.n_bits
                and np.array_equal(self.codes, other.codes)
                and np.array_equal(self.counts, other.counts))
