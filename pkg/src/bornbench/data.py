"""Dataset pipeline.

Spot-price series become daily log-returns, each pair's returns are clipped
to configurable quantiles and discretized into 2**j bins (equal-mass quantile
bins by default, linear bins optionally), and the per-pair j-bit codes are
concatenated in pair order into (i*j)-bit joint samples. A correlated
Gaussian generator provides a synthetic stand-in with the same shape when a
real feed is unavailable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .divergence import EmpiricalDistribution
from .samples import SampleSet, bits_to_codes, codes_to_bits

JOINT_BIT_CEILING = 24


@dataclass
class PriceSeries:
    pair: str
    dates: list[str]      # ISO dates, strictly increasing
    prices: np.ndarray    # positive spot prices

    def __post_init__(self) -> None:
        self.prices = np.asarray(self.prices, dtype=np.float64)
        if len(self.dates) != self.prices.size:
            raise ValueError("dates and prices must align")
        parsed = [date.fromisoformat(d) for d in self.dates]
        if any(b <= a for a, b in zip(parsed, parsed[1:])):
            raise ValueError("dates must be strictly increasing")
        if np.any(self.prices <= 0):
            raise ValueError("prices must be positive")


@dataclass(frozen=True)
class ProblemSpec:
    pairs: tuple[str, ...]
    bits_per_pair: int
    binning: str = "quantile"          # quantile | linear
    clip: tuple[float, float] = (0.001, 0.999)

    def __post_init__(self) -> None:
        if not 1 <= len(self.pairs) <= 4:
            raise ValueError("between 1 and 4 pairs supported")
        if not 1 <= self.bits_per_pair <= 16:
            raise ValueError("bits_per_pair must be in [1, 16]")
        if self.n_bits > JOINT_BIT_CEILING:
            raise ValueError(f"joint sample width {self.n_bits} exceeds "
                             f"the {JOINT_BIT_CEILING}-bit simulation ceiling")
        if self.binning not in ("quantile", "linear"):
            raise ValueError("binning must be 'quantile' or 'linear'")
        lo, hi = self.clip
        if not 0 <= lo < hi <= 1:
            raise ValueError("clip quantiles must satisfy 0 <= lo < hi <= 1")

    @property
    def n_bits(self) -> int:
        return len(self.pairs) * self.bits_per_pair


@dataclass
class BinnedDataset:
    samples: SampleSet
    spec: ProblemSpec
    edges: list[np.ndarray]   # per pair, 2**j + 1 monotone bin edges
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.samples.n_bits != self.spec.n_bits:
            raise ValueError("sample width does not match the problem spec")
        for e in self.edges:
            if np.any(np.diff(e) < 0):
                raise ValueError("bin edges must be monotone")


def log_returns(series: PriceSeries) -> np.ndarray:
    """r_t = ln(p_t / p_{t-1}); one fewer entry than prices."""
    if series.prices.size < 2:
        raise ValueError("need at least two prices")
    return np.diff(np.log(series.prices))


def fit_edges(values: np.ndarray, bits: int, binning: str,
              clip: tuple[float, float]) -> np.ndarray:
    """2**bits + 1 edges covering the clipped range."""
    lo, hi = np.quantile(values, clip)
    clipped = np.clip(values, lo, hi)
    n_bins = 1 << bits
    if binning == "quantile":
        edges = np.quantile(clipped, np.linspace(0.0, 1.0, n_bins + 1))
    else:
        edges = np.linspace(lo, hi, n_bins + 1)
    if np.any(np.diff(edges) < 0):
        raise ValueError("non-monotone bin edges")
    return edges


def binarize_codes(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Bin index per value, out-of-range values clamped to the first/last bin."""
    if np.any(np.diff(edges) < 0):
        raise ValueError("non-monotone bin edges")
    n_bins = edges.size - 1
    codes = np.searchsorted(edges, values, side="right") - 1
    return np.clip(codes, 0, n_bins - 1)


def binarize(value: float, edges: np.ndarray) -> str:
    """Bin index of one value as a big-endian bitstring."""
    bits = int(np.log2(edges.size - 1))
    code = int(binarize_codes(np.asarray([value]), edges)[0])
    return format(code, f"0{bits}b")


def decode_code(code: int, edges: np.ndarray) -> float:
    """Midpoint of the bin addressed by a code."""
    return float(0.5 * (edges[code] + edges[code + 1]))


def _inner_join(series_by_pair: dict[str, PriceSeries],
                pairs: tuple[str, ...]) -> tuple[list[str], dict[str, np.ndarray]]:
    common = None
    for pair in pairs:
        if pair not in series_by_pair:
            raise ValueError(f"no series for pair {pair!r}")
        dates = set(series_by_pair[pair].dates)
        common = dates if common is None else (common & dates)
    if not common:
        raise ValueError("empty date intersection across pairs")
    joined = sorted(common)
    aligned = {}
    for pair in pairs:
        s = series_by_pair[pair]
        index = {d: i for i, d in enumerate(s.dates)}
        aligned[pair] = s.prices[[index[d] for d in joined]]
    return joined, aligned


def build_dataset(series_by_pair: dict[str, PriceSeries],
                  spec: ProblemSpec) -> BinnedDataset:
    """Inner-join the pairs on dates, binarize each pair's log-returns and
    concatenate the per-pair codes in spec order."""
    joined_dates, aligned = _inner_join(series_by_pair, spec.pairs)
    if len(joined_dates) < 2:
        raise ValueError("need at least two common dates")
    per_pair_codes, edges = [], []
    for pair in spec.pairs:
        prices = aligned[pair]
        if np.any(prices <= 0):
            raise ValueError(f"nonpositive price in pair {pair!r}")
        returns = np.diff(np.log(prices))
        pair_edges = fit_edges(returns, spec.bits_per_pair, spec.binning, spec.clip)
        per_pair_codes.append(binarize_codes(returns, pair_edges))
        edges.append(pair_edges)
    joint = np.zeros(len(joined_dates) - 1, dtype=np.int64)
    for codes in per_pair_codes:
        joint = (joint << spec.bits_per_pair) | codes
    dropped = {p: len(series_by_pair[p].dates) - len(joined_dates) for p in spec.pairs}
    return BinnedDataset(
        samples=SampleSet.from_codes(joint, spec.n_bits),
        spec=spec, edges=edges,
        provenance={"source": "series", "n_samples": int(joint.size),
                    "dropped_dates": dropped})


def downsample_precision(dataset: BinnedDataset, target_bits: int) -> BinnedDataset:
    """Keep each pair's target_bits most significant bits."""
    j = dataset.spec.bits_per_pair
    if not 1 <= target_bits < j:
        raise ValueError(f"target bits must be in [1, {j - 1}]")
    drop = j - target_bits
    spec = ProblemSpec(dataset.spec.pairs, target_bits, dataset.spec.binning,
                       dataset.spec.clip)
    expanded = dataset.samples.expanded_codes()
    joint = np.zeros_like(expanded)
    for k in range(len(dataset.spec.pairs)):
        shift = (len(dataset.spec.pairs) - 1 - k) * j
        pair_codes = (expanded >> shift) & ((1 << j) - 1)
        joint = (joint << target_bits) | (pair_codes >> drop)
    edges = [e[:: 1 << drop] for e in dataset.edges]
    provenance = dict(dataset.provenance)
    provenance["downsampled_from_bits"] = j
    return BinnedDataset(samples=SampleSet.from_codes(joint, spec.n_bits),
                         spec=spec, edges=edges, provenance=provenance)


def marginal_distribution(dataset: BinnedDataset, pair_index: int) -> EmpiricalDistribution:
    """Frequency distribution of one pair's j-bit slice."""
    n_pairs = len(dataset.spec.pairs)
    if not 0 <= pair_index < n_pairs:
        raise IndexError(f"pair index {pair_index} out of range")
    j = dataset.spec.bits_per_pair
    shift = (n_pairs - 1 - pair_index) * j
    expanded = dataset.samples.expanded_codes()
    slice_codes = (expanded >> shift) & ((1 << j) - 1)
    return EmpiricalDistribution.from_sample_set(SampleSet.from_codes(slice_codes, j))


def qq_data(a: EmpiricalDistribution, b: EmpiricalDistribution,
            n_quantiles: int = 50) -> np.ndarray:
    """Paired empirical quantiles (level, q_a, q_b) of codes-as-integers at
    levels (k+1)/(n_quantiles+1)."""
    if a.n_bits != b.n_bits:
        raise ValueError("bit-length mismatch")
    levels = np.arange(1, n_quantiles + 1) / (n_quantiles + 1)

    def quantile(dist: EmpiricalDistribution, ts: np.ndarray) -> np.ndarray:
        cdf = np.cumsum(dist.weights)
        idx = np.searchsorted(cdf, ts, side="left")
        return dist.codes[np.minimum(idx, dist.codes.size - 1)]

    return np.column_stack([levels, quantile(a, levels), quantile(b, levels)])


def synthetic_fx_generator(spec: ProblemSpec, n_samples: int,
                           correlation: np.ndarray,
                           rng: np.random.Generator) -> BinnedDataset:
    """Correlated Gaussian log-return surrogate, binarized per the spec."""
    correlation = np.asarray(correlation, dtype=np.float64)
    n_pairs = len(spec.pairs)
    if correlation.shape != (n_pairs, n_pairs):
        raise ValueError("correlation matrix shape must match the pair count")
    if not np.allclose(correlation, correlation.T, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(correlation), 1.0, atol=1e-12):
        raise ValueError("correlation matrix must have unit diagonal")
    eigenvalues = np.linalg.eigvalsh(correlation)
    if eigenvalues.min() < -1e-10:
        raise ValueError("correlation matrix must be positive semidefinite")
    scale = np.linalg.cholesky(correlation + 1e-12 * np.eye(n_pairs))
    returns = rng.standard_normal((n_samples, n_pairs)) @ scale.T
    per_pair_codes, edges = [], []
    for k in range(n_pairs):
        pair_edges = fit_edges(returns[:, k], spec.bits_per_pair, spec.binning, spec.clip)
        per_pair_codes.append(binarize_codes(returns[:, k], pair_edges))
        edges.append(pair_edges)
    joint = np.zeros(n_samples, dtype=np.int64)
    for codes in per_pair_codes:
        joint = (joint << spec.bits_per_pair) | codes
    return BinnedDataset(
        samples=SampleSet.from_codes(joint, spec.n_bits), spec=spec, edges=edges,
        provenance={"source": "synthetic", "n_samples": int(n_samples),
                    "correlation": correlation.tolist()})


def read_price_csvs(paths: list[str | Path]) -> dict[str, PriceSeries]:
    """CSV ingestion: header date,pair,price; one file or one file per pair."""
    rows_by_pair: dict[str, list[tuple[str, float]]] = {}
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"date", "pair", "price"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise ValueError(f"{path}: expected header with columns {sorted(required)}")
            for row in reader:
                rows_by_pair.setdefault(row["pair"], []).append(
                    (row["date"], float(row["price"])))
    series = {}
    for pair, rows in rows_by_pair.items():
        rows.sort(key=lambda r: r[0])
        series[pair] = PriceSeries(pair=pair, dates=[r[0] for r in rows],
                                   prices=np.array([r[1] for r in rows]))
    return series


def save_dataset(dataset: BinnedDataset, path: str | Path) -> None:
    """Header line of JSON (spec, provenance, edges) then one 0/1 row per sample."""
    header = {
        "pairs": list(dataset.spec.pairs),
        "bits_per_pair": dataset.spec.bits_per_pair,
        "binning": dataset.spec.binning,
        "clip": list(dataset.spec.clip),
        "edges": [e.tolist() for e in dataset.edges],
        "provenance": dataset.provenance,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        n_bits = dataset.samples.n_bits
        for code, count in zip(dataset.samples.codes, dataset.samples.counts):
            row = format(code, f"0{n_bits}b") + "\n"
            fh.write(row * int(count))


def load_dataset(path: str | Path) -> BinnedDataset:
    with open(path) as fh:
        header = json.loads(fh.readline())
        strings = [line.strip() for line in fh if line.strip()]
    spec = ProblemSpec(pairs=tuple(header["pairs"]),
                       bits_per_pair=header["bits_per_pair"],
                       binning=header["binning"], clip=tuple(header["clip"]))
    return BinnedDataset(samples=SampleSet.from_bitstrings(strings), spec=spec,
                         edges=[np.array(e) for e in header["edges"]],
                         provenance=header["provenance"])
