"""Distribution-comparison costs on bitstring distributions.

Two costs are provided:

* the debiased Sinkhorn divergence
      SHD_eps(p, q) = OT_eps(p, q) - OT_eps(p, p)/2 - OT_eps(q, q)/2
  where OT_eps is entropic optimal transport with Hamming ground cost,
  solved by log-domain Sinkhorn iterations on the dual potentials; and
* the multi-bandwidth Gaussian-kernel maximum mean discrepancy (biased
  V-statistic, so MMD(p, p) == 0 exactly).

Both expose the sample-space gradient function phi(x) = dCost/dp(x) that the
Born machine's parameter-shift assembly consumes. For the Sinkhorn divergence
phi is built from the converged dual potentials,

    phi(x) = -eps * LSE_y[log q(y) + (g(y) - C(x,y))/eps]
             + eps * LSE_x'[log p(x') + (s(x') - C(x,x'))/eps],

with g the cross-problem potential on q's support and s the symmetric
potential of OT_eps(p, p); additive gauge constants cancel in the
parameter-shift difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .samples import SampleSet, codes_to_bits


def lse(values: np.ndarray) -> float:
    """log(sum(exp(values))), stable."""
    return float(logsumexp(values))


@dataclass
class EmpiricalDistribution:
    """Distribution over distinct n_bits-long bitstrings (codes + weights)."""

    n_bits: int
    codes: np.ndarray    # unique int64
    weights: np.ndarray  # nonnegative, sums to 1

    def __post_init__(self) -> None:
        self.codes = np.asarray(self.codes, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.codes.shape != self.weights.shape or self.codes.ndim != 1:
            raise ValueError("codes and weights must be aligned 1-d arrays")
        if self.codes.size == 0:
            raise ValueError("empty support")
        if np.any(np.diff(self.codes) <= 0):
            raise ValueError("support codes must be strictly ascending (distinct)")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {self.weights.sum()!r}")

    @classmethod
    def from_sample_set(cls, samples: SampleSet) -> "EmpiricalDistribution":
        return cls(samples.n_bits, samples.codes, samples.frequencies())

    @classmethod
    def from_probability_vector(cls, probs: np.ndarray, n_bits: int,
                                drop_below: float = 0.0) -> "EmpiricalDistribution":
        """Full 2**n distribution; zero-mass (or tiny) outcomes are dropped."""
        probs = np.asarray(probs, dtype=np.float64)
        keep = probs > drop_below
        weights = probs[keep]
        return cls(n_bits, np.flatnonzero(keep), weights / weights.sum())

    def support_bits(self) -> np.ndarray:
        return codes_to_bits(self.codes, self.n_bits)


def hamming_cost_matrix(xs: np.ndarray, ys: np.ndarray, n_bits: int) -> np.ndarray:
    """C[i, j] = number of differing bits between codes xs[i] and ys[j]."""
    bx = codes_to_bits(xs, n_bits).astype(np.float64)
    by = codes_to_bits(ys, n_bits).astype(np.float64)
    return bx @ (1.0 - by).T + (1.0 - bx) @ by.T


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian mixture kernel bandwidths."""

    bandwidths: tuple[float, ...] = (0.25, 10.0, 1000.0)

    def __post_init__(self) -> None:
        if not self.bandwidths or any(s <= 0 for s in self.bandwidths):
            raise ValueError("bandwidths must be a nonempty list of positive reals")


def gaussian_kernel_matrix(hamming: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    """Mean over bandwidths of exp(-h / (2*sigma)) applied elementwise."""
    out = np.zeros_like(hamming, dtype=np.float64)
    for sigma in cfg.bandwidths:
        out += np.exp(-hamming / (2.0 * sigma))
    return out / len(cfg.bandwidths)


def gaussian_mixture_kernel(x: int, y: int, n_bits: int,
                            cfg: KernelConfig = KernelConfig()) -> float:
    """Kernel value between two basis codes (squared l2 = Hamming on 0/1 bits)."""
    h = hamming_cost_matrix(np.array([x]), np.array([y]), n_bits)
    return float(gaussian_kernel_matrix(h, cfg)[0, 0])


def mmd(p: EmpiricalDistribution, q: EmpiricalDistribution,
        cfg: KernelConfig = KernelConfig()) -> float:
    """Biased (V-statistic) squared MMD between weighted distributions."""
    if p.n_bits != q.n_bits:
        raise ValueError("bit-length mismatch")
    k_pp = gaussian_kernel_matrix(hamming_cost_matrix(p.codes, p.codes, p.n_bits), cfg)
    k_qq = gaussian_kernel_matrix(hamming_cost_matrix(q.codes, q.codes, q.n_bits), cfg)
    k_pq = gaussian_kernel_matrix(hamming_cost_matrix(p.codes, q.codes, p.n_bits), cfg)
    return float(p.weights @ k_pp @ p.weights
                 + q.weights @ k_qq @ q.weights
                 - 2.0 * (p.weights @ k_pq @ q.weights))


def mmd_grad_functional(pi_hat: EmpiricalDistribution, p_theta: EmpiricalDistribution,
                        cfg: KernelConfig = KernelConfig()):
    """phi_MMD(x) = 2*(E_{x'~p_theta}[k(x, x')] - E_{y~pi}[k(x, y)])."""
    if pi_hat.n_bits != p_theta.n_bits:
        raise ValueError("bit-length mismatch")
    n_bits = p_theta.n_bits

    def phi(x_codes: np.ndarray) -> np.ndarray:
        k_xp = gaussian_kernel_matrix(
            hamming_cost_matrix(x_codes, p_theta.codes, n_bits), cfg)
        k_xq = gaussian_kernel_matrix(
            hamming_cost_matrix(x_codes, pi_hat.codes, n_bits), cfg)
        return 2.0 * (k_xp @ p_theta.weights - k_xq @ pi_hat.weights)

    return phi


@dataclass(frozen=True)
class SinkhornConfig:
    epsilon: float = 1.0
    max_iterations: int = 1000
    convergence_tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1 or self.convergence_tol <= 0:
            raise ValueError("bad solver limits")


@dataclass
class SinkhornPotentials:
    """Dual potentials of one entropic-OT solve: s on the first support, g on the second."""

    s: np.ndarray
    g: np.ndarray
    converged: bool
    iterations: int


def _softmin(log_weights: np.ndarray, potential: np.ndarray, cost: np.ndarray,
             eps: float) -> np.ndarray:
    """-eps * LSE over columns of [log w + (potential - cost)/eps], one row per target."""
    return -eps * logsumexp(log_weights[None, :] + (potential[None, :] - cost) / eps,
                            axis=1)


def _log_weights(w: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(w)


def sinkhorn_potentials(p: EmpiricalDistribution, q: EmpiricalDistribution,
                        cost: np.ndarray, cfg: SinkhornConfig) -> SinkhornPotentials:
    """Log-domain Sinkhorn fixed point for OT_eps(p, q) with given cost matrix."""
    if cost.shape != (p.codes.size, q.codes.size):
        raise ValueError("cost matrix shape does not match supports")
    logp, logq = _log_weights(p.weights), _log_weights(q.weights)
    s = np.zeros(p.codes.size)
    g = np.zeros(q.codes.size)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        s_new = _softmin(logq, g, cost, cfg.epsilon)
        g_new = _softmin(logp, s_new, cost.T, cfg.epsilon)
        delta = max(np.max(np.abs(s_new - s)), np.max(np.abs(g_new - g)))
        s, g = s_new, g_new
        if delta < cfg.convergence_tol:
            converged = True
            break
    return SinkhornPotentials(s=s, g=g, converged=converged, iterations=iterations)


def symmetric_potential(p: EmpiricalDistribution, cost: np.ndarray,
                        cfg: SinkhornConfig) -> SinkhornPotentials:
    """Symmetric fixed point s = T(s) for the self term OT_eps(p, p).

    Uses the damped iteration s <- (s + T(s))/2, which converges for the
    symmetric problem where plain alternation can oscillate.
    """
    logp = _log_weights(p.weights)
    s = np.zeros(p.codes.size)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        s_new = 0.5 * (s + _softmin(logp, s, cost, cfg.epsilon))
        delta = np.max(np.abs(s_new - s))
        s = s_new
        if delta < cfg.convergence_tol:
            converged = True
            break
    return SinkhornPotentials(s=s, g=s.copy(), converged=converged, iterations=iterations)


@dataclass
class SinkhornDivergenceResult:
    """Debiased divergence value plus everything needed to evaluate phi."""

    value: float
    ot_cross: float
    ot_self_p: float
    ot_self_q: float
    cross: SinkhornPotentials
    self_p: SinkhornPotentials
    self_q: SinkhornPotentials
    converged: bool


def sinkhorn_divergence(p: EmpiricalDistribution, q: EmpiricalDistribution,
                        cfg: SinkhornConfig = SinkhornConfig()) -> SinkhornDivergenceResult:
    """SHD_eps(p, q) = OT(p, q) - OT(p, p)/2 - OT(q, q)/2, all at the same eps."""
    if p.n_bits != q.n_bits:
        raise ValueError("bit-length mismatch")
    c_pq = hamming_cost_matrix(p.codes, q.codes, p.n_bits)
    c_pp = hamming_cost_matrix(p.codes, p.codes, p.n_bits)
    c_qq = hamming_cost_matrix(q.codes, q.codes, q.n_bits)
    cross = sinkhorn_potentials(p, q, c_pq, cfg)
    self_p = symmetric_potential(p, c_pp, cfg)
    self_q = symmetric_potential(q, c_qq, cfg)
    ot_cross = float(p.weights @ cross.s + q.weights @ cross.g)
    ot_self_p = float(2.0 * (p.weights @ self_p.s))
    ot_self_q = float(2.0 * (q.weights @ self_q.s))
    value = ot_cross - 0.5 * ot_self_p - 0.5 * ot_self_q
    return SinkhornDivergenceResult(
        value=value, ot_cross=ot_cross, ot_self_p=ot_self_p, ot_self_q=ot_self_q,
        cross=cross, self_p=self_p, self_q=self_q,
        converged=cross.converged and self_p.converged and self_q.converged)


def sinkhorn_phi(p: EmpiricalDistribution, q: EmpiricalDistribution,
                 cross: SinkhornPotentials, self_p: SinkhornPotentials,
                 cfg: SinkhornConfig):
    """Sample-space gradient dSHD/dp(x) from converged potentials.

    Extends the cross potential and the symmetric self potential to arbitrary
    basis codes through their defining soft-min expressions; the q self term
    does not depend on p and contributes nothing.
    """
    logp, logq = _log_weights(p.weights), _log_weights(q.weights)
    n_bits = p.n_bits

    def phi(x_codes: np.ndarray) -> np.ndarray:
        c_xq = hamming_cost_matrix(x_codes, q.codes, n_bits)
        c_xp = hamming_cost_matrix(x_codes, p.codes, n_bits)
        f_ext = _softmin(logq, cross.g, c_xq, cfg.epsilon)
        s_ext = _softmin(logp, self_p.s, c_xp, cfg.epsilon)
        return f_ext - s_ext

    return phi


def sinkhorn_grad_functional(pi_hat: EmpiricalDistribution,
                             p_theta: EmpiricalDistribution,
                             cfg: SinkhornConfig = SinkhornConfig()):
    """Convenience: solve the divergence and return (result, phi) for training."""
    result = sinkhorn_divergence(p_theta, pi_hat, cfg)
    phi = sinkhorn_phi(p_theta, pi_hat, result.cross, result.self_p, cfg)
    return result, phi
