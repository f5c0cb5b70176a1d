"""
Gaussian-space primitives: orthonormal Hermite polynomials, Gauss-Hermite
quadrature for the standard normal weight, and seeded correlated samplers.

Conventions
-----------
All integrals are against the standard Gaussian measure

    dgamma_1(x) = (2*pi)^(-1/2) exp(-x^2/2) dx,

and the Hermite family used everywhere is the L2(gamma_1)-orthonormal one:

    H_0(x) = 1,  H_1(x) = x,
    H_{q+1}(x) = (x*H_q(x) - sqrt(q)*H_{q-1}(x)) / sqrt(q+1),

so that E[H_p(X) H_q(X)] = delta_{pq} for X ~ N(0,1).  Multi-indexed
products H_S(x) = prod_i H_{S_i}(x_i) form an orthonormal basis of
L2(gamma_n).

Quadrature nodes/weights come from the Golub-Welsch eigendecomposition of
the Jacobi matrix of this recurrence (off-diagonal sqrt(q)), normalized so
the weights sum to 1: an order-m rule integrates polynomials of degree
<= 2m-1 exactly against gamma_1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "QuadratureRule",
    "HermiteIndex",
    "CorrelatedSampler",
    "hermite_eval",
    "hermite_table",
    "hermite_multi_eval",
    "gauss_hermite_rule",
    "tensor_grid",
    "sample_pairs",
]

MAX_TENSOR_GRID_DIM = 4


def hermite_eval(q: int, x):
    """Orthonormal Hermite value H_q(x); x may be a scalar or ndarray."""
    if q < 0:
        raise ValueError("Hermite degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if q == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for j in range(1, q):
        h, h_prev = (x * h - np.sqrt(j) * h_prev) / np.sqrt(j + 1), h
    return h if h.ndim else float(h)


def hermite_table(max_degree: int, x: np.ndarray) -> np.ndarray:
    """All values H_0(x)..H_max(x), stacked along a leading axis.

    Returns an array of shape (max_degree+1,) + x.shape; used by the
    expansion and chaos-evaluation loops to avoid recomputing the
    recurrence per index.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((max_degree + 1,) + x.shape)
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = x
    for j in range(1, max_degree):
        out[j + 1] = (x * out[j] - np.sqrt(j) * out[j - 1]) / np.sqrt(j + 1)
    return out


@dataclass(frozen=True)
class HermiteIndex:
    """Multi-index S into the product Hermite basis of L2(gamma_n)."""

    entries: tuple[int, ...]
    degree: int = field(init=False)

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise ValueError("multi-index entries must be nonnegative")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "degree", sum(entries))

    def __len__(self) -> int:
        return len(self.entries)


def hermite_multi_eval(S, x) -> float:
    """H_S(x) = prod_i H_{S_i}(x_i) for a point x in R^n."""
    entries = S.entries if isinstance(S, HermiteIndex) else tuple(S)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(entries) != x.shape[-1]:
        raise ValueError(
            f"index length {len(entries)} != point dimension {x.shape[-1]}"
        )
    val = 1.0
    for i, q in enumerate(entries):
        if q:
            val = val * hermite_eval(q, x[..., i])
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights for expectations against gamma_1 (weights sum to 1)."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("quadrature order must be >= 1")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be strictly positive")
        if abs(self.weights.sum() - 1.0) > 1e-10:
            raise ValueError("quadrature weights must sum to 1")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, fvals: np.ndarray) -> float:
        return float(np.dot(self.weights, fvals))


def gauss_hermite_rule(order: int) -> QuadratureRule:
    """Golub-Welsch rule for gamma_1.

    Nodes are the eigenvalues of the Jacobi matrix of the orthonormal
    recurrence (zero diagonal, off-diagonal sqrt(1..order-1)), symmetrized
    about 0 to kill the O(eps) asymmetry of the eigensolver.  Weights use
    the equivalent Christoffel form 1 / sum_q H_q(x_i)^2, which stays
    positive where the squared-first-eigenvector form underflows for
    large orders.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if order == 1:
        return QuadratureRule(1, np.zeros(1), np.ones(1))
    off = np.sqrt(np.arange(1, order, dtype=float))
    nodes = eigh_tridiagonal(np.zeros(order), off, eigvals_only=True)
    nodes = 0.5 * (nodes - nodes[::-1])
    if order % 2 == 1:
        nodes[order // 2] = 0.0
    # Christoffel sum with running rescaling: H_q(x) overflows near the
    # extreme nodes for orders in the hundreds, but log(sum H_q^2) does not
    h_prev = np.ones_like(nodes)
    h_cur = nodes.copy()
    acc = h_prev**2 + h_cur**2
    logscale = np.zeros_like(nodes)
    rescale = 1e130
    for j in range(1, order - 1):
        h_cur, h_prev = (nodes * h_cur - math.sqrt(j) * h_prev) / math.sqrt(j + 1), h_cur
        acc += h_cur**2
        big = np.abs(h_cur) > rescale
        if np.any(big):
            h_prev[big] /= rescale
            h_cur[big] /= rescale
            acc[big] /= rescale**2
            logscale[big] += math.log(rescale)
    weights = np.exp(-(np.log(acc) + 2.0 * logscale))
    if np.any(weights == 0.0):
        raise ValueError("quadrature order too large for double-precision weights")
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    return QuadratureRule(order, nodes, weights)


def tensor_grid(rule: QuadratureRule, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product grid over R^n: points (m^n, n) and weights (m^n,).

    Cost is order^n, so the dimension is capped; higher-dimensional
    expectations go through the Monte Carlo estimators instead.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if n > MAX_TENSOR_GRID_DIM:
        raise ValueError(
            f"tensor-product quadrature limited to n <= {MAX_TENSOR_GRID_DIM}; "
            "use Monte Carlo estimators for higher dimensions"
        )
    grids = np.meshgrid(*([rule.nodes] * n), indexing="ij")
    points = np.stack([g.reshape(-1) for g in grids], axis=-1)
    w = rule.weights
    weights = w
    for _ in range(n - 1):
        weights = np.multiply.outer(weights, w)
    return points, weights.reshape(-1)


@dataclass(frozen=True)
class CorrelatedSampler:
    """Seeded source of rho-correlated standard Gaussian pairs.

    Pairs satisfy Y = rho*X + sqrt(1-rho^2)*Z with Z fresh, so each
    coordinate pair (X_i, Y_i) has correlation rho.  The stream is a pure
    function of (dimension, rho, seed, substream); ``substream`` produces
    an independent stream for parallel estimation.
    """

    dimension: int
    rho: float
    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if abs(self.rho) > 1.0:
            raise ValueError("|rho| must be <= 1")

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        )

    def pairs(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        if count < 1:
            raise ValueError("count must be >= 1")
        rng = self._rng()
        x = rng.standard_normal((count, self.dimension))
        z = rng.standard_normal((count, self.dimension))
        y = self.rho * x + np.sqrt(1.0 - self.rho**2) * z
        return x, y

    def pair_batches(self, count: int, batch: int = 1 << 19):
        """Yield (X, Y) blocks covering ``count`` pairs, deterministically."""
        rng = self._rng()
        sigma = np.sqrt(1.0 - self.rho**2)
        done = 0
        while done < count:
            m = min(batch, count - done)
            x = rng.standard_normal((m, self.dimension))
            z = rng.standard_normal((m, self.dimension))
            yield x, self.rho * x + sigma * z
            done += m

    def substream(self, index: int) -> "CorrelatedSampler":
        return CorrelatedSampler(self.dimension, self.rho, self.seed, index)


def sample_pairs(s: CorrelatedSampler, count: int):
    """Draw ``count`` i.i.d. correlated pairs from sampler ``s``."""
    return s.pairs(count)


def gaussian_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Shared construction for plain (uncorrelated) seeded generators."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
    )


def multisets(dim: int, order: int):
    """Sorted multi-indices (multisets over range(dim)) of a given size."""
    return itertools.combinations_with_replacement(range(dim), order)
