"""
Threshold rounding of simplex-valued functions, measure-matching threshold
search, the smooth-then-round stability pipeline, and PTF extraction from
truncated Hermite expansions.

The rounding operator maps F: R^n -> Delta_k and a shift vector z to the
partition x -> argmax_j (F_j(x) - z_j) (ties to the smallest index, a
deterministic member of the allowed tie set).  Among all partitions with
the same cell measures, this rounding maximizes E<F, g>; applied to
F = P_t f with z chosen so the measures of f are preserved, the rounded
partition is at least as noise stable as f.  No closed form for the
measure-matching z exists, so it is found by a damped fixed-point
iteration on empirical measures with common random numbers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .chaos import PolyGauss
from .gauss import CorrelatedSampler, gaussian_rng
from .hermite import expand, ou_on_points
from .partitions import (
    Callback,
    MultiPTF,
    PartitionFn,
    Tabulated,
    exact_expansion,
    interval_form,
)

__all__ = [
    "ThresholdVector",
    "ThresholdSearch",
    "RoundingReport",
    "TruncationReport",
    "threshold_round",
    "round_values",
    "find_matching_threshold",
    "stability_of_rounding",
    "ptf_from_truncation",
    "smoothed_partition_values",
]


@dataclass(frozen=True)
class ThresholdVector:
    """Shift vector for rounding, normalized so the last entry is 0."""

    z: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=float))
        if not np.all(np.isfinite(z)):
            raise ValueError("threshold entries must be finite")
        object.__setattr__(self, "z", z - z[-1])
        self.z.setflags(write=False)

    @property
    def k(self) -> int:
        return self.z.shape[0]


def round_values(values: np.ndarray, z: ThresholdVector | np.ndarray) -> np.ndarray:
    """argmax_j (values[:, j] - z_j) + 1, ties to the smallest index."""
    zv = z.z if isinstance(z, ThresholdVector) else np.asarray(z, dtype=float)
    return np.argmax(values - zv, axis=1).astype(np.int64) + 1


def threshold_round(F, z: ThresholdVector, n: int, k: int, tol: float = 1e-9) -> PartitionFn:
    """Partition x -> argmax_j (F_j(x) - z_j) for simplex-valued F.

    F is a batched callable (N, n) -> (N, k); values are checked to lie in
    the simplex up to ``tol``.
    """
    if z.k != k:
        raise ValueError("threshold length must equal k")

    def labeler(X):
        vals = np.asarray(F(X), dtype=float)
        _check_simplex(vals, tol)
        return round_values(vals, z)

    return Callback(labeler, n, k)


def _check_simplex(vals: np.ndarray, tol: float) -> None:
    if vals.ndim != 2:
        raise ValueError("simplex-valued function must return (N, k) batches")
    if np.any(vals < -tol) or np.any(np.abs(vals.sum(axis=1) - 1.0) > max(tol, 1e-9)):
        raise ValueError("values leave the probability simplex beyond tolerance")


@dataclass(frozen=True)
class ThresholdSearch:
    """Outcome of the measure-matching fixed point."""

    z: ThresholdVector
    measures: np.ndarray
    l1_error: float
    iterations: int
    converged: bool


def _match_threshold_on_values(FX: np.ndarray, target: np.ndarray, tol: float, max_iter: int) -> ThresholdSearch:
    n_samples, k = FX.shape
    z = np.zeros(k)
    eta = 1.0
    best = None
    prev_err = math.inf
    for it in range(1, max_iter + 1):
        lab = round_values(FX, z)
        mu = np.bincount(lab, minlength=k + 1)[1:] / n_samples
        err = float(np.abs(mu - target).sum())
        if best is None or err < best[0]:
            best = (err, z.copy(), mu, it)
        if err <= tol:
            return ThresholdSearch(ThresholdVector(z), mu, err, it, True)
        if err > prev_err + 1e-12:
            eta *= 0.5
        z = z + eta * (mu - target)
        z -= z[-1]
        prev_err = err
    err, z, mu, it = best
    return ThresholdSearch(ThresholdVector(z), mu, err, it, False)


def find_matching_threshold(
    F,
    target,
    tol: float,
    max_iter: int,
    samples: int,
    seed: int,
    n: int | None = None,
    k: int | None = None,
) -> ThresholdSearch:
    """Find z so the rounded partition's measures match ``target`` in l1.

    Damped fixed point z_j <- z_j + eta (mu_j(z) - target_j) on one fixed
    sample set (common random numbers); eta halves whenever the error
    oscillates upward.  Non-convergence returns the best iterate with
    ``converged`` false rather than raising.
    """
    target = np.asarray(target, dtype=float)
    if abs(target.sum() - 1.0) > 1e-9:
        raise ValueError("target measures must sum to 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    k = k if k is not None else target.shape[0]
    if n is None:
        raise ValueError("pass the ambient dimension n")
    rng = gaussian_rng(seed)
    X = rng.standard_normal((samples, n))
    FX = np.asarray(F(X), dtype=float)
    _check_simplex(FX, 1e-6)
    return _match_threshold_on_values(FX, target, tol, max_iter)


def smoothed_partition_values(f: PartitionFn, t: float, X: np.ndarray, quad_order: int = 32) -> np.ndarray:
    """(P_t f)(x) for the simplex embedding of a partition, batched.

    Interval-structured partitions (slabs, halfspaces, 1-D PTFs) use the
    exact Gaussian-CDF form of the smoothing: the projection of the
    noised point onto the structure direction is normal with known
    location and scale.  Sign-table partitions factor per coordinate.
    Everything else integrates the defining formula on a tensor-product
    rule, which caps the dimension and converges slowly across cell
    boundaries; prefer the structured variants where accuracy matters.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return f.onehot(X)
    rho = math.exp(-t)
    scale = math.sqrt(1.0 - rho * rho)
    form = interval_form(f)
    if form is not None:
        return form.cell_probs(rho * (X @ form.direction), scale)
    if isinstance(f, Tabulated) and f.n <= 12:
        plus = ndtr(rho * X / scale)  # Pr[noised coordinate > 0]
        out = np.zeros((X.shape[0], f.k))
        for point in range(1 << f.n):
            term = np.ones(X.shape[0])
            for i in range(f.n):
                term = term * (plus[:, i] if (point >> i) & 1 else 1.0 - plus[:, i])
            out[:, f.cube.table[point] - 1] += term
        return out
    return ou_on_points(lambda P: f.onehot(P), t, X, quad_order=quad_order, k=f.k)


@dataclass
class RoundingReport:
    """Before/after stabilities for the smooth-then-round pipeline."""

    stab_f: float
    stab_g: float
    se_f: float
    se_g: float
    z: ThresholdVector
    measures_f: np.ndarray
    measures_g: np.ndarray
    measure_slack: float
    cross: float
    t: float
    samples: int
    seed: int
    converged: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "t": self.t,
                "z": self.z.z.tolist(),
                "measures_before": self.measures_f.tolist(),
                "measures_after": self.measures_g.tolist(),
                "stab_before": self.stab_f,
                "stab_after": self.stab_g,
                "se_before": self.se_f,
                "se_after": self.se_g,
                "cross": self.cross,
                "measure_slack": self.measure_slack,
                "samples": self.samples,
                "seed": self.seed,
                "converged": self.converged,
            }
        )


def stability_of_rounding(
    f: PartitionFn,
    t: float,
    tol: float = 0.01,
    samples: int = 200_000,
    seed: int = 0,
    quad_order: int = 32,
    max_iter: int = 400,
) -> RoundingReport:
    """Smooth f with P_t, round back with measure matching, compare.

    All quantities are estimated on one pair stream (X, Y), so the
    comparison stab_g >= stab_f - (measure slack + sampling error) runs
    under common random numbers.  The cross term E<g, P_t f> is reported
    for the Cauchy-Schwarz diagnostic.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    sampler = CorrelatedSampler(f.n, math.exp(-t), seed)
    X, Y = sampler.pairs(samples)
    lf_x, lf_y = f.labels(X), f.labels(Y)
    stab_f = float(np.mean(lf_x == lf_y))
    se_f = math.sqrt(stab_f * (1 - stab_f) / samples)
    target = np.bincount(lf_x, minlength=f.k + 1)[1:] / samples
    FX = smoothed_partition_values(f, t, X, quad_order)
    FY = smoothed_partition_values(f, t, Y, quad_order)
    search = _match_threshold_on_values(FX, target, tol, max_iter)
    gx = round_values(FX, search.z)
    gy = round_values(FY, search.z)
    stab_g = float(np.mean(gx == gy))
    se_g = math.sqrt(stab_g * (1 - stab_g) / samples)
    cross = float(np.mean(gx == lf_y))
    measures_g = np.bincount(gx, minlength=f.k + 1)[1:] / samples
    slack = float(np.abs(measures_g - target).sum())
    return RoundingReport(
        stab_f=stab_f,
        stab_g=stab_g,
        se_f=se_f,
        se_g=se_g,
        z=search.z,
        measures_f=target,
        measures_g=measures_g,
        measure_slack=slack,
        cross=cross,
        t=t,
        samples=samples,
        seed=seed,
        converged=search.converged,
    )


@dataclass
class TruncationReport:
    """Degree-d PTF extracted from a partition plus its quality numbers."""

    ptf: MultiPTF
    disagreement: float
    disagreement_se: float
    collision: float
    collision_se: float
    tail_mass: float
    bound: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "disagreement": self.disagreement,
                "disagreement_se": self.disagreement_se,
                "collision": self.collision,
                "collision_se": self.collision_se,
                "tail_mass": self.tail_mass,
                "bound": self.bound,
            }
        )


def ptf_from_truncation(
    h: PartitionFn,
    d: int,
    quad_order: int = 64,
    samples: int = 200_000,
    seed: int = 0,
) -> TruncationReport:
    """PTF from the degree-d truncation of the centered embedding of h.

    Expands h - (1/k) 1 coordinatewise to degree d, uses the k coordinate
    polynomials as the PTF, and measures how often the PTF disagrees with
    h and how often it collides.  Both rates are controlled by
    k^2 * W^{>d}[h], with the tail mass computed from the exact total
    embedding mass 1 - 1/k minus the stored coefficient mass.

    Partitions with interval or sign-table structure expand exactly;
    others go through tensor-product quadrature, whose coefficients for
    discontinuous integrands carry O(1/sqrt(order)) errors at cell
    boundaries in general position.
    """
    k = h.k
    try:
        emb = exact_expansion(h, d)
        zero = (0,) * h.n
        center = emb.coeffs.get(zero, np.zeros(k)) - 1.0 / k
        emb.coeffs[zero] = center
        if np.linalg.norm(center) < 1e-14:
            del emb.coeffs[zero]
    except ValueError:
        emb = expand(
            lambda X: h.onehot(X) - 1.0 / k, h.n, d, quad_order=quad_order, k=k
        )
    per_label: list[dict[tuple[int, ...], float]] = [dict() for _ in range(k)]
    for S, c in emb.coeffs.items():
        for j in range(k):
            if c[j] != 0.0:
                per_label[j][S] = float(c[j])
    polys = [PolyGauss.from_hermite_coeffs(h.n, coeffs) for coeffs in per_label]
    g = MultiPTF(polys)
    tail = (1.0 - 1.0 / k) - emb.norm2()
    rng = gaussian_rng(seed)
    Xs = rng.standard_normal((samples, h.n))
    vals = g.values(Xs)
    pos = vals > 0.0
    count = pos.sum(axis=1)
    glab = np.where(count == 1, pos.argmax(axis=1) + 1, 1)
    hlab = h.labels(Xs)
    dis = float(np.mean(glab != hlab))
    col = float(np.mean(count != 1))
    return TruncationReport(
        ptf=g,
        disagreement=dis,
        disagreement_se=math.sqrt(dis * (1 - dis) / samples),
        collision=col,
        collision_se=math.sqrt(col * (1 - col) / samples),
        tail_mass=max(tail, 0.0),
        bound=k**2 * max(tail, 0.0),
    )
