"""
Exact Fourier/Walsh analysis of k-ary functions on the discrete cube
{-1,1}^n: noise stability under the rho-correlated-bits operator,
influences, and standard voting rules.

Points are indexed by bit pattern: bit i of the index is 1 when x_i = +1.
A function is a flat table of labels in 1..k over all 2^n points; analysis
runs on its simplex embedding, whose Walsh coefficients are computed by an
in-place butterfly.  With fhat the embedded coefficients,

    stability(rho)   = sum_S rho^{|S|} ||fhat(S)||^2
                     = Pr[f(x) = f(y)],  E[x_i y_i] = rho,
    influence_i      = sum_{S containing i} ||fhat(S)||^2.
"""
from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CubeFn",
    "walsh_transform",
    "cube_stability",
    "cube_stability_bruteforce",
    "cube_influences",
    "make_voting_rule",
]

MAX_CUBE_DIM = 20


@dataclass
class CubeFn:
    """Labels in 1..k over all 2^n cube points, bit-pattern indexed."""

    n: int
    k: int
    table: np.ndarray

    def __post_init__(self):
        if self.n > MAX_CUBE_DIM:
            raise ValueError(f"cube dimension limited to {MAX_CUBE_DIM}")
        self.table = np.asarray(self.table, dtype=np.int64)
        if self.table.shape != (1 << self.n,):
            raise ValueError("table length must be 2^n")
        if self.table.min() < 1 or self.table.max() > self.k:
            raise ValueError("labels must lie in 1..k")

    def points(self) -> np.ndarray:
        """All cube points as a (2^n, n) array of +-1."""
        idx = np.arange(1 << self.n)
        bits = (idx[:, None] >> np.arange(self.n)) & 1
        return 2.0 * bits - 1.0

    def embedding(self) -> np.ndarray:
        """(2^n, k) one-hot simplex embedding."""
        out = np.zeros((1 << self.n, self.k))
        out[np.arange(1 << self.n), self.table - 1] = 1.0
        return out

    def to_json(self) -> str:
        packed = base64.b64encode(self.table.astype(np.uint8).tobytes()).decode()
        return json.dumps({"n": self.n, "k": self.k, "labels": packed})

    @classmethod
    def from_json(cls, text: str) -> "CubeFn":
        doc = json.loads(text)
        table = np.frombuffer(
            base64.b64decode(doc["labels"]), dtype=np.uint8
        ).astype(np.int64)
        return cls(doc["n"], doc["k"], table)


def _butterfly(values: np.ndarray, n: int) -> np.ndarray:
    """Walsh-Hadamard transform along axis 0 (unnormalized butterfly)."""
    out = values.copy()
    rest = out.shape[1:]
    for stage in range(n):
        step = 1 << stage
        v = out.reshape(-1, 2, step, *rest)
        a = v[:, 0].copy()
        b = v[:, 1]
        v[:, 0] = a + b
        v[:, 1] = a - b
    return out


def walsh_transform(f: CubeFn) -> dict[int, np.ndarray]:
    """Walsh coefficients of the simplex embedding, keyed by subset mask.

    With the +-1 convention above, fhat(S) = 2^{-n} sum_x f(x) chi_S(x)
    where chi_S(x) = prod_{i in S} x_i.  Exact up to roundoff; Parseval
    holds with equality.
    """
    emb = f.embedding()
    coeffs = _butterfly(emb, f.n) / (1 << f.n)
    # butterfly output at S is sum_x f(x) (-1)^{popcount(S & x)}; with the
    # bit=1 <-> +1 convention chi_S carries an extra (-1)^{|S|}.
    out: dict[int, np.ndarray] = {}
    for S in range(1 << f.n):
        sign = -1.0 if bin(S).count("1") % 2 else 1.0
        out[S] = sign * coeffs[S]
    return out


def cube_stability(f: CubeFn, rho: float) -> float:
    """Spectral value of Pr[f(x) = f(y)] for rho-correlated bits."""
    if abs(rho) > 1.0:
        raise ValueError("|rho| must be <= 1")
    coeffs = walsh_transform(f)
    total = 0.0
    for S, c in coeffs.items():
        total += rho ** bin(S).count("1") * float(np.dot(c, c))
    return total


def cube_stability_bruteforce(f: CubeFn, rho: float) -> float:
    """Enumeration over all correlated pair outcomes (n <= 8 sensible).

    Each coordinate pair (x_i, y_i) has Pr[y_i = x_i] = (1+rho)/2
    independently; the double sum over all 4^n outcomes is exact.
    """
    same = (1.0 + rho) / 2.0
    npts = 1 << f.n
    idx = np.arange(npts)
    agree_bits = np.zeros((npts, npts), dtype=np.int64)
    for i in range(f.n):
        xb = (idx >> i) & 1
        agree_bits += xb[:, None] == xb[None, :]
    prob = same**agree_bits * (1.0 - same) ** (f.n - agree_bits)
    match = (f.table[:, None] == f.table[None, :]).astype(float)
    return float((prob * match).sum() / npts)


def cube_influences(f: CubeFn) -> np.ndarray:
    """Exact influences of the simplex embedding, via the spectrum."""
    coeffs = walsh_transform(f)
    out = np.zeros(f.n)
    for S, c in coeffs.items():
        mass = float(np.dot(c, c))
        for i in range(f.n):
            if S >> i & 1:
                out[i] += mass
    return out


def make_voting_rule(kind: str, n: int, k: int, breakpoints=None) -> CubeFn:
    """Named k-ary rules on n bits.

    dictator: label by the sign of coordinate 1.  majority (odd n, k=2):
    label by the sign of the bit sum.  plurality: recode disjoint groups
    of ceil(log2 k) bits into symbols mod k and take the most frequent
    (ties to the smallest).  slab-embedding: label by a slab arrangement
    applied to the normalized bit sum; ``breakpoints`` defaults to the
    equal-measure cuts.
    """
    npts = 1 << n
    idx = np.arange(npts)
    if kind == "dictator":
        if k != 2:
            raise ValueError("dictator rule needs k = 2")
        table = np.where(idx & 1, 1, 2)
    elif kind == "majority":
        if k != 2:
            raise ValueError("majority rule needs k = 2")
        if n % 2 == 0:
            raise ValueError("majority needs odd n")
        ones = np.zeros(npts, dtype=np.int64)
        for i in range(n):
            ones += (idx >> i) & 1
        table = np.where(2 * ones > n, 1, 2)
    elif kind == "plurality":
        group = max(1, math.ceil(math.log2(k)))
        if n < group:
            raise ValueError("not enough bits for one symbol")
        ngroups = n // group
        symbols = np.zeros((npts, ngroups), dtype=np.int64)
        for g in range(ngroups):
            val = np.zeros(npts, dtype=np.int64)
            for b in range(group):
                val |= ((idx >> (g * group + b)) & 1) << b
            symbols[:, g] = val % k
        counts = np.zeros((npts, k), dtype=np.int64)
        for g in range(ngroups):
            for lab in range(k):
                counts[:, lab] += symbols[:, g] == lab
        table = counts.argmax(axis=1) + 1
    elif kind == "slab-embedding":
        from scipy.special import ndtri

        if breakpoints is None:
            breakpoints = ndtri(np.arange(1, k) / k)
        breakpoints = np.asarray(breakpoints, dtype=float)
        ones = np.zeros(npts, dtype=np.int64)
        for i in range(n):
            ones += (idx >> i) & 1
        s = (2.0 * ones - n) / math.sqrt(n)
        table = np.searchsorted(breakpoints, s, side="left") + 1
    else:
        raise ValueError(f"unknown rule kind {kind!r}")
    return CubeFn(n, k, table)
