"""Hermite expansions and the Ornstein-Uhlenbeck smoothing semigroup.

Expands the indicator of the negative half-line in the orthonormal Hermite
basis, reads off where its L2 mass sits, and checks the eigenvalue action
of the smoothing operator P_t.
"""
import numpy as np

from gstab.gauss import hermite_eval
from gstab.hermite import apply_ou, expand, ou_pointwise, spectral_weights

print("= Hermite mass of the half-line indicator =")
halfline = lambda X: (X[:, 0] <= 0).astype(float)
e = expand(halfline, n=1, max_degree=8, quad_order=300)
weights = spectral_weights(e, total_mass=0.5)  # E[f^2] = 1/2 exactly
for d, w in enumerate(weights.by_degree):
    bar = "#" * int(round(w * 120))
    print(f"  degree {d}:  {w:.6f}  {bar}")
print(f"  tail (>8):  {weights.tail:.6f}")
print(f"  check: W^1 = 1/(2 pi) = {1 / (2 * np.pi):.6f}")

print("\n= P_t acts diagonally: coefficients shrink by exp(-t |S|) =")
t = np.log(2.0)
et = apply_ou(e, t)
for S in [(1,), (3,), (5,)]:
    ratio = et.coeffs[S][0] / e.coeffs[S][0]
    print(f"  |S| = {S[0]}: ratio {ratio:.6f}  vs  2^-{S[0]} = {2.0 ** -S[0]:.6f}")

print("\n= Pointwise smoothing reproduces the eigenrelation =")
x = np.array([0.8])
for q in (1, 2, 3):
    f = lambda X, q=q: hermite_eval(q, X[:, 0])
    lhs = ou_pointwise(f, t, x, quad_order=12)[0]
    rhs = np.exp(-t * q) * hermite_eval(q, x[0])
    print(f"  P_t H_{q}(0.8) = {lhs:+.8f}   exp(-t q) H_{q}(0.8) = {rhs:+.8f}")

print("\n= Smoothing a partition keeps simplex values =")
val = ou_pointwise(halfline, 0.9, np.array([0.0]), quad_order=120)
print(f"  (P_t 1_halfline)(0) = {val[0]:.6f}  (symmetry gives exactly 1/2)")
