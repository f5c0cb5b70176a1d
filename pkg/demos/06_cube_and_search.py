"""Boolean voting rules, bounded-dimension stability search, and the
correlation-distillation decider.

On the cube, dictators are stable but influential; majority trades a
little stability for low influence.  Over Gaussian space, a grid search
over unit-variance degree-1 threshold partitions rediscovers the median
halfspace.  The decider certifies which (marginals, agreement) targets a
finite source can reach.
"""
import math

import numpy as np

from gstab.cube import cube_influences, cube_stability, make_voting_rule
from gstab.partitions import estimate_cell_stability
from gstab.product_space import JointDist, binary_symmetric
from gstab.search import SearchConfig, ncd_brute_oracle, ncd_decide, optimize_stability

print("= Voting rules at rho = 0.5 =")
for name, n in (("dictator", 5), ("majority", 5), ("plurality", 6)):
    k = 3 if name == "plurality" else 2
    f = make_voting_rule(name, n, k)
    print(
        f"  {name:<9} n={n}: stability {cube_stability(f, 0.5):.4f}, "
        f"max influence {cube_influences(f).max():.4f}"
    )

print("\n= Grid search over degree-1 PTFs, uniform 2-part target =")
cfg = SearchConfig(
    k=2, n0=1, d=1, t=math.log(2), target_mu=[0.5, 0.5], measure_tol=0.01,
    budget=500, mode="grid-cover", seed=11, samples=200_000,
    coeff_bound=2.0, step=0.25,
)
res = optimize_stability(cfg)
poly = res.best.polys[0]
cell = estimate_cell_stability(res.best, 1, cfg.t, 200_000, seed=1)
print(f"  evaluated {res.evaluations} candidates")
print(f"  best boundary at {-poly.constant / poly.chaos[1].array[0]:+.3f} (optimum: 0)")
print(f"  agreement {res.stability:.4f} (2/3), cell value {cell.value:.4f} (1/3)")

print("\n= Non-interactive correlation distillation =")
P = binary_symmetric(0.5)
dec = ncd_decide(P, [0.5, 0.5], [0.5, 0.5], kappa=0.75, delta=0.02)
print(f"  kappa=0.75: {'feasible' if dec.feasible else 'not found'} "
      f"achieving {dec.achieved:.4f} via {dec.detail}")
dec_hi = ncd_decide(P, [0.5, 0.5], [0.5, 0.5], kappa=0.9, delta=0.02)
print(f"  kappa=0.90: {'feasible' if dec_hi.feasible else 'not found'}; "
      f"best achieved {dec_hi.achieved:.4f}")
oracle = ncd_brute_oracle(P, [0.5, 0.5], [0.5, 0.5], k=2, n=2, delta=0.0)
print(f"  exhaustive two-symbol oracle: {oracle:.4f} (no gain over one symbol)")
indep = JointDist(np.full((2, 2), 0.25))
print(f"  independent source best agreement: "
      f"{ncd_brute_oracle(indep, [0.5, 0.5], [0.5, 0.5], 2, 2, 0.0):.4f}")
