"""
How many samples do the bounds ask for
======================================

The lower bound gives a horizon below which no method can be confident.
The upper bound certifies the MLE once its conditions hold.
"""

from finset_id import builtin_paper_config
from finset_id.bounds import (
    INCLUSIVE,
    snr_trace,
    theorem1_check,
    theorem2_lhs,
    theorem2_minimal_T,
    theorem2_per_candidate,
    theorem2_threshold,
)

delta = 0.05
print("lower-bound threshold 2 log(1/(2.4 delta)) =", round(theorem2_threshold(delta), 4))

for e in (1, 2, 3):
    cfg = builtin_paper_config(e)
    per = theorem2_per_candidate(cfg.hset, cfg.noise, delta, 10_000)
    lb = theorem2_minimal_T(cfg.hset, cfg.noise, delta, 10_000)
    alt = theorem2_minimal_T(cfg.hset, cfg.noise, delta, 10_000, convention=INCLUSIVE)
    print(f"exp {e}: first crossing per candidate {per}, T_lb = {lb} (inclusive sum: {alt})")

# the excitation grows with t and saturates since A is stable
cfg = builtin_paper_config(1)
for t in (0, 1, 5, 50):
    print(f"t={t:3d}  Tr Sigma_z = {snr_trace(cfg.hset, cfg.noise, 1, t):.4f}")
print("thm2 lhs at T=192:", round(theorem2_lhs(cfg.hset, cfg.noise, 1, 192), 4))

# the upper bound is far from satisfied at these horizons
r = theorem1_check(cfg.hset, cfg.noise, delta, 1250)
print("T=1250 satisfied:", r.satisfied, "burn-in blocks:", r.burn_in_blocks,
      "best k:", r.best_k, "margins:", [round(c.margin, 3) for c in r.per_candidate])
