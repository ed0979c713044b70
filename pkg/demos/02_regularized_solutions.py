# On a game with a whole line of equilibria, regularization picks out the least-norm one.
import numpy as np

from bandit_nash import games as G
from bandit_nash.schedules import ScheduleSpec
from bandit_nash.vi import least_norm_affine, one_timescale_run, regularized_solution

B = np.array([[1.0, -1.0], [-1.0, 1.0]])
b = np.array([-1.0, 1.0])
game = G.affine_monotone(B, b)  # equilibria: a1 - a2 = 1
target = least_norm_affine(B, b)
print("least-norm equilibrium:", target)

for eps in (1e-1, 1e-2, 1e-3, 1e-4):
    y = regularized_solution(game, eps).point
    print(f"eps={eps:<7g} y={y.round(6)}  distance {np.linalg.norm(y - target):.2e}")

# the single-loop version tracks the regularized path while eps decays
sched = ScheduleSpec.aggressive()
tr = one_timescale_run(game, sched, np.array([3.0, 1.0]), 100_000, log_every=10_000)
for t, z, e in zip(tr.t, tr.points, tr.eps):
    print(f"t={t:>6}  z={z.round(4)}  eps_t={e:.3f}  distance {np.linalg.norm(z - target):.4f}")
# the remaining gap shrinks only as fast as eps_t = t^-0.1
