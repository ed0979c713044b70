# Payoff-only learning on a zero-sum bilinear game, with and without regularization.
import numpy as np

from bandit_nash import games as G
from bandit_nash.learner import feasible, run
from bandit_nash.schedules import ScheduleSpec

game = G.bilinear_zero_sum()  # J1 = a1 a2, J2 = -a1 a2 on [-1, 1]^2
sched = ScheduleSpec.reference()
mu0 = np.array([0.9, 0.9])
T = 50_000

for eps_off in (False, True):
    tr = run(game, sched, seed=1, T=T, log_every=5000, target=np.zeros(2), mu0=mu0, eps_off=eps_off)
    label = "no regularization" if eps_off else "regularized"
    print(label, "all actions feasible:", feasible(tr, game))
    for t, d in zip(tr.t, tr.dist):
        print(f"  t={t:>6}  |mu - 0| = {d:.4f}")

# with eps_t = 0 the means keep circling at roughly constant distance from the equilibrium
