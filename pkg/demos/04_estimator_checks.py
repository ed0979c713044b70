# The one-point estimator J_i(x) (x_i - mu_i) / sigma^2 averages to the game mapping for quadratic costs.
import numpy as np
from scipy.stats import norm

from bandit_nash import games as G
from bandit_nash.diagnostics import estimate_decomposition, estimate_smoothed_gradient, out_of_set_frequency
from bandit_nash.sets import Box

game = G.cournot_duopoly()
mu = np.array([0.4, 0.4])
for i in range(2):
    est, se = estimate_smoothed_gradient(game, i, mu, sigma=0.3, n=1_000_000, seed=i)
    print(f"player {i}: estimate {est[0]:+.4f} +- {se[0]:.4f}   mapping {G.evaluate_mapping(game, mu)[i]:+.4f}")

# noise grows like 1/sigma, projection error vanishes far from the boundary
bil = G.bilinear_zero_sum()
for sigma in (0.2, 0.1, 0.05):
    d = estimate_decomposition(bil, (0.5, 0.5), sigma, n=200_000, seed=3)
    print(f"sigma={sigma:<5} estimator std {d.r_std:7.3f}  bias {d.q_norm:.4f}  projection term {d.p_mean_norm:.2e}")

box = Box([-1.0], [1.0])
for k in range(1, 6):
    f = out_of_set_frequency(box, (0.0,), 1.0 / k, n=1_000_000, seed=k)
    print(f"distance/sigma={k}: exits {f:.2e}   two-sided tail {2 * norm.cdf(-k):.2e}")
