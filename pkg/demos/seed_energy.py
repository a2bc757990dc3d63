"""Torus seed: where E drops below m * sigma as the quartic attraction D grows.

For each D the seed recipe picks (eps, lam); the grid evaluation of
E(u_{eps,lam}, 0) is compared with the energy floor m * sigma that any
state with N >= 0 obeys.

    python3 demos/seed_energy.py
"""
import numpy as np

from qball_vortex.grid import build_grid
from qball_vortex.potential import PotentialModel, quintic_well
from qball_vortex.seeds import choose_seed_params, estimate_D0, verify_lemma17

sigma = m = q = 1.0
l, tau = 1, 4.0

D0 = estimate_D0(sigma, m, q, l, tau)
print(f"recipe feasible from D0 = {D0:.3f}")

# one grid that covers the largest torus in the sweep, so margins are comparable
grid = build_grid(192, 128, 56.0, 16.0)
print(f"{'D':>8} {'eps':>8} {'lam':>8} {'E(seed)':>9} {'margin':>8} {'max u':>8} {'eps0':>8}")
for D in (30.0, 100.0, 300.0, 1000.0, 2000.0, 4000.0):
    seed = choose_seed_params(sigma, m, q, l, tau, D)
    model = quintic_well(D, m)
    rep = verify_lemma17(seed, sigma, q, l, model, grid=grid)
    print(f"{D:8.0f} {seed.eps:8.4f} {seed.lam:8.3f} {rep.E_value:9.4f} {rep.margin:8.3f} "
          f"{rep.numeric['max_u']:8.4f} {model.eps0:8.4f}")

# without attraction the seed sits above the floor
seed = choose_seed_params(sigma, m, q, l, tau, 2000.0)
flat = verify_lemma17(seed, sigma, q, l, PotentialModel(m), grid=grid)
print(f"N = 0: E(seed) = {flat.E_value:.4f} >= m sigma = {m * sigma:g}")

# the attraction only acts while the seed amplitude stays inside [0, eps0];
# near D0 the amplitude exceeds eps0 and the quintic term dominates
print("amplitude / eps0 at D = 30:",
      np.round(choose_seed_params(sigma, m, q, l, tau, 30.0).amplitude / quintic_well(30.0).eps0, 2))
