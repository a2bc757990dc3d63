"""How the dilation identities behave on a truncated domain.

A small positive-potential vortex (N = |s|^3 / 3) is solved on boxes of
growing size and resolution. Two effects show up in the residuals:

* the wall flux B = B_u + B_a - B_phi, which does not vanish under grid
  refinement, and
* the discretisation error, which does.

With N >= 0 there is no vortex in all of space, so the box minimiser is
held in by the walls: B is O(E) and dominated by B_u. Including B, the
residuals fall with the mesh width; without it they plateau at O(1) and
shrink only as the box grows. The vortex term entering with -3C (in
place of -C + G) leaves an O(1) residual for l != 0.

    python3 demos/identity_study.py
"""
from qball_vortex.diagnostics import pohozaev_report
from qball_vortex.minimize import SolverConfig, minimize_free
from qball_vortex.potential import PotentialModel
from qball_vortex.seeds import seed_field

model = PotentialModel(1.0, ((1.0 / 3.0, 3.0),))

print(f"{'grid':>9} {'box':>5} {'omega':>8} {'ne7':>10} {'no wall':>10} {'-3C form':>10} {'B/E':>9}")
for n, box in ((16, 6.0), (32, 6.0), (64, 6.0), (32, 9.0)):
    cfg = SolverConfig(n_r=n, n_z=2 * n, r_max=box, z_half=box, cg_preconditioner="jacobi")
    sol = minimize_free(cfg, model, seed_field(cfg.grid(), 0.3, 1.5))
    rep = pohozaev_report(sol)
    B = rep.terms["B_u"] + rep.terms["B_a"] - rep.terms["B_phi"]
    print(f"{n:4d}x{2 * n:<4d} {box:5.1f} {sol.omega:8.4f} {rep.residual_ne7:+10.2e} "
          f"{rep.whole_space['ne7']:+10.2e} {rep.literal['ne7']:+10.2e} "
          f"{B / rep.E_hat:9.2e}")
