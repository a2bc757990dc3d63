"""Acceptance suite: one PASS/FAIL line per criterion (run with ``-s`` to see them).

Tolerances are pinned as module constants; INFO lines carry context that is
not part of a pass/fail decision.
"""
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_fields
from oracles import dense_phi
from qball_vortex.cli import load_config
from qball_vortex.diagnostics import nonexistence_certificate, pohozaev_report, certificate_for
from qball_vortex.elliptic import relative_residual, solve_phi
from qball_vortex.energy import ReducedEnergy, evaluate
from qball_vortex.grid import build_grid, shift_z
from qball_vortex.minimize import SolverConfig, minimize_constrained, minimize_free
from qball_vortex.potential import PotentialModel, quintic_well, verify_hypotheses
from qball_vortex.seeds import (
    bump_integrals,
    choose_seed_params,
    estimate_D0,
    exact_bump_integrals,
    seed_field,
    verify_lemma17,
)

# pinned tolerances
C1_REL, C1_ORDER, C1_SECONDS = 5e-3, 1.8, 5.0
C2_REL, C2_SECONDS, C2_PAIRS = 1e-5, 30.0, 20
C3_RES, C3_ERR, C3_BOUND = 1e-10, 1e-10, 1e-9
C4_SECONDS, C4_D = 60.0, 2000.0
C5_GRAD, C5_SECONDS, C5_RES, C5_BOUND = 1e-8, 600.0, 1e-3, 1e-9
C6_DRIFT, C6_MU_SPREAD = 1e-10, 1e-6
C7_FIELDS = 10
C8_SHIFT = 1e-12

CUBIC = PotentialModel(1.0, ((1.0 / 3.0, 3.0),))
VORTEX_CONFIG = "demos/configs/vortex_l1.ini"

# every minimisation in this module, for the descent-monotonicity check
RUNS = []


def report(n, ok, detail):
    print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")


def info(n, detail):
    print(f"[criterion {n}] INFO: {detail}")


def _record(sol, label):
    RUNS.append((label, sol.trace))
    return sol


# -- 1 -----------------------------------------------------------------------

def test_criterion_1_exact_integrals():
    t0 = time.perf_counter()
    exact = exact_bump_integrals(1.0, 4.0)
    keys = ("int_v", "int_v2", "grad_sq", "support_volume")
    sizes = (64, 128, 256, 512)
    errs = {k: [] for k in keys}
    for n in sizes:
        got = bump_integrals(build_grid(n, n, 4.0, 2.0), 1.0, 4.0)
        for k in keys:
            errs[k].append(abs(got[k] - exact[k]) / exact[k])
    elapsed = time.perf_counter() - t0
    h = 4.0 / np.asarray(sizes)
    orders = {k: float(np.polyfit(np.log(h), np.log(e), 1)[0]) for k, e in errs.items()}
    fine = {k: e[-1] for k, e in errs.items()}
    ok = (all(v < C1_REL for v in fine.values()) and all(v >= C1_ORDER for v in orders.values())
          and elapsed < C1_SECONDS)
    report(1, ok, f"512^2 rel errors {', '.join(f'{k}={v:.1e}' for k, v in fine.items())}; "
                  f"fitted orders {', '.join(f'{k}={v:.2f}' for k, v in orders.items())}; {elapsed:.2f}s")
    info(1, f"discrete Dirichlet energy of the sampled bump at 512^2: rel error "
            f"{abs(got['grad_sq_discrete'] - exact['grad_sq']) / exact['grad_sq']:.1e} (first order, kinked v)")
    assert ok


# -- 2 -----------------------------------------------------------------------

def test_criterion_2_gradients():
    t0 = time.perf_counter()
    g = build_grid(64, 64, 4.0, 2.0)
    model = PotentialModel(1.0, ((-1.0, 3.0), (0.5, 4.0)))
    rng = np.random.default_rng(2024)
    worst = 0.0
    for k in range(C2_PAIRS):
        l = k % 3
        q = 0.5 + rng.uniform()
        u, a = random_fields(g, rng, l, scale=rng.uniform(0.2, 1.0))
        fn = ReducedEnergy(g, rng.uniform(0.5, 2.0), q, l, model)
        gu, ga, _ = fn.gradient(u, a)
        du = rng.standard_normal(g.shape) * u
        da = 0.1 * rng.standard_normal(g.shape) * (g.R / g.r_max) ** 2
        h = 1e-4
        fd = (fn.energy(u + h * du, a + h * da) - fn.energy(u - h * du, a - h * da)) / (2 * h)
        an = g.inner(gu, du) + g.inner(ga, da)
        worst = max(worst, abs(an - fd) / abs(fd))
    elapsed = time.perf_counter() - t0
    ok = worst < C2_REL and elapsed < C2_SECONDS
    report(2, ok, f"{C2_PAIRS} pairs on 64x64, max rel error {worst:.2e}; {elapsed:.1f}s")
    assert ok


# -- 3 -----------------------------------------------------------------------

def test_criterion_3_phi_contract():
    g = build_grid(8, 8, 1.0, 1.0)
    rng = np.random.default_rng(3)
    worst_err = worst_res = worst_bound = 0.0
    for _ in range(20):
        q = rng.uniform(0.1, 5.0)
        u = rng.uniform(0.0, 3.0) * np.abs(rng.standard_normal(g.shape))
        phi = solve_phi(g, u, q)
        ref = dense_phi(g, u, q)
        worst_err = max(worst_err, np.linalg.norm(phi - ref) / np.linalg.norm(ref))
        worst_res = max(worst_res, relative_residual(g, u, q, phi))
    # the bound on larger random, seed and converged-like fields
    for n, q, scale in ((32, 1.0, 1.0), (64, 5.0, 8.0), (48, 0.2, 0.1), (64, 20.0, 3.0)):
        gg = build_grid(n, n, 3.0, 1.5)
        for _ in range(5):
            u, _a = random_fields(gg, rng, 1, scale=scale)
            phi = solve_phi(gg, u, q)
            worst_bound = max(worst_bound, -q * phi.min(), q * phi.max() - 1.0)
    gs = build_grid(96, 96, 4.0, 2.0)
    phi = solve_phi(gs, seed_field(gs, 0.5, 1.0), 1.0)
    worst_bound = max(worst_bound, -phi.min(), phi.max() - 1.0)
    ok = worst_err < C3_ERR and worst_res <= C3_RES and worst_bound <= C3_BOUND
    report(3, ok, f"8x8 dense oracle rel error {worst_err:.1e}, residual {worst_res:.1e}; "
                  f"worst bound excess {worst_bound:.1e} (allowed {C3_BOUND:g})")
    assert ok


# -- 4 -----------------------------------------------------------------------

def test_criterion_4_seed_energy():
    t0 = time.perf_counter()
    model = quintic_well(C4_D)
    hyp = verify_hypotheses(model)
    D0 = estimate_D0(1.0, 1.0, 1.0, 1, 4.0)
    seed = choose_seed_params(1.0, 1.0, 1.0, 1, 4.0, C4_D)
    rep = verify_lemma17(seed, 1.0, 1.0, 1, model)
    floor = verify_lemma17(seed, 1.0, 1.0, 1, PotentialModel(1.0))
    elapsed = time.perf_counter() - t0
    ok = (hyp.all_ok and C4_D > D0 and rep.ok and rep.margin > 0 and not floor.ok
          and floor.E_value >= 1.0 and elapsed < C4_SECONDS)
    report(4, ok, f"D = {C4_D:g} > D0 = {D0:.2f}, W1-W4 {hyp.all_ok}; E(seed) = {rep.E_value:.4f} < "
                  f"m sigma = 1 (margin {rep.margin:.3f}); N = 0 gives E = {floor.E_value:.4f} >= 1; "
                  f"{elapsed:.1f}s")
    info(4, f"seed eps = {seed.eps:.5f}, lam = {seed.lam:.4f}; chain total {rep.chain['total']:.3f} "
            f"(W4 term applicable: {rep.chain['w4_applicable']})")
    assert ok


# -- 5 -----------------------------------------------------------------------

def _vortex_case(q, l, n_r=128, n_z=256):
    rc = load_config(VORTEX_CONFIG)
    cfg = SolverConfig(**{**rc.solver.as_dict(), "q": q, "l": l, "n_r": n_r, "n_z": n_z})
    g = cfg.grid()
    seed = choose_seed_params(cfg.sigma, rc.model.m, q, l, rc.model.tau, rc.model.D)
    lem = verify_lemma17(seed, cfg.sigma, q, l, rc.model)
    t0 = time.perf_counter()
    sol = minimize_free(cfg, rc.model, seed_field(g, seed.eps, seed.lam), None, g)
    elapsed = time.perf_counter() - t0
    _record(sol, f"vortex q={q:g} l={l} {n_r}x{n_z}")
    return sol, lem, elapsed


def test_criterion_5_vortex_solve():
    lines, ok = [], True
    for q, l in ((1.0, 1), (1.0, 0), (0.0, 1)):
        sol, lem, elapsed = _vortex_case(q, l)
        fine, _, t_fine = _vortex_case(q, l, 256, 512)
        res = {k: abs(v) for k, v in pohozaev_report(sol).residuals().items() if k != "v1"}
        res_f = {k: abs(v) for k, v in pohozaev_report(fine).residuals().items() if k != "v1"}
        a_max = float(np.abs(sol.a).max())
        qphi = q * sol.phi_hat
        checks = {
            "converged": sol.converged and sol.grad_norm < C5_GRAD and elapsed < C5_SECONDS,
            "seed": lem.ok and sol.trace.energy[-1] <= sol.trace.energy[0] < 1.0,
            "omega": sol.omega > 0,
            "qphi": qphi.min() >= 0 and qphi.max() <= 1 + C5_BOUND,
            "a_iff": (a_max > 0) == (l != 0 and q > 0),
            "q0": q > 0 or (not np.any(sol.phi_hat) and not np.any(sol.a)),
            "M_m": a_max > 0 or sol.scalars["M_m"] == pytest.approx(-l * sol.config.sigma, rel=1e-9),
            "residuals": all(v <= C5_RES for v in res.values()),
            # ne4 is the weak matter equation, at the solver tolerance on both grids
            "refined": all(res_f[k] < res[k] for k in ("v3", "ne5", "ne7")) and res_f["ne4"] <= C5_RES,
        }
        case_ok = all(checks.values())
        ok &= case_ok
        bad = [k for k, v in checks.items() if not v]
        lines.append(f"q={q:g} l={l}: {sol.iterations} it / {elapsed:.0f}s, grad {sol.grad_norm:.1e}, "
                     f"omega {sol.omega:.4f}, max|a| {a_max:.2e}, M_m {sol.scalars['M_m']:.4f}, "
                     f"max res {max(res.values()):.1e} -> {max(res_f.values()):.1e} (256x512, {t_fine:.0f}s)"
                     + (f" failed {bad}" if bad else ""))
        rep = pohozaev_report(sol)
        info(5, f"q={q:g} l={l}: whole-space v3 {rep.whole_space['v3']:.1e}, "
                f"literal v3 {rep.literal['v3']:.1e}, E {sol.breakdown.E_total:.5f}")
    report(5, ok, "; ".join(lines))
    assert ok


# -- 6 -----------------------------------------------------------------------

def test_criterion_6_constrained_mode():
    cfg = SolverConfig(sigma=0.5, q=1.0, l=1, n_r=32, n_z=64, r_max=6.0, z_half=6.0,
                       mode="norm_constrained", grad_tol=1e-10, cg_preconditioner="jacobi")
    sol = _record(minimize_constrained(cfg, CUBIC, seed_field(cfg.grid(), 0.3, 1.5)), "constrained")
    drift = max(sol.trace.norm_drift)
    spread = float(np.ptp(sol.trace.mu[-10:]))
    nonneg = all(c >= 0 for c, _ in CUBIC.terms)
    ok = (sol.converged and drift <= C6_DRIFT and sol.omega**2 <= CUBIC.m**2 and nonneg
          and sol.mu > 0 and sol.effective_mass < CUBIC.m**2 and spread < C6_MU_SPREAD)
    report(6, ok, f"max |int u^2 - 1| {drift:.1e} over {len(sol.trace.norm_drift)} iterates; "
                  f"omega {sol.omega:.4f}, mu {sol.mu:.4f} > 0, effective mass {sol.effective_mass:.4f} < m^2; "
                  f"mu spread over last 10 iterates {spread:.1e}")
    assert ok


# -- 7 -----------------------------------------------------------------------

def test_criterion_7_certificates():
    rng = np.random.default_rng(7)
    g = build_grid(32, 32, 3.0, 1.5)
    totals = []
    for k in range(C7_FIELDS):
        l, q = k % 3, rng.uniform(0.2, 2.0)
        u, a = random_fields(g, rng, l, scale=rng.uniform(0.1, 2.0))
        fn = ReducedEnergy(g, rng.uniform(0.5, 2.0), q, l, CUBIC)
        s = fn.state(u, a)
        cert = nonexistence_certificate(CUBIC, g, u, a, s.phi_hat, s.omega, q, l)
        totals.append(cert.positivity_witness if cert.branch == "ii" else -np.inf)
    ii_ok = all(t > 0 for t in totals)

    # omega^2 < m^2 with N >= 0
    u, _ = random_fields(g, rng, 0)
    fn = ReducedEnergy(g, 0.01, 1.0, 0, CUBIC)
    s = fn.state(u, g.zeros())
    cert = nonexistence_certificate(CUBIC, g, u, s.a, s.phi_hat, s.omega, 1.0, 0)
    i_ok = s.omega < CUBIC.m and "i" in cert.branches

    cfg = SolverConfig(n_r=32, n_z=64, r_max=6.0, z_half=6.0, cg_preconditioner="jacobi")
    sol = _record(minimize_free(cfg, CUBIC, seed_field(cfg.grid(), 0.3, 1.5)), "certificate vortex")
    vc = certificate_for(sol)
    conv_ok = sol.converged and "i" not in vc.branches and sol.omega**2 >= CUBIC.m**2
    ok = ii_ok and i_ok and conv_ok
    report(7, ok, f"branch ii totals on {C7_FIELDS} fields: min {min(totals):.3e} > 0; "
                  f"branch i applies at omega = {s.omega:.3f} < m; converged N >= 0 vortex has "
                  f"omega = {sol.omega:.4f} >= m and branch i absent")
    assert ok


# -- 8 -----------------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), q=st.floats(0.0, 2.0), l=st.integers(0, 2))
def _abs_never_increases(seed, q, l):
    g = build_grid(16, 16, 2.0, 1.0)
    rng = np.random.default_rng(seed)
    model = PotentialModel(1.0, ((-0.5, 3.0), (1.0, 4.0)))
    u, a = random_fields(g, rng, l)
    u = u * np.sign(rng.standard_normal(g.shape))
    e_signed = evaluate(g, u, a, 1.0, q, l, model).E_total
    e_abs = evaluate(g, np.abs(u), a, 1.0, q, l, model).E_total
    assert e_abs <= e_signed + 1e-12 * abs(e_signed)


def test_criterion_8_invariances():
    # interior support, uncoupled (q = 0) so every field has compact support
    g = build_grid(48, 96, 4.0, 4.0)
    u = seed_field(g, 0.5, 1.0)
    shifts = []
    for l in (0, 1, 2):
        e0 = evaluate(g, u, g.zeros(), 1.0, 0.0, l, CUBIC).E_total
        for k in (-5, -1, 1, 7):
            e1 = evaluate(g, shift_z(u, k), g.zeros(), 1.0, 0.0, l, CUBIC).E_total
            shifts.append(abs(e1 - e0) / abs(e0))
    shift_ok = max(shifts) <= C8_SHIFT
    e0 = evaluate(g, u, g.zeros(), 1.0, 1.0, 1, CUBIC).E_total
    e1 = evaluate(g, shift_z(u, 7), g.zeros(), 1.0, 1.0, 1, CUBIC).E_total
    info(8, f"q = 1: Phi fills the box, z-shift by 7 cells changes E by {abs(e1 - e0) / e0:.1e}")

    try:
        _abs_never_increases()
        abs_ok = True
    except AssertionError:
        abs_ok = False

    if not RUNS:
        cfg = SolverConfig(n_r=32, n_z=64, r_max=6.0, z_half=6.0, cg_preconditioner="jacobi")
        _record(minimize_free(cfg, CUBIC, seed_field(cfg.grid(), 0.3, 1.5)), "small vortex")
    mono = {label: tr.monotone() for label, tr in RUNS}
    steps = sum(len(tr.energy) - 1 for _, tr in RUNS)
    ok = shift_ok and abs_ok and all(mono.values())
    report(8, ok, f"z-shift max rel change {max(shifts):.1e} (<= {C8_SHIFT:g}); |u| never increases E "
                  f"(50 hypothesis cases): {abs_ok}; descent monotone on {steps} accepted steps of "
                  f"{len(RUNS)} runs: {all(mono.values())}")
    assert ok
