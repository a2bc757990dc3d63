"""Field-equation residuals, scaling (Pohozaev-type) identities and nonexistence certificates.

Notation, with phi = omega * Phi and all integrals over R^3:

    U  = int |grad u|^2          G  = int |grad a|^2 / r^2
    C  = int (l - q a)^2 u^2 / r^2
    s  = int u^2                 Om = m^2 - omega^2
    P1 = int phi u^2             P2 = int phi^2 u^2
    N0 = int N(u)                N1 = int N'(u) u

Dilating x -> x / lam at fixed amplitudes scales U, C and int |grad phi|^2
by lam, G by 1 / lam and the potential terms by lam^3. Stationarity of the
standing-wave action under this family gives, in "0 = RHS" form,

    v1 : 0 = -U + int|grad phi|^2 - 3 Om s - 3q int (2 omega - q phi) phi u^2 - C + G - 6 N0
    v3 : 0 = -U - int [3 Om + 5 q omega phi - 2 q^2 phi^2] u^2 - C + G - 6 N0
    ne4: 0 = U + C + m^2 s - int (omega - q phi)^2 u^2 + N1
    ne5: 0 = -2 Om s - 3 q omega P1 + q^2 P2 + G + N1 - 6 N0          (= v3 + ne4)
    ne7: 0 = 2 U + q int u^2 phi (omega - q phi) + 2 C + G + 3 N1 - 6 N0  (= v3 + 3 ne4)

v3 follows from v1 via int |grad phi|^2 = q int (omega - q phi) phi u^2.

On the truncated domain with zero Dirichlet data the dilation does not
preserve the domain, and v1, v3, ne5, ne7 acquire the boundary flux

    B = B_u + B_a - B_phi,    B_f = oint c_f (d_n f)^2 (x . n) dS,

(c = 1 for u and phi, 1 / r^2 for a) on their right-hand side. The main
residuals subtract it; ``whole_space`` repeats them without it. For the
slowly decaying phi, B_phi ~ Q^2 / (4 pi R) on a domain of size R.
The ``*_literal`` variants carry -3C in place of the magnetic/vortex pair
(-C + G) in v1/v3, i.e. they treat the vortex term like a potential; they
coincide with the forms above exactly when l = 0 and a = 0.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .elliptic import relative_residual
from .potential import sample_points, sign_condition


def field_equation_residuals(sol):
    """Weighted L^2 norms of the discrete weak-form residuals.

    ``matter``  : grad_u E (minus mu u in the constrained mode)
    ``gauss``   : relative residual of the screened Poisson solve
    ``ampere``  : grad_a E
    """
    from .energy import ReducedEnergy

    g = sol.grid
    cfg = sol.config
    if not np.any(sol.u):
        return {"matter": 0.0, "gauss": 0.0, "ampere": float(g.norm(g.gauge_operator(sol.a)))}
    fn = ReducedEnergy(g, cfg.sigma, cfg.q, cfg.l, sol.model, cfg.cg())
    st = fn.state(sol.u, sol.a)
    gu, ga = fn.grad_u(st), fn.grad_a(st)
    if sol.mu is not None:
        gu = gu - sol.mu * sol.u
    gauss = relative_residual(g, sol.u, cfg.q, st.phi_hat) if cfg.q > 0 else 0.0
    return {"matter": g.norm(gu), "gauss": gauss, "ampere": g.norm(ga)}


def identity_terms(grid, u, a, phi_hat, omega, q, l, model):
    """All integrals entering the identities, computed by quadrature."""
    w = grid.weights
    odd = l != 0
    phi = omega * phi_hat
    u2w = u * u * w
    return {
        "U": 2.0 * grid.dirichlet_energy(u, odd),
        "G": 2.0 * grid.gauge_energy(a),
        "C": float(np.sum((l - q * a) ** 2 * grid.inv_r2 * u2w)),
        "s": float(np.sum(u2w)),
        "P1": float(np.sum(phi * u2w)),
        "P2": float(np.sum(phi * phi * u2w)),
        "N0": float(np.sum(model.N(u) * w)),
        "N1": float(np.sum(model.dN(u) * u * w)),
        "grad_phi_sq": omega**2 * 2.0 * grid.dirichlet_energy(phi_hat, False),
        "B_u": grid.boundary_flux(u, 1),
        "B_a": grid.boundary_flux(a, -1),
        "B_phi": omega**2 * grid.boundary_flux(phi_hat, 1),
        "omega": float(omega),
        "q": float(q),
        "m": float(model.m),
    }


def identity_tables(t, boundary=True):
    """Term-by-term tables of every identity (sum of each table = residual)."""
    U, G, C, s = t["U"], t["G"], t["C"], t["s"]
    P1, P2, N0, N1 = t["P1"], t["P2"], t["N0"], t["N1"]
    om, q, m = t["omega"], t["q"], t["m"]
    Om = m * m - om * om
    mixed = 6.0 * q * om * P1 - 3.0 * q * q * P2  # 3q int (2 omega - q phi) phi u^2
    tables = {
        "v1": {"grad_u": -U, "grad_phi": t["grad_phi_sq"], "gap": -3.0 * Om * s,
               "mixed": -mixed, "vortex": -C, "magnetic": G, "N": -6.0 * N0},
        "v3": {"grad_u": -U, "gap": -3.0 * Om * s, "electric": -5.0 * q * om * P1 + 2.0 * q * q * P2,
               "vortex": -C, "magnetic": G, "N": -6.0 * N0},
        "ne4": {"grad_u": U, "vortex": C, "mass": m * m * s,
                "electric": -(om * om * s - 2.0 * q * om * P1 + q * q * P2), "N": N1},
        "ne5": {"gap": -2.0 * Om * s, "electric": -3.0 * q * om * P1 + q * q * P2,
                "magnetic": G, "N": N1 - 6.0 * N0},
        "ne7": {"grad_u": 2.0 * U, "electric": q * om * P1 - q * q * P2, "vortex": 2.0 * C,
                "magnetic": G, "N": 3.0 * N1 - 6.0 * N0},
    }
    if boundary:
        flux = t["B_phi"] - t["B_u"] - t["B_a"]
        for k in ("v1", "v3", "ne5", "ne7"):
            tables[k]["boundary"] = flux
    lit = {
        "v1": {**{k: v for k, v in tables["v1"].items() if k not in ("vortex", "magnetic")},
               "vortex": -3.0 * C},
        "v3": {**{k: v for k, v in tables["v3"].items() if k not in ("vortex", "magnetic")},
               "vortex": -3.0 * C},
        "ne5": {**{k: v for k, v in tables["ne5"].items() if k != "magnetic"}, "vortex": -2.0 * C},
        "ne7": {k: v for k, v in tables["ne7"].items() if k not in ("vortex", "magnetic")},
    }
    for table in lit.values():
        table.pop("boundary", None)
    return tables, lit


@dataclass
class IdentityReport:
    residual_v1: float
    residual_v3: float
    residual_ne4: float
    residual_ne5: float
    residual_ne7: float
    Omega: float
    E_hat: float
    literal: dict = field(default_factory=dict)
    whole_space: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    terms: dict = field(default_factory=dict)

    def residuals(self):
        return {k: getattr(self, "residual_" + k) for k in ("v1", "v3", "ne4", "ne5", "ne7")}

    def as_dict(self):
        return asdict(self)


def _sum(table):
    return float(sum(table.values()))


def identity_report(grid, u, a, phi_hat, omega, q, l, model, E_hat):
    t = identity_terms(grid, u, a, phi_hat, omega, q, l, model)
    tables, lit = identity_tables(t)
    scale = E_hat if E_hat > 0 else 1.0
    r = {k: _sum(v) / scale for k, v in tables.items()}
    literal = {k: _sum(v) / scale for k, v in lit.items()}
    literal["ne4"] = r["ne4"]
    bare, _ = identity_tables(t, boundary=False)
    whole = {k: _sum(v) / scale for k, v in bare.items()}
    return IdentityReport(r["v1"], r["v3"], r["ne4"], r["ne5"], r["ne7"],
                          model.m**2 - omega**2, E_hat, literal, whole, tables, t)


def pohozaev_report(sol, model=None):
    model = sol.model if model is None else model
    cfg = sol.config
    return identity_report(sol.grid, sol.u, sol.a, sol.phi_hat, sol.omega, cfg.q, cfg.l,
                           model, sol.breakdown.E_hat)


@dataclass
class Certificate:
    """Verdict of the nonexistence test.

    ``branches`` maps every branch whose hypotheses hold to its sign split;
    ``branch`` names the preferred one ("ii" when available, since its split
    is unconditional). The top-level fields mirror the preferred branch.
    """
    applies: bool
    branch: str | None
    positivity_witness: float
    terms: dict
    certified: bool
    contradiction: bool
    reason: str = ""
    branches: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def nonexistence_certificate(model, grid, u, a, phi_hat, omega, q, l, samples=4096):
    """Check the hypotheses of the nonexistence branches and evaluate their sign splits.

    Branch "ii"  (N's >= 2N): the ne7 terms are all nonnegative, so a
    positive total is a contradiction for any nontrivial exact solution.
    Branch "i"   (omega^2 < m^2 with N >= 0, or N's <= 6N): the negated v3
    (resp. ne5) terms are nonnegative except the magnetic term -G, so the
    split is only certified when a = 0 (``certified``).
    Hypotheses on N are decided from the coefficients when possible,
    otherwise by sampling on [0, max |u|].
    """
    t = identity_terms(grid, u, a, phi_hat, omega, q, l, model)
    tables, _ = identity_tables(t, boundary=False)
    s_top = float(np.max(np.abs(u))) if np.any(u) else 1.0
    s_vals = sample_points(s_top, samples)
    nontrivial = bool(np.any(u))
    found = {}

    if sign_condition(model.shifted_moment(2.0), s_vals, +1):
        terms = dict(tables["ne7"])
        total = _sum(terms)
        ok = all(v >= 0 for v in terms.values())
        found["ii"] = {"terms": terms, "total": total, "certified": ok,
                       "reason": "N'(s)s >= 2N(s)"}

    if model.m**2 - omega**2 > 0:
        terms = None
        if sign_condition(model.terms, s_vals, +1) or bool(np.all(model.N(s_vals) >= 0)):
            terms = {k: -v for k, v in tables["v3"].items()}
            why = "omega^2 < m^2 and N >= 0"
        elif sign_condition(model.shifted_moment(6.0), s_vals, -1):
            terms = {k: -v for k, v in tables["ne5"].items()}
            why = "omega^2 < m^2 and N'(s)s <= 6N(s)"
        if terms is not None:
            found["i"] = {"terms": terms, "total": _sum(terms), "certified": t["G"] == 0.0,
                          "reason": why}

    if not found:
        return Certificate(False, None, 0.0, {}, False, False, "no branch hypotheses hold")
    key = "ii" if "ii" in found else "i"
    b = found[key]
    return Certificate(True, key, b["total"], b["terms"], b["certified"],
                       nontrivial and b["certified"] and b["total"] > 0, b["reason"], found)


def certificate_for(sol):
    cfg = sol.config
    return nonexistence_certificate(sol.model, sol.grid, sol.u, sol.a, sol.phi_hat,
                                    sol.omega, cfg.q, cfg.l)
