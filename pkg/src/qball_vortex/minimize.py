"""Preconditioned Barzilai-Borwein descent for the reduced vortex energy.

Both fields are stepped together. Search directions are Sobolev gradients
``d = -P^{-1} G`` (``G`` the plain gradient) with

    P_u = S_u + diag((l^2 / r^2 + m^2) w),   P_a = S_a + diag(q^2 u_0^2 w / r^2),

factored once. Steps start from the BB1 length in the P metric and are
accepted by Armijo backtracking, so E never increases. After every step
u is replaced by |u|, which cannot increase the discrete energy.

In ``norm_constrained`` mode the u-direction is projected P-orthogonally
onto the tangent space of {int u^2 = norm} and u is rescaled after the step.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elliptic import CgSettings
from .energy import ReducedEnergy
from .exceptions import ConfigurationError, EvaluationError, SolverError
from .grid import build_grid, shift_z

log = logging.getLogger(__name__)

MODES = ("charge_fixed", "norm_constrained")


@dataclass(frozen=True)
class SolverConfig:
    sigma: float = 1.0
    q: float = 1.0
    l: int = 1
    n_r: int = 128
    n_z: int = 256
    r_max: float = 40.0
    z_half: float = 20.0
    mode: str = "charge_fixed"
    grad_tol: float = 1e-8
    max_outer: int = 20000
    step0: float = 1.0
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-14
    max_step: float = 1e6
    recenter_every: int = 0
    norm: float = 1.0
    cg_tol: float = 1e-11
    cg_preconditioner: str = "lu"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.grad_tol > 0:
            raise ConfigurationError("grad_tol must be positive")
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")
        if self.q < 0:
            raise ConfigurationError("q must be nonnegative")
        if int(self.l) != self.l:
            raise ConfigurationError("l must be an integer")
        if self.max_outer < 0:
            raise ConfigurationError("max_outer must be nonnegative")
        if not (0 < self.armijo < 1 and 0 < self.backtrack < 1):
            raise ConfigurationError("armijo and backtrack must lie in (0, 1)")
        if not self.norm > 0:
            raise ConfigurationError("norm must be positive")

    def grid(self):
        return build_grid(self.n_r, self.n_z, self.r_max, self.z_half)

    def cg(self):
        return CgSettings(tol=self.cg_tol, preconditioner=self.cg_preconditioner)

    def as_dict(self):
        return asdict(self)


@dataclass
class Trace:
    energy: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    step: list = field(default_factory=list)
    mu: list = field(default_factory=list)
    norm_drift: list = field(default_factory=list)
    K: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    backtracks: int = 0
    recenters: int = 0

    def monotone(self):
        e = np.asarray(self.energy)
        return bool(np.all(np.diff(e) <= 0))

    def summary(self):
        return {
            "iterations": max(len(self.energy) - 1, 0),
            "E_first": self.energy[0] if self.energy else None,
            "E_last": self.energy[-1] if self.energy else None,
            "grad_last": self.grad_norm[-1] if self.grad_norm else None,
            "monotone": self.monotone(),
            "backtracks": self.backtracks,
            "recenters": self.recenters,
        }


@dataclass
class VortexSolution:
    grid: object
    config: SolverConfig
    model: object
    u: np.ndarray
    a: np.ndarray
    phi_hat: np.ndarray
    omega: float
    breakdown: object
    mu: float | None
    effective_mass: float | None
    scalars: dict
    residuals: dict
    iterations: int
    converged: bool
    grad_norm: float
    trace: Trace
    bounds: dict

    @property
    def phi(self):
        return self.omega * self.phi_hat


def _sobolev_factors(fn, u0):
    g = fn.grid
    w = g.weights.ravel()
    m2 = fn.model.m ** 2
    S_u = g.form(1, fn.odd_axis).matrix
    P_u = S_u + sp.diags((fn.l**2 * g.inv_r2.ravel() + m2) * w)
    S_a = g.form(-1, True).matrix
    P_a = S_a + sp.diags(fn.q**2 * (u0**2 * g.inv_r2).ravel() * w)
    return spla.splu(P_u.tocsc()), spla.splu(P_a.tocsc()), P_u.tocsr(), P_a.tocsr()


def recenter_z(grid, u, a):
    """Shift both fields by whole cells so the centroid of u^2 is within a cell of z = 0."""
    mass = float(np.sum(u * u * grid.weights))
    if mass == 0:
        return u, a, 0
    zc = float(np.sum(grid.Z * u * u * grid.weights)) / mass
    cells = -int(np.rint(zc / grid.dz))
    if cells == 0:
        return u, a, 0
    return shift_z(u, cells), shift_z(a, cells), cells


class _Descent:
    def __init__(self, config, model, seed_u, seed_a, grid=None):
        self.cfg = config
        self.grid = grid if grid is not None else config.grid()
        g = self.grid
        seed_u = np.abs(np.asarray(seed_u, dtype=float))
        seed_a = np.zeros(g.shape) if seed_a is None else np.asarray(seed_a, dtype=float)
        if seed_u.shape != g.shape or seed_a.shape != g.shape:
            raise ConfigurationError("seed fields must match the grid shape")
        if not np.any(seed_u):
            raise ConfigurationError("seed u must be nonzero")
        self.constrained = config.mode == "norm_constrained"
        if self.constrained:
            seed_u = self._normalize(seed_u)
        self.fn = ReducedEnergy(g, config.sigma, config.q, config.l, model, config.cg())
        self.lu_u, self.lu_a, self.P_u, self.P_a = _sobolev_factors(self.fn, seed_u)
        self.u, self.a = seed_u, seed_a
        self.couple_a = config.q != 0

    def _normalize(self, u):
        n2 = float(np.sum(u * u * self.grid.weights))
        return u * np.sqrt(self.cfg.norm / n2)

    def evaluate(self, u, a):
        gu, ga, st = self.fn.gradient(u, a)
        mu = None
        if self.constrained:
            mu = float(np.sum(gu * u * self.grid.weights)) / float(np.sum(u * u * self.grid.weights))
            gu = gu - mu * u
        if not self.couple_a:
            ga = np.zeros_like(ga)
        return st, gu, ga, mu

    def grad_norm(self, gu, ga):
        w = self.grid.weights
        return float(np.sqrt(np.sum((gu * gu + ga * ga) * w)))

    def direction(self, gu, ga, u):
        w = self.grid.weights
        shape = self.grid.shape
        du = -self.lu_u.solve((gu * w).ravel()).reshape(shape)
        if self.constrained:
            # P-orthogonal projection onto {<d, u>_w = 0}
            pu = self.lu_u.solve((u * w).ravel()).reshape(shape)
            du = du - float(np.sum(du * u * w)) / float(np.sum(pu * u * w)) * pu
        da = -self.lu_a.solve((ga * w).ravel()).reshape(shape) if self.couple_a else np.zeros(shape)
        return du, da

    def metric(self, su, sa):
        x = su.ravel()
        y = sa.ravel()
        return float(x @ (self.P_u @ x)) + float(y @ (self.P_a @ y))

    def trial(self, u, a, du, da, t):
        un = np.abs(u + t * du)
        if self.constrained:
            un = self._normalize(un)
        return un, a + t * da


def _bounds(E_seed, m, sigma):
    return {"a1": sigma**2 / (2.0 * E_seed), "a2": 2.0 * E_seed / m**2}


def _run(config, model, seed_u, seed_a, grid=None, callback=None):
    from .diagnostics import field_equation_residuals

    cfg = config
    run = _Descent(cfg, model, seed_u, seed_a, grid)
    g = run.grid
    w = g.weights
    trace = Trace()
    u, a = run.u, run.a
    st, gu, ga, mu = run.evaluate(u, a)
    E = st.E
    bounds = _bounds(E, model.m, cfg.sigma)
    gn = run.grad_norm(gu, ga)
    _record(trace, st, gn, 0.0, mu, g, u, cfg)

    t_bb = cfg.step0
    prev = None
    converged = gn < cfg.grad_tol
    it = 0
    while not converged and it < cfg.max_outer:
        it += 1
        du, da = run.direction(gu, ga, u)
        slope = float(np.sum((gu * du + ga * da) * w))
        if slope >= 0:
            raise SolverError("search direction is not a descent direction",
                              iteration=it, slope=slope, trace=trace.summary())
        t = min(max(t_bb, cfg.min_step), cfg.max_step)
        while True:
            try:
                un, an = run.trial(u, a, du, da, t)
                st_n, gu_n, ga_n, mu_n = run.evaluate(un, an)
                ok = st_n.E <= E + cfg.armijo * t * slope
            except (EvaluationError, SolverError):
                ok = False
            if ok:
                break
            trace.backtracks += 1
            t *= cfg.backtrack
            if t < cfg.min_step:
                raise SolverError("line search step underflow", iteration=it, energy=E,
                                  grad_norm=gn, trace=trace.summary())

        su, sa = un - u, an - a
        yu, ya = (gu_n - gu) * w, (ga_n - ga) * w
        sy = float(np.sum(su * yu + sa * ya))
        sPs = run.metric(su, sa)
        t_bb = sPs / sy if sy > 0 else min(2.0 * t, cfg.max_step)

        u, a, st, gu, ga, mu, E = un, an, st_n, gu_n, ga_n, mu_n, st_n.E
        gn = run.grad_norm(gu, ga)
        _record(trace, st, gn, t, mu, g, u, cfg)
        if callback is not None:
            callback(it, st, gn)

        if cfg.recenter_every and it % cfg.recenter_every == 0:
            u2, a2, cells = recenter_z(g, u, a)
            if cells:
                st2, gu2, ga2, mu2 = run.evaluate(u2, a2)
                if st2.E <= E:
                    u, a, st, gu, ga, mu, E = u2, a2, st2, gu2, ga2, mu2, st2.E
                    gn = run.grad_norm(gu, ga)
                    trace.recenters += 1
                    t_bb = cfg.step0
                    _record(trace, st, gn, 0.0, mu, g, u, cfg)
        converged = gn < cfg.grad_tol
        if it % 500 == 0:
            log.info("iter %d  E=%.15g  |g|=%.3e  step=%.3e", it, E, gn, t)

    scalars = run.fn.physical_scalars(st)
    effective_mass = None if mu is None else model.m**2 - mu
    sol = VortexSolution(
        grid=g, config=cfg, model=model, u=u, a=a, phi_hat=st.phi_hat, omega=st.omega,
        breakdown=st.breakdown, mu=mu, effective_mass=effective_mass, scalars=scalars,
        residuals={}, iterations=it, converged=converged, grad_norm=gn, trace=trace,
        bounds=bounds,
    )
    sol.residuals = field_equation_residuals(sol)
    return sol


def _record(trace, st, gn, t, mu, g, u, cfg):
    trace.energy.append(st.E)
    trace.grad_norm.append(gn)
    trace.step.append(t)
    trace.K.append(st.K)
    l2 = float(np.sum(u * u * g.weights))
    trace.l2.append(l2)
    if mu is not None:
        trace.mu.append(mu)
        trace.norm_drift.append(abs(l2 - cfg.norm))


def minimize_free(config, model, seed_u, seed_a=None, grid=None, callback=None):
    if config.mode != "charge_fixed":
        config = SolverConfig(**{**config.as_dict(), "mode": "charge_fixed"})
    return _run(config, model, seed_u, seed_a, grid, callback)


def minimize_constrained(config, model, seed_u, seed_a=None, grid=None, callback=None):
    if config.mode != "norm_constrained":
        config = SolverConfig(**{**config.as_dict(), "mode": "norm_constrained"})
    return _run(config, model, seed_u, seed_a, grid, callback)


def minimize(config, model, seed_u, seed_a=None, grid=None, callback=None):
    return _run(config, model, seed_u, seed_a, grid, callback)


def bounds_report(sol):
    """Per-iterate bands a1 <= K <= a2 and a1 <= int u^2 <= a2 along the trace.

    The lower bands follow from I >= 0 (W >= 0) alone; the upper bands need
    int W >= m^2/2 int u^2, i.e. N >= 0, and are only informative then.
    """
    a1, a2 = sol.bounds["a1"], sol.bounds["a2"]
    K = np.asarray(sol.trace.K)
    l2 = np.asarray(sol.trace.l2)
    return {
        "a1": a1,
        "a2": a2,
        "lower_ok": bool(np.all(K >= a1) and np.all(l2 >= a1)),
        "upper_ok": bool(np.all(K <= a2) and np.all(l2 <= a2)),
    }
