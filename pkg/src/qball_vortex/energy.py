"""Reduced energy E = I + sigma^2 / (2K) of an axisymmetric vortex state and its gradients.

With A = a grad(theta) the pieces are

    I = 1/2 int |grad u|^2 + 1/2 int |grad a|^2 / r^2
        + 1/2 int (l - q a)^2 u^2 / r^2 + int W(u),
    K = int (1 - q Phi) u^2,

where Phi is the screened Poisson profile of u. K is evaluated in the
equivalent minimum form

    K = min_P { int (1 - q P)^2 u^2 + int |grad P|^2 },

attained at P = Phi. The minimum form is stationary in P, so the error of
an inexact inner solve enters K only quadratically, and its derivative in u
is simply 2 (1 - q Phi)^2 u with no adjoint solve.

Gradients are taken in the w-weighted inner product (the discrete L^2).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .elliptic import CgSettings, PhiSolver, phi_system
from .exceptions import ConfigurationError, EvaluationError


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet_u: float
    gauge: float
    covariant: float
    potential: float
    I_total: float
    K: float
    E_total: float
    omega: float
    sigma: float
    E_hat: float

    def as_dict(self):
        return asdict(self)


@dataclass
class State:
    """Everything computed along one evaluation, reused by the gradients."""
    u: np.ndarray
    a: np.ndarray
    phi_hat: np.ndarray  # Phi (the frequency-free profile); phi = omega * Phi
    breakdown: EnergyBreakdown

    @property
    def omega(self):
        return self.breakdown.omega

    @property
    def K(self):
        return self.breakdown.K

    @property
    def E(self):
        return self.breakdown.E_total

    @property
    def phi(self):
        return self.omega * self.phi_hat


class ReducedEnergy:
    """E restricted to a fixed grid, charge parameter, coupling, winding and potential."""

    def __init__(self, grid, sigma, q, l, model, cg=None):
        if not sigma > 0:
            raise ConfigurationError(f"sigma must be positive, got {sigma!r}")
        if q < 0:
            raise ConfigurationError(f"q must be nonnegative, got {q!r}")
        if int(l) != l:
            raise ConfigurationError(f"winding l must be an integer, got {l!r}")
        self.grid = grid
        self.sigma = float(sigma)
        self.q = float(q)
        self.l = int(l)
        self.model = model
        self.phi_solver = PhiSolver(grid, cg or CgSettings())

    @property
    def odd_axis(self):
        """Matter axis rule: u vanishes on the axis iff l != 0."""
        return self.l != 0

    def charge_functional(self, u, phi_hat):
        """K in minimum form at the trial profile ``phi_hat``."""
        g = self.grid
        base = float(np.sum(u * u * g.weights))
        if self.q == 0:
            return base
        A, b = phi_system(g, u, self.q)
        x = phi_hat.ravel()
        return base - (2.0 * float(b @ x) - float(x @ (A @ x)))

    def state(self, u, a):
        g = self.grid
        u = np.asarray(u, dtype=float)
        a = np.asarray(a, dtype=float)
        if u.shape != g.shape or a.shape != g.shape:
            raise ConfigurationError("fields must live on the energy's grid")
        phi_hat = self.phi_solver.solve(u, self.q)
        K = self.charge_functional(u, phi_hat)
        if not K > 0:
            raise EvaluationError(f"charge functional K = {K!r} is not positive")

        w = g.weights
        d_u = g.dirichlet_energy(u, self.odd_axis)
        gauge = g.gauge_energy(a)
        cov = 0.5 * float(np.sum((self.l - self.q * a) ** 2 * u * u * g.inv_r2 * w))
        pot = float(np.sum(self.model.W(u) * w))
        I = d_u + gauge + cov + pot
        omega = self.sigma / K
        E = I + self.sigma**2 / (2.0 * K)
        E_hat = I + 0.5 * omega**2 * K
        bd = EnergyBreakdown(d_u, gauge, cov, pot, I, K, E, omega, self.sigma, E_hat)
        return State(u, a, phi_hat, bd)

    def energy(self, u, a):
        return self.state(u, a).E

    def grad_u(self, st):
        g = self.grid
        u, a = st.u, st.a
        lap = g.laplacian(u, self.odd_axis)
        cov = (self.l - self.q * a) ** 2 * g.inv_r2 * u
        screen = (1.0 - self.q * st.phi_hat) ** 2 * u
        return -lap + cov + self.model.dW(u) - st.omega**2 * screen

    def grad_a(self, st):
        g = self.grid
        return -g.gauge_operator(st.a) - self.q * (self.l - self.q * st.a) * st.u**2 * g.inv_r2

    def gradient(self, u, a):
        st = self.state(u, a)
        return self.grad_u(st), self.grad_a(st), st

    def physical_scalars(self, st):
        """Charge, frequency, angular momentum (e3 coefficient) and energy."""
        g = self.grid
        w = g.weights
        rho = st.omega * (1.0 - self.q * st.phi_hat) * st.u**2
        sigma_direct = float(np.sum(rho * w))
        M_m = -float(np.sum((self.l - self.q * st.a) * rho * w))
        return {
            "Q": self.q * self.sigma,
            "omega": st.omega,
            "M_m": M_m,
            "E_hat": st.breakdown.E_hat,
            "sigma_direct": sigma_direct,
        }


def evaluate(grid, u, a, sigma, q, l, model, cg=None):
    return ReducedEnergy(grid, sigma, q, l, model, cg).state(u, a).breakdown


def grad_u(grid, u, a, sigma, q, l, model, cg=None):
    fn = ReducedEnergy(grid, sigma, q, l, model, cg)
    return fn.grad_u(fn.state(u, a))


def grad_a(grid, u, a, sigma, q, l, model, cg=None):
    fn = ReducedEnergy(grid, sigma, q, l, model, cg)
    return fn.grad_a(fn.state(u, a))


def physical_scalars(grid, u, a, sigma, q, l, model, cg=None):
    fn = ReducedEnergy(grid, sigma, q, l, model, cg)
    return fn.physical_scalars(fn.state(u, a))
