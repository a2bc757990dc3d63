"""Screened Poisson solve for the electrostatic profile.

Given u, Phi solves

    -(Phi_rr + Phi_r / r + Phi_zz) + q^2 u^2 Phi = q u^2

with an even axis rule and homogeneous Dirichlet data on the outer boundary.
In plain (unweighted) variables the system is ``A Phi = b`` with
``A = S + diag(q^2 u^2 w)`` and ``b = q u^2 w``, ``S`` the Hessian of the
discrete Dirichlet form. ``A`` is a symmetric M-matrix, so the discrete
solution obeys ``0 <= Phi <= 1/q`` exactly and CG applies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import ConfigurationError, SolverError

BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class CgSettings:
    tol: float = 1e-11
    max_iter: int = 20000
    warm_start: bool = True
    # "jacobi" or "lu"; "lu" factors the operator at a reference u and reuses it
    preconditioner: str = "jacobi"
    refactor_after: int = 25

    def __post_init__(self):
        if not (0 < self.tol < 1):
            raise ConfigurationError(f"CG tolerance must lie in (0, 1), got {self.tol!r}")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if self.preconditioner not in ("jacobi", "lu"):
            raise ConfigurationError(f"unknown preconditioner {self.preconditioner!r}")


def phi_system(grid, u, q):
    """Sparse matrix and right-hand side of the plain screened Poisson system."""
    u2w = (u * u * grid.weights).ravel()
    A = grid.form(1, False).matrix + sp.diags(q * q * u2w)
    return A.tocsr(), q * u2w


class PhiSolver:
    """Stateful wrapper: warm start and (optionally) a reusable LU preconditioner."""

    def __init__(self, grid, settings=None):
        self.grid = grid
        self.settings = settings or CgSettings()
        self.last = None
        self.iterations = 0
        self._lu = None

    def _preconditioner(self, A):
        s = self.settings
        if s.preconditioner == "jacobi":
            d = 1.0 / A.diagonal()
            return spla.LinearOperator(A.shape, matvec=lambda x: d * x, dtype=float)
        if self._lu is None:
            self._lu = spla.splu(A.tocsc())
        return spla.LinearOperator(A.shape, matvec=self._lu.solve, dtype=float)

    def solve(self, u, q, initial=None):
        grid = self.grid
        if q < 0:
            raise ConfigurationError("coupling q must be nonnegative")
        if not np.all(np.isfinite(u)):
            raise ConfigurationError("u must be finite")
        if q == 0 or not np.any(u):
            self.iterations = 0
            return grid.zeros()

        A, b = phi_system(grid, u, q)
        nb = np.linalg.norm(b)
        if nb == 0:
            # q u^2 underflows: the solution is exactly zero
            self.iterations = 0
            return grid.zeros()
        x0 = initial
        if x0 is None and self.settings.warm_start:
            x0 = self.last
        x0 = None if x0 is None else np.asarray(x0, dtype=float).ravel()

        count = [0]

        def tick(_):
            count[0] += 1

        M = self._preconditioner(A)
        tol = self.settings.tol
        for _ in range(3):
            x, res, info = self._cg(A, b, x0, M, tol, nb, tick)
            if info != 0 or not res <= tol:
                break
            lo, hi = float(x.min()), float(x.max())
            # the exact discrete solution lies in [0, 1/q]; an iterate outside
            # it (ill-conditioned A at large q u) is refined, not accepted
            if lo >= -BOUND_SLACK / q and hi <= (1.0 + BOUND_SLACK) / q:
                break
            x0, tol = x, max(tol * 1e-2, 1e-14)
        if self.settings.preconditioner == "lu" and count[0] > self.settings.refactor_after:
            self._lu = None
        if info != 0 or not res <= tol:
            self._lu = None
            raise SolverError(f"screened Poisson CG did not converge (residual {res:.3e})",
                              residual=float(res), iterations=count[0])
        self.iterations = count[0]
        phi = x.reshape(grid.shape)
        lo, hi = float(phi.min()), float(phi.max())
        if lo < -BOUND_SLACK / q or hi > (1.0 + BOUND_SLACK) / q:
            raise SolverError(f"Phi outside [0, 1/q]: min {lo:.3e}, max {hi:.3e}",
                              phi_min=lo, phi_max=hi)
        self.last = phi.ravel().copy()
        return phi

    def _cg(self, A, b, x0, M, tol, nb, callback):
        # the recursively updated CG residual drifts near round-off, so restart
        # from the iterate until the true residual meets the tolerance
        for _ in range(4):
            x, info = spla.cg(A, b, x0=x0, rtol=tol, atol=0.0,
                              maxiter=self.settings.max_iter, M=M, callback=callback)
            res = np.linalg.norm(A @ x - b) / nb
            if info != 0 or res <= tol:
                break
            x0 = x
        return x, res, info


def solve_phi(grid, u, q, settings=None, initial=None):
    return PhiSolver(grid, settings).solve(u, q, initial)


def relative_residual(grid, u, q, phi):
    A, b = phi_system(grid, u, q)
    nb = np.linalg.norm(b)
    if nb == 0:
        return float(np.linalg.norm(A @ phi.ravel()))
    return float(np.linalg.norm(A @ phi.ravel() - b) / nb)


@dataclass
class EstimateCheck:
    ok: bool
    max_phi: float
    bound: float
    margin: float

    def __bool__(self):
        return self.ok


def phi_upper_estimate_check(grid, eps, lam, q, settings=None, slack=1e-9):
    """Compare max Phi of the scaled torus seed against ``q/2 * eps^4 lam^4``.

    The bound is the whole-space Newtonian estimate; Dirichlet truncation
    only lowers Phi, so no extra slack is needed beyond round-off.
    """
    from .seeds import seed_field

    if eps * lam > 1:
        raise ConfigurationError("the estimate requires eps * lam <= 1")
    bound = 0.5 * q * eps**4 * lam**4
    if eps == 0 or q == 0:
        return EstimateCheck(True, 0.0, bound, bound)
    u = seed_field(grid, eps, lam)
    phi = solve_phi(grid, u, q, settings)
    top = float(phi.max())
    return EstimateCheck(top <= bound + slack, top, bound, bound - top)
