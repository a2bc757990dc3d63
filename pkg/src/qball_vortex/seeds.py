"""Torus test family u_{eps,lam} = eps^2 lam v(x / lam) and the E < m sigma construction.

v(x) = 1 - sqrt((r - 2)^2 + z^2) on the solid torus A_1 (centre circle of
radius 2, tube radius 1) and 0 elsewhere. By Pappus,

    int v^theta dx = 8 pi^2 / ((theta + 1)(theta + 2)),   |A_1| = 4 pi^2,

and |grad v| = 1 on A_1, so int |grad v|^2 = |A_1|.

Parameter recipe: fix eps^4 lam^5 = 6 sigma / (m pi^2) and choose lam with

    h(lam) = 12 sigma (1 + l^2) / m + 3/2 m sigma lam^2 - E lam^(5 - 3 tau / 2) <= 0,
    E = D (6 sigma / (m pi^2))^(tau / 2) int v^tau,

and lam >= max(1, 6 q^2 sigma / (m pi^2)); the latter already implies
eps lam <= 1 and eps^4 lam^4 < 2 / q^2.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .energy import ReducedEnergy
from .exceptions import ConfigurationError
from .grid import build_grid

PI2 = np.pi**2
A1_VOLUME = 4.0 * PI2


def torus_moment(theta):
    """int_{A_1} v^theta dx (closed Beta/Pappus form)."""
    return 8.0 * PI2 / ((theta + 1.0) * (theta + 2.0))


def _distance_inside(grid, lam):
    """lam - distance to the torus centre circle; positive inside A_lam."""
    return lam - np.hypot(grid.R - 2.0 * lam, grid.Z)


def _check_cover(grid, lam):
    if not lam > 0:
        raise ConfigurationError(f"lambda must be positive, got {lam!r}")
    if grid.r_max < 3.0 * lam or grid.z_half < lam:
        raise ConfigurationError(
            f"grid [0, {grid.r_max:g}] x [-{grid.z_half:g}, {grid.z_half:g}] "
            f"does not cover the torus of scale {lam:g}"
        )


def torus_bump(grid, lam=1.0):
    """Nodal samples of v(x / lam), zero outside A_lam."""
    _check_cover(grid, lam)
    return np.clip(_distance_inside(grid, lam) / lam, 0.0, None)


def seed_field(grid, eps, lam):
    return eps**2 * lam * torus_bump(grid, lam)


def smoothed_indicator(grid, lam=1.0):
    """C^1 smoothed indicator of A_lam with transition width max(dr, dz).

    A sampled sharp indicator converges irregularly; the symmetric cosine
    ramp H(d) = (1 + x + sin(pi x) / pi) / 2, x = clip(d / h, -1, 1),
    restores second-order convergence of the enclosed volume.
    """
    _check_cover(grid, lam)
    h = max(grid.dr, grid.dz)
    x = np.clip(_distance_inside(grid, lam) / h, -1.0, 1.0)
    return 0.5 * (1.0 + x + np.sin(np.pi * x) / np.pi)


def support_volume(grid, lam=1.0):
    return grid.integrate(smoothed_indicator(grid, lam))


def bump_integrals(grid, lam=1.0, tau=3.0):
    """Quadratures of v(x / lam); compare with ``exact_bump_integrals``.

    ``grad_sq`` uses the exact gradient |grad v_lam| = 1 / lam on A_lam;
    ``grad_sq_discrete`` is twice the discrete Dirichlet energy of the
    samples, which only converges at first order because v has a kink on
    the boundary and at the centre circle.
    """
    v = torus_bump(grid, lam)
    vol = support_volume(grid, lam)
    return {
        "int_v": grid.integrate(v),
        "int_v2": grid.integrate(v * v),
        "int_vtau": grid.integrate(v**tau),
        "grad_sq": vol / lam**2,
        "grad_sq_discrete": 2.0 * grid.dirichlet_energy(v, odd_axis=False),
        "support_volume": vol,
    }


def exact_bump_integrals(lam=1.0, tau=3.0):
    s = lam**3
    return {
        "int_v": s * torus_moment(1.0),
        "int_v2": s * torus_moment(2.0),
        "int_vtau": s * torus_moment(tau),
        "grad_sq": lam * A1_VOLUME,
        "support_volume": s * A1_VOLUME,
    }


@dataclass(frozen=True)
class SeedParams:
    eps: float
    lam: float
    amplitude: float
    eps_lam_ok: bool
    charge_ok: bool
    h_value: float
    E_const: float
    lam_min: float
    feasible: bool = True

    def as_dict(self):
        return asdict(self)

    @property
    def scale_relation(self):
        """eps^4 lam^5 (should equal 6 sigma / (m pi^2))."""
        return self.eps**4 * self.lam**5


@dataclass(frozen=True)
class Infeasible:
    violated: str
    E_const: float
    lam_min: float
    details: dict = field(default_factory=dict)
    feasible: bool = False

    def as_dict(self):
        return asdict(self)


def _h(lam, sigma, m, l, tau, E):
    return 12.0 * sigma * (1 + l * l) / m + 1.5 * m * sigma * lam**2 - E * lam ** (5.0 - 1.5 * tau)


def lambda_floor(sigma, m, q, eps0=None):
    """Smallest admissible lam; with ``eps0`` also enforce eps < eps0."""
    lo = max(1.0, 6.0 * q * q * sigma / (m * PI2))
    if eps0 is not None:
        # eps < eps0  <=>  lam > (6 sigma / (m pi^2 eps0^4))^(1/5)
        lo = max(lo, (6.0 * sigma / (m * PI2 * eps0**4)) ** 0.2 * (1.0 + 1e-12))
    return lo


def choose_seed_params(sigma, m, q, l, tau, D, int_vtau=None, eps0=None):
    """Largest lam satisfying the recipe, or ``Infeasible`` naming the failed inequality."""
    if not (sigma > 0 and m > 0 and q >= 0 and tau > 2 and D >= 0):
        raise ConfigurationError("need sigma, m > 0, q >= 0, tau > 2, D >= 0")
    int_vtau = torus_moment(tau) if int_vtau is None else int_vtau
    c6 = 6.0 * sigma / (m * PI2)
    E = D * c6 ** (tau / 2.0) * int_vtau
    lo = lambda_floor(sigma, m, q, eps0)
    if E <= 0:
        return Infeasible("h(lambda) <= 0 (E = 0)", E, lo)

    e = 5.0 - 1.5 * tau
    # beyond hi the lam^2 term dominates and h > 0
    hi = 4.0 * max(lo, (E / (1.5 * m * sigma)) ** (1.0 / (2.0 - e)))
    grid = np.geomspace(lo, hi, 4001)
    hv = _h(grid, sigma, m, l, tau, E)
    inside = np.flatnonzero(hv <= 0)
    if inside.size == 0:
        return Infeasible("h(lambda) <= 0 for some lambda >= lambda_min", E, lo,
                          {"h_min": float(hv.min())})
    k = inside[-1]
    lam = grid[k]
    if k + 1 < grid.size:
        root = brentq(_h, grid[k], grid[k + 1], args=(sigma, m, l, tau, E), xtol=1e-14, rtol=1e-14)
        # the root may sit on the h > 0 side by round-off; step inward
        for _ in range(64):
            if _h(root, sigma, m, l, tau, E) <= 0:
                lam = max(lam, root)
                break
            root = root * (1.0 - 1e-13)
    eps = (c6 / lam**5) ** 0.25
    eps_lam_ok = eps * lam <= 1.0
    charge_ok = q * q * eps**4 * lam**4 < 2.0
    if not (eps_lam_ok and charge_ok):
        return Infeasible("eps*lam <= 1" if not eps_lam_ok else "eps^4 lam^4 < 2/q^2", E, lo)
    return SeedParams(eps, lam, eps * eps * lam, eps_lam_ok, charge_ok,
                      float(_h(lam, sigma, m, l, tau, E)), E, lo)


def estimate_D0(sigma, m, q, l, tau, int_vtau=None, eps0=None, rtol=1e-10):
    """Smallest D for which the recipe is feasible (bisection on log D)."""
    def ok(D):
        return choose_seed_params(sigma, m, q, l, tau, D, int_vtau, eps0).feasible

    lo, hi = 0.0, 1.0
    while not ok(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ConfigurationError("no feasible D found")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def seed_grid(lam, n_r=256, n_z=256, pad=1.0):
    """[0, (3 + pad) lam] x [-(1 + pad) lam, (1 + pad) lam]."""
    return build_grid(n_r, n_z, (3.0 + pad) * lam, (1.0 + pad) * lam)


@dataclass
class SeedEnergyReport:
    E_value: float
    bound: float
    ok: bool
    margin: float
    chain: dict
    numeric: dict

    def as_dict(self):
        return asdict(self)


def verify_lemma17(seed, sigma, q, l, model, grid=None, cg=None):
    """Evaluate E(u_{eps,lam}, 0) on a grid and compare against m sigma.

    ``chain`` lists the terms of the analytic upper bound; ``numeric`` the
    corresponding quadratures. The W4 term of the chain is only a valid
    bound when ``eps < eps0`` (``w4_applicable``).
    """
    if not seed.feasible:
        raise ConfigurationError(f"seed is infeasible: {seed.violated}")
    eps, lam, m, tau, D = seed.eps, seed.lam, model.m, model.tau, model.D
    grid = seed_grid(lam) if grid is None else grid
    u = seed_field(grid, eps, lam)
    fn = ReducedEnergy(grid, sigma, q, l, model, cg)
    st = fn.state(u, grid.zeros())
    bd = st.breakdown
    w = grid.weights

    e4 = eps**4
    chain = {
        "grad": 2.0 * PI2 * e4 * lam**3,
        "mass": m * m * PI2 * e4 * lam**5 / 3.0,
        "covariant": 2.0 * PI2 * l * l * e4 * lam**3,
        "w4": -D * eps ** (2 * tau) * lam ** (tau + 3) * torus_moment(tau),
        "charge_floor": 0.5 * sigma**2 / (2.0 * PI2 / 3.0 * (1.0 - 0.5 * q * q * e4 * lam**4) * e4 * lam**5),
    }
    chain["total"] = sum(chain.values())
    chain["closed_form"] = (
        12.0 * sigma / m * (1 + l * l) / lam**2
        + 2.0 * m * sigma
        - seed.E_const * lam ** (3.0 - 1.5 * tau)
        + m * sigma / (4.0 * (1.0 - 3.0 * sigma * q * q / (lam * m * PI2)))
    )
    chain["w4_applicable"] = bool(eps < model.eps0)

    numeric = {
        "grad": bd.dirichlet_u,
        "mass": 0.5 * m * m * float(np.sum(u * u * w)),
        "covariant": bd.covariant,
        "N": float(np.sum(model.N(u) * w)),
        "charge": sigma**2 / (2.0 * bd.K),
        "K": bd.K,
        "max_phi": float(st.phi_hat.max()),
        "phi_bound": 0.5 * q * e4 * lam**4,
        "polo": float(np.sum(u * u * grid.inv_r2 * w)),
        "polo_bound": 4.0 * PI2 * e4 * lam**3,
        "K_floor": 2.0 * PI2 / 3.0 * (1.0 - 0.5 * q * q * e4 * lam**4) * e4 * lam**5,
        "max_u": float(u.max()),
    }
    E = bd.E_total
    bound = m * sigma
    return SeedEnergyReport(E, bound, bool(E < bound), bound - E, chain, numeric)
