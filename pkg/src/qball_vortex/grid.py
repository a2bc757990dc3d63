"""Axisymmetric (r, z) grid, volume quadrature and variational difference operators.

Nodes are cell centred, ``r_i = (i + 1/2) dr`` and ``z_j = -z_half + (j + 1/2) dz``,
so no node sits on the axis. Every integral over R^3 of an axisymmetric
integrand becomes ``sum(f * grid.weights)`` with ``w_ij = 2 pi r_i dr dz``.

Difference operators are built from discrete Dirichlet forms

    Q_p(f) = 1/2 * sum_faces c_f * (jump of f across the face)**2,

where the face coefficient carries a radial metric ``r**p`` evaluated at the
midpoint of the segment joining the two values. ``p = 1`` gives the
Dirichlet energy 1/2 int |grad f|^2 dx, ``p = -1`` the magnetic energy
1/2 int |grad a|^2 / r^2 dx of ``A = a grad(theta)``. The operators returned
by :meth:`Grid2D.laplacian` and :meth:`Grid2D.gauge_operator` are
``-(1/w) dQ/df``, i.e. exact negative gradients of the discrete energies in
the w-weighted inner product.

Boundary rules: homogeneous Dirichlet at ``r = r_max`` and ``|z| = z_half``
(the last half cell is a face of length ``h/2``). At the axis, an even
reflection means zero flux; an odd reflection pins the value 0 on the axis
through a half face with midpoint ``dr/4``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .exceptions import ConfigurationError

MIN_CELLS = 8


@dataclass(frozen=True)
class Grid2D:
    n_r: int
    n_z: int
    r_max: float
    z_half: float

    def __post_init__(self):
        for name in ("n_r", "n_z"):
            n = getattr(self, name)
            if int(n) != n or n < MIN_CELLS:
                raise ConfigurationError(f"{name} must be an integer >= {MIN_CELLS}, got {n!r}")
        for name in ("r_max", "z_half"):
            x = getattr(self, name)
            if not np.isfinite(x) or x <= 0:
                raise ConfigurationError(f"{name} must be positive, got {x!r}")

    @property
    def shape(self):
        return (self.n_r, self.n_z)

    @property
    def dr(self):
        return self.r_max / self.n_r

    @property
    def dz(self):
        return 2.0 * self.z_half / self.n_z

    @cached_property
    def r(self):
        return (np.arange(self.n_r) + 0.5) * self.dr

    @cached_property
    def z(self):
        return -self.z_half + (np.arange(self.n_z) + 0.5) * self.dz

    @cached_property
    def R(self):
        return np.broadcast_to(self.r[:, None], self.shape)

    @cached_property
    def Z(self):
        return np.broadcast_to(self.z[None, :], self.shape)

    @cached_property
    def weights(self):
        return 2.0 * np.pi * self.R * self.dr * self.dz

    @cached_property
    def inv_r2(self):
        return 1.0 / self.R**2

    @property
    def volume(self):
        return np.pi * self.r_max**2 * 2.0 * self.z_half

    def integrate(self, f):
        return float(np.sum(np.asarray(f) * self.weights))

    def inner(self, f, g):
        return float(np.sum(f * g * self.weights))

    def norm(self, f):
        return np.sqrt(self.inner(f, f))

    def zeros(self):
        return np.zeros(self.shape)

    # -- discrete Dirichlet forms -------------------------------------------

    def form(self, metric_power, odd_axis):
        key = (int(metric_power), bool(odd_axis))
        cache = self.__dict__.setdefault("_forms", {})
        if key not in cache:
            cache[key] = DirichletForm(self, *key)
        return cache[key]

    def laplacian(self, f, odd_axis=False):
        """u_rr + u_r/r + u_zz, Dirichlet outside, axis rule per ``odd_axis``."""
        return self.form(1, odd_axis).apply(f)

    def gauge_operator(self, a):
        """(a_rr - a_r/r + a_zz) / r**2 in weak form, a = 0 on the axis."""
        return self.form(-1, True).apply(a)

    def dirichlet_energy(self, f, odd_axis=False):
        """1/2 int |grad f|^2 dx."""
        return self.form(1, odd_axis).energy(f)

    def gauge_energy(self, a):
        """1/2 int |grad a|^2 / r^2 dx, i.e. 1/2 int |curl(a grad theta)|^2 dx."""
        return self.form(-1, True).energy(a)

    def boundary_flux(self, f, metric_power=1):
        """Outer-boundary integral of r^(p-1) (d_n f)^2 (x . n) dS for a Dirichlet field.

        The normal derivative uses the quadratic through the wall value 0 and
        the two nearest nodes, d_n f = -(9 f_1 - f_2) / (3 h).
        """
        c = metric_power - 1
        al = (9.0 * f[-1, :] - f[-2, :]) / (3.0 * self.dr)
        side = self.r_max**c * float(np.sum(al * al)) * self.r_max * 2.0 * np.pi * self.r_max * self.dz
        ends = 0.0
        for near, next_ in ((f[:, -1], f[:, -2]), (f[:, 0], f[:, 1])):
            al = (9.0 * near - next_) / (3.0 * self.dz)
            ends += float(np.sum(self.r**c * al * al * self.r)) * 2.0 * np.pi * self.dr * self.z_half
        return side + ends


class DirichletForm:
    """Face coefficients and sparse Hessian of ``Q_p`` for one axis rule."""

    def __init__(self, grid, metric_power, odd_axis):
        self.grid = grid
        self.metric_power = metric_power
        self.odd_axis = odd_axis
        n_r, n_z, dr, dz = grid.n_r, grid.n_z, grid.dr, grid.dz
        p = metric_power

        # radial faces k = 0..n_r sit between nodes k-1 and k
        h_r = np.full(n_r + 1, dr)
        h_r[0] = h_r[-1] = 0.5 * dr
        r_mid = np.arange(n_r + 1) * dr
        r_mid[0] = 0.25 * dr
        r_mid[-1] = grid.r_max - 0.25 * dr
        c_r = 2.0 * np.pi * dz * r_mid**p / h_r
        if not odd_axis:
            c_r[0] = 0.0
        # axial faces k = 0..n_z sit between nodes k-1 and k
        h_z = np.full(n_z + 1, dz)
        h_z[0] = h_z[-1] = 0.5 * dz
        c_z = 2.0 * np.pi * dr * grid.r[:, None] ** p / h_z[None, :]

        self.c_r = np.broadcast_to(c_r[:, None], (n_r + 1, n_z)).copy()
        self.c_z = c_z

    @staticmethod
    def _jumps_r(f):
        n_z = f.shape[1]
        pad = np.zeros((1, n_z))
        return np.diff(np.concatenate([pad, f, pad], axis=0), axis=0)

    @staticmethod
    def _jumps_z(f):
        n_r = f.shape[0]
        pad = np.zeros((n_r, 1))
        return np.diff(np.concatenate([pad, f, pad], axis=1), axis=1)

    def energy(self, f):
        jr = self._jumps_r(f)
        jz = self._jumps_z(f)
        return 0.5 * (float(np.sum(self.c_r * jr * jr)) + float(np.sum(self.c_z * jz * jz)))

    def plain_gradient(self, f):
        """dQ/df, the unweighted gradient (equal to ``matrix @ f``)."""
        fr = self.c_r * self._jumps_r(f)
        fz = self.c_z * self._jumps_z(f)
        return -(np.diff(fr, axis=0) + np.diff(fz, axis=1))

    def apply(self, f):
        return -self.plain_gradient(f) / self.grid.weights

    @cached_property
    def matrix(self):
        """Sparse symmetric positive semidefinite Hessian of Q_p (flattened C order)."""
        n_r, n_z = self.grid.shape
        d_r = _difference_1d(n_r)
        d_z = _difference_1d(n_z)
        D_r = sp.kron(d_r, sp.identity(n_z), format="csr")
        D_z = sp.kron(sp.identity(n_r), d_z, format="csr")
        S = D_r.T @ sp.diags(self.c_r.ravel()) @ D_r + D_z.T @ sp.diags(self.c_z.ravel()) @ D_z
        return S.tocsr()


def _difference_1d(n):
    """(n+1) x n jump matrix with zero padding at both ends."""
    ones = np.ones(n)
    return sp.diags([ones, -ones], [0, -1], shape=(n + 1, n), format="csr")


def build_grid(n_r, n_z, r_max, z_half):
    return Grid2D(n_r, n_z, float(r_max), float(z_half))


def shift_z(f, cells):
    """Translate a field by ``cells`` nodes in +z, zero-filling the vacated rows.

    ``shift_z(f, k)[:, j] == f[:, j - k]``.
    """
    out = np.zeros_like(f)
    n_z = f.shape[1]
    if cells == 0:
        out[:] = f
    elif abs(cells) < n_z:
        if cells > 0:
            out[:, cells:] = f[:, :-cells]
        else:
            out[:, :cells] = f[:, -cells:]
    return out
