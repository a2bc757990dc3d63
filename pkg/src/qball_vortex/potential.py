"""Even nonlinear potentials W(s) = m^2 s^2 / 2 + N(s) with N a signed power series.

    N(s) = sum_k c_k |s|**p_k,      2 < p_k < 6.

The four structural hypotheses are

* W1: W(s) >= 0 for s >= 0 (checked by sampling),
* W2: W(0) = W'(0) = 0, W''(0) = m^2 > 0 (structural: m > 0, every p_k > 2),
* W3: 2 < min p_k <= max p_k < 6 (structural),
* W4: N(s) <= -D |s|**tau on [0, eps0] (checked by sampling).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError


@dataclass(frozen=True)
class PotentialModel:
    m: float
    terms: tuple = ()
    D: float = 0.0
    tau: float = 3.0
    eps0: float = 1.0

    def __post_init__(self):
        terms = tuple((float(c), float(p)) for c, p in self.terms)
        object.__setattr__(self, "terms", terms)
        if not self.m > 0:
            raise ConfigurationError(f"mass m must be positive, got {self.m!r}")
        for c, p in terms:
            if not (2.0 < p < 6.0):
                raise ConfigurationError(
                    f"exponent p = {p:g} violates W3: every exponent must satisfy 2 < p < 6"
                )
        if self.D < 0:
            raise ConfigurationError(f"D must be nonnegative, got {self.D!r}")
        if not self.tau > 2:
            raise ConfigurationError(f"tau must exceed 2, got {self.tau!r}")
        if not self.eps0 > 0:
            raise ConfigurationError(f"eps0 must be positive, got {self.eps0!r}")

    @property
    def exponents(self):
        return tuple(p for _, p in self.terms)

    def N(self, s):
        a = np.abs(s)
        out = np.zeros_like(a, dtype=float)
        for c, p in self.terms:
            out = out + c * a**p
        return out

    def dN(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        out = np.zeros_like(a)
        for c, p in self.terms:
            out = out + c * p * a ** (p - 1)
        return out * np.sign(s)

    def W(self, s):
        s = np.asarray(s, dtype=float)
        return 0.5 * self.m**2 * s * s + self.N(s)

    def dW(self, s):
        s = np.asarray(s, dtype=float)
        return self.m**2 * s + self.dN(s)

    def shifted_moment(self, k):
        """Coefficients of N'(s)s - k N(s) = sum_k c_k (p_k - k) |s|^p_k."""
        return tuple((c * (p - k), p) for c, p in self.terms)

    def with_D(self, D):
        return PotentialModel(self.m, self.terms, D, self.tau, self.eps0)


# module-level aliases for the evaluation operations
def eval_W(model, s):
    return model.W(s)


def eval_Wprime(model, s):
    return model.dW(s)


def eval_N(model, s):
    return model.N(s)


def eval_Nprime(model, s):
    return model.dN(s)


@dataclass
class HypothesisReport:
    W1_ok: bool
    W2_ok: bool
    W3_ok: bool
    W4_ok: bool
    witness: dict = field(default_factory=dict)
    s_max: float = 0.0
    samples: int = 0

    @property
    def all_ok(self):
        return self.W1_ok and self.W2_ok and self.W3_ok and self.W4_ok

    def as_dict(self):
        return {
            "W1_ok": self.W1_ok,
            "W2_ok": self.W2_ok,
            "W3_ok": self.W3_ok,
            "W4_ok": self.W4_ok,
            "witness": dict(self.witness),
            "s_max": self.s_max,
            "samples": self.samples,
        }


def sample_points(s_max, samples, s_min_ratio=1e-8):
    """0 together with ``samples - 1`` log-spaced points in [s_max * ratio, s_max]."""
    pts = np.geomspace(s_max * s_min_ratio, s_max, samples - 1)
    return np.concatenate([[0.0], pts])


def verify_hypotheses(model, s_max=None, samples=4096):
    s_max = 10.0 * model.eps0 if s_max is None else float(s_max)
    if s_max <= model.eps0:
        raise ConfigurationError("s_max must exceed eps0")
    if samples < 1000:
        raise ConfigurationError("at least 1000 samples are required")
    witness = {}

    s = sample_points(s_max, samples)
    w = model.W(s)
    bad = np.flatnonzero(w < 0)
    W1_ok = bad.size == 0
    if not W1_ok:
        witness["W1"] = float(s[bad[np.argmin(w[bad])]])

    W2_ok = model.m > 0 and all(p > 2 for p in model.exponents)
    W3_ok = all(2 < p < 6 for p in model.exponents)

    if model.D > 0:
        t = np.linspace(0.0, model.eps0, samples)[1:]
        excess = model.N(t) + model.D * t**model.tau
        bad = np.flatnonzero(excess > 0)
        W4_ok = bad.size == 0
        if not W4_ok:
            witness["W4"] = float(t[bad[np.argmax(excess[bad])]])
    else:
        W4_ok = False
        witness["W4"] = 0.0
    return HypothesisReport(W1_ok, W2_ok, W3_ok, W4_ok, witness, s_max, samples)


def sign_condition(coeffs, s_values, sign=+1):
    """Whether sum_k c_k |s|^p_k has the given sign for every sampled s.

    Decided analytically when every coefficient already has that sign,
    otherwise by evaluation on ``s_values``.
    """
    if all(sign * c >= 0 for c, _ in coeffs):
        return True
    s = np.abs(np.asarray(s_values, dtype=float))
    total = np.zeros_like(s)
    for c, p in coeffs:
        total = total + c * s**p
    return bool(np.all(sign * total >= 0))


def quintic_well(D, m=1.0, tau=4.0, kappa=1.05):
    """A W1-W4 family with leading quartic attraction: N = -2D|s|^4 + b|s|^5.

    ``b = kappa * s_star**-3`` with ``s_star = sqrt(3 m^2 / (4 D))``; for
    ``kappa = 1`` the potential W touches zero at ``s_star`` and ``kappa > 1``
    keeps it strictly positive. W4 then holds with constant D, exponent 4
    and ``eps0 = D / b``.
    """
    if tau != 4.0:
        raise ConfigurationError("the quintic well family has tau = 4")
    s_star = np.sqrt(3.0 * m**2 / (4.0 * D))
    b = kappa * m**2 / s_star**3
    return PotentialModel(m=m, terms=((-2.0 * D, 4.0), (b, 5.0)), D=D, tau=4.0, eps0=D / b)
