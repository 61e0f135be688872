"""Analytic test functions and weighted Bergman norms."""

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import betainc, betaincc, betaln, gammaln

from .geometry import DomainError, _check_in_disk
from .quadrature import focus_breaks, integrate, zero_breaks
from .region import AnnularSector, Region

FULL_SECTOR = AnnularSector(0.0, 1.0)


@dataclass(frozen=True)
class SpaceParams:
    p: float = 2.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.alpha <= -1:
            raise ValueError("alpha must exceed -1")


@dataclass(frozen=True)
class AnalyticFunction:
    """scalar * poly(w) * (phi_a'(z))^power with w = phi_a(z), or a plain polynomial.

    Branch of the Jacobian power: phi_a'(z) = -(1-|a|^2) (1 - conj(a) z)^-2 and
    Re(1 - conj(a) z) > 0 on the disk, so we take
    (1-|a|^2)^power * exp(i pi power) * exp(-2 power Log(1 - conj(a) z)).
    Only |f| enters any norm; the branch is fixed for reproducibility.
    """

    coeffs: tuple
    mobius_center: complex = None
    jacobian_power: float = None
    scalar: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in np.atleast_1d(self.coeffs)))
        if self.mobius_center is not None:
            _check_in_disk(self.mobius_center)
            if self.jacobian_power is None:
                object.__setattr__(self, "jacobian_power", 0.0)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_polynomial(self):
        return self.mobius_center is None

    def __call__(self, z):
        return evaluate(self, z)

    def zeros(self, reach=1.0):
        """Zeros of modulus below `reach` (the disk itself by default)."""
        c = np.trim_zeros(np.asarray(self.coeffs), "b")
        if len(c) <= 1:
            return np.zeros(0, dtype=complex)
        roots = P.polyroots(c)
        if self.mobius_center is not None:
            a = self.mobius_center
            den = 1.0 - np.conj(a) * roots
            roots = roots[np.abs(den) > 1e-14]
            roots = (a - roots) / (1.0 - np.conj(a) * roots)
        return roots[np.abs(roots) < reach]

    def to_dict(self):
        d = {"coeffs": [[c.real, c.imag] for c in self.coeffs]}
        if self.mobius_center is not None:
            a = complex(self.mobius_center)
            d["mobius_center"] = [a.real, a.imag]
            d["jacobian_power"] = self.jacobian_power
        if self.scalar != 1.0:
            d["scalar"] = [complex(self.scalar).real, complex(self.scalar).imag]
        return d

    @classmethod
    def from_dict(cls, d):
        coeffs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in d["coeffs"]]
        a = d.get("mobius_center")
        s = d.get("scalar", 1.0)
        return cls(
            coeffs,
            None if a is None else complex(*a),
            d.get("jacobian_power"),
            complex(*s) if isinstance(s, (list, tuple)) else complex(s),
        )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def polynomial(coeffs):
    return AnalyticFunction(coeffs)


def monomial(n, scale=1.0):
    c = np.zeros(n + 1, dtype=complex)
    c[n] = scale
    return AnalyticFunction(c)


def random_polynomial(degree, rng):
    c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    return AnalyticFunction(c)


def evaluate(f, z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("evaluation point outside the open unit disk")
    coeffs = np.asarray(f.coeffs)
    if f.mobius_center is None:
        return f.scalar * P.polyval(z, coeffs)
    a = complex(f.mobius_center)
    q = 1.0 - np.conj(a) * z
    w = (a - z) / q
    power = f.jacobian_power
    jac = (1.0 - abs(a) ** 2) ** power * np.exp(1j * math.pi * power) * np.exp(-2.0 * power * np.log(q))
    return f.scalar * P.polyval(w, coeffs) * jac


def monomial_norm_p2(n, alpha):
    """Squared A^{2,alpha} norm of z^n: Gamma(alpha+2) n! / Gamma(n+alpha+2)."""
    if n < 0 or alpha <= -1:
        raise ValueError("need n >= 0 and alpha > -1")
    return math.exp(gammaln(alpha + 2) + gammaln(n + 1) - gammaln(n + alpha + 2))


def _node_counts(f, params):
    deg = f.degree
    n_rad = int(math.ceil((params.p * deg + 1) / 2)) + 16
    n_ang = int(math.ceil(params.p * deg)) + 16
    if f.mobius_center is not None:
        n_rad = int(math.ceil(params.p * (deg + 2) / 2)) + 8
    return n_rad, n_ang


def kink_breaks(f, p):
    """Quadrature breaks for |f|^p: none for even p, graded ones at zeros otherwise."""
    if float(p).is_integer() and int(p) % 2 == 0:
        return (), ()
    rb, tb = zero_breaks(f.zeros(), levels=2)
    # zeros just outside the circle still leave a sharp dip inside it
    for z0 in f.zeros(reach=1.5):
        if abs(z0) >= 1.0:
            frb, ftb = focus_breaks(z0 / abs(z0) * (2.0 - abs(z0)))
            rb, tb = rb + frb, tb + ftb
    return rb, tb


def _sectors(E):
    if E is None:
        return [FULL_SECTOR]
    if E.planar:
        raise ValueError("planar regions belong to the Fock setting")
    return E.disjoint()


def lp_mass(f, params, E=None, rtol=1e-10):
    """int_E |f|^p dA_alpha (the p-th power of the restricted norm)."""
    p, alpha = params.p, params.alpha
    if E is None and p == 2 and f.is_polynomial:
        mu = np.array([monomial_norm_p2(n, alpha) for n in range(f.degree + 1)])
        return float(abs(f.scalar) ** 2 * np.sum(np.abs(f.coeffs) ** 2 * mu))
    sectors = _sectors(E)
    n_rad, n_ang = _node_counts(f, params)
    rb, tb = kink_breaks(f, p)
    min_panel = 8
    if f.mobius_center is not None:
        frb, ftb = focus_breaks(f.mobius_center)
        rb, tb = list(rb) + frb, list(tb) + ftb
        min_panel = int(math.ceil(params.p * (f.degree + 2) / 2)) + 8
    integrand = lambda z: np.abs(evaluate(f, z)) ** p
    return integrate(integrand, sectors, n_rad, n_ang, alpha, (rb, tb), rtol=rtol, min_panel=min_panel)


def bergman_norm(f, params, E=None, rtol=1e-10):
    return lp_mass(f, params, E, rtol) ** (1.0 / params.p)


def _angular_moments(sector, m):
    """int e^{i m theta} over the sector for an integer array m."""
    t1, w = sector.theta_min, sector.width
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (np.exp(1j * m * (t1 + w)) - np.exp(1j * m * t1)) / (1j * m)
    return np.where(m == 0, w, val)


def _radial_moments(sector, kmax, alpha):
    """(alpha+1)/pi int rho^(k+1) (1-rho^2)^alpha drho for k = 0..kmax."""
    k = np.arange(kmax + 1)
    a = k / 2.0 + 1.0
    b = alpha + 1.0
    t1, t2 = sector.rho_min**2, sector.rho_max**2
    if t1 > 0.5:
        frac = betaincc(a, b, t1) - betaincc(a, b, t2)
    else:
        frac = betainc(a, b, t2) - betainc(a, b, t1)
    return (alpha + 1.0) / (2.0 * math.pi) * np.exp(betaln(a, b)) * frac


def gram_matrix(E, degree, alpha):
    """G[i, j] = int_E z^i conj(z)^j dA_alpha; Hermitian by construction."""
    n = degree + 1
    i, j = np.indices((n, n))
    G = np.zeros((n, n), dtype=complex)
    sectors = [FULL_SECTOR] if E is None else _sectors(E)
    for s in sectors:
        G += _radial_moments(s, 2 * degree, alpha)[i + j] * _angular_moments(s, i - j)
    upper = np.triu(G)
    return upper + np.conj(np.triu(G, 1)).T


def full_gram_diagonal(degree, alpha):
    return np.array([monomial_norm_p2(n, alpha) for n in range(degree + 1)])


def change_of_variable(f, a, params):
    """T_a f = (f o phi_a) (phi_a')^((2 + alpha)/p), an isometry of A^{p,alpha}."""
    if not f.is_polynomial:
        raise ValueError("change_of_variable expects a plain polynomial (no stacking)")
    _check_in_disk(a)
    return AnalyticFunction(f.coeffs, complex(a), (2.0 + params.alpha) / params.p, f.scalar)


def gram_form_norm(coeffs, G):
    c = np.asarray(coeffs, dtype=complex)
    return math.sqrt(max(float(np.real(c @ G @ np.conj(c))), 0.0))


@dataclass
class GramPencil:
    """The pair (G_E, G_full) whose smallest generalized eigenvalue is C_hat^2.

    Convention: ||f||^2_E = c^T G_E conj(c) for coefficients c, i.e. the
    Hermitian form x^H G_E x with x = conj(c).
    """

    G_E: np.ndarray
    G_full: np.ndarray
    degree: int
    params: SpaceParams

    @classmethod
    def build(cls, E, degree, alpha):
        G_E = gram_matrix(E, degree, alpha)
        G_full = np.diag(full_gram_diagonal(degree, alpha)).astype(complex)
        return cls(G_E, G_full, degree, SpaceParams(2.0, alpha))
