"""Fock-space analogue: Gaussian-weighted norms on the plane, the translation
isometry, the integer lattice, and p = 2 sampling constants.

Area is plain Lebesgue measure here (no normalisation makes sense on C), so
the squared norm of z^n is pi n! / alpha^(n+1).
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammainc, gammaincc, gammaln

from .analysis import SpaceParams
from .bounds import K_good
from .quadrature import TWO_PI, disk_rule, integrate, zero_breaks
from .region import AnnularSector, Region
from .sampling import SamplingError, SamplingResult


TAIL_TOL = 1e-12


def default_truncation(alpha, degree=0, p=2.0):
    """Radius T whose Gaussian tail mass is below TAIL_TOL for degree <= n.

    The tail of |z|^(pn) exp(-p alpha |z|^2/2) beyond T is the regularised
    Gamma(pn/2 + 1, p alpha T^2/2); T is never below
    max(6/sqrt(alpha), 2 sqrt(n/alpha)).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    base = max(6.0 / math.sqrt(alpha), 2.0 * math.sqrt(max(degree, 0) / alpha))
    x = 0.5 * p * alpha * base**2
    for n in range(max(degree, 0) + 1):
        a = 0.5 * p * n + 1.0
        while gammaincc(a, x) > TAIL_TOL:
            x *= 1.02
    return math.sqrt(2.0 * x / (p * alpha))


@dataclass(frozen=True)
class FockParams:
    p: float = 2.0
    alpha: float = 1.0
    truncation_radius: float = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.truncation_radius is None:
            object.__setattr__(self, "truncation_radius", default_truncation(self.alpha, 0, self.p))
        elif self.truncation_radius <= 0:
            raise ValueError("truncation_radius must be positive")

    @classmethod
    def for_degree(cls, p, alpha, degree):
        return cls(p, alpha, default_truncation(alpha, degree, p))


@dataclass(frozen=True)
class FockFunction:
    """exp(alpha conj(a) z - alpha |a|^2 / 2) * poly(z - a); a = 0 is a plain polynomial."""

    coeffs: tuple
    shift: complex = 0j
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in np.atleast_1d(self.coeffs)))
        object.__setattr__(self, "shift", complex(self.shift))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        a = self.shift
        core = P.polyval(z - a, np.asarray(self.coeffs))
        if a == 0:
            return core
        return np.exp(self.alpha * np.conj(a) * z - 0.5 * self.alpha * abs(a) ** 2) * core

    def weighted_abs(self, z, alpha):
        """|f(z)| exp(-alpha |z|^2 / 2), with exponents combined before exp."""
        z = np.asarray(z, dtype=complex)
        a = self.shift
        core = np.abs(P.polyval(z - a, np.asarray(self.coeffs)))
        expo = -0.5 * alpha * np.abs(z) ** 2
        if a != 0:
            expo = expo + self.alpha * np.real(np.conj(a) * z) - 0.5 * self.alpha * abs(a) ** 2
        return core * np.exp(expo)


def _as_fock(f):
    if isinstance(f, FockFunction):
        return f
    coeffs = getattr(f, "coeffs", f)
    return FockFunction(coeffs)


def fock_translate(f, a, alpha):
    """T_a f(z) = exp(alpha conj(a) z - alpha |a|^2/2) f(z - a)."""
    f = _as_fock(f)
    if f.shift != 0:
        raise ValueError("fock_translate expects an untranslated polynomial")
    return FockFunction(f.coeffs, complex(a), float(alpha))


def _planar_sectors(E, radius):
    if E is None:
        return [AnnularSector(0.0, radius)]
    return E.disjoint()


def fock_mass(f, params, E=None, rtol=1e-10):
    """int |f|^p exp(-p alpha |z|^2 / 2) dA over E or the truncation disk."""
    f = _as_fock(f)
    if E is not None and E.is_empty:
        return 0.0
    p, alpha = params.p, params.alpha
    T = params.truncation_radius + abs(f.shift)
    sectors = _planar_sectors(E, T)
    width = 1.0 / math.sqrt(p * alpha)
    rb = list(np.arange(width, T, width))
    tb = []
    if f.shift != 0:
        rb.append(abs(f.shift))
        tb.append(float(np.angle(f.shift)))
    if not (float(p).is_integer() and int(p) % 2 == 0) and f.degree > 0:
        zeros = P.polyroots(np.asarray(f.coeffs)) + f.shift
        zrb, ztb = zero_breaks(zeros, levels=2)
        rb += list(zrb)
        tb += list(ztb)
    n_rad = int(math.ceil(p * f.degree / 4)) + 12
    n_ang = int(math.ceil(p * f.degree + 4 * math.sqrt(p * alpha) * T)) + 16
    integrand = lambda z: f.weighted_abs(z, alpha) ** p
    return integrate(integrand, sectors, n_rad, n_ang, None, (rb, tb), rtol=rtol)


def fock_norm(f, params, E=None, rtol=1e-10):
    return fock_mass(f, params, E, rtol) ** (1.0 / params.p)


def fock_monomial_norm_p2(n, alpha):
    """Squared Fock norm of z^n at p = 2: pi n! / alpha^(n+1)."""
    return math.exp(math.log(math.pi) + gammaln(n + 1) - (n + 1) * math.log(alpha))


def _radial_gauss_moments(sector, kmax, alpha):
    """int_{rho1}^{rho2} rho^(k+1) exp(-alpha rho^2) drho for k = 0..kmax."""
    k = np.arange(kmax + 1)
    a = k / 2.0 + 1.0
    x1, x2 = alpha * sector.rho_min**2, alpha * sector.rho_max**2
    if x1 > a.max():
        frac = gammaincc(a, x1) - gammaincc(a, x2)
    else:
        frac = gammainc(a, x2) - gammainc(a, x1)
    return 0.5 * np.exp(gammaln(a) - a * math.log(alpha)) * frac


def fock_gram(E, degree, alpha):
    """G[i, j] = int_E z^i conj(z)^j exp(-alpha |z|^2) dA (the p = 2 weight)."""
    from .analysis import _angular_moments

    n = degree + 1
    i, j = np.indices((n, n))
    G = np.zeros((n, n), dtype=complex)
    for s in E.disjoint():
        G += _radial_gauss_moments(s, 2 * degree, alpha)[i + j] * _angular_moments(s, i - j)
    upper = np.triu(G)
    return upper + np.conj(np.triu(G, 1)).T


def fock_full_gram(degree, alpha):
    return np.diag([fock_monomial_norm_p2(k, alpha) for k in range(degree + 1)]).astype(complex)


def truncated_plane(radius):
    return Region((AnnularSector(0.0, radius),), f"disk(0,{radius})", planar=True)


def fock_optimal_constant_p2(E, degree, alpha, truncation_radius=None):
    """sqrt of the smallest eigenvalue of (G_E, G_full) with the Gaussian weight."""
    T = truncation_radius or default_truncation(alpha, degree)
    if E.sectors and max(s.rho_max for s in E.sectors) > T * (1 + 1e-12):
        raise ValueError("E must lie within the truncation radius")
    d = np.real(np.diag(fock_full_gram(degree, alpha)))
    if d.min() < 1e-300:
        raise SamplingError("full Gram diagonal underflows")
    params = SpaceParams(2.0, alpha)
    if E.is_empty:
        c = np.zeros(degree + 1, dtype=complex)
        c[0] = 1 / math.sqrt(d[0])
        return SamplingResult(0.0, degree, params, E.label, tuple(c), "eigen-fock")
    w = 1.0 / np.sqrt(d)
    H = w[:, None] * fock_gram(E, degree, alpha) * w[None, :]
    H = 0.5 * (H + H.conj().T)
    lam, vec = np.linalg.eigh(H)
    x = w * vec[:, 0]
    k = int(np.argmax(np.abs(x)))
    x = x * abs(x[k]) / x[k]
    coeffs = np.conj(x) / math.sqrt(np.sum(np.abs(x) ** 2 * d))
    C = math.sqrt(min(max(float(lam[0]), 0.0), 1.0))
    return SamplingResult(C, degree, params, E.label, tuple(coeffs), "eigen-fock")


# ---------------------------------------------------------------- lattice


def fock_lattice(n, k):
    return complex(n, k)


def _lattice_window(window, r):
    m = int(math.ceil(window + r)) + 1
    n, k = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1))
    return (n + 1j * k).ravel()


def fock_test_grid(window, resolution=64):
    x = np.linspace(-window, window, resolution)
    X, Y = np.meshgrid(x, x)
    return (X + 1j * Y).ravel()


def fock_overlap(r, window=2, resolution=64):
    """Max over a test grid in [-window, window]^2 of #{lattice points within r}."""
    if r <= 0:
        raise ValueError("r must be positive")
    pts = _lattice_window(window, r)
    z = fock_test_grid(window, resolution)
    counts = np.zeros(len(z), dtype=int)
    for w in pts:
        counts += np.abs(z - w) < r
    return int(counts.max())


def fock_covering_ok(r, window=2, resolution=64):
    pts = _lattice_window(window, r)
    z = fock_test_grid(window, resolution)
    dmin = np.full(len(z), np.inf)
    for w in pts:
        dmin = np.minimum(dmin, np.abs(z - w))
    return bool(np.all(dmin < r))


# ---------------------------------------------------------------- bound


def fock_bound(gamma, r, params, cfg):
    """exp(-2 alpha r^2) (gamma/c)^(eta ln M + 1/p), clamped to [0, 1].

    ln M = 8 alpha r^2 ln r + (2/p) ln r and eta = c'' 16 ln 2; c is the
    Remez constant cfg.c_remez.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    if r <= math.sqrt(2.0):
        raise ValueError("r must exceed sqrt(2) for the lattice disks to cover")
    p, alpha = params.p, params.alpha
    lnM = 8.0 * alpha * r**2 * math.log(r) + 2.0 / p * math.log(r)
    eta = cfg.c_dprime * 16.0 * math.log(2.0)
    log_val = -2.0 * alpha * r**2 + (eta * lnM + 1.0 / p) * math.log(gamma / cfg.c_remez)
    return min(1.0, math.exp(log_val))


# ---------------------------------------------------------------- good disks


@dataclass
class FockGoodMassReport:
    passed: bool
    c: float
    N: int
    K: float
    good_mass_fraction: float
    frame_lower: float
    n_good: int
    n_total: int

    def to_dict(self):
        return asdict(self)


def fock_local_masses(f, params, centers, radius, n_rad=None, n_ang=None):
    f = _as_fock(f)
    n_rad = n_rad or int(math.ceil(params.p * f.degree / 2)) + 24
    n_ang = n_ang or int(math.ceil(params.p * f.degree)) + 48
    z, w = disk_rule(centers, radius, n_rad, n_ang)
    return np.sum(w * f.weighted_abs(z, params.alpha) ** params.p, axis=1)


def fock_verify_good_mass(f, params, r, c, window=None):
    """Good-disk mass check on C with Euclidean disks, s = r and t = 4r.

    K^p = N / (1 - c) with N the measured overlap of the radius-4r disks;
    lattice points are taken in a square covering the truncation disk.
    """
    if not 0.0 < c < 1.0:
        raise ValueError("c must lie in (0, 1)")
    f = _as_fock(f)
    T = params.truncation_radius
    window = window or int(math.ceil(T))
    m = window
    n, k = np.meshgrid(np.arange(-m, m + 1), np.arange(-m, m + 1))
    centers = (n + 1j * k).ravel()
    total = fock_mass(f, params)
    if total <= 0:
        raise SamplingError("good disks of the zero function")
    ms = fock_local_masses(f, params, centers, r)
    mt = fock_local_masses(f, params, centers, 4 * r)
    N = fock_overlap(4 * r, 2, 48)
    K = K_good(N, c, params.p)
    good = mt <= K**params.p * ms * (1 + 1e-10)
    frac = float(np.sum(ms[good]) / total)
    return FockGoodMassReport(bool(frac >= c - 1e-6), float(c), int(N), float(K), frac, float(ms.sum() / total), int(good.sum()), len(ms))
