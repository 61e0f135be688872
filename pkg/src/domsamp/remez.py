"""Empirical planar Remez constants and the 2-D Kovrijkine inequality.

Areas here are plain (unnormalized) Lebesgue measure, as in the Remez setting.
Polynomials are coefficient arrays in increasing-degree order.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize_scalar

from .bounds import eta_general
from .quadrature import _legendre, region_rule

FULL_RES = 1024
SEARCH_RES = 96
SUBCELLS = 8
MEASURE_RTOL = 1e-3


class RemezError(RuntimeError):
    pass


def _poly(p):
    return np.atleast_1d(np.asarray(p, dtype=complex))


# ---------------------------------------------------------------- rasters


class _Raster:
    """Equal-area polar cells on D(0, R): n_r rings, n_t sectors per ring."""

    def __init__(self, radius, n_r, n_t=None):
        n_t = n_t or n_r
        self.radius, self.n_r, self.n_t = radius, n_r, n_t
        self.cell_area = math.pi * radius**2 / (n_r * n_t)
        edges = radius * np.sqrt(np.arange(n_r + 1) / n_r)
        self.r_edges = edges
        mid = radius * np.sqrt((np.arange(n_r) + 0.5) / n_r)
        theta = 2 * math.pi * (np.arange(n_t) + 0.5) / n_t
        self.z = mid[:, None] * np.exp(1j * theta[None, :])

    def subcells(self, i, j, k=SUBCELLS):
        """Centres of a k x k equal-area subdivision of cells (i, j)."""
        lo2, hi2 = self.r_edges[i] ** 2, self.r_edges[i + 1] ** 2
        u = (np.arange(k) + 0.5) / k
        rho = np.sqrt(lo2[:, None] + (hi2 - lo2)[:, None] * u[None, :])
        dt = 2 * math.pi / self.n_t
        theta = dt * (j[:, None] + u[None, :])
        return (rho[:, :, None] * np.exp(1j * theta[:, None, :])).reshape(len(i), k * k)


def _abs_on(p, z):
    return np.abs(P.polyval(z, p))


class _SublevelCounter:
    """Sublevel areas of |p| at many levels from one raster evaluation."""

    def __init__(self, p, radius, resolution=FULL_RES):
        self.p = _poly(p)
        self.raster = _Raster(radius, resolution)
        self.vals = _abs_on(self.p, self.raster.z)

    def measure(self, level):
        v, ras = self.vals, self.raster
        inside = v <= level
        # cells whose classification differs from a neighbour straddle the level curve
        edge = np.zeros_like(inside)
        d_t = inside != np.roll(inside, 1, axis=1)
        edge |= d_t | np.roll(d_t, -1, axis=1)
        d_r = inside[1:] != inside[:-1]
        edge[1:] |= d_r
        edge[:-1] |= d_r
        count = float(np.count_nonzero(inside & ~edge))
        i, j = np.nonzero(edge)
        if len(i):
            sub = _abs_on(self.p, ras.subcells(i, j))
            count += float(np.count_nonzero(sub <= level)) / SUBCELLS**2
        return count * ras.cell_area

    def quantile(self, s):
        """Smallest raster level whose (unrefined) sublevel area reaches s."""
        flat = np.sort(self.vals.ravel())
        k = int(math.ceil(s / self.raster.cell_area)) - 1
        return float(flat[min(max(k, 0), flat.size - 1)])


def sublevel_measure(p, domain_radius, level, resolution=FULL_RES):
    """Area of {|z| <= domain_radius : |p(z)| <= level}."""
    if level <= 0:
        raise ValueError("level must be positive")
    p = _poly(p)
    if not np.any(p):
        return math.pi * domain_radius**2
    return _SublevelCounter(p, domain_radius, resolution).measure(level)


def _level_for(counter, s):
    """Level l with counter.measure(l) in [s, s (1 + MEASURE_RTOL)]."""
    target_hi = s * (1.0 + MEASURE_RTOL)
    l0 = counter.quantile(s * (1.0 + 0.5 * MEASURE_RTOL))
    lo, hi = l0, l0
    m = counter.measure(l0)
    if s <= m <= target_hi:
        return l0
    for _ in range(200):
        if m < s:
            lo, hi = hi, hi * 1.01 + 1e-300
            m = counter.measure(hi)
            if m >= s:
                break
        else:
            hi, lo = lo, lo / 1.01
            m = counter.measure(lo)
            if m < s:
                break
    else:
        raise RemezError("could not bracket the sublevel target")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        m = counter.measure(mid)
        if m < s:
            lo = mid
        elif m > target_hi:
            hi = mid
        else:
            return mid
    m_hi = counter.measure(hi)
    if s <= m_hi <= target_hi:
        return hi
    raise RemezError("bisection for the sublevel level did not converge")


def normalize_to_sublevel(p, s, domain_radius, resolution=FULL_RES):
    """lambda p with sublevel_measure(lambda p, R, 1) in [s, s(1 + 1e-3)]."""
    p = _poly(p)
    area = math.pi * domain_radius**2
    if not np.any(p):
        raise ValueError("cannot normalize the zero polynomial")
    if not 0.0 < s < area:
        raise ValueError(f"s must lie in (0, {area})")
    if np.count_nonzero(np.trim_zeros(p, "b")) == 1 and len(np.trim_zeros(p, "b")) == 1:
        # constants: the sublevel set is all or nothing, level |c| takes all
        return p / abs(p[0])
    level = _level_for(_SublevelCounter(p, domain_radius, resolution), s)
    return p / level


def boundary_sup(p, domain_radius):
    """max |p| on |z| = R: 8n+64 samples, then golden-section polish."""
    p = _poly(p)
    n = len(p) - 1
    m = 8 * max(n, 0) + 64
    theta = 2 * math.pi * np.arange(m) / m
    vals = _abs_on(p, domain_radius * np.exp(1j * theta))
    k = int(np.argmax(vals))
    if n == 0:
        return float(vals[k])
    h = 2 * math.pi / m
    g = lambda t: -float(abs(P.polyval(domain_radius * np.exp(1j * t), p)))
    res = minimize_scalar(g, bracket=None, bounds=(theta[k] - h, theta[k] + h), method="bounded", options={"xatol": 1e-12})
    return max(float(vals[k]), -float(res.fun))


# ---------------------------------------------------------------- search


@dataclass
class RemezSample:
    degree: int
    s: float
    boundary_sup: float
    poly_coeffs: tuple
    domain_radius: float = 1.0

    def to_dict(self):
        return {
            "degree": self.degree,
            "s": self.s,
            "boundary_sup": self.boundary_sup,
            "domain_radius": self.domain_radius,
            "poly_coeffs": [[c.real, c.imag] for c in map(complex, self.poly_coeffs)],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["degree"]),
            float(d["s"]),
            float(d["boundary_sup"]),
            tuple(complex(*c) for c in d["poly_coeffs"]),
            float(d.get("domain_radius", 1.0)),
        )

    def replay(self, resolution=FULL_RES):
        """(measure ok, sup ok) under the archive tolerances."""
        m = sublevel_measure(self.poly_coeffs, self.domain_radius, 1.0, resolution)
        sup = boundary_sup(self.poly_coeffs, self.domain_radius)
        return m >= self.s - 1e-4, abs(sup - self.boundary_sup) <= 1e-8 * max(1.0, abs(self.boundary_sup))


class _SearchObjective:
    """log(sup_boundary |p|) - log(s-quantile of |p|) on a coarse raster."""

    def __init__(self, s, radius, resolution=SEARCH_RES):
        self.s, self.radius = s, radius
        self.raster = _Raster(radius, resolution)
        self.k = int(math.ceil(s / self.raster.cell_area)) - 1
        m = 256
        self.circle = radius * np.exp(2j * math.pi * np.arange(m) / m)

    def __call__(self, zeros):
        z = self.raster.z.ravel()
        logv = np.zeros(z.shape)
        logb = np.zeros(self.circle.shape)
        for a in zeros:
            logv += np.log(np.abs(z - a) + 1e-300)
            logb += np.log(np.abs(self.circle - a))
        q = np.partition(logv, self.k)[self.k]
        return float(logb.max() - q)


def _structured_zeros(n, s, R):
    """Candidates built from explicit witnesses."""
    delta = math.sqrt(s / math.pi)
    out = []
    # n-fold zero at the centre of a disk of area s touching the boundary
    for frac in (1.0, 0.9, 0.7, 0.5, 0.0):
        a = max(R - delta, 0.0) * frac
        out.append(np.full(n, a, dtype=complex))
    # Chebyshev nodes on a chord: sublevel sets of Chebyshev polynomials are thin
    for half in (delta, 2 * delta, 0.5 * R):
        c = R - half
        x = np.cos(math.pi * (np.arange(n) + 0.5) / n)
        out.append(c + half * x + 0j)
        out.append((c + half * x) * 1j + 0j)
    return out


def _hill_climb(obj, zeros, rng, steps, R):
    best = obj(zeros)
    step = 0.1 * R
    n = len(zeros)
    for it in range(steps):
        k = it % n
        trial = zeros.copy()
        trial[k] += step * (rng.standard_normal() + 1j * rng.standard_normal())
        if abs(trial[k]) > 1.5 * R:
            continue
        val = obj(trial)
        if val > best:
            best, zeros = val, trial
        elif it % n == n - 1:
            step = max(step * 0.85, 1e-4 * R)
    return zeros, best


def empirical_Rn(degree, s, domain_radius=1.0, restarts=4, seed=0, climb_steps=200, extra_candidates=()):
    """Largest boundary sup found over P_n(D(0,R), s): a lower bound for R_n.

    extra_candidates are coefficient arrays (e.g. optima for a larger s),
    tried before the search starts.
    """
    R = domain_radius
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if degree == 0:
        return RemezSample(0, float(s), 1.0, (1.0 + 0j,), R)
    if degree > 20:
        raise ValueError("degree above the search budget (20)")
    obj = _SearchObjective(s, R)
    cands = [z for z in _structured_zeros(degree, s, R)]
    for c in extra_candidates:
        c = np.trim_zeros(_poly(c), "b")
        if len(c) - 1 == degree:
            cands.append(P.polyroots(c))
    children = np.random.SeedSequence(seed).spawn(restarts + 1)
    rng0 = np.random.default_rng(children[0])
    for _ in range(4 * restarts):
        cands.append(R * np.sqrt(rng0.uniform(size=degree)) * np.exp(2j * math.pi * rng0.uniform(size=degree)))
    scored = sorted(((obj(z), i) for i, z in enumerate(cands)), reverse=True)
    pool = [cands[i] for _, i in scored[:restarts]]
    best_val, best_z = scored[0][0], cands[scored[0][1]]
    for child, z in zip(children[1:], pool):
        z2, val = _hill_climb(obj, np.array(z, dtype=complex), np.random.default_rng(child), climb_steps, R)
        if val > best_val:
            best_val, best_z = val, z2
    # rank the finalists at full resolution as well, keep the best
    finalists = [best_z] + [cands[i] for _, i in scored[:2]]
    best = None
    for z in finalists:
        q = normalize_to_sublevel(P.polyfromroots(z), s, R)
        sup = boundary_sup(q, R)
        if best is None or sup > best.boundary_sup:
            best = RemezSample(int(degree), float(s), sup, tuple(complex(c) for c in q), float(R))
    return best


@dataclass
class RemezFit:
    domain_radius: float
    c_fitted: float
    samples: list
    max_residual: float
    slope: float = None
    slope_in_window: bool = None
    direction: str = "samples lower-bound R_n, so c_fitted lower-bounds the best constant"

    def bound(self, degree, s):
        return (self.c_fitted * self.domain_radius**2 / s) ** degree

    def to_dict(self):
        d = asdict(self)
        d["samples"] = [x.to_dict() for x in self.samples]
        return d

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            d = json.load(fh)
        d["samples"] = [RemezSample.from_dict(x) for x in d["samples"]]
        return cls(**d)


def remez_sweep(degrees, s_values, domain_radius=1.0, restarts=4, seed=0, climb_steps=200):
    """Samples over a grid; s is processed in decreasing order per degree and
    each search is seeded with the optimum at the next larger s, which is
    admissible for the smaller s and makes the results monotone in 1/s."""
    samples = []
    for n in sorted(degrees):
        prev = ()
        for s in sorted(s_values, reverse=True):
            smp = empirical_Rn(n, s, domain_radius, restarts, seed, climb_steps, extra_candidates=prev)
            samples.append(smp)
            prev = (smp.poly_coeffs,)
    return samples


def fit_remez_constant(degrees, s_values, domain_radius=1.0, restarts=4, seed=0, climb_steps=200, samples=None):
    """c = max over samples of s sup^(1/n) / R^2, plus a shape regression.

    The regression fits ln sup = n ln(c R^2) + beta n ln(1/s) over samples of
    positive degree; (AR1) corresponds to beta = 1.
    """
    if len(set(degrees)) < 3 or len(set(s_values)) < 3:
        raise ValueError("degenerate sweep: need at least 3 degrees and 3 s-values")
    R = domain_radius
    if samples is None:
        samples = remez_sweep(degrees, s_values, R, restarts, seed, climb_steps)
    c = max(x.s / R**2 if x.degree == 0 else x.s * x.boundary_sup ** (1.0 / x.degree) / R**2 for x in samples)
    resid = [math.log(x.boundary_sup) - x.degree * math.log(c * R**2 / x.s) for x in samples]
    pos = [x for x in samples if x.degree > 0]
    A = np.array([[x.degree, x.degree * math.log(1.0 / x.s)] for x in pos])
    y = np.array([math.log(x.boundary_sup) for x in pos])
    coef = np.linalg.lstsq(A, y, rcond=None)[0]
    slope = float(coef[1])
    return RemezFit(float(R), float(c), list(samples), float(max(resid)), slope, bool(0.8 <= slope <= 1.2))


# ---------------------------------------------------------------- Kovrijkine


@dataclass
class KovrijkineReport:
    r: float
    rho: float
    p: float
    E_area: float
    M: float
    eta: float
    c: float
    lhs_sup: float
    rhs_sup: float
    lhs_lp: float
    rhs_lp: float
    ratio_sup: float
    ratio_lp: float
    required_c_dprime: float
    holds: bool

    def to_dict(self):
        return asdict(self)


def _disk_lp(phi, r, p, n_rad, n_ang):
    x, w = _legendre(n_rad)
    u = 0.5 * r * (x + 1.0)
    wu = 0.5 * r * w * u
    th = 2 * math.pi * np.arange(n_ang) / n_ang
    z = u[:, None] * np.exp(1j * th[None, :])
    return float(np.sum(wu[:, None] * (2 * math.pi / n_ang) * _abs_on(phi, z) ** p)) ** (1.0 / p)


def _disk_sup(phi, r):
    """Maximum modulus: the sup over the closed disk sits on its boundary."""
    return boundary_sup(phi, r)


def _E_sup(phi, E, n=64):
    z, _ = region_rule(E.disjoint(), n, 4 * n, None)
    edges = []
    for s in E.disjoint():
        th = s.theta_min + s.width * np.linspace(0, 1, 4 * n)
        rr = np.linspace(s.rho_min, s.rho_max, n)
        edges += [s.rho_min * np.exp(1j * th), s.rho_max * np.exp(1j * th)]
        edges += [rr * np.exp(1j * s.theta_min), rr * np.exp(1j * (s.theta_min + s.width))]
    return float(max(_abs_on(phi, z).max(), _abs_on(phi, np.concatenate(edges)).max()))


def _exp(x):
    return math.exp(x) if x < 700.0 else math.inf


def verify_kovrijkine_2d(phi, E, z0, r, rho, cfg, p=2.0):
    """Both sides of the sup and L^p forms of the planar Kovrijkine inequality.

    The constant c is max(cfg.c_remez, pi): for phi = 1 the L^p form reads
    (pi r^2/|E|)^(1/p) <= (c r^2/|E|)^(1/p), which needs c >= pi.
    required_c_dprime is the smallest c'' for which the L^p form holds here.
    """
    phi = _poly(phi)
    if not 0.0 < r < rho:
        raise ValueError("need 0 < r < rho")
    if abs(z0) >= r:
        raise ValueError("z0 must lie in D(0, r)")
    if abs(P.polyval(z0, phi)) < 1.0 - 1e-12:
        raise ValueError("need |phi(z0)| >= 1")
    area = sum(s.width / 2 * (s.rho_max**2 - s.rho_min**2) for s in E.disjoint())
    if area <= 0.0:
        raise ValueError("E must have positive measure")
    if max(s.rho_max for s in E.sectors) > r + 1e-12:
        raise ValueError("E must lie in D(0, r)")
    c = max(cfg.c_remez, math.pi)
    base = c * r**2 / area
    M = boundary_sup(phi, rho)
    eta = eta_general(r, rho, cfg)
    expo = eta * max(math.log(M), 0.0)
    n = len(phi) - 1
    n_rad, n_ang = int(math.ceil(p * n / 2)) + 24, int(math.ceil(p * n)) + 32
    lhs_sup = _disk_sup(phi, r)
    rhs_sup = _exp(expo * math.log(base)) * _E_sup(phi, E)
    lhs_lp = _disk_lp(phi, r, p, n_rad, n_ang)
    zE, wE = region_rule(E.disjoint(), n_rad, n_ang, None)
    e_lp = float(np.dot(wE, _abs_on(phi, zE) ** p)) ** (1.0 / p)
    rhs_lp = _exp((expo + 1.0 / p) * math.log(base)) * e_lp
    # smallest eta with base^(eta ln M + 1/p) >= lhs_lp / e_lp
    need = math.log(lhs_lp / e_lp) / math.log(base) - 1.0 / p
    if need <= 1e-9:
        # quadrature noise on an exact equality (constant phi) is not a violation
        req = 0.0
    elif M <= 1.0:
        req = math.inf
    else:
        req = need / math.log(M) / eta_general(r, rho, type(cfg)())
    return KovrijkineReport(
        r=float(r),
        rho=float(rho),
        p=float(p),
        E_area=float(area),
        M=float(M),
        eta=float(eta),
        c=float(c),
        lhs_sup=lhs_sup,
        rhs_sup=float(rhs_sup),
        lhs_lp=lhs_lp,
        rhs_lp=float(rhs_lp),
        ratio_sup=float(rhs_sup / lhs_sup),
        ratio_lp=float(rhs_lp / lhs_lp),
        required_c_dprime=float(req),
        holds=bool(rhs_lp >= lhs_lp * (1.0 - 1e-12)),
    )


def random_kovrijkine_trial(rng, max_degree=10):
    """(phi, E, z0, r, rho, p) with |phi(z0)| = 1 and |E|/(pi r^2) in [0.02, 0.5]."""
    from .region import AnnularSector, Region

    r = float(rng.uniform(0.3, 0.9))
    rho = float(r * rng.uniform(1.2, 2.0))
    while True:
        sectors = []
        for _ in range(int(rng.integers(1, 4))):
            a, b = np.sort(rng.uniform(0, r, size=2))
            t1 = float(rng.uniform(0, 2 * math.pi))
            sectors.append(AnnularSector(float(a), float(b), t1, t1 + float(rng.uniform(0.2, 2 * math.pi))))
        E = Region(tuple(sectors), "random")
        frac = sum(s.width / 2 * (s.rho_max**2 - s.rho_min**2) for s in E.disjoint()) / (math.pi * r**2)
        if 0.02 <= frac <= 0.5:
            break
    n = int(rng.integers(0, max_degree + 1))
    coeffs = (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)) / rho ** np.arange(n + 1)
    z0 = r * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform()) * 0.999
    v = abs(P.polyval(z0, coeffs))
    if v == 0.0:
        coeffs[0] += 1.0
        v = abs(P.polyval(z0, coeffs))
    p = float(rng.choice([1.0, 2.0, 3.0]))
    return coeffs / v, E, complex(z0), r, rho, p
