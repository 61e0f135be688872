"""Sampling ratios, optimal constants on polynomial subspaces, K-good disks."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize

from .analysis import (
    FULL_SECTOR,
    AnalyticFunction,
    GramPencil,
    SpaceParams,
    bergman_norm,
    evaluate,
    full_gram_diagonal,
    lp_mass,
)
from .covering import REFERENCE_R0, lattice_indices_up_to, lattice_points_up_to, measured_overlap
from .geometry import phb_disk_to_euclidean
from .quadrature import disk_rule, region_rule
from .region import annulus


class SamplingError(ValueError):
    pass


def _coeff_pairs(coeffs):
    return [[float(np.real(c)), float(np.imag(c))] for c in coeffs]


@dataclass
class SamplingResult:
    C_hat: float
    degree: int
    params: SpaceParams
    region_label: str
    extremal_coeffs: tuple
    method: str = "eigen"
    # C_hat minimises over Pol_degree only, so it bounds the true constant from above
    direction: str = "C_hat(degree) >= C (restricted to polynomials)"

    def to_dict(self):
        return {
            "C_hat": self.C_hat,
            "degree": self.degree,
            "p": self.params.p,
            "alpha": self.params.alpha,
            "region_label": self.region_label,
            "extremal_coeffs": _coeff_pairs(self.extremal_coeffs),
            "method": self.method,
            "direction": self.direction,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def sampling_ratio(f, E, params, rtol=1e-10):
    """||f||_{L^{p,alpha}(E)} / ||f||_{A^{p,alpha}}."""
    total = bergman_norm(f, params, rtol=rtol)
    if total == 0.0:
        raise SamplingError("sampling ratio of the zero function")
    if E.is_empty:
        return 0.0
    return bergman_norm(f, params, E, rtol=rtol) / total


def optimal_constant_p2(E, degree, alpha):
    """sqrt of the smallest eigenvalue of the pencil (G_E, G_full)."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    d = full_gram_diagonal(degree, alpha)
    if d.min() < 1e-300:
        raise SamplingError(f"full Gram diagonal underflows at degree {degree}")
    pencil = GramPencil.build(E, degree, alpha)
    w = 1.0 / np.sqrt(d)
    H = w[:, None] * pencil.G_E * w[None, :]
    H = 0.5 * (H + H.conj().T)
    lam, vec = np.linalg.eigh(H)
    x = w * vec[:, 0]
    # fix the phase so the output is reproducible bit for bit
    k = int(np.argmax(np.abs(x)))
    x = x * abs(x[k]) / x[k]
    coeffs = np.conj(x) / math.sqrt(np.sum(np.abs(x) ** 2 * d))
    C = math.sqrt(min(max(float(lam[0]), 0.0), 1.0))
    return SamplingResult(C, degree, SpaceParams(2.0, alpha), E.label, tuple(coeffs))


class _RatioObjective:
    """ratio(c) = int_E |f_c|^p / int_D |f_c|^p with its gradient.

    Coefficients are whitened: c = W y with W = G_full^{-1/2} (diagonal), and
    y is packed as the real vector [Re y, Im y]. For p = 2 both integrals are
    exact Gram forms; otherwise a fixed polar rule is used for both.
    """

    def __init__(self, E, degree, params):
        self.m = degree + 1
        self.p = params.p
        self.W = 1.0 / np.sqrt(full_gram_diagonal(degree, params.alpha))
        self.full = E.is_empty is False and _is_full(E)
        if params.p == 2.0:
            pencil = GramPencil.build(E, degree, params.alpha)
            self.G_E, self.G_full = pencil.G_E, pencil.G_full
        else:
            n_rad = int(math.ceil((params.p * degree + 1) / 2)) + 16
            n_ang = int(math.ceil(params.p * degree)) + 16
            zE, self.wE = region_rule(E.disjoint(), n_rad, n_ang, params.alpha)
            zD, self.wD = region_rule([FULL_SECTOR], n_rad, n_ang, params.alpha)
            self.VE = np.vander(zE, self.m, increasing=True) if len(zE) else np.zeros((0, self.m))
            self.VD = np.vander(zD, self.m, increasing=True)

    def coeffs(self, x):
        return self.W * (x[: self.m] + 1j * x[self.m :])

    def _mass(self, c, which):
        if self.p == 2.0:
            G = self.G_E if which == "E" else self.G_full
            y = np.conj(c)
            Gy = G @ y
            return float(np.real(np.vdot(y, Gy))), 2.0 * Gy, True
        V, w = (self.VE, self.wE) if which == "E" else (self.VD, self.wD)
        u = V @ c
        a = np.abs(u)
        mass = float(np.dot(w, a**self.p))
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(a > 0, self.p * w * a ** (self.p - 2.0) * u, 0.0)
        return mass, V.conj().T @ g, False

    def __call__(self, x):
        c = self.coeffs(x)
        num, hn, conj_n = self._mass(c, "E")
        den, hd, _ = self._mass(c, "D")
        R = num / den
        h = (hn - R * hd) / den
        if conj_n:
            # gradient of a form in conj(c): flip the imaginary part
            h = np.conj(h)
        grad = np.concatenate([self.W * np.real(h), self.W * np.imag(h)])
        return R, grad


def _is_full(E):
    return any(s.rho_min == 0.0 and s.rho_max >= 1.0 and s.full_circle for s in E.sectors)


def extremal_search(E, degree, params, restarts=8, seed=0, warm_start=None, eigen_start=True):
    """Minimise the sampling ratio over Pol_degree by restarted quasi-Newton descent.

    Deterministic given seed: restart k draws from the k-th child of
    SeedSequence(seed). Unless eigen_start is False, the p = 2 eigenvector is
    among the starts.
    The returned C_hat is recomputed with the accurate norm routine.
    """
    if params.p < 1:
        raise ValueError("p must be >= 1")
    m = degree + 1
    if E.is_empty:
        c = np.zeros(m, dtype=complex)
        c[0] = 1.0
        return SamplingResult(0.0, degree, params, E.label, tuple(c), method="search")
    obj = _RatioObjective(E, degree, params)
    starts = []
    if eigen_start:
        starts.append(np.asarray(optimal_constant_p2(E, degree, params.alpha).extremal_coeffs))
    if warm_start is not None:
        ws = np.zeros(m, dtype=complex)
        ws[: len(warm_start)] = warm_start
        starts.append(ws)
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        y = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        starts.append(y * obj.W)
    best_val, best_c = math.inf, None
    for c0 in starts:
        y0 = np.asarray(c0) / obj.W
        x0 = np.concatenate([y0.real, y0.imag])
        x0 /= np.linalg.norm(x0)
        res = minimize(obj, x0, jac=True, method="L-BFGS-B", options={"maxiter": 500, "gtol": 1e-12, "ftol": 1e-15})
        val = float(res.fun)
        if val < best_val:
            best_val, best_c = val, obj.coeffs(res.x)
    f = AnalyticFunction(best_c)
    if params.p == 2.0:
        c = np.asarray(best_c)
        G_E = obj.G_E
        num = float(np.real(c @ G_E @ np.conj(c)))
        den = float(np.sum(np.abs(c) ** 2 * np.diag(obj.G_full).real))
        C = math.sqrt(max(num, 0.0) / den)
    else:
        C = sampling_ratio(f, E, params)
    c = np.asarray(best_c) / bergman_norm(f, params)
    return SamplingResult(min(C, 1.0), degree, params, E.label, tuple(c), method="search")


def extremal_sweep(E, degrees, params, restarts=8, seed=0):
    """extremal_search over increasing degrees, each warm-started from the last."""
    out, warm = [], None
    for n in sorted(degrees):
        res = extremal_search(E, n, params, restarts, seed, warm_start=warm)
        if out and res.C_hat > out[-1].C_hat:
            # the previous optimum is still feasible at the larger degree
            prev = out[-1]
            res = SamplingResult(prev.C_hat, n, params, E.label, tuple(prev.extremal_coeffs) + (0j,) * (n - prev.degree), "search")
        out.append(res)
        warm = res.extremal_coeffs
    return out


# ---------------------------------------------------------------- good disks


def _disk_nodes(f, params):
    deg = max(f.degree, 1)
    n_rad = int(math.ceil(params.p * deg / 2)) + 24
    n_ang = int(math.ceil(params.p * deg)) + 32
    return n_rad, n_ang


def local_masses(f, params, r, n_max, nodes=None):
    """int over D_phb(z_{n,k}, r) of |f|^p dA_alpha, in lattice order."""
    centers = lattice_points_up_to(n_max)
    c, R = phb_disk_to_euclidean(centers, r)
    n_rad, n_ang = nodes or _disk_nodes(f, params)
    z, w = disk_rule(c, R, n_rad, n_ang)
    alpha = params.alpha
    dens = (alpha + 1.0) / math.pi * (1.0 - np.abs(z) ** 2) ** alpha
    return np.sum(w * dens * np.abs(evaluate(f, z)) ** params.p, axis=1)


@dataclass
class GoodDiskSet:
    indices: list
    K: float
    s: float
    t: float
    good_mass_fraction: float
    n_max: int
    total_mass: float
    masses_s: np.ndarray = field(repr=False, default=None)
    masses_t: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {
            "indices": [[i.n, i.k] for i in self.indices],
            "K": self.K,
            "s": self.s,
            "t": self.t,
            "good_mass_fraction": self.good_mass_fraction,
            "n_max": self.n_max,
            "total_mass": self.total_mass,
        }


def _check_good_params(s, t, K=None):
    if not s < t < 1.0:
        raise ValueError(f"need s < t < 1, got s={s}, t={t}")
    if s < REFERENCE_R0:
        raise ValueError(f"s={s} is below the covering radius {REFERENCE_R0}")
    if K is not None and not K > 1.0:
        raise ValueError("K must exceed 1")


def good_disks(f, params, s, t, K, n_max, masses=None):
    """Indices with ||f||_{L^{p,alpha}(D^t)} <= K ||f||_{L^{p,alpha}(D^s)}.

    Equality within 1e-10 (relative) counts as good. `masses` may carry
    precomputed (masses_s, masses_t, total_mass).
    """
    _check_good_params(s, t, K)
    if masses is None:
        ms, mt = local_masses(f, params, s, n_max), local_masses(f, params, t, n_max)
        total = lp_mass(f, params)
    else:
        ms, mt, total = masses
    if total <= 0.0:
        raise SamplingError("good disks of the zero function")
    Kp = K ** params.p if math.isfinite(K) else math.inf
    good = mt <= Kp * ms * (1.0 + 1e-10) + 1e-300
    idx = [i for i, g in zip(lattice_indices_up_to(n_max), good) if g]
    frac = float(np.sum(ms[good]) / total)
    return GoodDiskSet(idx, float(K), float(s), float(t), frac, int(n_max), float(total), ms, mt)


@dataclass
class GoodMassReport:
    passed: bool
    c: float
    N: int
    K: float
    good_mass_fraction: float
    tail_fraction: float
    covered_radius: float
    frame_lower: float
    frame_upper: float
    N_s: int
    frame_ok: bool
    n_good: int
    n_total: int
    p: float
    alpha: float
    coeffs: list = None

    def to_dict(self):
        return asdict(self)


def _tail_fraction(f, params, radius, total):
    return lp_mass(f, params, annulus(radius, 1.0)) / total


def verify_good_mass(f, params, s, t, c, n_max, grid_resolution=256, N=None, N_s=None, masses=None):
    """Check good-disk mass >= c with K^p = N / (1 - c), N measured at radius t.

    The lattice truncated at level n_max covers |z| <= 1 - 2^-(n_max-1) at
    radius s (the outermost ring of the disk 1 - 2^-n_max is not covered), so
    the tail mass of f beyond that radius is subtracted from both the target
    and the lower frame bound.
    """
    if not 0.0 < c < 1.0:
        raise ValueError("c must lie in (0, 1)")
    _check_good_params(s, t)
    if N is None:
        N = measured_overlap(t, n_max, grid_resolution)
    if N_s is None:
        N_s = measured_overlap(s, n_max, grid_resolution)
    if masses is None:
        masses = (local_masses(f, params, s, n_max), local_masses(f, params, t, n_max), lp_mass(f, params))
    ms, mt, total = masses
    K = (N / (1.0 - c)) ** (1.0 / params.p)
    gd = good_disks(f, params, s, t, K, n_max, masses)
    radius = 1.0 - 2.0 ** -(n_max - 1)
    tail = _tail_fraction(f, params, radius, total)
    lower = float(np.sum(ms) / total)
    upper = float(np.sum(mt) / total)
    frame_ok = (lower >= 1.0 - tail - 1e-6) and (lower <= N_s + 1e-6) and (upper <= N + 1e-6)
    passed = gd.good_mass_fraction >= c - 1e-6 - tail
    return GoodMassReport(
        passed=bool(passed and frame_ok),
        c=float(c),
        N=int(N),
        K=float(K),
        good_mass_fraction=gd.good_mass_fraction,
        tail_fraction=float(tail),
        covered_radius=radius,
        frame_lower=lower,
        frame_upper=upper,
        N_s=int(N_s),
        frame_ok=bool(frame_ok),
        n_good=len(gd.indices),
        n_total=len(ms),
        p=params.p,
        alpha=params.alpha,
        coeffs=None if passed and frame_ok else _coeff_pairs(f.coeffs),
    )
