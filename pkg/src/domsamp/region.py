"""Candidate dominating sets as finite unions of annular sectors."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import phb_disk_to_euclidean

TWO_PI = 2.0 * math.pi
DENSITY_BOUNDARY_CUTOFF = 1e-3


@dataclass(frozen=True)
class AnnularSector:
    rho_min: float
    rho_max: float
    theta_min: float = 0.0
    theta_max: float = TWO_PI

    def __post_init__(self):
        if not 0.0 <= self.rho_min < self.rho_max or not math.isfinite(self.rho_max):
            raise ValueError(f"bad radial bounds [{self.rho_min}, {self.rho_max}]")
        width = self.theta_max - self.theta_min
        if not 0.0 <= width <= TWO_PI + 1e-12:
            raise ValueError(f"bad angular bounds [{self.theta_min}, {self.theta_max}]")

    @property
    def width(self):
        return min(self.theta_max - self.theta_min, TWO_PI)

    @property
    def full_circle(self):
        return self.width >= TWO_PI - 1e-12


@dataclass(frozen=True)
class Region:
    sectors: tuple = ()
    label: str = ""
    planar: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sectors", tuple(self.sectors))
        if not self.planar:
            for s in self.sectors:
                if s.rho_max > 1.0:
                    raise ValueError(f"sector {s} leaves the unit disk")

    @property
    def is_empty(self):
        return len(self.sectors) == 0

    def disjoint(self):
        """Equivalent list of pairwise disjoint sectors (union semantics)."""
        return _disjointify(self.sectors)

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        rho = np.abs(z)
        theta = np.mod(np.angle(z), TWO_PI)
        inside = np.zeros(z.shape, dtype=bool)
        for s in self.sectors:
            radial = (rho >= s.rho_min) & (rho < s.rho_max)
            if s.full_circle:
                inside |= radial
            else:
                offset = np.mod(theta - s.theta_min, TWO_PI)
                inside |= radial & (offset < s.width)
        return inside

    def to_dict(self):
        return {"label": self.label, "sectors": [asdict(s) for s in self.sectors]}

    @classmethod
    def from_dict(cls, data, planar=False):
        sectors = [AnnularSector(**s) for s in data.get("sectors", [])]
        return cls(sectors, data.get("label", ""), planar=planar)

    @classmethod
    def load(cls, path, planar=False):
        with open(path) as fh:
            return cls.from_dict(json.load(fh), planar=planar)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def _merge_intervals(intervals):
    intervals = sorted(intervals)
    merged = []
    for a, b in intervals:
        if merged and a <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(iv) for iv in merged]


def _angular_pieces(sector):
    if sector.full_circle:
        return [(0.0, TWO_PI)]
    start = sector.theta_min % TWO_PI
    end = start + sector.width
    if end <= TWO_PI:
        return [(start, end)]
    return [(start, TWO_PI), (0.0, end - TWO_PI)]


def _disjointify(sectors):
    if not sectors:
        return []
    breaks = sorted({s.rho_min for s in sectors} | {s.rho_max for s in sectors})
    bands = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        pieces = []
        for s in sectors:
            if s.rho_min <= lo and s.rho_max >= hi:
                pieces.extend(_angular_pieces(s))
        arcs = _merge_intervals(pieces)
        # re-join an arc split at theta = 0
        if len(arcs) > 1 and arcs[0][0] == 0.0 and arcs[-1][1] == TWO_PI:
            arcs = [(arcs[-1][0], TWO_PI + arcs[0][1])] + arcs[1:-1]
        if bands and bands[-1][1] == lo and bands[-1][2] == arcs:
            bands[-1][1] = hi
        else:
            bands.append([lo, hi, arcs])
    out = []
    for lo, hi, arcs in bands:
        for a, b in arcs:
            out.append(AnnularSector(lo, hi, a, min(b, a + TWO_PI)))
    return out


def region_area(E, alpha=None):
    """Normalised area A(E) (A(D) = 1), or A_alpha(E) when alpha is given.

    Per sector: width/(2 pi) * [(1 - rho_min^2)^(alpha+1) - (1 - rho_max^2)^(alpha+1)].
    """
    a = 0.0 if alpha is None else float(alpha)
    if a <= -1.0:
        raise ValueError("alpha must exceed -1")
    total = 0.0
    for s in E.disjoint():
        if alpha is None:
            radial = s.rho_max**2 - s.rho_min**2
        else:
            radial = (1.0 - s.rho_min**2) ** (a + 1) - (1.0 - s.rho_max**2) ** (a + 1)
        total += s.width / TWO_PI * radial
    return total


# --- disk / sector intersection ------------------------------------------------

_S_NODES, _S_WEIGHTS = leggauss(24)
_S_NODES = 0.5 * (_S_NODES + 1.0)
_S_WEIGHTS = 0.5 * _S_WEIGHTS
# rho = a + (b - a) (1 - cos(pi s)) / 2 clusters nodes at both ends of each
# piece and smooths the square-root behaviour of the arc length there.
_S_MAP = 0.5 * (1.0 - np.cos(np.pi * _S_NODES))
_S_JAC = 0.5 * np.pi * np.sin(np.pi * _S_NODES) * _S_WEIGHTS


def _arc_overlap(lo, hi, th1, width):
    """Length of [lo, hi] intersected with the wedge [th1, th1 + width] on the circle."""
    shift = np.floor(lo / TWO_PI) * TWO_PI
    lo = lo - shift
    hi = hi - shift
    b1 = th1 % TWO_PI
    total = np.zeros(np.broadcast(lo, hi).shape)
    for k in (-1.0, 0.0, 1.0, 2.0):
        a = b1 + k * TWO_PI
        total += np.maximum(0.0, np.minimum(hi, a + width) - np.maximum(lo, a))
    return total


def _sector_disk_area(c, R, s):
    """Lebesgue area of D(c, R) intersected with sector s, vectorised over (c, R)."""
    c = np.asarray(c, dtype=complex).ravel()
    R = np.broadcast_to(np.asarray(R, dtype=float), c.shape).ravel()
    mc = np.abs(c)
    full = s.full_circle
    cand = [np.full_like(mc, s.rho_min), np.full_like(mc, s.rho_max), mc - R, mc + R, R - mc]
    if not full:
        for th in (s.theta_min, s.theta_max):
            b = np.real(c * np.exp(-1j * th))
            disc = b**2 - mc**2 + R**2
            root = np.sqrt(np.maximum(disc, 0.0))
            for rt in (b - root, b + root):
                cand.append(np.where(disc >= 0.0, rt, s.rho_min))
    pts = np.sort(np.clip(np.stack(cand, axis=1), s.rho_min, s.rho_max), axis=1)
    lo, hi = pts[:, :-1], pts[:, 1:]
    rho = lo[..., None] + (hi - lo)[..., None] * _S_MAP
    jac = (hi - lo)[..., None] * _S_JAC
    mcb = mc[:, None, None]
    Rb = R[:, None, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        cosb = (rho**2 + mcb**2 - Rb**2) / (2 * rho * mcb)
    beta = np.arccos(np.clip(np.nan_to_num(cosb, nan=1.0), -1.0, 1.0))
    centred = (mcb == 0.0) | (rho == 0.0)
    beta = np.where(centred, np.where(rho + mcb < Rb, np.pi, 0.0), beta)
    if full:
        arc = 2 * beta
    else:
        phi0 = np.angle(c)[:, None, None]
        arc = np.where(beta >= np.pi, s.width, _arc_overlap(phi0 - beta, phi0 + beta, s.theta_min, s.width))
    return np.sum(rho * arc * jac, axis=(1, 2))


def intersect_disk_area(E, center, radius):
    """Normalised area |E cap D(center, radius)| / pi, vectorised over disks.

    The area is the radial integral of rho times the angular measure of the
    circle |z| = rho inside both the disk and the sector, computed piecewise
    between all radii where that measure has a kink.
    """
    center = np.asarray(center, dtype=complex)
    shape = center.shape
    c = center.ravel()
    R = np.broadcast_to(np.asarray(radius, dtype=float), shape).ravel()
    total = np.zeros(c.shape)
    mc = np.abs(c)
    for s in E.disjoint():
        hit = (mc + R > s.rho_min) & (mc - R < s.rho_max)
        if not s.full_circle:
            # angular prefilter: disks away from the origin subtend < pi
            with np.errstate(divide="ignore", invalid="ignore"):
                half = np.where(mc > R, np.arcsin(np.minimum(R / mc, 1.0)), np.pi)
            span = _arc_overlap(np.angle(c) - half, np.angle(c) + half, s.theta_min, s.width)
            hit &= (span > 0.0) | (half >= np.pi)
        if np.any(hit):
            total[hit] += _sector_disk_area(c[hit], R[hit], s)
    out = total / np.pi
    return out.reshape(shape) if shape else float(out[0])


# --- density -----------------------------------------------------------------------

@dataclass
class DensityReport:
    r: float
    gamma_hat: float
    argmin_center: complex
    grid_resolution: int
    # grid minimum over finitely many centres: an upper bound for the infimum
    direction: str = "gamma_hat >= true gamma (grid minimum)"

    def to_dict(self):
        d = asdict(self)
        d["argmin_center"] = [self.argmin_center.real, self.argmin_center.imag]
        return d


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def density_centers(resolution, cutoff=DENSITY_BOUNDARY_CUTOFF):
    """Polar grid of centres on |z| <= 1 - cutoff.

    Rings sit at 1 - 2^-u with u uniform, so each dyadic annulus gets the same
    number of rings; each ring is rotated by a golden-ratio offset so that
    angular structure at scale 2 pi / 2^n is not sampled at a fixed phase.
    """
    u = np.linspace(0.0, math.log2(1.0 / cutoff), resolution)
    rings = 1.0 - 2.0**-u
    j = np.arange(resolution)
    offsets = np.mod(np.arange(resolution) * _GOLDEN, 1.0)
    theta = TWO_PI * (j[None, :] + offsets[:, None]) / resolution
    return (rings[:, None] * np.exp(1j * theta)).ravel()


def local_density(E, centers, r):
    """|E cap D_phb(z, r)| / |D_phb(z, r)| at each centre."""
    c, R = phb_disk_to_euclidean(np.asarray(centers, dtype=complex), r)
    return intersect_disk_area(E, c, R) / R**2


def density(E, r, center_grid_resolution=64):
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    centers = density_centers(center_grid_resolution)
    if E.is_empty:
        return DensityReport(r, 0.0, complex(centers[0]), center_grid_resolution)
    ratios = local_density(E, centers, r)
    i = int(np.argmin(ratios))
    return DensityReport(float(r), float(min(max(ratios[i], 0.0), 1.0)), complex(centers[i]), center_grid_resolution)


def euclidean_density(E, r, centers):
    """min over centres of |E cap D(z, r)| / |D(z, r)| (planar regions)."""
    centers = np.asarray(centers, dtype=complex)
    ratios = intersect_disk_area(E, centers, r) / r**2
    i = int(np.argmin(ratios))
    return float(ratios[i]), complex(centers[i])


# --- catalogue -----------------------------------------------------------------------

def full_disk():
    return Region((AnnularSector(0.0, 1.0),), "full")


def empty_region():
    return Region((), "empty")


def annulus(a, b=1.0):
    return Region((AnnularSector(a, b),), f"annulus({a},{b})")


def annuli(eps, n_max=8):
    """Union over n <= n_max of 1 - 2^-n <= |z| < 1 - (1 - eps) 2^-n.

    The truncation keeps the whole annulus |z| >= 1 - 2^-(n_max+1), so the set
    stays relatively dense up to the circle.
    """
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    sectors = [AnnularSector(1 - 2.0**-n, 1 - (1 - eps) * 2.0**-n) for n in range(n_max + 1)]
    sectors.append(AnnularSector(1 - 2.0 ** -(n_max + 1), 1.0))
    return Region(sectors, f"annuli({eps})")


def grating(m, fill):
    """m equal angular sectors, each filling the fraction `fill` of its slot."""
    if m < 1 or not 0.0 < fill <= 1.0:
        raise ValueError("need m >= 1 and fill in (0, 1]")
    slot = TWO_PI / m
    sectors = [AnnularSector(0.0, 1.0, k * slot, k * slot + fill * slot) for k in range(m)]
    return Region(sectors, f"grating({m},{fill})")


def dyadic_grating(m, fill, n_max=8):
    """Grating whose tooth count doubles in each dyadic ring.

    Ring n (1 - 2^-n <= |z| < 1 - 2^-(n+1)) carries m 2^n teeth, so every
    pseudohyperbolic disk of fixed radius sees several teeth: unlike
    grating(m, fill) this set is relatively dense.
    """
    if m < 1 or not 0.0 < fill <= 1.0:
        raise ValueError("need m >= 1 and fill in (0, 1]")
    sectors = []
    for n in range(n_max + 1):
        teeth = m * 2**n
        slot = TWO_PI / teeth
        lo, hi = 1 - 2.0**-n, 1 - 2.0 ** -(n + 1)
        sectors += [AnnularSector(lo, hi, k * slot, k * slot + fill * slot) for k in range(teeth)]
    sectors.append(AnnularSector(1 - 2.0 ** -(n_max + 1), 1.0))
    return Region(sectors, f"dyadic_grating({m},{fill})")


def random_sectors(count, seed, rho_max=1.0):
    rng = np.random.default_rng(seed)
    sectors = []
    for _ in range(count):
        r1, r2 = np.sort(rng.uniform(0.0, rho_max, 2))
        t1 = rng.uniform(0.0, TWO_PI)
        sectors.append(AnnularSector(float(r1), float(r2), float(t1), float(t1 + rng.uniform(0.1, TWO_PI))))
    return Region(sectors, f"random_sectors({count},{seed})")


def complement_of_disks(radius, count):
    """Disk minus `count` polar holes of radial extent `radius` at 1/2."""
    sectors = [AnnularSector(0.0, 0.5 - radius / 2), AnnularSector(0.5 + radius / 2, 1.0)]
    slot = TWO_PI / count
    hole = min(radius / 0.5, slot)
    for k in range(count):
        sectors.append(AnnularSector(0.5 - radius / 2, 0.5 + radius / 2, k * slot + hole, (k + 1) * slot))
    return Region(sectors, f"complement_of_disks({radius},{count})")


_CATALOG = {
    "full": full_disk,
    "empty": empty_region,
    "annulus": annulus,
    "annuli": annuli,
    "grating": grating,
    "dyadic_grating": dyadic_grating,
    "random_sectors": random_sectors,
    "complement_of_disks": complement_of_disks,
}


def builtin_regions():
    return dict(_CATALOG)


def builtin_region(name, *args, **kwargs):
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown region {name!r}; known: {sorted(_CATALOG)}") from None
    return factory(*args, **kwargs)
