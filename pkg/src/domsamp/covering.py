"""Dyadic covering lattice z_{n,k} = (1 - 2^-n) exp(2 pi i k / 2^n).

Membership of a point in the pseudohyperbolic disks around one lattice level
reduces to an angular window: with w = rho_n e^{i phi} and z = rho e^{i theta},
rho(z, w) < r  iff  cos(theta - phi) > A, where

    A = (rho^2 + rho_n^2 - r^2 - r^2 rho^2 rho_n^2) / (2 rho rho_n (1 - r^2)).

Counting lattice points per level is then a matter of counting integers in an
interval, so grid scans cost O(n_max) per test point instead of O(2^n_max).
"""

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .geometry import DomainError

R0_SEARCH_GRID = np.round(np.arange(0.30, 0.995, 0.01), 2)
# find_covering_radius(8) at the default resolution; pinned by a test.
REFERENCE_R0 = 0.76
REFERENCE_N_MAX = 8


class LatticeIndex(NamedTuple):
    n: int
    k: int


@dataclass
class CoveringReport:
    r: float
    measured_N: int
    bound_N: float
    covering_ok: bool
    uncovered_fraction: float
    n_max: int
    grid_resolution: int
    # measured_N is a maximum over finitely many test points: a lower bound for N.
    direction: str = "measured_N <= true N (grid maximum)"

    def to_dict(self):
        return asdict(self)


def lattice_point(n, k):
    if n < 0 or not 0 <= k < 2**n:
        raise IndexError(f"invalid lattice index ({n}, {k})")
    return (1.0 - 2.0**-n) * np.exp(2j * np.pi * k / 2**n)


def lattice_indices_up_to(n_max):
    return [LatticeIndex(n, k) for n in range(n_max + 1) for k in range(2**n)]


def lattice_points_up_to(n_max):
    """All lattice points with n <= n_max, in lattice_indices_up_to order."""
    return np.concatenate(
        [(1.0 - 2.0**-n) * np.exp(2j * np.pi * np.arange(2**n) / 2**n) for n in range(n_max + 1)]
    )


def polar_grid(resolution, rho_max, rho_min=0.0):
    """resolution x resolution polar test grid, uniform in radius and angle."""
    rho = np.linspace(rho_min, rho_max, resolution)
    theta = 2 * np.pi * np.arange(resolution) / resolution
    return (rho[:, None] * np.exp(1j * theta[None, :])).ravel()


def _level_cos_threshold(rho, rho_n, r):
    with np.errstate(divide="ignore", invalid="ignore"):
        return (rho**2 + rho_n**2 - r**2 - r**2 * rho**2 * rho_n**2) / (2 * rho * rho_n * (1 - r**2))


def level_counts(z, r, n):
    """Number of k with z in D_phb(z_{n,k}, r), vectorised over z."""
    z = np.asarray(z, dtype=complex)
    size = 2**n
    rho_n = 1.0 - 2.0**-n
    rho = np.abs(z)
    degenerate = rho * rho_n == 0.0
    A = _level_cos_threshold(rho, rho_n, r)
    delta = np.arccos(np.clip(np.where(degenerate, 0.0, A), -1.0, 1.0))
    x = np.angle(z) * size / (2 * np.pi)
    h = delta * size / (2 * np.pi)
    count = np.ceil(x + h) - np.floor(x - h) - 1
    count = np.where(A >= 1.0, 0, count)
    count = np.where(A < -1.0, size, count)
    count = np.minimum(count, size)
    whole = np.where(rho**2 + rho_n**2 < r**2, size, 0)
    return np.where(degenerate, whole, count).astype(np.int64)


def level_min_distance(z, n):
    """Pseudohyperbolic distance from z to the nearest point of level n."""
    z = np.asarray(z, dtype=complex)
    size = 2**n
    rho_n = 1.0 - 2.0**-n
    rho = np.abs(z)
    x = np.angle(z) * size / (2 * np.pi)
    dphi = 2 * np.pi / size * np.abs(x - np.round(x))
    cross = 2 * rho * rho_n * np.cos(dphi)
    num = rho**2 + rho_n**2 - cross
    den = 1 + rho**2 * rho_n**2 - cross
    return np.sqrt(np.maximum(num, 0.0) / den)


def covering_distance(z, n_max):
    """min over lattice points (n <= n_max) of the distance to z."""
    out = np.full(np.shape(z), np.inf)
    for n in range(n_max + 1):
        out = np.minimum(out, level_min_distance(z, n))
    return out


def overlap_count(z, r, n_max):
    """Number of lattice disks D_phb(z_{n,k}, r), n <= n_max, containing z."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("point outside the open unit disk")
    total = np.zeros(z.shape, dtype=np.int64)
    for n in range(n_max + 1):
        total += level_counts(z, r, n)
    return total.item() if total.ndim == 0 else total


def radial_levels_hit(z, r, n_max):
    """Number of distinct levels n with some z_{n,k} in D_phb(z, r)."""
    z = np.asarray(z, dtype=complex)
    hits = np.zeros(z.shape, dtype=np.int64)
    for n in range(n_max + 1):
        hits += level_counts(z, r, n) > 0
    return hits


def radial_level_bound(r):
    """ln(4/(1-r)^2)/ln 2 + 1 admissible levels per disk."""
    return np.log(4.0 / (1.0 - r) ** 2) / np.log(2.0) + 1.0


def find_covering_radius(n_max, grid_resolution=512, boundary_margin=None, search_grid=R0_SEARCH_GRID):
    """Smallest r on the search grid whose lattice disks cover the test grid.

    The answer depends on the test-grid resolution; it is the covering radius
    of a finite set of points, not a certified value for the whole disk.
    """
    if boundary_margin is None:
        boundary_margin = 2.0**-n_max
    if grid_resolution < 64:
        raise ValueError("grid_resolution must be at least 64")
    if not 0 < boundary_margin <= 2.0**-n_max:
        raise ValueError("boundary_margin must lie in (0, 2^-n_max]")
    z = polar_grid(grid_resolution, 1.0 - boundary_margin)
    needed = covering_distance(z, n_max).max()
    ok = search_grid[search_grid > needed]
    if ok.size == 0:
        raise RuntimeError(f"no r < 1 covers |z| <= 1 - {boundary_margin} with n_max={n_max}")
    return float(ok[0])


def overlap_grid(grid_resolution, n_max):
    """Test points for overlap scans.

    Uniform polar grid on |z| <= 1 - 2^-n_max, plus rings 1 - 2^-u with u
    uniform in [0, n_max + 2] so that every dyadic level is sampled at the
    same hyperbolic density.
    """
    uniform = polar_grid(grid_resolution, 1.0 - 2.0**-n_max)
    u = np.linspace(0.0, n_max + 2, grid_resolution)
    rings = 1.0 - 2.0**-u
    theta = 2 * np.pi * np.arange(grid_resolution) / grid_resolution
    dyadic = (rings[:, None] * np.exp(1j * theta[None, :])).ravel()
    return np.concatenate([uniform, dyadic])


def measured_overlap(r, n_max, grid_resolution=256):
    return int(overlap_count(overlap_grid(grid_resolution, n_max), r, n_max).max())


def overlap_bound(r, c_ov=1.0):
    """c_ov (1-r)^-2 ln(1/(1-r))."""
    if not 0 < r < 1:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    return c_ov * np.log(1.0 / (1.0 - r)) / (1.0 - r) ** 2


def overlap_constant(r, n_max, grid_resolution=256, c_ov=1.0):
    if not 0 < r < 1:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    z = overlap_grid(grid_resolution, n_max)
    counts = overlap_count(z, r, n_max)
    inner = polar_grid(grid_resolution, 1.0 - 2.0**-n_max)
    uncovered = float(np.mean(covering_distance(inner, n_max) >= r))
    return CoveringReport(
        r=float(r),
        measured_N=int(counts.max()),
        bound_N=float(overlap_bound(r, c_ov)),
        covering_ok=uncovered == 0.0,
        uncovered_fraction=uncovered,
        n_max=int(n_max),
        grid_resolution=int(grid_resolution),
    )
