"""Pseudohyperbolic geometry of the unit disk.

All functions accept Python scalars or numpy arrays (complex points) and
broadcast in the usual way.
"""

from dataclasses import dataclass

import numpy as np

# |z| < 1 is enforced with this slack; points on the circle are rejected.
DISK_TOL = 1e-14


class DomainError(ValueError):
    pass


def _check_in_disk(*points):
    for z in points:
        if np.any(np.abs(z) >= 1.0 - DISK_TOL):
            raise DomainError("point outside the open unit disk")


def _check_radius(r):
    if np.any(np.asarray(r) <= 0.0) or np.any(np.asarray(r) >= 1.0):
        raise DomainError(f"radius must lie in (0, 1), got {r!r}")


def _out(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def phb_distance(z, w):
    """rho(z, w) = |z - w| / |1 - conj(z) w|."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    _check_in_disk(z, w)
    return _out(np.abs(z - w) / np.abs(1.0 - np.conj(z) * w))


def automorphism(a, z):
    """phi_a(z) = (a - z) / (1 - conj(a) z); an involution of the disk."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    _check_in_disk(a, z)
    return _out((a - z) / (1.0 - np.conj(a) * z))


def automorphism_derivative(a, z):
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    _check_in_disk(a, z)
    return _out(-(1.0 - np.abs(a) ** 2) / (1.0 - np.conj(a) * z) ** 2)


def phb_disk_to_euclidean(center, r):
    """Euclidean (center, radius) of the pseudohyperbolic disk D_phb(center, r).

    For a real center x the disk is D(c, R) with c = x(1-r^2)/(1-r^2 x^2) and
    R = r(1-x^2)/(1-r^2 x^2); general centers are handled by rotation, which
    amounts to replacing x by the complex center and x^2 by |center|^2.
    """
    center = np.asarray(center, dtype=complex)
    _check_in_disk(center)
    _check_radius(r)
    r = np.asarray(r, dtype=float)
    m2 = np.abs(center) ** 2
    denom = 1.0 - r**2 * m2
    return _out(center * (1.0 - r**2) / denom), _out(r * (1.0 - m2) / denom)


def phb_double(r):
    """Pseudohyperbolic doubling r -> 2r/(1+r^2)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0) or np.any(r >= 1.0):
        raise DomainError(f"radius must lie in [0, 1), got {r!r}")
    return _out(2.0 * r / (1.0 + r**2))


@dataclass(frozen=True)
class PhbDisk:
    center: complex
    radius: float

    def __post_init__(self):
        _check_in_disk(self.center)
        _check_radius(self.radius)

    @property
    def euclidean_center(self) -> complex:
        return complex(phb_disk_to_euclidean(self.center, self.radius)[0])

    @property
    def euclidean_radius(self) -> float:
        return float(phb_disk_to_euclidean(self.center, self.radius)[1])

    def contains(self, w):
        return phb_distance(self.center, w) < self.radius
