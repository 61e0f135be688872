"""Tensor-product polar quadrature on annular sectors.

Radial panels use Gauss-Legendre, switching to Gauss-Jacobi when the panel
ends on the unit circle so that the weight (1 - rho)^alpha is integrated
exactly. Full circles without breakpoints use the trapezoid rule (exact for
trigonometric polynomials); everything else uses Gauss-Legendre panels.
Breakpoints are inserted at the moduli and arguments of known zeros of the
integrand's analytic factor, where |f|^p has a kink for odd p.
"""

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

TWO_PI = 2.0 * math.pi


class QuadratureError(RuntimeError):
    pass


@lru_cache(maxsize=256)
def _legendre(n):
    x, w = leggauss(n)
    return x, w


@lru_cache(maxsize=256)
def _jacobi(n, alpha):
    x, w = roots_jacobi(n, alpha, 0.0)
    return x, w


def gauss_legendre(n, a, b):
    x, w = _legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def radial_panel(n, lo, hi, alpha=None):
    """Nodes/weights for int_lo^hi g(rho) m(rho) drho.

    m(rho) = rho for plain Lebesgue measure (alpha None) and
    m(rho) = (alpha + 1)/pi * rho (1 - rho^2)^alpha for dA_alpha.
    """
    if alpha is None:
        rho, w = gauss_legendre(n, lo, hi)
        return rho, w * rho
    if hi >= 1.0 and alpha != 0.0:
        x, w = _jacobi(n, float(alpha))
        half = 0.5 * (1.0 - lo)
        rho = lo + half * (x + 1.0)
        # (1 - rho)^alpha = half^alpha (1 - x)^alpha is carried by the Jacobi weights
        w = w * half ** (alpha + 1.0) * rho * (1.0 + rho) ** alpha
    else:
        rho, w = gauss_legendre(n, lo, hi)
        w = w * rho * (1.0 - rho**2) ** alpha
    return rho, w * (alpha + 1.0) / math.pi


def _inside(values, lo, hi, eps=1e-12):
    return sorted({float(v) for v in values if lo + eps < v < hi - eps})


def angular_panels(n_ang, theta_min, width, breaks=(), min_panel=8):
    """Angular nodes/weights over [theta_min, theta_min + width]."""
    full = width >= TWO_PI - 1e-12
    rel = [math.fmod(b - theta_min, TWO_PI) % TWO_PI for b in breaks]
    if full and not rel:
        theta = theta_min + TWO_PI * np.arange(n_ang) / n_ang
        return theta, np.full(n_ang, TWO_PI / n_ang)
    if full:
        start = theta_min + min(rel)
        rel = [(r - min(rel)) for r in rel]
        edges = [0.0] + _inside(rel, 0.0, TWO_PI) + [TWO_PI]
        base = start
    else:
        edges = [0.0] + _inside(rel, 0.0, width) + [width]
        base = theta_min
    thetas, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(min_panel, int(math.ceil(n_ang * (b - a) / TWO_PI)) + 8)
        t, w = gauss_legendre(n, base + a, base + b)
        thetas.append(t)
        weights.append(w)
    return np.concatenate(thetas), np.concatenate(weights)


def zero_breaks(zeros, levels=0, ratio=0.2, first=0.1):
    """Radial and angular breakpoints at zeros, geometrically graded.

    Each zero contributes its modulus and argument plus pairs of breaks at
    distances h ratio^k on both sides, for k = 0..levels-1 inwards and
    outwards until the distance passes 1/2, with h = min(first, (1-|z0|)/2).
    Panels near the kink of |f|^p are then never much longer than their
    distance to it.
    """
    rb, tb = [], []
    for z0 in np.atleast_1d(np.asarray(zeros, dtype=complex)):
        r0, t0 = abs(z0), float(np.angle(z0))
        rb.append(r0)
        if r0 > 0:
            tb.append(t0)
        if levels == 0:
            continue
        h = min(first, 0.5 * (1.0 - r0)) if r0 < 1.0 else first
        dists = [h * ratio**k for k in range(levels)]
        d = h / ratio
        while d < 0.5:
            dists.append(d)
            d /= ratio
        for d in dists:
            rb += [r0 - d, r0 + d]
            if r0 > 0:
                dt = min(d / r0, math.pi / 2)
                tb += [t0 - dt, t0 + dt]
    return rb, tb


def focus_breaks(a, ratio=2.0):
    """Breaks graded towards the boundary point a/|a| at scale 1 - |a|.

    Functions built from the automorphism phi_a vary on the length scale
    |z - a/|a||, so panels growing geometrically away from a/|a| keep the
    integrand equally smooth on every panel.
    """
    a = complex(a)
    h = 1.0 - abs(a)
    if abs(a) == 0.0:
        return [], []
    t0 = float(np.angle(a))
    rb, tb = [], []
    d = h / ratio**2
    while d < 1.0:
        rb.append(1.0 - d)
        tb += [t0 - min(d, math.pi), t0 + min(d, math.pi)]
        d *= ratio
    tb.append(t0)
    return rb, tb


def sector_rule(sector, n_rad, n_ang, alpha=None, rho_breaks=(), theta_breaks=(), min_panel=8):
    """Nodes z and weights w with sum w g(z) ~ integral of g over the sector."""
    rb = [sector.rho_min] + _inside(rho_breaks, sector.rho_min, sector.rho_max) + [sector.rho_max]
    rhos, rws = [], []
    for lo, hi in zip(rb[:-1], rb[1:]):
        # Gauss error decays like width^(2n), so short panels need fewer nodes
        n = min(n_rad, int(math.ceil(n_rad * (hi - lo))) + 6)
        r, w = radial_panel(n, lo, hi, alpha)
        rhos.append(r)
        rws.append(w)
    rho = np.concatenate(rhos)
    wr = np.concatenate(rws)
    theta, wt = angular_panels(n_ang, sector.theta_min, sector.width, theta_breaks, min_panel)
    z = rho[:, None] * np.exp(1j * theta[None, :])
    return z.ravel(), (wr[:, None] * wt[None, :]).ravel()


def region_rule(sectors, n_rad, n_ang, alpha=None, rho_breaks=(), theta_breaks=(), min_panel=8):
    zs, ws = [], []
    for s in sectors:
        z, w = sector_rule(s, n_rad, n_ang, alpha, rho_breaks, theta_breaks, min_panel)
        zs.append(z)
        ws.append(w)
    if not zs:
        return np.zeros(0, dtype=complex), np.zeros(0)
    return np.concatenate(zs), np.concatenate(ws)


def integrate(integrand, sectors, n_rad, n_ang, alpha=None, breaks=((), ()), rtol=1e-10, max_doublings=3, min_panel=8):
    """Integrate with a refinement check; raises QuadratureError if it stalls.

    The result at (n_rad, n_ang) is compared with the one at doubled node
    counts; on disagreement both counts keep doubling.
    """
    if max_doublings < 1:
        raise ValueError("max_doublings must be at least 1")
    sectors = list(sectors)
    if not sectors:
        return 0.0
    rb, tb = breaks
    z, w = region_rule(sectors, n_rad, n_ang, alpha, rb, tb, min_panel)
    prev = float(np.dot(w, integrand(z)))
    for _ in range(max_doublings):
        n_rad, n_ang, min_panel = 2 * n_rad, 2 * n_ang, 2 * min_panel
        z, w = region_rule(sectors, n_rad, n_ang, alpha, rb, tb, min_panel)
        cur = float(np.dot(w, integrand(z)))
        change = abs(cur - prev)
        if change <= rtol * abs(cur) or cur == 0.0:
            return cur
        prev = cur
    raise QuadratureError(f"quadrature did not reach rtol={rtol} (last change {change:.3e})")


def disk_rule(center, radius, n_rad, n_ang):
    """Polar rule about an arbitrary Euclidean disk, plain Lebesgue measure.

    Vectorised over arrays of centres/radii: returns arrays of shape
    (n_disks, n_rad * n_ang).
    """
    center = np.atleast_1d(np.asarray(center, dtype=complex))
    radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape)
    x, w = _legendre(n_rad)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w * u
    psi = TWO_PI * (np.arange(n_ang) + 0.5) / n_ang
    unit = (u[:, None] * np.exp(1j * psi[None, :])).ravel()
    wunit = (wu[:, None] * np.full(n_ang, TWO_PI / n_ang)[None, :]).ravel()
    z = center[:, None] + radius[:, None] * unit[None, :]
    return z, radius[:, None] ** 2 * wunit[None, :]
