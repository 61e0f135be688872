"""Closed-form bound shapes, their unnamed absolute constants, and calibration.

Every absolute constant defaults to 1 with provenance "default-1". Calibration
replaces a constant by the value forced by measurements and records
"calibrated:<experiment ids>".
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .analysis import SpaceParams
from .covering import overlap_bound

CONSTANT_FIELDS = ("c_remez", "c1", "c_dprime", "c_ov", "D_const", "k_nec")


class CalibrationError(ValueError):
    pass


def _default_provenance():
    return {k: "default-1" for k in CONSTANT_FIELDS}


@dataclass(frozen=True)
class BoundConfig:
    c_remez: float = 1.0
    c1: float = 1.0
    c_dprime: float = 1.0
    c_ov: float = 1.0
    D_const: float = 1.0
    k_nec: float = 1.0
    provenance: dict = field(default_factory=_default_provenance)

    def __post_init__(self):
        for k in CONSTANT_FIELDS:
            v = getattr(self, k)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{k} must be a positive finite number, got {v}")
        prov = _default_provenance()
        prov.update(self.provenance or {})
        object.__setattr__(self, "provenance", prov)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {k: float(d[k]) for k in CONSTANT_FIELDS if k in d}
        return cls(**known, provenance=dict(d.get("provenance", {})))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def with_constant(self, name, value, source):
        prov = dict(self.provenance)
        prov[name] = f"calibrated:{source}"
        return replace(self, **{name: float(value)}, provenance=prov)


def _check_r(r):
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r}")


def exponent_L(r, params, cfg):
    """c1 ((1+alpha)/p) (1-r)^-4 ln(1/(1-r))."""
    _check_r(r)
    return cfg.c1 * (1.0 + params.alpha) / params.p * math.log(1.0 / (1.0 - r)) / (1.0 - r) ** 4


def eta_general(r, rho, cfg):
    """c'' rho^4/(rho-r)^4 ln(rho/(rho-r))."""
    if not 0.0 < r < rho:
        raise ValueError(f"need 0 < r < rho, got r={r}, rho={rho}")
    q = rho / (rho - r)
    return cfg.c_dprime * q**4 * math.log(q)


def eta_bergman(r, cfg):
    _check_r(r)
    return eta_general(r, 1.0, cfg)


def K_good(N, c, p):
    """(N/(1-c))^(1/p)."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    if N < 1 or p < 1:
        raise ValueError("need N >= 1 and p >= 1")
    return (N / (1.0 - c)) ** (1.0 / p)


def M_bound(r1, params, K, cfg):
    """D K (1-r1^2)^(-2(2+alpha)/p)."""
    if not 0.0 <= r1 < 1.0:
        raise ValueError(f"r1 must lie in [0, 1), got {r1}")
    return cfg.D_const * K * (1.0 - r1**2) ** (-2.0 * (2.0 + params.alpha) / params.p)


def theoretical_lower(gamma, r, params, cfg):
    """(gamma/c)^L clamped to [0, 1]; c is the Remez constant."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    L = exponent_L(r, params, cfg)
    log_val = L * math.log(gamma / cfg.c_remez)
    return 1.0 if log_val >= 0.0 else math.exp(log_val)


def necessary_upper(gamma, p, k_nec):
    """k_nec gamma^(1/p): what any sampling constant must respect."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    return k_nec * gamma ** (1.0 / p)


def luecking_overlay(gamma, p, c_p=1.0):
    """(gamma e^{-c_p/gamma})^(1/p), the older bound shape; c_p is unspecified."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return (gamma * math.exp(-c_p / gamma)) ** (1.0 / p)


# ---------------------------------------------------------------- calibration


@dataclass(frozen=True)
class Experiment:
    """One measurement feeding calibration.

    kind / values:
      overlap     r, N
      remez       degree, s, boundary_sup, radius
      sandwich    gamma, r, C, p, alpha
      necessity   gamma, C, p
      kovrijkine  required_c_dprime
      m_bound     r1, K, M, p, alpha
    """

    kind: str
    values: dict
    source: str = "unnamed"


def required_c_ov(r, N):
    return N / overlap_bound(r, 1.0)


def required_c_remez(degree, s, boundary_sup, radius):
    if degree == 0:
        return s / radius**2
    return s * boundary_sup ** (1.0 / degree) / radius**2


def required_c1(gamma, r, C, params, c_remez):
    """Smallest c1 with (gamma/c)^L <= C; every larger c1 is valid too."""
    if C >= 1.0:
        return 0.0
    if gamma >= c_remez:
        return math.inf
    shape = exponent_L(r, params, BoundConfig())
    return math.log(C) / (math.log(gamma / c_remez) * shape)


def required_k_nec(gamma, C, p):
    if gamma <= 0.0:
        return math.inf if C > 0 else 0.0
    return C / gamma ** (1.0 / p)


def required_D(r1, K, M, params):
    return M / M_bound(r1, params, K, BoundConfig())


_ORDER = ("overlap", "remez", "kovrijkine", "m_bound", "necessity", "sandwich")
_TARGET = {
    "overlap": "c_ov",
    "remez": "c_remez",
    "kovrijkine": "c_dprime",
    "m_bound": "D_const",
    "necessity": "k_nec",
    "sandwich": "c1",
}


def _required(e, cfg):
    v = e.values
    if e.kind == "overlap":
        return required_c_ov(v["r"], v["N"])
    if e.kind == "remez":
        return required_c_remez(v["degree"], v["s"], v["boundary_sup"], v["radius"])
    if e.kind == "kovrijkine":
        return v["required_c_dprime"]
    if e.kind == "m_bound":
        return required_D(v["r1"], v["K"], v["M"], SpaceParams(v["p"], v["alpha"]))
    if e.kind == "necessity":
        return required_k_nec(v["gamma"], v["C"], v["p"])
    if e.kind == "sandwich":
        return required_c1(v["gamma"], v["r"], v["C"], SpaceParams(v["p"], v["alpha"]), cfg.c_remez)
    raise CalibrationError(f"unknown experiment kind {e.kind!r}")


def calibrate(experiments, cfg=None):
    """Set each constant to the extreme value its experiments force.

    Every constant here enters as "bound holds for all values on one side of a
    threshold", so the fit is the envelope (max of per-experiment requirements),
    which leaves every calibration point on the valid side. Kinds are processed
    so that c_remez is settled before c1, which depends on it.
    """
    cfg = cfg or BoundConfig()
    experiments = list(experiments)
    if not experiments:
        raise CalibrationError("no experiments")
    groups = {}
    for e in experiments:
        if e.kind not in _TARGET:
            raise CalibrationError(f"unknown experiment kind {e.kind!r}")
        groups.setdefault(e.kind, []).append(e)
    for kind in _ORDER:
        group = groups.get(kind)
        if not group:
            continue
        if len(group) < 3:
            raise CalibrationError(f"degenerate fit: {len(group)} {kind} experiment(s), need at least 3")
        req = [_required(e, cfg) for e in group]
        value = max(req)
        if not math.isfinite(value):
            raise CalibrationError(f"{kind}: some experiment admits no finite constant")
        if value <= 0.0:
            # every point is satisfied by any positive constant; keep the current one
            continue
        source = ",".join(sorted({e.source for e in group}))
        cfg = cfg.with_constant(_TARGET[kind], value, source)
    return cfg


# ---------------------------------------------------------------- reports


@dataclass
class BoundReport:
    gamma: float
    r: float
    params: SpaceParams
    L: float
    eta: float
    N_bound: float
    K: float
    M_bound: float
    C_lower_theory: float
    C_upper_necessary: float
    C_measured: float = None
    lower_ok: bool = None
    upper_ok: bool = None
    direction: str = (
        "gamma is a grid upper bound (true gamma <= gamma_hat) and C_measured is a "
        "polynomial-subspace value (true C <= C_measured)"
    )

    def to_dict(self):
        d = asdict(self)
        d["params"] = {"p": self.params.p, "alpha": self.params.alpha}
        return d


def bound_report(gamma, r, params, cfg, C_measured=None, c=0.5):
    L = exponent_L(r, params, cfg)
    N = float(overlap_bound(r, cfg.c_ov))
    K = K_good(max(N, 1.0), c, params.p)
    lower = theoretical_lower(gamma, r, params, cfg) if gamma > 0 else 0.0
    upper = necessary_upper(gamma, params.p, cfg.k_nec)
    rep = BoundReport(
        gamma=float(gamma),
        r=float(r),
        params=params,
        L=L,
        eta=eta_bergman(r, cfg),
        N_bound=N,
        K=K,
        M_bound=M_bound(r, params, K, cfg),
        C_lower_theory=lower,
        C_upper_necessary=upper,
    )
    if C_measured is not None:
        rep.C_measured = float(C_measured)
        rep.lower_ok = bool(lower <= C_measured * (1.0 + 1e-12))
        rep.upper_ok = bool(C_measured <= upper * (1.0 + 1e-12))
    return rep
