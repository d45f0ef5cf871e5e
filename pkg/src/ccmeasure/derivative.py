"""Metric derivatives of degree k and the estimators built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spaces as sp
from ._parallel import parallel_map
from .curves import ParametricCurve, reparameterized
from .errors import EstimateError, InputError


@dataclass(frozen=True)
class ScaleLadder:
    s0: float
    ratio: float = 0.5
    count: int = 12

    def __post_init__(self):
        if not self.s0 > 0:
            raise InputError("ladder s0 must be positive")
        if not 0 < self.ratio < 1:
            raise InputError("ladder ratio must lie in (0, 1)")
        if self.count < 3:
            raise InputError("ladder needs at least three levels")

    @classmethod
    def for_curve(cls, curve, ratio=0.5, count=12):
        return cls(0.1 * curve.length, ratio, count)

    @property
    def scales(self):
        return self.s0 * self.ratio ** np.arange(self.count)

    @property
    def smallest(self):
        return self.s0 * self.ratio ** (self.count - 1)


@dataclass
class DerivativeEstimate:
    t: float
    k: float
    value: float
    ladder_ratios: list = field(default_factory=list)  # (signed s, ratio)
    converged: bool = False
    spread: float = 0.0
    limit: str = "finite"  # "finite" | "zero" | "infinite"
    tail_slope: float = 0.0
    gap: float = 0.0

    @property
    def ratio(self):
        return self.value ** (1.0 / self.k) if math.isfinite(self.value) else math.inf


def _ladder_samples(space, curve, t, ladder):
    """Signed offsets actually used and the distances they produce."""
    t = float(curve.check_time(t))
    floor = sp.resolution_floor(space)
    if ladder.smallest <= 0 or ladder.s0 <= floor:
        raise InputError("ladder scales fall below the distance resolution")
    offsets = []
    for j, s in enumerate(ladder.scales):
        for sign in (1.0, -1.0):
            u = min(max(t + sign * s, curve.a), curve.b)
            if u != t:
                offsets.append((j, u - t))
    if not offsets:
        raise InputError("degenerate ladder: no admissible offsets")
    levels = np.array([o[0] for o in offsets])
    ds = np.array([o[1] for o in offsets])
    base = curve.eval(t)
    pts = curve.eval(t + ds)
    dist, gap = sp.distances(space, pts, base[None, :])
    return levels, ds, dist, gap


def meas_k_estimate(space, curve: ParametricCurve, t: float, k: float,
                    ladder: ScaleLadder | None = None, rel_tol: float = 0.01,
                    slope_tol: float = 0.05) -> DerivativeEstimate:
    """Estimate ``meas^k_t`` from a two-sided ladder of difference quotients
    ``d(gamma(t+s), gamma(t)) / |s|^(1/k)``.

    The log-log slope of the quotients over the finer half of the ladder
    decides the regime: above ``slope_tol`` the quotients vanish (value 0),
    below ``-slope_tol`` they blow up (value inf, not converged). Otherwise
    the value is the k-th power of the mean over the last three levels, and
    the estimate is converged when those quotients agree within ``rel_tol``
    (inflated by the distance gaps).
    """
    if k < 1:
        raise InputError("degree k must be >= 1")
    ladder = ladder or ScaleLadder.for_curve(curve)
    levels, ds, dist, gap = _ladder_samples(space, curve, t, ladder)
    absd = np.abs(ds)
    ratios = dist / absd ** (1.0 / k)
    gap_ratio = gap / absd ** (1.0 / k)
    pairs = [(float(s), float(r)) for s, r in zip(ds, ratios)]

    used = np.unique(levels)
    per_level = np.array([ratios[levels == j].mean() for j in used])
    scale = np.array([absd[levels == j].mean() for j in used])
    tail = slice(len(used) // 2, None)
    last3 = np.isin(levels, used[-3:])
    gap_rel = float(np.max(gap_ratio[last3]))

    if np.all(dist[last3] <= gap[last3]):
        return DerivativeEstimate(float(t), k, 0.0, pairs, True, 0.0, "zero", math.inf, gap_rel)
    if np.any(per_level[tail] <= 0):
        slope = math.inf
    else:
        slope = float(np.polyfit(np.log(scale[tail]), np.log(per_level[tail]), 1)[0])

    if slope > slope_tol:
        return DerivativeEstimate(float(t), k, 0.0, pairs, True, 0.0, "zero", slope, gap_rel)
    r3 = ratios[last3]
    mean = float(r3.mean())
    spread = float((r3.max() - r3.min()) / mean)
    if slope < -slope_tol:
        return DerivativeEstimate(float(t), k, math.inf, pairs, False, spread, "infinite",
                                  slope, gap_rel)
    converged = spread <= rel_tol + 2 * gap_rel / mean
    return DerivativeEstimate(float(t), k, mean**k, pairs, converged, spread, "finite",
                              slope, gap_rel)


def degree_estimate(space, curve, t, ladder: ScaleLadder | None = None):
    """``(k_hat, fit_residual)`` from the slope of log d against log |s|."""
    ladder = ladder or ScaleLadder.for_curve(curve)
    _, ds, dist, _ = _ladder_samples(space, curve, t, ladder)
    if np.any(dist <= 0):
        return math.inf, 0.0
    x, y = np.log(np.abs(ds)), np.log(dist)
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    slope = float(coef[0])
    resid = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    if slope <= 0:
        return math.inf, resid
    return 1.0 / slope, resid


@dataclass
class MC1kReport:
    k: float
    times: np.ndarray
    profile: np.ndarray
    estimates: list
    passed: bool
    failed_times: list
    max_jump: float


def default_grid(curve, count=64):
    return np.linspace(curve.a, curve.b, count)


def meas_profile(space, curve, k, grid, ladder=None, rel_tol=0.01):
    grid = np.asarray(grid, dtype=float)
    return parallel_map(lambda t: meas_k_estimate(space, curve, t, k, ladder, rel_tol), grid)


def mc1k_check(space, curve, k, grid=None, rel_tol=0.01, jump_tol=0.05,
               ladder=None) -> MC1kReport:
    """Grid proxy for the m-C1_k property: every estimate converged and the
    profile moves by at most ``jump_tol`` (relative to its sup) between
    adjacent grid times."""
    grid = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise InputError("grid must be strictly increasing")
    ests = meas_profile(space, curve, k, grid, ladder, rel_tol)
    profile = np.array([e.value for e in ests])
    failed = [float(e.t) for e in ests if not e.converged]
    finite = np.isfinite(profile)
    top = float(np.max(profile[finite])) if finite.any() else 0.0
    if top > 0 and finite.all():
        gap_allow = max(2 * k * e.gap / max(e.ratio, 1e-300) for e in ests if e.value > 0)
        jumps = np.abs(np.diff(profile)) / top
        max_jump = float(jumps.max()) if len(jumps) else 0.0
        smooth = max_jump <= jump_tol + gap_allow
    else:
        max_jump = 0.0 if finite.all() else math.inf
        smooth = finite.all()
    return MC1kReport(k, grid, profile, ests, not failed and smooth, failed, max_jump)


def _left_translated_velocity(space, p, v):
    if space.kind == "euclidean":
        return v
    inv = sp.group_inverse(space, p)
    # q -> p^-1 * q is affine in q for both groups, so this is exact
    return sp.group_compose(space, inv, p + v) - sp.group_compose(space, inv, p)


def carnot_analytic_meas(space, curve: ParametricCurve, t: float, k) -> float:
    """``d(0, x(t))^k`` where ``x(t)`` keeps the weight-k components of the
    left-translated velocity and zeroes the rest.

    Returns inf when the velocity has a nonzero component of weight above k
    (the curve is not tangent to the k-th layer of the flag there).
    """
    if float(k) != int(k) or k < 1:
        raise InputError("the analytic formula needs a positive integer k")
    k = int(k)
    if not curve.has_derivative:
        raise InputError(f"curve {curve.name!r} has no derivative data")
    p = curve.eval(t)
    v = _left_translated_velocity(space, p, curve.derivative(t))
    w = np.asarray(space.weights)
    if np.any(np.abs(v[w > k]) > 1e-14):
        return math.inf
    x = np.where(w == k, v, 0.0)
    if not np.any(x):
        return 0.0
    value, _ = sp.norm_from_identity(space, x)
    return value**k


def k_length_map(space, curve, k, grid=None, method="estimate"):
    """Grid, meas profile and cumulative trapezoid ``t -> int_a^t meas^k``."""
    grid = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
    if method == "analytic":
        prof = np.array([carnot_analytic_meas(space, curve, t, k) for t in grid])
        bad = []
    else:
        ests = meas_profile(space, curve, k, grid)
        prof = np.array([e.value for e in ests])
        bad = [e.t for e in ests if not e.converged]
    if bad or not np.all(np.isfinite(prof)):
        raise EstimateError("meas^k did not converge on the grid", bad)
    cum = np.concatenate([[0.0], np.cumsum(np.diff(grid) * (prof[1:] + prof[:-1]) / 2)])
    return grid, prof, cum


def reparam_by_k_length(space, curve, k, grid=None, method="estimate"):
    """Precompose ``curve`` with the inverse of its k-length function.

    The result lives on ``[0, Length_k]`` and has ``meas^k`` close to 1.
    """
    grid, prof, cum = k_length_map(space, curve, k, grid, method)
    if np.any(prof <= 0):
        raise EstimateError(
            "meas^k vanishes on the grid; k-length reparameterization undefined",
            grid[prof <= 0],
        )
    return reparameterized(curve, lambda u: np.interp(u, cum, grid), float(cum[-1]),
                           name=f"{curve.name}_klength")
