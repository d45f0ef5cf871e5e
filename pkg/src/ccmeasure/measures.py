"""Dimensioned measures of curves: k-length, interpolation complexity,
metric entropy, constructive Hausdorff and spherical covers, ball
preimages and density profiles.

Upper bounds here are constructive: every chain, net and cover is an explicit
object whose validity is checked with the distance engine. Arc diameters are
estimated from Chebyshev samples and flagged as sampled.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import spaces as sp
from ._parallel import parallel_map
from .derivative import ScaleLadder, carnot_analytic_meas, default_grid, meas_k_estimate
from .errors import EstimateError, InputError

log = logging.getLogger(__name__)


# --- distance probes -------------------------------------------------------


class _Probe:
    """Distances from a fixed curve point to curve points at many times."""

    def __init__(self, space, curve):
        self.space = space
        self.curve = curve

    def __call__(self, t0, ts):
        base = self.curve.fn(np.array([t0], dtype=float))[0]
        pts = self.curve.fn(np.clip(np.asarray(ts, dtype=float), self.curve.a, self.curve.b))
        return sp.distances(self.space, pts, base[None, :])


def _reach(probe, t0, eps, guess, direction=1, K=64, rel=1e-6, spread=None):
    """Farthest ``t`` (in ``direction``) such that ``d(gamma(t0), gamma(s)) <=
    eps`` for every scanned ``s`` between ``t0`` and ``t``.

    With ``spread`` (relative change of recent steps) the first probe puts 16
    points on the way and the rest in a narrow window around ``guess``.
    Otherwise K points scan a window twice the guess, widening until a point
    exceeds ``eps`` or the domain ends. The bracket then shrinks K-fold per
    round down to ``rel`` of the step.
    """
    curve = probe.curve
    end = curve.b if direction > 0 else curve.a
    remaining = abs(end - t0)
    if remaining <= 0:
        return t0
    guess = min(max(guess, 1e-12 * curve.length), remaining)

    def clip(ts):
        return np.minimum(ts, end) if direction > 0 else np.maximum(ts, end)

    lo = hi = None
    start = t0
    if spread is not None and guess < remaining:
        w = min(max(4 * spread, 1e-6), 0.5)
        coarse = guess * (1 - w) * np.arange(1, 17) / 16
        fine = guess * (1 - w + 2 * w * np.arange(1, K - 15) / (K - 16))
        ts = clip(t0 + direction * np.concatenate([coarse, fine]))
        d, _ = probe(t0, ts)
        bad = np.nonzero(d > eps)[0]
        if len(bad):
            j = bad[0]
            hi, lo = ts[j], (ts[j - 1] if j > 0 else t0)
        elif ts[-1] == end:
            return end
        else:
            start = ts[-1]
    if hi is None:
        width = 2 * guess
        frac = np.arange(1, K + 1) / K
        while True:
            ts = clip(start + direction * width * frac)
            d, _ = probe(t0, ts)
            bad = np.nonzero(d > eps)[0]
            if len(bad):
                j = bad[0]
                hi, lo = ts[j], (ts[j - 1] if j > 0 else start)
                break
            if ts[-1] == end:
                return end
            start, width = ts[-1], width * 4
    inner = np.arange(1, K) / K
    floor = 8 * np.spacing(max(abs(t0), abs(end)))
    while abs(hi - lo) > max(rel * abs(hi - t0), floor):
        ts = lo + (hi - lo) * inner
        d, _ = probe(t0, ts)
        bad = np.nonzero(d > eps)[0]
        if len(bad):
            j = bad[0]
            lo, hi = (ts[j - 1] if j > 0 else lo), ts[j]
        else:
            lo = ts[-1]
    if lo == t0:
        raise EstimateError(f"step from t={t0} stalled: distance not locally controllable", [t0])
    return float(lo)


# --- k-length --------------------------------------------------------------


@dataclass
class LengthResult:
    value: float
    error_estimate: float
    grid: np.ndarray
    profile: np.ndarray

    def __float__(self):
        return self.value


def _profile(space, curve, k, grid, method, ladder=None):
    if method == "analytic":
        return np.array([carnot_analytic_meas(space, curve, t, k) for t in grid]), []
    ests = parallel_map(lambda t: meas_k_estimate(space, curve, t, k, ladder), grid)
    return np.array([e.value for e in ests]), [e.t for e in ests if not e.converged]


def length_k(space, curve, k, quadrature_grid=None, method="estimate", ladder=None):
    """Composite-trapezoid integral of ``t -> meas^k_t``.

    The error estimate compares against the same rule on every other node.
    """
    grid = default_grid(curve, 65) if quadrature_grid is None else np.asarray(quadrature_grid, float)
    prof, bad = _profile(space, curve, k, grid, method, ladder)
    if bad or not np.all(np.isfinite(prof)):
        bad = bad or list(grid[~np.isfinite(prof)])
        raise EstimateError("meas^k did not converge at some quadrature times", bad)
    value = float(np.trapezoid(prof, grid))
    err = 0.0
    if len(grid) >= 5 and len(grid) % 2 == 1:
        err = abs(value - float(np.trapezoid(prof[::2], grid[::2])))
    return LengthResult(value, err, grid, prof)


def length_k_interval(space, curve, k, lo, hi, nodes=9, method="estimate", ladder=None):
    """k-length of ``gamma([lo, hi])`` (the curve's ladder, not the piece's)."""
    if hi <= lo:
        return 0.0
    ladder = ladder or ScaleLadder.for_curve(curve)
    grid = np.linspace(lo, hi, nodes)
    prof, bad = _profile(space, curve, k, grid, method, ladder)
    if bad or not np.all(np.isfinite(prof)):
        raise EstimateError("meas^k did not converge on the interval", bad)
    return float(np.trapezoid(prof, grid))


# --- chains and nets -------------------------------------------------------


@dataclass
class ChainCertificate:
    epsilon: float
    times: np.ndarray
    points: np.ndarray
    step_distances: np.ndarray
    gap: float

    @property
    def count(self):
        return len(self.times)

    def validate(self):
        return bool(
            self.times[0] == self.times[0]
            and np.all(self.step_distances <= self.epsilon + self.gap)
        )


def _chain_times(space, curve, epsilon):
    probe = _Probe(space, curve)
    times = [curve.a]
    guess, spread = curve.length / 64, None
    while times[-1] < curve.b:
        t = _reach(probe, times[-1], epsilon, guess, spread=spread)
        step = t - times[-1]
        if t < curve.b and step <= 1e-12 * (curve.b - curve.a):
            raise EstimateError(f"step from t={times[-1]} stalled: distance not locally "
                                "controllable", [times[-1]])
        if t < curve.b:
            spread = abs(step - guess) / step if len(times) > 1 else None
            guess = step
        times.append(t)
    return np.array(times)


def _check_eps(space, epsilon):
    if not epsilon > 10 * sp.resolution_floor(space):
        raise InputError("epsilon must exceed 10x the distance resolution")


def interpolation_complexity(space, curve, epsilon) -> ChainCertificate:
    """Greedy farthest-step epsilon-chain from ``gamma(a)`` to ``gamma(b)``;
    ``count`` is an upper bound on the interpolation complexity."""
    _check_eps(space, epsilon)
    times = _chain_times(space, curve, epsilon)
    pts = curve.eval(times)
    d, gap = sp.distances(space, pts[:-1], pts[1:])
    cert = ChainCertificate(epsilon, times, pts, d, float(gap.max(initial=0.0)))
    if not cert.validate():
        raise EstimateError("chain certificate failed validation")
    return cert


def grid_modulus(space, curve, grid_size):
    """Max distance between consecutive points of a uniform parameter grid."""
    ts = np.linspace(curve.a, curve.b, grid_size)
    pts = curve.eval(ts)
    d, gap = sp.distances(space, pts[:-1], pts[1:])
    return ts, pts, float(np.max(d + gap))


def interpolation_complexity_bruteforce(space, curve, epsilon, grid_size=2000,
                                        extra_times=None, relaxed=False,
                                        max_block=4_000_000):
    """Breadth-first shortest epsilon-chain over a uniform parameter grid.

    Any chain through grid times (plus ``extra_times``, e.g. a greedy chain's
    times) is a candidate, in any order. With ``relaxed`` the hop threshold is
    ``epsilon + 2 * modulus`` (``modulus`` = max distance between grid
    neighbours): snapping any chain on the curve to the grid then stays
    admissible, so the count lower-bounds the interpolation complexity, at
    the cost of looseness when the modulus is not small against epsilon.
    """
    if grid_size > 100_000:
        raise InputError("grid_size above desk scale (1e5)")
    ts, pts, modulus = grid_modulus(space, curve, grid_size)
    if extra_times is not None:
        ts = np.union1d(ts, curve.check_time(np.asarray(extra_times, float)))
        pts = curve.eval(ts)
    thr = epsilon + (2 * modulus if relaxed else 0.0)
    n = len(ts)
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    frontier = np.array([0])
    level = 1
    while len(frontier):
        if visited[n - 1]:
            return level
        unvisited = np.nonzero(~visited)[0]
        reach = np.zeros(len(unvisited), dtype=bool)
        rows = max(1, max_block // max(1, len(unvisited)))
        for i in range(0, len(frontier), rows):
            F = pts[frontier[i:i + rows]]
            d, g = sp.distances(space, F[:, None, :], pts[unvisited][None, :, :])
            reach |= np.any(d <= thr + g, axis=0)
        frontier = unvisited[reach]
        visited[frontier] = True
        level += 1
    if visited[n - 1]:
        return level
    raise EstimateError("grid chain cannot reach gamma(b)")


@dataclass
class NetCertificate:
    epsilon: float
    center_times: np.ndarray
    covered_until: np.ndarray

    @property
    def count(self):
        return len(self.center_times)


def metric_entropy(space, curve, epsilon) -> NetCertificate:
    """Greedy epsilon-net with centers on the curve.

    From the first uncovered time ``u`` the center moves as far forward as
    still covers ``gamma(u)``; its ball then covers up to the next uncovered
    time. Coverage of ``[u, c]`` is checked on 64 samples.
    """
    _check_eps(space, epsilon)
    probe = _Probe(space, curve)
    centers, ends = [], []
    u, guess, spread = curve.a, curve.length / 64, None
    while True:
        c = _reach(probe, u, epsilon, guess, spread=spread) if u < curve.b else u
        back = np.linspace(u, c, 64)
        d, _ = probe(c, back)
        if np.any(d > epsilon):
            c = u
        e = _reach(probe, c, epsilon, c - u if c > u else guess, spread=spread) if c < curve.b else c
        centers.append(c)
        ends.append(e)
        if e >= curve.b:
            break
        step = e - c
        spread = abs(step - guess) / step if len(centers) > 1 else None
        guess = max(step, 1e-12 * curve.length)
        u = e
    return NetCertificate(epsilon, np.array(centers), np.array(ends))


# --- covers ----------------------------------------------------------------


@dataclass
class CoverRecord:
    epsilon: float
    k: float
    pieces: list  # (lo, hi, diameter estimate, sampled flag)
    cost: float
    ambient_cost: float | None = None
    matched_hausdorff_cost: float | None = None
    gap: float = 0.0

    @property
    def max_diameter(self):
        return max((p[2] for p in self.pieces), default=0.0)


def _lobatto(lo, hi, m):
    j = np.arange(m)
    x = (1 - np.cos(np.pi * j / (m - 1))) / 2
    return lo[:, None] + (hi - lo)[:, None] * x[None, :]


def _sampled_diameters(space, curve, lo, hi, m, block=2000):
    """Max pairwise distance over m Chebyshev-Lobatto samples per arc."""
    iu, ju = np.triu_indices(m, 1)
    out = np.empty(len(lo))
    gaps = np.zeros(len(lo))
    for s in range(0, len(lo), block):
        T = _lobatto(lo[s:s + block], hi[s:s + block], m)
        P = curve.fn(np.clip(T.ravel(), curve.a, curve.b)).reshape(T.shape + (-1,))
        d, g = sp.distances(space, P[:, iu, :], P[:, ju, :])
        out[s:s + block] = d.max(axis=1)
        gaps[s:s + block] = g.max(axis=1)
    return out, gaps


def arc_diameters(space, curve, lo, hi, m0=17, m_max=129, rel=0.01):
    """Sampled arc diameters, doubling the sample count until the estimate
    moves by less than ``rel``."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    diam, gap = _sampled_diameters(space, curve, lo, hi, m0)
    todo = np.arange(len(lo))
    m = m0
    while len(todo) and m < m_max:
        m = 2 * m - 1
        new, g = _sampled_diameters(space, curve, lo[todo], hi[todo], m)
        moved = np.abs(new - diam[todo]) > rel * np.maximum(new, 1e-300)
        diam[todo], gap[todo] = new, g
        todo = todo[moved]
    return diam, gap


def _split_until(space, curve, lo, hi, epsilon, max_rounds=40):
    """Partition arcs until every sampled diameter is <= epsilon."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    done_lo, done_hi, done_d, done_g = [], [], [], []
    for _ in range(max_rounds):
        diam, gap = arc_diameters(space, curve, lo, hi)
        ok = diam <= epsilon
        done_lo.append(lo[ok]); done_hi.append(hi[ok])
        done_d.append(diam[ok]); done_g.append(gap[ok])
        if ok.all():
            break
        mid = (lo[~ok] + hi[~ok]) / 2
        lo = np.concatenate([lo[~ok], mid])
        hi = np.concatenate([mid, hi[~ok]])
    else:
        raise EstimateError("arc diameter could not be brought under epsilon", list(lo))
    lo, hi = np.concatenate(done_lo), np.concatenate(done_hi)
    order = np.argsort(lo)
    return lo[order], hi[order], np.concatenate(done_d)[order], np.concatenate(done_g)[order]


_LAST_PARTITION = {}


def _partition(space, curve, epsilon, partition):
    if partition is None:
        partition = _chain_times(space, curve, epsilon)
    partition = np.asarray(partition, float)
    # hausdorff_upper and spherical_upper usually run back to back on one partition
    key = (id(space), id(curve), epsilon, partition.tobytes())
    hit = _LAST_PARTITION.get("key")
    if hit is not None and hit[0] == key:
        return hit[1]
    out = _split_until(space, curve, partition[:-1], partition[1:], epsilon)
    _LAST_PARTITION["key"] = (key, out)
    return out


def _dedupe(space, curve, lo, hi, diam, dense=129):
    """Drop arcs whose sampled points lie within the sampling resolution of
    earlier kept arcs; kept arcs absorbing others are enlarged by twice that
    resolution."""
    keep, grown = [], {}
    samples = {}
    for i in range(len(lo)):
        T = np.linspace(lo[i], hi[i], dense)
        samples[i] = curve.eval(T)
    for i in range(len(lo)):
        P = samples[i]
        covered = np.zeros(len(P), dtype=bool)
        owners = []
        for j in keep:
            Q = samples[j]
            res = float(np.max(sp.distances(space, Q[:-1], Q[1:])[0]))
            d, _ = sp.distances(space, P[:, None, :], Q[None, :, :])
            hit = d.min(axis=1) <= res
            if hit.any():
                owners.append((j, res))
            covered |= hit
        if covered.all():
            for j, res in owners:
                grown[j] = max(grown.get(j, 0.0), 2 * res)
        else:
            keep.append(i)
    return keep, grown


def hausdorff_upper(space, curve, k, epsilon, partition=None, dedupe=False) -> CoverRecord:
    """Cover ``C`` by arcs of sampled diameter <= epsilon; cost sum diam^k.

    With ``dedupe`` (for non-injective curves) arcs already covered by earlier
    arcs are dropped.
    """
    _check_eps(space, epsilon)
    lo, hi, diam, gap = _partition(space, curve, epsilon, partition)
    if dedupe:
        keep, grown = _dedupe(space, curve, lo, hi, diam)
        d = np.array([diam[i] + grown.get(i, 0.0) for i in keep])
        pieces = [(float(lo[i]), float(hi[i]), float(x), True) for i, x in zip(keep, d)]
        cost = float(np.sum(d**k))
    else:
        pieces = [(float(a), float(b), float(x), True) for a, b, x in zip(lo, hi, diam)]
        cost = float(np.sum(diam**k))
    return CoverRecord(epsilon, k, pieces, cost, gap=float(gap.max(initial=0.0)))


def _ball_sets(space, curve, lo, hi, m=17, ext=4, block=4000):
    """For each arc: radius of the ball at its midpoint enclosing the arc's
    samples, and the sampled diameter of ``C`` intersected with that ball
    near the arc (arc samples plus the contiguous run of ``ext`` samples per
    side, spaced a quarter arc apart, that stay in the ball)."""
    radius = np.empty(len(lo))
    diam = np.empty(len(lo))
    steps = np.arange(1, ext + 1) / ext
    for s0 in range(0, len(lo), block):
        a, b = lo[s0:s0 + block], hi[s0:s0 + block]
        n = len(a)
        mid = (a + b) / 2
        T = _lobatto(a, b, m)
        w = (b - a)[:, None]
        E = np.concatenate([a[:, None] - w * steps, b[:, None] + w * steps], axis=1)
        allT = np.concatenate([T, E], axis=1)
        P = curve.fn(np.clip(allT.ravel(), curve.a, curve.b)).reshape(n, allT.shape[1], -1)
        C = curve.fn(mid)
        dc, g = sp.distances(space, P, C[:, None, :])
        r = dc[:, :m].max(axis=1) + g[:, :m].max(axis=1)
        dom = (E >= curve.a) & (E <= curve.b)
        inb = (dc[:, m:] <= r[:, None]) & dom
        run = np.concatenate([np.cumprod(inb[:, :ext], axis=1),
                              np.cumprod(inb[:, ext:], axis=1)], axis=1).astype(bool)
        mask = np.concatenate([np.ones((n, m), dtype=bool), run], axis=1)
        iu, ju = np.triu_indices(allT.shape[1], 1)
        if run.any():
            d, _ = sp.distances(space, P[:, iu, :], P[:, ju, :])
            d = np.where(mask[:, iu] & mask[:, ju], d, 0.0)
        else:
            d, _ = sp.distances(space, P[:, iu[ju < m], :], P[:, ju[ju < m], :])
        radius[s0:s0 + block] = r
        diam[s0:s0 + block] = d.max(axis=1)
    return radius, diam


def spherical_upper(space, curve, k, epsilon, partition=None) -> CoverRecord:
    """Cover by sets ``C intersected with B(gamma(mid), r)`` for each arc of the
    Hausdorff partition, ``r`` enclosing the arc.

    Costs use the diameter of the covering set as a subset of ``C``; the
    ambient ball cost ``sum (2 r)^k`` is reported alongside. Arcs whose set
    exceeds epsilon are split, and the Hausdorff cost on the final partition
    is kept for matched comparisons.
    """
    _check_eps(space, epsilon)
    lo, hi, adiam, gap = _partition(space, curve, epsilon, partition)
    for _ in range(40):
        radius, diam = _ball_sets(space, curve, lo, hi)
        big = diam > epsilon
        if not big.any():
            break
        mid = (lo[big] + hi[big]) / 2
        lo = np.sort(np.concatenate([lo, mid]))
        hi = np.sort(np.concatenate([hi, mid]))
        lo, hi, adiam, gap = _split_until(space, curve, lo, hi, epsilon)
    else:
        raise EstimateError("ball sets could not be brought under epsilon")
    pieces = [(float(a), float(b), float(x), True) for a, b, x in zip(lo, hi, diam)]
    return CoverRecord(
        epsilon, k, pieces, float(np.sum(diam**k)),
        ambient_cost=float(np.sum((2 * radius) ** k)),
        matched_hausdorff_cost=float(np.sum(adiam**k)),
        gap=float(gap.max(initial=0.0)),
    )


# --- ball preimages and densities ------------------------------------------


@dataclass
class Preimage:
    lo: float
    hi: float
    monotone: bool = True


def _side_monotone(probe, t, end, m=33):
    if end == t:
        return True
    ts = t + (end - t) * np.arange(1, m + 1) / m
    d, g = probe(t, ts)
    return bool(np.all(np.diff(d) >= -2 * g[1:]))


def ball_preimage(space, curve, center_time, r) -> Preimage:
    """Connected parameter interval around ``center_time`` mapped into the
    closed ball ``B(gamma(center_time), r)``.

    Boundaries come from bracketing on ``d(gamma(s), gamma(t)) = r``. If the
    distance is not increasing away from the center inside the interval, a
    fine scan of the domain decides the component instead and a warning is
    logged.
    """
    t = float(curve.check_time(center_time))
    if not r > 0:
        raise InputError("radius must be positive")
    probe = _Probe(space, curve)
    guess = curve.length / 1024
    hi = _reach(probe, t, r, guess, +1) if t < curve.b else t
    lo = _reach(probe, t, r, guess, -1) if t > curve.a else t
    if lo == curve.a and hi == curve.b and t not in (curve.a, curve.b):
        raise InputError(f"radius {r} covers the whole curve; use a smaller radius")
    if _side_monotone(probe, t, hi) and _side_monotone(probe, t, lo):
        return Preimage(lo, hi, True)
    log.warning("distance not monotone around t=%g, r=%g; scanning", t, r)
    ts = np.linspace(curve.a, curve.b, 8193)
    d, _ = probe(t, ts)
    inside = d <= r
    i = int(np.argmin(np.abs(ts - t)))
    j0 = i
    while j0 > 0 and inside[j0 - 1]:
        j0 -= 1
    j1 = i
    while j1 < len(ts) - 1 and inside[j1 + 1]:
        j1 += 1
    return Preimage(float(ts[j0]), float(ts[j1]), False)


def ball_preimage_all(space, curve, q, r, holder_constant, k, coarse=1e-4, samples=65):
    """All parameter intervals of ``curve`` mapped into ``B(q, r)``.

    Branch and bound with ``d(gamma(s), gamma(s')) <= C |s - s'|^(1/k)``
    discards or accepts intervals whose midpoint distance settles them and
    halves the rest down to ``coarse * length``. Undecided runs are then
    sampled and every sign change of ``d - r`` is bracketed to machine
    precision (crossings between samples are not certified).
    """
    q = np.asarray(q, float)

    def dist(ts):
        return sp.distances(space, curve.fn(np.asarray(ts, float)), q[None, :])

    lo, hi = np.array([curve.a]), np.array([curve.b])
    inside, unsure = [], []
    min_len = coarse * curve.length
    while len(lo):
        mid = (lo + hi) / 2
        d, g = dist(mid)
        slack = holder_constant * ((hi - lo) / 2) ** (1.0 / k)
        out = d - g - slack > r
        whole = d + g + slack <= r
        leaf = ~out & ~whole & ((hi - lo) <= min_len)
        inside += list(zip(lo[whole], hi[whole]))
        unsure += list(zip(lo[leaf], hi[leaf]))
        split = ~out & ~whole & ~leaf
        lo, hi, mid = lo[split], hi[split], mid[split]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])

    found = list(inside)
    for a, b in _merge(unsure):
        ts = np.linspace(a, b, samples)
        f = dist(ts)[0] - r
        ins = f <= 0
        # walk runs of inside samples and push each edge to the crossing
        j = 0
        while j < len(ts):
            if not ins[j]:
                j += 1
                continue
            j0 = j
            while j + 1 < len(ts) and ins[j + 1]:
                j += 1
            left = ts[j0] if j0 == 0 else _crossing(dist, r, ts[j0 - 1], ts[j0])
            right = ts[j] if j == len(ts) - 1 else _crossing(dist, r, ts[j + 1], ts[j])
            found.append((left, right))
            j += 1
    return [tuple(m) for m in _merge(found)]


def _crossing(dist, r, outside, inside, iters=60):
    """Bisection between a time outside and a time inside the ball."""
    for _ in range(iters):
        mid = (outside + inside) / 2
        if mid in (outside, inside):
            break
        if dist([mid])[0][0] <= r:
            inside = mid
        else:
            outside = mid
    return float(inside)


def _merge(intervals):
    merged = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return merged


@dataclass
class DensityProfile:
    center_time: float
    center: np.ndarray
    radii: np.ndarray
    ratios: np.ndarray
    side: str
    preimages: list = field(default_factory=list)
    gap: float = 0.0


def _side(curve, t):
    if t <= curve.a:
        return "left_endpoint"
    if t >= curve.b:
        return "right_endpoint"
    return "interior"


def density_profile(space, curve, k, center_time, radii, method="estimate",
                    nodes=9) -> DensityProfile:
    """``H^k(C cap B(q, r)) / (2 r^k)`` over decreasing radii, with the measure
    of the piece computed as the k-length of its preimage interval."""
    radii = np.sort(np.asarray(radii, float))[::-1]
    if np.any(radii <= 0):
        raise InputError("radii must be positive")
    ladder = ScaleLadder.for_curve(curve)
    pre = [ball_preimage(space, curve, center_time, r) for r in radii]
    meas = [length_k_interval(space, curve, k, p.lo, p.hi, nodes, method, ladder) for p in pre]
    ratios = np.array(meas) / (2 * radii**k)
    return DensityProfile(float(center_time), curve.eval(center_time), radii, ratios,
                          _side(curve, center_time), pre)


# --- Hoelder bounds --------------------------------------------------------


def holder_bounds_estimate(space, curve, k, window, n_times=33, n_scales=12, limit=True):
    """Empirical ``(delta_minus, delta_plus, degenerate)`` for
    ``d(gamma(t), gamma(t+s)) / |s|^(1/k)`` over ``0 < |s| <= window``.

    The quotient is sampled on ``n_scales`` dyadic scales. With ``limit`` the
    s -> 0 values ``meas^k(t)^(1/k)`` at the same times are included too
    (analytic when the curve carries derivatives): the quotient may approach
    its extremes only in the limit, slowly, like ``sqrt(s)`` on tilted
    Heisenberg lines.
    """
    if not 0 < window < curve.length:
        raise InputError("window must be positive and below the domain length")
    ts = np.linspace(curve.a, curve.b, n_times)
    scales = window * 0.5 ** np.arange(n_scales)
    T = ts[:, None, None]
    S = np.concatenate([scales, -scales])[None, :, None]
    U = np.clip(T + S, curve.a, curve.b)
    s = np.abs(U - T)
    ok = s > 0
    base = curve.fn(np.repeat(ts, U.shape[1]))
    pts = curve.fn(U.ravel())
    d, _ = sp.distances(space, pts, base)
    d = d.reshape(U.shape)
    ratio = d[ok] / s[ok] ** (1.0 / k)
    if limit:
        if curve.has_derivative and float(k) == int(k):
            meas = [carnot_analytic_meas(space, curve, t, k) for t in ts]
        else:
            meas = [e.value for e in parallel_map(
                lambda t: meas_k_estimate(space, curve, t, k), ts)]
        ratio = np.concatenate([ratio, np.asarray(meas) ** (1.0 / k)])
    lo, hi = float(ratio.min()), float(ratio.max())
    return lo, hi, lo == 0.0


# --- theorem harness -------------------------------------------------------


@dataclass
class TheoremConfig:
    eps_schedule: tuple = (0.16, 0.08, 0.04, 0.02, 0.01)
    cover_schedule: tuple | None = None
    quadrature_points: int = 65
    rel_tol: float = 0.05
    length_method: str = "estimate"
    injectivity_samples: int = 257

    def __post_init__(self):
        for sched in (self.eps_schedule, self.cover_schedule or self.eps_schedule):
            if len(sched) < 2 or any(e <= 0 for e in sched) or list(sched) != sorted(sched, reverse=True):
                raise InputError("schedules need >= 2 positive decreasing values")
        if not self.rel_tol > 0:
            raise InputError("rel_tol must be positive")


@dataclass
class MeasureReport:
    k: float
    length_k: float
    hausdorff_upper: float
    spherical_upper: float
    complexity_extrapolation: float
    tolerances: dict
    verdict: bool
    schedule: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def quantities(self):
        return {
            "length_k": self.length_k,
            "hausdorff_upper": self.hausdorff_upper,
            "spherical_upper": self.spherical_upper,
            "complexity_extrapolation": self.complexity_extrapolation,
        }


def injectivity_check(space, curve, samples=257):
    """False if two samples at separated parameters come closer than their
    neighbour spacing."""
    ts = np.linspace(curve.a, curve.b, samples)
    P = curve.eval(ts)
    step, _ = sp.distances(space, P[:-1], P[1:])
    local = np.minimum(np.r_[step, np.inf], np.r_[np.inf, step])
    for i in range(samples - 2):
        d, _ = sp.distances(space, P[i + 2:], P[i][None, :])
        if np.any(d < 0.5 * np.minimum(local[i], local[i + 2:])):
            return False
    return True


def _limit(values):
    values = list(values)
    return values[-1], abs(values[-1] - values[-2]) if len(values) > 1 else 0.0


def complexity_extrapolation(eps, values, k):
    """Intercept of the least-squares line through ``(eps^k, eps^k sigma)``.

    Diagnostic only: the endpoint-inclusive chain count carries an
    ``O(eps^k)`` offset, which the fit removes. Reported limits use the last
    value of the schedule.
    """
    x = np.asarray(eps, float) ** k
    if len(x) < 2:
        return float(values[-1])
    slope, intercept = np.polyfit(x, np.asarray(values, float), 1)
    return float(intercept)


def verify_main_theorem(space, curve, k, cfg: TheoremConfig | None = None) -> MeasureReport:
    """Compute k-length, Hausdorff and spherical cover costs, and
    ``eps^k * sigma_int`` down the schedule; check four-way agreement."""
    cfg = cfg or TheoremConfig()
    if not injectivity_check(space, curve, cfg.injectivity_samples):
        raise EstimateError("curve is not injective (near-collision found)")
    grid = np.linspace(curve.a, curve.b, cfg.quadrature_points)
    L = length_k(space, curve, k, grid, cfg.length_method)

    eps = list(cfg.eps_schedule)
    chains = parallel_map(lambda e: interpolation_complexity(space, curve, e), eps)
    comp = [e**k * c.count for e, c in zip(eps, chains)]

    cover_eps = list(cfg.cover_schedule or cfg.eps_schedule)
    by_eps = {e: c.times for e, c in zip(eps, chains)}
    H, S, Hm, gaps = [], [], [], []
    for e in cover_eps:
        part = by_eps.get(e)
        h = hausdorff_upper(space, curve, k, e, part)
        s = spherical_upper(space, curve, k, e, part)
        H.append(h.cost)
        S.append(s.cost)
        Hm.append(s.matched_hausdorff_cost)
        gaps.append(max(h.gap, s.gap))

    values = {
        "length_k": L.value,
        "hausdorff_upper": _limit(H)[0],
        "spherical_upper": _limit(S)[0],
        "complexity_extrapolation": _limit(comp)[0],
    }
    spreads = {
        "length_k": L.error_estimate,
        "hausdorff_upper": _limit(H)[1],
        "spherical_upper": _limit(S)[1],
        "complexity_extrapolation": _limit(comp)[1],
    }
    # distance gaps inflate tolerances: relative gap at the finest scale, times k
    gap_rel = max(gaps) / min(cover_eps) if gaps else 0.0
    gap_rel = max(gap_rel, max((c.gap for c in chains), default=0.0) / min(eps))
    failures = []
    names = list(values)
    pair_tol = {}
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = values[names[i]], values[names[j]]
            tol = ((cfg.rel_tol + k * gap_rel) * max(abs(a), abs(b))
                   + spreads[names[i]] + spreads[names[j]])
            pair_tol[f"{names[i]}~{names[j]}"] = tol
            if abs(a - b) > tol:
                failures.append(f"{names[i]}={a:.6g} vs {names[j]}={b:.6g} (tol {tol:.3g})")
    for e, h, s in zip(cover_eps, Hm, S):
        slack = cfg.rel_tol * 1e-3 * h + k * gap_rel * h
        if not (h <= s + slack and s <= 2**k * h + slack):
            failures.append(f"cover ordering violated at eps={e}")
    tolerances = {
        "rel_tol": cfg.rel_tol,
        "gap_rel": gap_rel,
        "pairwise": pair_tol,
        "spreads": spreads,
    }
    schedule = {
        "eps": eps, "complexity": comp,
        "complexity_fit_intercept": complexity_extrapolation(eps, comp, k), "chain_counts": [c.count for c in chains],
        "cover_eps": cover_eps, "hausdorff": H, "spherical": S,
        "matched_hausdorff": Hm,
    }
    return MeasureReport(k, values["length_k"], values["hausdorff_upper"],
                         values["spherical_upper"], values["complexity_extrapolation"],
                         tolerances, not failures, schedule, failures)
