"""Finite families of m-C1_k curves and empirical density bounds."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import spaces as sp
from ._parallel import parallel_map
from .curves import ParametricCurve
from .derivative import mc1k_check
from .errors import CCMeasureError, EstimateError, InputError
from .measures import ball_preimage, ball_preimage_all, holder_bounds_estimate, length_k_interval

log = logging.getLogger(__name__)


@dataclass
class RectifiableSet:
    """Union of the images of ``pieces[i]`` over ``subsets[i]``.

    ``subsets[i]`` is a list of parameter intervals ``(lo, hi)`` inside the
    domain of piece ``i``; by default the whole domain. The subsets should
    make the images pairwise disjoint (shared endpoints are measure zero).
    """

    k: float
    pieces: list
    subsets: list | None = None

    def __post_init__(self):
        if self.k < 1:
            raise InputError("k must be >= 1")
        if self.subsets is None:
            self.subsets = [[(c.a, c.b)] for c in self.pieces]
        if len(self.subsets) != len(self.pieces):
            raise InputError("one subset list per piece")
        for c, subs in zip(self.pieces, self.subsets):
            for lo, hi in subs:
                if not (c.a <= lo < hi <= c.b):
                    raise InputError(f"subset ({lo}, {hi}) outside the domain of {c.name}")

    def parts(self):
        """``(piece index, restricted curve)`` for every subset interval."""
        return [(i, c.restrict(lo, hi)) for i, c in enumerate(self.pieces)
                for lo, hi in self.subsets[i]]


def collision_scan(space, rset: RectifiableSet, samples=129):
    """Smallest distance between interior samples of distinct pieces, or None
    when there is a single piece. Raises if two pieces touch."""
    parts = rset.parts()
    pts = []
    for i, c in parts:
        ts = np.linspace(c.a, c.b, samples + 2)[1:-1]
        pts.append((i, c.eval(ts)))
    best = None
    for x in range(len(pts)):
        for y in range(x + 1, len(pts)):
            if pts[x][0] == pts[y][0]:
                continue
            d, g = sp.distances(space, pts[x][1][:, None, :], pts[y][1][None, :, :])
            if np.any(d <= g):
                raise InputError("pieces collide at sampled points; refine the disjointification")
            m = float(d.min())
            best = m if best is None else min(best, m)
    return best


def validate_set(space, rset: RectifiableSet, grid_size=16, ladder=None):
    """Check every piece with mc1k_check at dimension k and scan for collisions."""
    for i, c in enumerate(rset.pieces):
        rep = mc1k_check(space, c, rset.k, np.linspace(c.a, c.b, grid_size), ladder=ladder)
        if not rep.passed:
            raise EstimateError(f"piece {i} ({c.name}) fails the m-C1_k check", rep.failed_times)
    return collision_scan(space, rset)


def set_measure_k(space, rset: RectifiableSet, nodes=33, method="estimate"):
    """Sum of k-lengths of the pieces over their subsets."""
    collision_scan(space, rset)
    total = 0.0
    for i, c in enumerate(rset.pieces):
        for lo, hi in rset.subsets[i]:
            total += length_k_interval(space, c, rset.k, lo, hi, nodes, method)
    return total


@dataclass
class DensityCheckReport:
    sample_points: list  # (piece index, time, point)
    lower: np.ndarray
    upper: np.ndarray
    radii: np.ndarray
    verdict: bool
    tolerance: float
    failures: list = field(default_factory=list)  # (sample index, message)
    densities: np.ndarray | None = None  # (samples, radii)


def draw_samples(rset: RectifiableSet, sample_count=32, margin=0.05, rng=None):
    """``sample_count`` uniform times per piece, spread over its subsets by
    length and kept ``margin`` (relative) away from subset endpoints."""
    rng = rng if rng is not None else np.random.default_rng(0)
    out = []
    for i, c in enumerate(rset.pieces):
        subs = rset.subsets[i]
        lens = np.array([hi - lo for lo, hi in subs])
        which = rng.choice(len(subs), size=sample_count, p=lens / lens.sum())
        for j in which:
            lo, hi = subs[j]
            pad = margin * (hi - lo)
            out.append((i, j, float(rng.uniform(lo + pad, hi - pad))))
    out.sort()
    return out


def _default_radii(rset):
    span = min(hi - lo for subs in rset.subsets for lo, hi in subs)
    return 0.1 * span ** (1.0 / rset.k) * 0.5 ** np.arange(5)


def density_bounds_check(space, rset: RectifiableSet, sample_count=32, radius_schedule=None,
                         tol=0.05, margin=0.05, seed=0, nodes=9,
                         holder_window=None, holder_safety=1.5) -> DensityCheckReport:
    """Empirical densities ``H^k(S cap B(q, r)) / r^k`` at sampled ``q``.

    The own-piece contribution uses the connected preimage around the sample;
    other pieces (and other subsets of the same piece) are searched globally
    by branch and bound with an inflated empirical Hoelder constant. The
    lower/upper values are min/max over the two smallest radii; the verdict
    asks for all of them in ``[2 (1 - tol), 2^k (1 + tol)]``.
    """
    radii = np.sort(np.asarray(
        _default_radii(rset) if radius_schedule is None else radius_schedule, float))[::-1]
    if len(radii) < 2 or np.any(radii <= 0):
        raise InputError("radius schedule needs at least two positive radii")
    if radii[0] < 10 * radii[-1] * (1 - 1e-12):
        raise InputError("radius schedule must span at least one decade")
    k = rset.k
    collision_scan(space, rset)
    rng = np.random.default_rng(seed)
    samples = draw_samples(rset, sample_count, margin, rng)

    parts = [(i, j, c.restrict(lo, hi)) for i, c in enumerate(rset.pieces)
             for j, (lo, hi) in enumerate(rset.subsets[i])]
    consts = {}
    for i, j, c in parts:
        window = holder_window or 0.2 * c.length
        consts[(i, j)] = holder_safety * holder_bounds_estimate(space, c, k, window)[1]

    def one(sample):
        i, j, t = sample
        own = next(c for a, b, c in parts if (a, b) == (i, j))
        q = own.eval(t)
        row = []
        for r in radii:
            pre = ball_preimage(space, own, t, r)
            h = length_k_interval(space, own, k, pre.lo, pre.hi, nodes)
            for a, b, c in parts:
                if (a, b) == (i, j):
                    continue
                for lo, hi in ball_preimage_all(space, c, q, r, consts[(a, b)], k):
                    h += length_k_interval(space, c, k, lo, hi, nodes)
            row.append(h / r**k)
        return row

    def guarded(sample):
        try:
            return one(sample), None
        except CCMeasureError as exc:
            return [np.nan] * len(radii), str(exc)

    results = parallel_map(guarded, samples)
    dens = np.array([r for r, _ in results])
    failures = [(n, msg) for n, (_, msg) in enumerate(results) if msg is not None]
    last2 = dens[:, -2:]
    lower = np.min(last2, axis=1)
    upper = np.max(last2, axis=1)
    ok = np.isfinite(lower) & (lower >= 2 * (1 - tol)) & (upper <= 2**k * (1 + tol))
    points = [(i, t, rset.pieces[i].eval(t)) for i, _, t in samples]
    for n in np.nonzero(~ok)[0]:
        if not any(f[0] == n for f in failures):
            failures.append((int(n), f"density [{lower[n]:.4g}, {upper[n]:.4g}] outside bounds"))
    failures.sort()
    return DensityCheckReport(points, lower, upper, radii, bool(ok.all()), tol, failures, dens)


def crossing_segments(half_length=1.0):
    """Vertical Heisenberg segment and the line ``t -> (t, 0, t)``, crossing
    at the origin. Both are split there, so images are disjoint and interior
    samples (with margins) stay away from the crossing."""
    from .curves import custom_coordinate_curve, heisenberg_vertical

    L = half_length
    vertical = heisenberg_vertical(-L, L)
    tilted = custom_coordinate_curve("heisenberg", ["t", "0", "t"], -L, L, name="heisenberg_tilted")
    halves = [(-L, 0.0), (0.0, L)]
    return RectifiableSet(2, [vertical, tilted], [halves, list(halves)])
