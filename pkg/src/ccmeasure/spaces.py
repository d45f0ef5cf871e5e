"""Distance engines for Euclidean space and the Heisenberg and Engel groups.

Coordinates are exponential coordinates of the second kind adapted to the
horizontal frame:

* Heisenberg: ``X1 = (1, 0, -y/2)``, ``X2 = (0, 1, x/2)``, weights (1, 1, 2).
* Engel: ``X1 = (1, 0, 0, 0)``, ``X2 = (0, 1, x, x^2/2)``, weights (1, 1, 2, 3).

Every distance goes through left translation to the identity, so ``d(p, q)``
only ever needs the norm ``d(0, g)``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .control import SolverConfig, bvp_with_gap, homogeneous_size, restart_spread, solve_horizontal_bvp
from .errors import InputError

EXACT_TOL = 1e-12


@dataclass(frozen=True)
class CarnotStructure:
    n: int
    weights: tuple
    group_law: str
    horizontal_frame: tuple

    def __post_init__(self):
        if len(self.weights) != self.n:
            raise InputError("weights must have one entry per coordinate")
        if any(w < 1 for w in self.weights) or list(self.weights) != sorted(self.weights):
            raise InputError("weights must be positive and nondecreasing")


HEISENBERG = CarnotStructure(
    3, (1, 1, 2), "heisenberg", ("X1 = (1, 0, -y/2)", "X2 = (0, 1, x/2)")
)
ENGEL = CarnotStructure(
    4, (1, 1, 2, 3), "engel", ("X1 = (1, 0, 0, 0)", "X2 = (0, 1, x, x^2/2)")
)


@dataclass
class DistanceResult:
    value: float
    kind: str = "exact"  # "exact" | "upper_bound"
    gap_estimate: float = 0.0
    solver_stats: dict | None = None

    def __float__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class MetricSpaceModel:
    """A named metric space. Build with :func:`euclidean`, :func:`heisenberg`
    or :func:`engel` rather than directly."""

    kind: str
    dimension: int
    carnot: CarnotStructure | None = None
    engel_solver_cfg: SolverConfig | None = None
    _cache: "_EngelCache | None" = field(default=None, repr=False)

    @property
    def weights(self):
        return self.carnot.weights if self.carnot else (1,) * self.dimension

    @property
    def is_carnot(self):
        return self.carnot is not None

    def __str__(self):
        return f"euclidean:{self.dimension}" if self.kind == "euclidean" else self.kind


def euclidean(n: int) -> MetricSpaceModel:
    if n < 1:
        raise InputError("Euclidean dimension must be positive")
    return MetricSpaceModel("euclidean", int(n))


def heisenberg() -> MetricSpaceModel:
    return MetricSpaceModel("heisenberg", 3, HEISENBERG)


def engel(cfg: SolverConfig | None = None) -> MetricSpaceModel:
    cfg = cfg or SolverConfig()
    return MetricSpaceModel("engel", 4, ENGEL, cfg, _EngelCache(cfg))


def space_from_name(name: str, cfg: SolverConfig | None = None) -> MetricSpaceModel:
    """Parse ``euclidean:N``, ``heisenberg`` or ``engel``."""
    name = name.strip().lower()
    if name.startswith("euclidean"):
        _, _, dim = name.partition(":")
        try:
            return euclidean(int(dim or 2))
        except ValueError:
            raise InputError(f"bad Euclidean dimension in {name!r}") from None
    if name == "heisenberg":
        return heisenberg()
    if name == "engel":
        return engel(cfg)
    raise InputError(f"unknown space {name!r}")


def _point(space, p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != space.dimension:
        raise InputError(
            f"point has {p.shape[-1]} coordinates, {space} needs {space.dimension}"
        )
    if not np.all(np.isfinite(p)):
        raise InputError("point coordinates must be finite")
    return p


# --- group structure -------------------------------------------------------


def group_compose(space, p, q):
    """``p * q``; broadcasts over leading axes. Euclidean space uses addition."""
    p, q = _point(space, p), _point(space, q)
    if space.kind == "euclidean":
        return p + q
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    x2, y2, z2 = q[..., 0], q[..., 1], q[..., 2]
    if space.kind == "heisenberg":
        return np.stack([x + x2, y + y2, z + z2 + 0.5 * (x * y2 - x2 * y)], axis=-1)
    w, w2 = p[..., 3], q[..., 3]
    return np.stack(
        [x + x2, y + y2, z + z2 + x * y2, w + w2 + x * z2 + 0.5 * x * x * y2], axis=-1
    )


def group_inverse(space, p):
    p = _point(space, p)
    if space.kind != "engel":
        return -p
    x, y, z, w = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    return np.stack([-x, -y, -z + x * y, -w + x * z - 0.5 * x * x * y], axis=-1)


def identity(space):
    return np.zeros(space.dimension)


def dilate(space, lam, p):
    if lam < 0:
        raise InputError("dilation factor must be nonnegative")
    p = _point(space, p)
    return p * lam ** np.asarray(space.weights, dtype=float)


def homogeneous_norm(space, p):
    """``max_i |p_i|^(1/w_i)``: the dilation-equivariant size of ``p``."""
    p = _point(space, p)
    return np.max(np.abs(p) ** (1.0 / np.asarray(space.weights, dtype=float)), axis=-1)


def normalize_homogeneous(space, p):
    """Return ``(lam, unit)`` with ``dilate(lam, unit) == p`` and unit on the
    homogeneous unit sphere."""
    p = _point(space, p)
    lam = float(homogeneous_norm(space, p))
    if lam == 0.0:
        raise InputError("cannot normalize the identity")
    unit = p / lam ** np.asarray(space.weights, dtype=float)
    return lam, unit


# --- Heisenberg ------------------------------------------------------------


def _area_ratio(phi):
    """|z| / r^2 reached by the geodesic whose planar projection turns by phi."""
    half = np.sin(phi / 2)
    p2 = phi * phi
    series = phi * (1 / 12 + p2 / 360 + p2 * p2 / 10080 + p2**3 / 302400)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (phi - np.sin(phi)) / (8 * half * half)
    return np.where(phi < 1e-2, series, exact)


def _area_ratio_slope(phi):
    small = phi < 0.1
    p2 = phi * phi
    series = 1 / 12 + p2 / 120 + p2 * p2 / 2016 + p2**3 / 43200
    # half-angle form: 1 - cos(phi) cancels near 2 pi
    h, c = np.sin(phi / 2), np.cos(phi / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (2 * h - phi * c) / (8 * h**3)
    return np.where(small, series, exact)


def heisenberg_norm(p):
    """Exact ``d(0, p)`` for an array of Heisenberg points (shape ``(..., 3)``).

    Geodesics from the identity project to circular arcs; an arc of length L
    turning by angle phi has chord ``r = 2 L sin(phi/2) / phi`` and sweeps
    ``|z| = L^2 (phi - sin phi) / (2 phi^2)``. phi solves the monotone equation
    ``|z|/r^2 = ratio(phi)`` on ``[0, 2 pi)`` by Newton's method.
    """
    p = np.asarray(p, dtype=float)
    r = np.hypot(p[..., 0], p[..., 1])
    az = np.abs(p[..., 2])
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        target_all = az / (r * r)
    # on (or numerically on) the z-axis the geodesic is a full circle
    axis = ~(target_all < 1e200)
    out = np.where(axis, np.maximum(r, 2.0 * np.sqrt(np.pi * az)), r)
    mask = ~axis & (az > 0.0)
    if not np.any(mask):
        return out
    rr, zz = r[mask], az[mask]
    target = target_all[mask]
    # the ratio is convex and increasing, so Newton started above the root
    # decreases monotonically onto it. Upper starts: ratio(phi) >= phi / 12
    # everywhere and >= pi / (2 (2 pi - phi)^2) on [pi, 2 pi).
    with np.errstate(over="ignore"):
        phi = np.minimum(np.where(12 * target < 2 * np.pi, 12 * target, np.inf),
                         np.where(target >= 1 / (2 * np.pi),
                                  2 * np.pi - np.sqrt(np.pi / (2 * target)), np.inf))
    for _ in range(100):
        step = np.maximum((_area_ratio(phi) - target) / _area_ratio_slope(phi), 0.0)
        phi = phi - step
        if np.all(step <= 4e-16 * phi):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        by_chord = rr * (phi / 2) / np.sin(phi / 2)
        num = np.where(phi < 1e-3, phi**3 / 6 - phi**5 / 120, phi - np.sin(phi))
        by_area = np.sqrt(2 * zz * phi * phi / num)
    out = out.copy()
    out[mask] = np.where(phi < np.pi, np.where(phi < 1e-8, rr, by_chord), by_area)
    return out


# --- Engel -----------------------------------------------------------------


class _EngelCache:
    """Memoized canonical Engel solves.

    Points in the abelian plane ``{x = y = 0}`` are served from a tabulated
    one-parameter family ``f(z, w) = d(0, (0, 0, z, w))`` on the homogeneous
    unit sphere (two branches: ``z = 1, w in [0, 1]`` and ``w = 1, z in
    [0, 1]``), using the isometries ``(x, -y, -z, -w)`` and ``(-x, y, -z, w)``
    to fold signs. Other points are solved directly and cached by the
    normalized point rounded to 1e-6.
    """

    family_nodes = 11

    def __init__(self, cfg: SolverConfig):
        self.cfg = cfg
        self._nodes: dict = {}
        self._points: dict = {}
        self._lock = threading.Lock()

    def solve(self, unit):
        """Upper bound and gap for a unit-size target (value, gap, stats)."""
        return bvp_with_gap("engel", unit, self.cfg)

    def node(self, branch, j):
        key = (branch, j)
        hit = self._nodes.get(key)
        if hit is None:
            s = j / (self.family_nodes - 1)
            unit = (0.0, 0.0, 1.0, s) if branch == "z" else (0.0, 0.0, s, 1.0)
            hit = self.solve(np.array(unit))
            with self._lock:
                self._nodes[key] = hit
        return hit

    def plane(self, z, w):
        """``d(0, (0, 0, z, w))`` via the tabulated family."""
        z, w = abs(z), abs(w)
        lam = max(math.sqrt(z), w ** (1 / 3))
        if lam == 0.0:
            return 0.0, 0.0, None
        zu, wu = z / lam**2, w / lam**3
        # on the unit sphere one of zu, wu equals 1 (up to rounding)
        branch, s = ("z", wu) if zu >= wu else ("w", zu)
        h = 1.0 / (self.family_nodes - 1)
        pos = min(max(s, 0.0), 1.0) / h
        j = min(int(pos), self.family_nodes - 2)
        frac = pos - j
        v0, g0, st = self.node(branch, j)
        if frac < 1e-9:
            return lam * v0, lam * g0, st
        v1, g1, _ = self.node(branch, j + 1)
        value = (1 - frac) * v0 + frac * v1
        # interpolation error from the local second difference
        j0 = min(j, self.family_nodes - 3)
        a, b, c = (self.node(branch, j0 + i)[0] for i in range(3))
        interp = frac * (1 - frac) * abs(a - 2 * b + c) / 2
        return lam * value, lam * (max(g0, g1) + interp), st

    def general(self, g):
        lam, unit = normalize_homogeneous(_ENGEL_SHAPE, g)
        key = tuple(np.round(unit, 6))
        hit = self._points.get(key)
        if hit is None:
            hit = self.solve(np.array(key))
            with self._lock:
                self._points[key] = hit
        return lam * hit[0], lam * hit[1], hit[2]


_ENGEL_SHAPE = MetricSpaceModel("engel", 4, ENGEL)


def engel_bvp_distance(p, q, cfg: SolverConfig) -> DistanceResult:
    """Uncached direct-transcription upper bound on the Engel distance."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    if p.shape != (4,) or q.shape != (4,):
        raise InputError("Engel points need 4 coordinates")
    g = group_compose(_ENGEL_SHAPE, group_inverse(_ENGEL_SHAPE, p), q)
    if not np.any(g):
        return DistanceResult(0.0, "upper_bound", 0.0)
    sol = solve_horizontal_bvp("engel", g, cfg)
    return DistanceResult(
        sol.length, "upper_bound", restart_spread(sol),
        {"iterations": sol.iterations, "residual": sol.residual},
    )


# --- public distance -------------------------------------------------------


def _canonical(space, p, q):
    """Left-translated difference, chosen symmetrically in (p, q)."""
    g1 = group_compose(space, group_inverse(space, q), p)
    if space.kind != "engel":
        return g1
    g2 = group_inverse(space, g1)
    return g1 if tuple(np.round(g1, 12)) <= tuple(np.round(g2, 12)) else g2


def norm_from_identity(space, g):
    """``(value, gap)`` for ``d(0, g)``."""
    if space.kind == "euclidean":
        return float(np.linalg.norm(g)), 0.0
    if space.kind == "heisenberg":
        return float(heisenberg_norm(g)), 0.0
    if g[0] == 0.0 and g[1] == 0.0:
        value, gap, _ = space._cache.plane(g[2], g[3])
    else:
        value, gap, _ = space._cache.general(g)
    return value, gap


def distance(space: MetricSpaceModel, p, q) -> DistanceResult:
    p, q = _point(space, p), _point(space, q)
    if p.shape != (space.dimension,) or q.shape != (space.dimension,):
        raise InputError("distance takes single points")
    if np.array_equal(p, q):
        return DistanceResult(0.0, "exact", 0.0)
    g = _canonical(space, p, q)
    if space.kind == "engel":
        if space.engel_solver_cfg is None:
            raise InputError("Engel space needs a solver configuration")
        value, gap = norm_from_identity(space, g)
        return DistanceResult(value, "upper_bound", gap)
    value, _ = norm_from_identity(space, g)
    return DistanceResult(value, "exact", EXACT_TOL * max(1.0, value))


def distances(space: MetricSpaceModel, P, Q):
    """Vectorized distances between matching rows of ``P`` and ``Q``
    (broadcasting). Returns ``(values, gaps)`` arrays."""
    P, Q = _point(space, P), _point(space, Q)
    P, Q = np.broadcast_arrays(P, Q)
    shape = P.shape[:-1]
    if space.kind == "euclidean":
        v = np.linalg.norm(P - Q, axis=-1)
        return v, np.zeros(shape)
    G = group_compose(space, group_inverse(space, Q), P)
    if space.kind == "heisenberg":
        v = heisenberg_norm(G)
        return v, EXACT_TOL * np.maximum(1.0, v)
    flatP, flatQ = P.reshape(-1, 4), Q.reshape(-1, 4)
    vals = np.empty(len(flatP))
    gaps = np.empty(len(flatP))
    for i, (a, b) in enumerate(zip(flatP, flatQ)):
        res = distance(space, a, b)
        vals[i], gaps[i] = res.value, res.gap_estimate
    return vals.reshape(shape), gaps.reshape(shape)


def resolution_floor(space):
    """Smallest distance the engine resolves meaningfully (10x its gap floor)."""
    return 10 * EXACT_TOL if space.kind != "engel" else 10 * space.engel_solver_cfg.tolerance


__all__ = [
    "CarnotStructure", "DistanceResult", "MetricSpaceModel", "SolverConfig",
    "dilate", "distance", "distances", "engel", "engel_bvp_distance", "euclidean",
    "group_compose", "group_inverse", "heisenberg", "heisenberg_norm",
    "homogeneous_norm", "homogeneous_size", "identity", "normalize_homogeneous",
    "space_from_name",
]
