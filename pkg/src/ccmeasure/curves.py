"""Curve representations.

A :class:`ParametricCurve` maps ``[a, b]`` into one of the supported spaces.
Builtins are evaluated in closed form and carry coordinate derivatives when
they are C^1; polylines interpolate samples and have no derivative data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class WeierstrassParams:
    alpha: float
    beta: float
    truncation: int | None = None
    tol: float = 1e-14
    require_engel_exponent: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InputError("alpha must lie in (0, 1)")
        if not self.beta > 1:
            raise InputError("beta must exceed 1")
        if not self.alpha * self.beta > 1:
            raise InputError("alpha * beta must exceed 1")
        if self.require_engel_exponent and not self.exponent > 2 / 3:
            raise InputError(
                f"Hoelder exponent {self.exponent:.4f} must exceed 2/3 for an m-C1_3 Engel curve"
            )
        if self.truncation is not None and self.truncation < 1:
            raise InputError("truncation must be positive")

    @property
    def exponent(self):
        return math.log(1 / self.alpha) / math.log(self.beta)

    @property
    def terms(self):
        if self.truncation is not None:
            return self.truncation
        # geometric tail 2 alpha^(N+1) / (1 - alpha) <= tol
        return max(1, math.ceil(math.log(self.tol * (1 - self.alpha) / 2) / math.log(self.alpha)))

    def tail_bound(self, n=None):
        n = self.terms if n is None else n
        return 2 * self.alpha ** (n + 1) / (1 - self.alpha)


def weierstrass_eval(params: WeierstrassParams, t):
    """Partial sum ``sum_{n<=N} alpha^n (cos(beta^n pi t) - 1)``.

    ``t`` may be an array. Summed from the smallest term up for accuracy.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for n in range(params.terms, -1, -1):
        out += params.alpha**n * (np.cos(params.beta**n * np.pi * t) - 1.0)
    return out


@dataclass(frozen=True, eq=False)
class ParametricCurve:
    """A continuous curve ``[a, b] -> space``.

    ``fn`` maps an array of times to an ``(m, n)`` array of points; ``deriv``,
    when present, gives coordinate derivatives the same way. ``modulus`` is
    the declared bound on the distance between consecutive polyline samples.
    """

    a: float
    b: float
    space_kind: str
    dimension: int
    name: str
    fn: Callable = field(repr=False)
    deriv: Callable | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict)
    kind: str = "builtin"  # "builtin" | "polyline" | "reparameterized"
    modulus: float | None = None

    def __post_init__(self):
        if not self.a < self.b:
            raise InputError(f"empty domain [{self.a}, {self.b}]")

    @property
    def domain(self):
        return (self.a, self.b)

    @property
    def length(self):
        return self.b - self.a

    def check_time(self, t):
        t = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.a), abs(self.b))
        if np.any(t < self.a - slack) or np.any(t > self.b + slack):
            raise InputError(f"time outside domain [{self.a}, {self.b}]")
        return np.clip(t, self.a, self.b)

    def eval(self, t):
        """Point at time ``t`` (scalar) or ``(m, n)`` points for an array."""
        t = self.check_time(t)
        if t.ndim == 0:
            return np.asarray(self.fn(t.reshape(1)), dtype=float)[0]
        return np.asarray(self.fn(t), dtype=float)

    def derivative(self, t):
        if self.deriv is None:
            raise InputError(f"curve {self.name!r} carries no derivative data")
        t = self.check_time(t)
        if t.ndim == 0:
            return np.asarray(self.deriv(t.reshape(1)), dtype=float)[0]
        return np.asarray(self.deriv(t), dtype=float)

    @property
    def has_derivative(self):
        return self.deriv is not None

    def restrict(self, a, b):
        if a < self.a or b > self.b:
            raise InputError("restriction must lie inside the domain")
        return ParametricCurve(a, b, self.space_kind, self.dimension, self.name,
                               self.fn, self.deriv, dict(self.params), self.kind,
                               self.modulus)


def _columns(*cols):
    def fn(t):
        return np.stack([np.broadcast_to(c(t), t.shape) for c in cols], axis=-1)
    return fn


def _zero(t):
    return np.zeros_like(t)


def _one(t):
    return np.ones_like(t)


def euclidean_segment(v, a=0.0, b=1.0, origin=None):
    """``t -> origin + t v``."""
    v = np.asarray(v, dtype=float)
    origin = np.zeros_like(v) if origin is None else np.asarray(origin, dtype=float)
    return ParametricCurve(
        a, b, "euclidean", len(v), "euclidean_segment",
        lambda t: origin + np.outer(t, v),
        lambda t: np.tile(v, (len(t), 1)),
        {"v": v.tolist(), "origin": origin.tolist()},
    )


def heisenberg_vertical(a=0.0, b=1.0, base=(0.0, 0.0)):
    """``t -> (x0, y0, t)``: a left translate of the center."""
    x0, y0 = base
    return ParametricCurve(
        a, b, "heisenberg", 3, "heisenberg_vertical",
        _columns(lambda t: x0 + 0 * t, lambda t: y0 + 0 * t, lambda t: t),
        _columns(_zero, _zero, _one),
        {"base": list(base)},
    )


def heisenberg_horizontal(a=0.0, b=1.0):
    """``t -> (t, 0, 0)``: a horizontal line."""
    return ParametricCurve(
        a, b, "heisenberg", 3, "heisenberg_horizontal",
        _columns(lambda t: t, _zero, _zero), _columns(_one, _zero, _zero),
    )


def engel_z_axis(a=0.0, b=1.0):
    return ParametricCurve(
        a, b, "engel", 4, "engel_z_axis",
        _columns(_zero, _zero, lambda t: t, _zero), _columns(_zero, _zero, _one, _zero),
    )


def engel_w_axis(a=0.0, b=1.0):
    return ParametricCurve(
        a, b, "engel", 4, "engel_w_axis",
        _columns(_zero, _zero, _zero, lambda t: t), _columns(_zero, _zero, _zero, _one),
    )


def engel_weierstrass(params: WeierstrassParams, phi="t", a=0.0, b=1.0):
    """``t -> (0, 0, W(t), phi(t))``; continuous, nowhere differentiable.

    ``phi`` is an expression in ``t`` (parsed with sympy) or a callable.
    No derivative data: the z component is nowhere differentiable.
    """
    phi_fn, _ = _expression(phi)
    return ParametricCurve(
        a, b, "engel", 4, "engel_weierstrass",
        _columns(_zero, _zero, lambda t: weierstrass_eval(params, t), phi_fn),
        None,
        {"alpha": params.alpha, "beta": params.beta, "terms": params.terms,
         "phi": phi if isinstance(phi, str) else getattr(phi, "__name__", "callable")},
    )


def _expression(expr):
    """Callable and derivative callable for a sympy expression in ``t``."""
    if callable(expr):
        return (lambda t: np.asarray(expr(t), dtype=float)), None
    import sympy

    t = sympy.Symbol("t", real=True)
    try:
        e = sympy.sympify(expr, locals={"t": t})
    except (sympy.SympifyError, TypeError) as exc:
        raise InputError(f"cannot parse component {expr!r}: {exc}") from None
    if e.free_symbols - {t}:
        raise InputError(f"component {expr!r} may only depend on t")
    f = sympy.lambdify(t, e, "numpy")
    df = sympy.lambdify(t, sympy.diff(e, t), "numpy")
    return (lambda s: np.asarray(f(s), dtype=float)), (lambda s: np.asarray(df(s), dtype=float))


def custom_coordinate_curve(space_kind, components, a=0.0, b=1.0, derivatives=None,
                            name="custom_coordinate_curve"):
    """Curve given by one component per coordinate.

    Components are sympy-parsable strings in ``t`` (derivatives derived
    symbolically) or callables (derivatives only if ``derivatives`` given).
    """
    pairs = [_expression(c) for c in components]
    fns = [p[0] for p in pairs]
    if derivatives is not None:
        dfns = [_expression(d)[0] for d in derivatives]
    elif all(p[1] is not None for p in pairs):
        dfns = [p[1] for p in pairs]
    else:
        dfns = None
    return ParametricCurve(
        a, b, space_kind, len(components), name,
        _columns(*fns), _columns(*dfns) if dfns else None,
        {"components": [c if isinstance(c, str) else "callable" for c in components]},
    )


def polyline(space_kind, times, points, modulus=None, name="polyline"):
    """Coordinate-wise linear interpolation of samples at sorted ``times``."""
    times = np.asarray(times, dtype=float)
    points = np.asarray(points, dtype=float)
    if times.ndim != 1 or len(times) < 2 or points.shape[0] != len(times):
        raise InputError("polyline needs at least two samples with matching times")
    if np.any(np.diff(times) <= 0):
        raise InputError("polyline times must be strictly increasing")

    def fn(t):
        return np.stack([np.interp(t, times, points[:, i]) for i in range(points.shape[1])], -1)

    return ParametricCurve(
        float(times[0]), float(times[-1]), space_kind, points.shape[1], name, fn,
        None, {"samples": len(times)}, "polyline", modulus,
    )


def check_polyline_modulus(space, curve):
    """True if consecutive samples respect the declared modulus bound."""
    from .spaces import distances

    if curve.kind != "polyline" or curve.modulus is None:
        return True
    ts = np.linspace(curve.a, curve.b, curve.params["samples"])
    P = curve.eval(ts)
    d, gap = distances(space, P[:-1], P[1:])
    return bool(np.all(d <= curve.modulus + gap))


def reparameterized(curve: ParametricCurve, new_to_old: Callable, new_b: float,
                    name=None):
    """``u -> curve(new_to_old(u))`` on ``[0, new_b]``."""
    return ParametricCurve(
        0.0, new_b, curve.space_kind, curve.dimension, name or f"{curve.name}_reparam",
        lambda u: curve.fn(np.clip(new_to_old(u), curve.a, curve.b)),
        None, {"base": curve.name}, "reparameterized",
    )


BUILTINS = {
    "euclidean_segment": euclidean_segment,
    "heisenberg_vertical": heisenberg_vertical,
    "heisenberg_horizontal": heisenberg_horizontal,
    "engel_z_axis": engel_z_axis,
    "engel_w_axis": engel_w_axis,
    "engel_weierstrass": engel_weierstrass,
    "custom_coordinate_curve": custom_coordinate_curve,
}
