"""Rank-one model spaces H_{s+1} = R^s x| R and their coarse metric.

The metric polynomial Q(t) = 1 + sum_i |p_i(t)| (each p_i with zero constant
term) defines the height U_Q(d) at which a fiber displacement d becomes
unit-size: the smallest t0 with exp(-t) Q(t) d <= 1 for all t >= t0.  The
two-case distance built on U_Q is the canonical metric of the toolkit; it is
only quasi-isometric to the Riemannian one.

The case-2 value U_Q(d) - (t1 + t2) is clamped from below by |t1 - t2|:
height separation is a true lower bound for any path metric of the form
|dt| + (positive) |dx|, and the clamp keeps the function nonnegative in the
regime t1 + t2 > U_Q(d) where the raw expression goes negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, PreconditionError, ValidationError

BISECT_TOL = 1e-10


@dataclass(frozen=True)
class MetricPolynomial:
    """Q(t) = 1 + sum_i |p_i(t)|, parts as ascending coefficient tuples."""

    parts: tuple = ()

    def __post_init__(self):
        frozen = []
        for part in self.parts:
            coeffs = tuple(float(c) for c in part)
            if coeffs and coeffs[0] != 0.0:
                raise ValidationError(
                    f"metric polynomial part {list(coeffs)} has nonzero constant term"
                )
            if any(c != 0.0 for c in coeffs):
                frozen.append(coeffs)
        object.__setattr__(self, "parts", tuple(frozen))

    @property
    def is_trivial(self):
        return not self.parts

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        q = np.ones_like(t, dtype=float)
        for coeffs in self.parts:
            q = q + np.abs(_polyval(coeffs, t))
        return q if q.shape else float(q)


def _polyval(coeffs, t):
    # ascending coefficients
    out = np.zeros_like(np.asarray(t, dtype=float))
    for c in reversed(coeffs):
        out = out * t + c
    return out


def _real_roots(coeffs, lo=None, hi=None):
    """Real roots of an ascending-coefficient polynomial, optionally windowed."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if c.size <= 1:
        return np.array([])
    roots = np.roots(c[::-1])
    scale = max(1.0, np.max(np.abs(roots))) if roots.size else 1.0
    real = roots[np.abs(roots.imag) <= 1e-9 * scale].real
    if lo is not None:
        real = real[real >= lo - 1e-12]
    if hi is not None:
        real = real[real <= hi + 1e-12]
    return np.unique(real)


def _derivative(coeffs):
    return tuple(k * coeffs[k] for k in range(1, len(coeffs)))


def _monotone_nodes(poly: MetricPolynomial):
    """All t >= 0 where exp(-t) Q(t) can change monotonicity.

    Collects the kinks of the |p_i| terms and, on each smooth piece
    1 + sum sigma_i p_i =: q, the roots of q' - q (stationary points of
    exp(-t) q(t)).  Beyond the largest returned node the function is
    strictly monotone, and since it tends to zero it is strictly decreasing.
    """
    breakpoints = sorted(
        {0.0} | {float(r) for part in poly.parts for r in _real_roots(part, lo=0.0)}
    )
    nodes = set(breakpoints)
    deg = max((len(p) for p in poly.parts), default=1)
    pieces = list(zip(breakpoints, breakpoints[1:] + [np.inf]))
    for a, b in pieces:
        if b - a <= 1e-14:
            continue
        mid = a + 1.0 if np.isinf(b) else 0.5 * (a + b)
        piece = np.zeros(deg)
        piece[0] = 1.0
        for part in poly.parts:
            sgn = 1.0 if _polyval(part, mid) >= 0 else -1.0
            arr = np.asarray(part, dtype=float)
            piece[: arr.size] += sgn * arr
        dpiece = np.zeros_like(piece)
        der = _derivative(tuple(piece))
        dpiece[: len(der)] = der
        hi = None if np.isinf(b) else b
        for r in _real_roots(tuple(dpiece - piece), lo=a, hi=hi):
            nodes.add(float(r))
    return sorted(nodes)


def u_inverse(poly: MetricPolynomial, d: float) -> float:
    """Last crossing t0 of exp(-t) Q(t) d = 1: exp(-t) Q(t) d <= 1 for all t >= t0.

    Requires d > 1.  Located by scanning past every kink and stationary point
    of exp(-t) Q(t) and bisecting in the final sign-changing panel (on which
    the function is monotone) to absolute tolerance 1e-10.
    """
    d = float(d)
    if not d > 1.0:
        raise PreconditionError("d > 1", f"u_inverse got d = {d}")
    if poly.is_trivial:
        return float(np.log(d))

    def f(t):
        return np.exp(-t) * poly(t) * d - 1.0

    nodes = _monotone_nodes(poly)
    # Strictly decreasing beyond the last node, so grow t_hi until f < 0 there.
    t_hi = max(2.0, np.log(d) + 1.0, nodes[-1] + 1.0)
    for _ in range(200):
        if f(t_hi) < 0:
            break
        t_hi *= 2.0
    else:
        raise NumericalError("u_inverse: failed to bracket the tail")

    panel = [t for t in nodes if t < t_hi] + [t_hi]
    vals = [f(t) for t in panel]
    # f(0) = d - 1 > 0, f(t_hi) < 0; take the last panel changing sign.
    k = max(i for i in range(len(panel) - 1) if vals[i] >= 0 and vals[i + 1] < 0)
    lo, hi = panel[k], panel[k + 1]
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_u_bound_constant(poly: MetricPolynomial, n_grid=64, d_max=1e8):
    """Scan a log grid to estimate C_Q with ln d - C <= U_Q(d) <= 2 ln d + C.

    The returned constant carries a 10% + 0.5 safety margin and is meant to
    be frozen once per polynomial.
    """
    ds = np.exp(np.linspace(1.0, np.log(d_max), n_grid))
    c = 0.0
    for d in ds:
        u = u_inverse(poly, d)
        c = max(c, np.log(d) - u, u - 2.0 * np.log(d))
    return 1.1 * c + 0.5


@dataclass(frozen=True)
class WeightPoint:
    """A point (x, t) of H_{s+1}: fiber coordinate x, height t."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.x, dtype=float))
        arr.setflags(write=False)
        object.__setattr__(self, "x", arr)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True)
class VerticalGeodesic:
    """The vertical line {(x0, t) : t in R}."""

    x0: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.x0, dtype=float))
        arr.setflags(write=False)
        object.__setattr__(self, "x0", arr)


def _unit_gap(poly, t, d):
    """True where the fiber gap d is at most unit-size at height t."""
    return np.exp(-t) * poly(t) * d <= 1.0


def weight_distance(p: WeightPoint, q: WeightPoint, poly: MetricPolynomial) -> float:
    if p.x.shape != q.x.shape:
        raise ValidationError(
            f"fiber dimensions differ: {p.x.shape} vs {q.x.shape}"
        )
    d = float(np.linalg.norm(p.x - q.x))
    dt = abs(p.t - q.t)
    if d <= 1.0 or _unit_gap(poly, p.t, d) or _unit_gap(poly, q.t, d):
        return dt
    return max(dt, u_inverse(poly, d) - (p.t + q.t))


def weight_distance_arrays(x1, t1, x2, t2, poly: MetricPolynomial):
    """Vectorized weight_distance for trivial Q (U(d) = ln d in closed form).

    ``x1``/``x2`` have shape (..., s), heights broadcast over the same lead
    shape.  Falls back to a Python loop for nontrivial polynomials.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    d = np.linalg.norm(x1 - x2, axis=-1)
    dt = np.abs(t1 - t2)
    if poly.is_trivial:
        with np.errstate(divide="ignore"):
            logd = np.where(d > 0, np.log(np.maximum(d, 1e-300)), -np.inf)
        case1 = (d <= 1.0) | (logd - t1 <= 0) | (logd - t2 <= 0)
        far = np.maximum(dt, logd - (t1 + t2))
        return np.where(case1, dt, far)
    it = np.nditer(d, flags=["multi_index"])
    out = np.empty_like(d)
    for _ in it:
        idx = it.multi_index
        out[idx] = weight_distance(
            WeightPoint(x1[idx], t1[idx] if t1.shape else float(t1)),
            WeightPoint(x2[idx], t2[idx] if t2.shape else float(t2)),
            poly,
        )
        it.iternext()
    return out


def dist_to_vertical(p: WeightPoint, g: VerticalGeodesic, poly: MetricPolynomial) -> float:
    """Distance from a point to a vertical geodesic, clamped at zero."""
    d = float(np.linalg.norm(p.x - g.x0))
    if d <= 1.0 or _unit_gap(poly, p.t, d):
        return 0.0
    return max(0.0, u_inverse(poly, d) - p.t)


@dataclass(frozen=True)
class VerticalFit:
    """Result of approximate_by_vertical.

    ``geodesic`` is the merged line's lower branch (through the limit fiber
    coordinate); ``upper`` is the branch through the origin point.  The
    deviation of point j is measured against ``upper`` for j >= 0 and
    ``geodesic`` for j < 0, following the split used to build the merge.
    """

    geodesic: VerticalGeodesic
    upper: VerticalGeodesic
    deviations: np.ndarray
    indices: np.ndarray


def approximate_by_vertical(points, mode, poly: MetricPolynomial, origin=0) -> VerticalFit:
    """Fit a vertical geodesic to points with equal height steps h0 > 2.

    ``mode`` is ("bounded", r) or ("linear", eta, c1).  ``origin`` is the
    list position of lemma-index 0 (the point the upper branch runs through);
    points before it carry negative indices.
    """
    pts = list(points)
    if len(pts) < 2:
        raise PreconditionError("len(points) >= 2")
    heights = np.array([p.t for p in pts])
    steps = np.diff(heights)
    h0 = float(steps[0])
    if not np.allclose(steps, h0, rtol=1e-9, atol=1e-9):
        raise PreconditionError("equal height steps", f"steps = {steps}")
    if not h0 > 2.0:
        raise PreconditionError("h0 > 2", f"h0 = {h0}")
    if not 0 <= origin < len(pts):
        raise PreconditionError("0 <= origin < len(points)")

    kind = mode[0]
    if kind == "bounded":
        r = float(mode[1])
        if not 2.0 * r <= h0 / 2.0:
            raise PreconditionError("2*r <= h0/2", f"r = {r}, h0 = {h0}")
    elif kind == "linear":
        eta, c1 = float(mode[1]), float(mode[2])
        if not 2.0 * c1 <= h0:
            raise PreconditionError("2*C1 <= h0", f"C1 = {c1}, h0 = {h0}")
    else:
        raise ValidationError(f"unknown mode {mode!r}")

    upper = VerticalGeodesic(pts[origin].x)
    lower = VerticalGeodesic(pts[0].x)  # earliest index stands in for x(-inf)
    indices = np.arange(len(pts)) - origin
    deviations = np.array(
        [
            dist_to_vertical(p, upper if j >= 0 else lower, poly)
            for j, p in zip(indices, pts)
        ]
    )
    return VerticalFit(geodesic=lower, upper=upper, deviations=deviations, indices=indices)


def vertical_fit_bound(mode, indices):
    """The per-point deviation bound certified by the fit, per mode."""
    indices = np.asarray(indices)
    if mode[0] == "bounded":
        return np.full(indices.shape, 2.0 * float(mode[1]))
    eta, c1 = float(mode[1]), float(mode[2])
    return 2.0 * eta * np.abs(indices) + 2.0 * c1
