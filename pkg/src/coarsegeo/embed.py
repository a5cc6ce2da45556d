"""Embedded metric on G via projections to weight hyperbolic spaces.

The distance between two points of G is the sum over roots of the rank-one
distances between their weight projections.  Flat-overlap regions, the
common-flat fraction of geodesic segment pairs, and linear neighborhoods are
built on the same projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import PreconditionError, ValidationError
from .groups import GroupPoint, RootSystem
from .weightspace import (
    MetricPolynomial,
    WeightPoint,
    u_inverse,
    weight_distance,
    weight_distance_arrays,
)


@lru_cache(maxsize=None)
def weight_poly(rs: RootSystem, i: int) -> MetricPolynomial:
    """Metric polynomial of the weight space receiving pi_i."""
    return MetricPolynomial(parts=rs.roots[i].q_poly)


def project_to_base(p: GroupPoint) -> np.ndarray:
    return np.array(p.t, dtype=float)


def project_to_weight(rs: RootSystem, p: GroupPoint, i: int) -> WeightPoint:
    if not 0 <= i < rs.n_roots:
        raise ValidationError(f"root index {i} out of range")
    return WeightPoint(x=p.x[i], t=float(rs.alpha(i, p.t)))


def embedded_distance(rs: RootSystem, p: GroupPoint, q: GroupPoint) -> float:
    return sum(
        weight_distance(
            project_to_weight(rs, p, i), project_to_weight(rs, q, i), weight_poly(rs, i)
        )
        for i in range(rs.n_roots)
    )


def embedded_distance_arrays(rs: RootSystem, fibers1, base1, fibers2, base2):
    """Vectorized embedded distance between two batches of points.

    ``fibers*`` are per-root arrays of shape (..., dim_v); ``base*`` have
    shape (..., dim_a).  Broadcasts like numpy.
    """
    base1 = np.asarray(base1, dtype=float)
    base2 = np.asarray(base2, dtype=float)
    total = 0.0
    for i in range(rs.n_roots):
        h1 = rs.alpha(i, base1)
        h2 = rs.alpha(i, base2)
        total = total + weight_distance_arrays(
            fibers1[i], h1, fibers2[i], h2, weight_poly(rs, i)
        )
    return total


def pairwise_embedded(rs: RootSystem, fibers, base):
    """All-pairs embedded distance matrix for one batch of n points."""
    f1 = [np.asarray(f, dtype=float)[:, None, :] for f in fibers]
    f2 = [np.asarray(f, dtype=float)[None, :, :] for f in fibers]
    b = np.asarray(base, dtype=float)
    return embedded_distance_arrays(rs, f1, b[:, None, :], f2, b[None, :, :])


# ---------------------------------------------------------------------------
# Finsler lengths (used by the embedding sandwich property)

def _q_factor(rs, i, h):
    """1 + Q_i(h) evaluated at weight height h (the exp(-h) factor excluded)."""
    return weight_poly(rs, i)(h)


def finsler_length(rs: RootSystem, fibers, base, which="mixed", n_quad=64):
    """Finsler length of a piecewise-linear path in coordinates.

    ``which`` is "mixed" for |dt|_1 + sum_alpha fiber terms, or a root index
    for the single weight-space length |d alpha(t)| + fiber term of that
    root.  Fiber terms are integrated by the midpoint rule on n_quad nodes
    per polyline segment.
    """
    base = np.asarray(base, dtype=float)
    n = base.shape[0]
    s = (np.arange(n_quad) + 0.5) / n_quad
    total = 0.0
    for k in range(n - 1):
        t0, t1 = base[k], base[k + 1]
        dt = t1 - t0
        if which == "mixed":
            total += np.sum(np.abs(dt))
        else:
            total += abs(rs.alpha(which, dt))
        tmid = t0[None, :] + s[:, None] * dt[None, :]
        roots = range(rs.n_roots) if which == "mixed" else [which]
        for i in roots:
            dx = np.asarray(fibers[i][k + 1], dtype=float) - np.asarray(
                fibers[i][k], dtype=float
            )
            l1 = np.sum(np.abs(dx))
            if l1 == 0.0:
                continue
            h = rs.alpha(i, tmid)
            total += np.mean(np.exp(-h) * _q_factor(rs, i, h)) * l1
    return float(total)


# ---------------------------------------------------------------------------
# Flat overlap

@dataclass(frozen=True)
class HalfspaceRegion:
    """Intersection of halfspaces {t : <normal, t> >= offset} in A."""

    normals: np.ndarray  # (m, dim_a)
    offsets: np.ndarray  # (m,)

    def contains(self, t, tol=0.0):
        t = np.asarray(t, dtype=float)
        if self.normals.size == 0:
            return np.ones(t.shape[:-1], dtype=bool) if t.ndim > 1 else True
        vals = t @ self.normals.T - self.offsets
        return np.all(vals >= -tol, axis=-1)


def fourier_motzkin_feasible(normals, offsets, tol=1e-9):
    """Exact feasibility of {t : N t >= b} by Fourier-Motzkin elimination."""
    rows = [(np.array(n, dtype=float), float(b)) for n, b in zip(normals, offsets)]
    dim = len(rows[0][0]) if rows else 0
    for k in range(dim):
        pos, neg, zero = [], [], []
        for n, b in rows:
            c = n[k]
            if c > tol:
                pos.append((n / c, b / c))
            elif c < -tol:
                neg.append((n / (-c), b / (-c)))  # flipped: -t_k + ... >= b
            else:
                zero.append((n, b))
        new_rows = list(zero)
        for np_, bp in pos:
            for nn, bn in neg:
                comb = np_ + nn
                comb[k] = 0.0
                new_rows.append((comb, bp + bn))
        rows = new_rows
        if not rows:
            return True
    return all(b <= tol for _, b in rows)


def flat_overlap_region(rs: RootSystem, x_coords, y_coords, max_dim=4):
    """Region of A where the flats through fiber coordinates x and y are close.

    One halfspace alpha(t) >= U_alpha(|x_alpha - y_alpha|) is imposed per
    root whose fiber gap satisfies ln|gap| >= 1; smaller gaps impose nothing.
    Returns (HalfspaceRegion, feasible).
    """
    if rs.dim_a > max_dim:
        raise PreconditionError(
            f"dim_a <= {max_dim}", "Fourier-Motzkin feasibility is limited to small rank"
        )
    normals, offsets = [], []
    for i in range(rs.n_roots):
        gap = float(
            np.linalg.norm(
                np.atleast_1d(np.asarray(x_coords[i], dtype=float))
                - np.atleast_1d(np.asarray(y_coords[i], dtype=float))
            )
        )
        if gap <= 0 or np.log(gap) < 1.0:
            continue
        normals.append(np.array(rs.roots[i].alpha, dtype=float))
        offsets.append(u_inverse(weight_poly(rs, i), gap))
    region = HalfspaceRegion(
        normals=np.array(normals, dtype=float).reshape(len(normals), rs.dim_a),
        offsets=np.array(offsets, dtype=float),
    )
    feasible = True if not normals else fourier_motzkin_feasible(normals, offsets)
    return region, feasible


# ---------------------------------------------------------------------------
# Common-flat fraction and linear neighborhoods

def _arclength_fractions(path):
    """Cumulative chord-length fractions of a path's samples in [0, 1]."""
    d = np.array(
        [path.point_dist(i, i + 1) for i in range(path.n_samples - 1)], dtype=float
    )
    cum = np.concatenate([[0.0], np.cumsum(d)])
    total = cum[-1]
    if total <= 0:
        return np.linspace(0.0, 1.0, path.n_samples)
    return cum / total


def common_flat_fraction(g1, g2, tol) -> float:
    """Fraction of matched arclength where all per-root fiber coordinates agree.

    Both paths must be flagged geodesic segments.  Parameters are matched by
    arclength fraction; agreement at fraction s means every root's fiber
    coordinates (step interpolation) differ by at most tol.
    """
    for g in (g1, g2):
        if not getattr(g, "is_geodesic", False):
            raise PreconditionError("is_geodesic", "common_flat_fraction needs geodesic segments")
    if g1.group is not g2.group and g1.group != g2.group:
        raise ValidationError("paths live in different groups")
    rs = g1.group
    f1 = _arclength_fractions(g1)
    f2 = _arclength_fractions(g2)
    m = max(g1.n_samples, g2.n_samples, 2)
    grid = (np.arange(m) + 0.5) / m
    i1 = np.clip(np.searchsorted(f1, grid, side="right") - 1, 0, g1.n_samples - 1)
    i2 = np.clip(np.searchsorted(f2, grid, side="right") - 1, 0, g2.n_samples - 1)
    agree = np.ones(m, dtype=bool)
    for r in range(rs.n_roots):
        x1 = np.asarray(g1.fibers[r], dtype=float)[i1]
        x2 = np.asarray(g2.fibers[r], dtype=float)[i2]
        agree &= np.linalg.norm(x1 - x2, axis=-1) <= tol
    return float(np.mean(agree))


@dataclass(frozen=True)
class LinearNeighborhoodSpec:
    """(eta, C) linear neighborhood of a set X with respect to basepoint x0."""

    eta: float
    c: float
    basepoint: GroupPoint

    def __post_init__(self):
        if not 0 <= self.eta < 1:
            raise ValidationError(f"eta must lie in [0, 1), got {self.eta}")
        if self.c < 0:
            raise ValidationError(f"C must be nonnegative, got {self.c}")


def linear_neighborhood_contains(rs: RootSystem, spec: LinearNeighborhoodSpec, x_set, y) -> bool:
    """True iff y lies in union of B(x, eta*d(x, x0) + C) over x in the set."""
    for x in x_set:
        radius = spec.eta * embedded_distance(rs, x, spec.basepoint) + spec.c
        if embedded_distance(rs, x, y) <= radius:
            return True
    return False
