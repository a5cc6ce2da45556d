"""Root-system models of split abelian-by-abelian solvable groups.

A group G = H x| A is described by finitely many nonzero linear functionals
(roots) on A, one weight block V_alpha per root, and per-root metric
polynomials.  Validation enforces the three structural conditions: every
root nonzero, the roots span the dual of A (non-degeneracy), and the
dimension-weighted sum of roots vanishes (unimodularity).

Group multiplication is implemented for the diagonal case only: the action
of t on the block V_alpha is scaling by exp(alpha(t)).  Unipotent blocks
enter the toolkit only through the metric polynomials, never through the
product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import PreconditionError, ValidationError

SPAN_TOL = 1e-9
UNIMODULAR_TOL = 1e-12
CLASS_TOL = 1e-9


@dataclass(frozen=True)
class Root:
    """One root: functional on A, weight-block dimension, metric polynomial parts.

    ``q_poly`` is a tuple of ascending coefficient tuples, each with zero
    constant term; the block's metric polynomial is Q(t) = 1 + sum |p_i(t)|.
    """

    alpha: tuple
    dim_v: int
    q_poly: tuple = ()


@dataclass(frozen=True)
class RootSystem:
    dim_a: int
    roots: tuple

    @property
    def n_roots(self):
        return len(self.roots)

    @property
    def is_diagonal(self):
        return all(len(r.q_poly) == 0 for r in self.roots)

    def alpha_matrix(self):
        """Roots stacked as rows, shape (n_roots, dim_a)."""
        return np.array([r.alpha for r in self.roots], dtype=float)

    def alpha(self, i, t):
        """Evaluate root i on an A-vector (or an (n, dim_a) batch)."""
        a = np.asarray(self.roots[i].alpha, dtype=float)
        return np.asarray(t, dtype=float) @ a

    def fiber_dims(self):
        return tuple(r.dim_v for r in self.roots)


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary value
    raise TypeError(f"unsupported coefficient type {type(x)!r}")


def root_system_diagnostics(dim_a, roots):
    """Collect violations of the root-system conditions (empty list = valid)."""
    violations = []
    if not isinstance(dim_a, int) or dim_a < 1:
        violations.append(f"dim_a must be a positive integer, got {dim_a!r}")
        return violations
    if not roots:
        violations.append("at least one root is required")
        return violations

    rows = []
    for i, r in enumerate(roots):
        alpha = list(r["alpha"]) if isinstance(r, dict) else list(r.alpha)
        dim_v = r["dim_v"] if isinstance(r, dict) else r.dim_v
        q_poly = r.get("q_poly", []) if isinstance(r, dict) else r.q_poly
        if len(alpha) != dim_a:
            violations.append(f"root {i}: alpha has length {len(alpha)}, expected {dim_a}")
            continue
        if not any(abs(float(a)) > 0.0 for a in alpha):
            violations.append(f"root {i}: alpha is the zero functional")
        if not isinstance(dim_v, int) or dim_v < 1:
            violations.append(f"root {i}: dim_v must be a positive integer, got {dim_v!r}")
        for k, part in enumerate(q_poly):
            coeffs = list(part)
            if coeffs and float(coeffs[0]) != 0.0:
                violations.append(
                    f"root {i}: q_poly part {k} has nonzero constant term {coeffs[0]!r}"
                )
        rows.append((i, alpha, dim_v))

    if violations:
        return violations

    mat = np.array([alpha for _, alpha, _ in rows], dtype=float)
    if np.linalg.matrix_rank(mat, tol=SPAN_TOL) < dim_a:
        violations.append(
            f"roots span a subspace of rank {np.linalg.matrix_rank(mat, tol=SPAN_TOL)}"
            f" < dim_a = {dim_a} (degenerate)"
        )

    # Unimodularity is checked exactly in rational arithmetic; float inputs
    # carry their exact binary values, so integer data never sees roundoff.
    try:
        sums = [
            sum(_as_fraction(alpha[j]) * dim_v for _, alpha, dim_v in rows)
            for j in range(dim_a)
        ]
        exact = all(s == 0 for s in sums)
    except TypeError:
        exact = False
        sums = None
    if sums is not None and not exact:
        float_sum = np.array([float(s) for s in sums])
        if np.max(np.abs(float_sum)) > UNIMODULAR_TOL:
            violations.append(
                "not unimodular: sum of dim_v * alpha = "
                f"{[float(s) for s in sums]}"
            )
    return violations


def validate_root_system(dim_a, roots):
    """Validate and freeze a root system; raise ValidationError on any violation."""
    violations = root_system_diagnostics(dim_a, roots)
    if violations:
        raise ValidationError(violations)
    frozen = []
    for r in roots:
        if isinstance(r, dict):
            frozen.append(
                Root(
                    alpha=tuple(float(a) for a in r["alpha"]),
                    dim_v=int(r["dim_v"]),
                    q_poly=tuple(
                        tuple(float(c) for c in part) for part in r.get("q_poly", [])
                    ),
                )
            )
        else:
            frozen.append(
                Root(
                    alpha=tuple(float(a) for a in r.alpha),
                    dim_v=int(r.dim_v),
                    q_poly=tuple(tuple(float(c) for c in part) for part in r.q_poly),
                )
            )
    return RootSystem(dim_a=int(dim_a), roots=tuple(frozen))


def load_root_system(path):
    """Read the JSON group-spec format {"dim_a": int, "roots": [...]}."""
    with open(path) as fh:
        spec = json.load(fh)
    if not isinstance(spec, dict) or "dim_a" not in spec or "roots" not in spec:
        raise ValidationError("group spec must be an object with 'dim_a' and 'roots'")
    return validate_root_system(spec["dim_a"], spec["roots"])


def sol_group():
    """The Sol root system: dim A = 1, roots +1 and -1, trivial Q."""
    return validate_root_system(
        1, [{"alpha": [1], "dim_v": 1}, {"alpha": [-1], "dim_v": 1}]
    )


def rank2_group():
    """dim A = 2 with roots (1,0), (0,1), (-1,-1), all one-dimensional."""
    return validate_root_system(
        2,
        [
            {"alpha": [1, 0], "dim_v": 1},
            {"alpha": [0, 1], "dim_v": 1},
            {"alpha": [-1, -1], "dim_v": 1},
        ],
    )


@dataclass(frozen=True)
class RootClass:
    """Equivalence class of roots under positive proportionality."""

    representative: int
    members: tuple


def root_classes(rs: RootSystem):
    """Partition root indices into classes of positive multiples of each other."""
    mat = rs.alpha_matrix()
    norms = np.linalg.norm(mat, axis=1)
    unassigned = list(range(rs.n_roots))
    classes = []
    while unassigned:
        rep = unassigned.pop(0)
        members = [rep]
        for j in list(unassigned):
            # alpha_j = c * alpha_rep with c > 0, tested at relative tolerance
            c = norms[j] / norms[rep]
            if np.allclose(mat[j], c * mat[rep], rtol=CLASS_TOL, atol=CLASS_TOL * norms[j]):
                members.append(j)
                unassigned.remove(j)
        classes.append(RootClass(representative=rep, members=tuple(sorted(members))))
    return classes


@dataclass(frozen=True)
class GroupPoint:
    """A point ((x_alpha)_alpha, t) in coordinates.

    Fibers are stored per root as read-only float arrays.
    """

    x: tuple
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen_array(self.t))
        object.__setattr__(self, "x", tuple(_frozen_array(xi) for xi in self.x))


def _frozen_array(a):
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def check_point(rs: RootSystem, p: GroupPoint):
    if p.t.shape != (rs.dim_a,):
        raise ValidationError(f"t has shape {p.t.shape}, expected ({rs.dim_a},)")
    for i, (xi, r) in enumerate(zip(p.x, rs.roots)):
        if xi.shape != (r.dim_v,):
            raise ValidationError(f"x[{i}] has shape {xi.shape}, expected ({r.dim_v},)")
    if not all(np.all(np.isfinite(xi)) for xi in p.x) or not np.all(np.isfinite(p.t)):
        raise ValidationError("point has non-finite entries")
    return p


def identity(rs: RootSystem) -> GroupPoint:
    return GroupPoint(
        x=tuple(np.zeros(r.dim_v) for r in rs.roots), t=np.zeros(rs.dim_a)
    )


def point(rs: RootSystem, x: Sequence, t: Sequence) -> GroupPoint:
    return check_point(rs, GroupPoint(x=tuple(np.atleast_1d(np.asarray(xi, dtype=float)) for xi in x),
                                      t=np.atleast_1d(np.asarray(t, dtype=float))))


def _require_diagonal(rs: RootSystem, op: str):
    if not rs.is_diagonal:
        raise PreconditionError(
            "diagonal action required",
            f"{op} is implemented only for systems with empty q_poly",
        )


def act(rs: RootSystem, t, x):
    """Apply phi(t) to H-coordinates: block V_alpha scales by exp(alpha(t))."""
    _require_diagonal(rs, "act")
    t = np.asarray(t, dtype=float)
    if t.shape != (rs.dim_a,):
        raise ValidationError(f"t has shape {t.shape}, expected ({rs.dim_a},)")
    out = []
    for i, xi in enumerate(x):
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (rs.roots[i].dim_v,):
            raise ValidationError(f"x[{i}] has wrong shape {xi.shape}")
        out.append(np.exp(rs.alpha(i, t)) * xi)
    return tuple(out)


def multiply(rs: RootSystem, g: GroupPoint, h: GroupPoint) -> GroupPoint:
    """Semidirect product (x_g + phi(t_g) x_h, t_g + t_h), diagonal case."""
    _require_diagonal(rs, "multiply")
    moved = act(rs, g.t, h.x)
    return GroupPoint(
        x=tuple(xg + xm for xg, xm in zip(g.x, moved)), t=g.t + h.t
    )


def inverse(rs: RootSystem, g: GroupPoint) -> GroupPoint:
    _require_diagonal(rs, "inverse")
    return GroupPoint(x=tuple(-xi for xi in act(rs, -g.t, g.x)), t=-g.t)
