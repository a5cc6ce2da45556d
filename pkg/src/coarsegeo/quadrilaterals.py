"""Quadrilaterals: coarse commutator loops made of four vertical edges.

All edges run parallel to a direction v in A that vanishes on no root.  Two
distance conventions coexist, each tight for its own check:

* Edge lengths, joint closeness and divergence use the rank-one round-trip
  distance along v: heights are counted once (the v-component), and a fiber
  gap that is visible at both heights costs 2 U(gap) - (h1 + h2), the cost of
  climbing to the join height and back.  With this convention the exact
  commutator loop satisfies the divergence condition with equality.

* The word lemma's smallness d(e, u) of a joint element uses the embedded
  metric (one-sided U per root), which is exactly the eigencoordinate-ratio
  bound the closure algebra produces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ValidationError
from .groups import GroupPoint, RootSystem, identity, multiply, point
from .embed import embedded_distance, weight_poly
from .weightspace import u_inverse

DIRECTION_TOL = 1e-12


def split_signs(rs: RootSystem, v):
    """Signs alpha_i(v) per root; rejects directions with W_v^0 != {0}."""
    v = np.asarray(v, dtype=float)
    vals = rs.alpha_matrix() @ v
    if np.any(np.abs(vals) <= DIRECTION_TOL):
        raise PreconditionError(
            "W_v^0 = {0}", f"alpha(v) = {vals} has a vanishing entry"
        )
    return np.sign(vals)


def _u_at_boundary(poly, gap):
    """U(gap) for gap >= 1; gaps on the unit boundary take the limit value.

    Sub-unit gaps return None: taken literally, they fall to the height-only
    branch of the distance.
    """
    if gap > 1.0:
        return u_inverse(poly, gap)
    if gap >= 1.0 - 1e-12:
        return u_inverse(poly, 1.0 + 1e-12)
    return None


def rank1_distance(rs: RootSystem, p: GroupPoint, q: GroupPoint, v) -> float:
    """Round-trip distance in <v> x| H: heights counted once along v.

    |h1 - h2| when every fiber gap is unit-size at one of the endpoint
    heights; otherwise the worst root contributes 2 U(gap) - (h1 + h2) in
    that root's own height coordinate.
    """
    v = np.asarray(v, dtype=float)
    vhat = v / np.linalg.norm(v)
    h1, h2 = float(p.t @ vhat), float(q.t @ vhat)
    best = abs(h1 - h2)
    for i in range(rs.n_roots):
        gap = float(np.linalg.norm(p.x[i] - q.x[i]))
        poly = weight_poly(rs, i)
        a1, a2 = float(rs.alpha(i, p.t)), float(rs.alpha(i, q.t))
        if np.exp(-a1) * poly(a1) * gap <= 1.0 or np.exp(-a2) * poly(a2) * gap <= 1.0:
            continue
        u_val = _u_at_boundary(poly, gap)
        if u_val is None:
            continue
        scale = abs(float(rs.alpha(i, vhat)))
        best = max(best, (2.0 * u_val - (a1 + a2)) / scale)
    return best


@dataclass(frozen=True)
class Quadrilateral:
    """Four oriented vertical edges (b_i, e_i) with common direction v."""

    group: RootSystem
    edges: tuple  # 4 pairs (b, e) of GroupPoints
    v: np.ndarray

    def __post_init__(self):
        if len(self.edges) != 4:
            raise ValidationError("a quadrilateral has exactly 4 edges")
        arr = np.asarray(self.v, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "v", arr)

    def edge_lengths(self):
        return np.array(
            [rank1_distance(self.group, b, e, self.v) for b, e in self.edges]
        )

    def to_json(self):
        return {
            "v": list(map(float, self.v)),
            "edges": [
                {
                    "b": {"x": [list(map(float, xi)) for xi in b.x], "t": list(map(float, b.t))},
                    "e": {"x": [list(map(float, xi)) for xi in e.x], "t": list(map(float, e.t))},
                }
                for b, e in self.edges
            ],
        }


def quadrilateral_from_json(rs: RootSystem, obj) -> Quadrilateral:
    edges = tuple(
        (point(rs, ed["b"]["x"], ed["b"]["t"]), point(rs, ed["e"]["x"], ed["e"]["t"]))
        for ed in obj["edges"]
    )
    return Quadrilateral(group=rs, edges=edges, v=np.asarray(obj["v"], dtype=float))


@dataclass(frozen=True)
class QuadrilateralVerdict:
    passed: bool
    direction_ok: bool
    length_floor_ok: bool
    closeness_ok: bool
    divergence_ok: bool
    edge_lengths: np.ndarray
    joint_gaps: np.ndarray  # d(e_i, b_{i+1})
    divergences: np.ndarray  # d(b_i, e_{i+1})


def check_quadrilateral(q: Quadrilateral, eta) -> QuadrilateralVerdict:
    """Verify the quadrilateral conditions at slack eta.

    (1) common direction with no vanishing root, every edge parallel to it;
    (2) every |T_i| > 2 eta sum |T_j|; (3) joints d(e_i, b_{i+1}) <=
    eta (|T_i| + |T_{i+1}|) and divergence d(b_i, e_{i+1}) >= |T_i| + |T_{i+1}|.
    """
    rs = q.group
    try:
        split_signs(rs, q.v)
        direction_ok = True
    except PreconditionError:
        direction_ok = False
    vhat = q.v / np.linalg.norm(q.v)
    for b, e in q.edges:
        disp = e.t - b.t
        perp = disp - (disp @ vhat) * vhat
        if np.linalg.norm(perp) > 1e-9 * max(1.0, np.linalg.norm(disp)):
            direction_ok = False
        for xb, xe in zip(b.x, e.x):
            if np.linalg.norm(xe - xb) > 1e-9:
                direction_ok = False  # vertical edges carry no fiber move

    lengths = q.edge_lengths()
    total = float(np.sum(lengths))
    length_floor_ok = bool(np.all(lengths > 2 * eta * total - 1e-12))
    joints = np.array(
        [
            rank1_distance(rs, q.edges[i][1], q.edges[(i + 1) % 4][0], q.v)
            for i in range(4)
        ]
    )
    divs = np.array(
        [
            rank1_distance(rs, q.edges[i][0], q.edges[(i + 1) % 4][1], q.v)
            for i in range(4)
        ]
    )
    closeness_ok = bool(
        np.all(joints <= eta * (lengths + np.roll(lengths, -1)) + 1e-9)
    )
    divergence_ok = bool(np.all(divs >= lengths + np.roll(lengths, -1) - 1e-9))
    return QuadrilateralVerdict(
        passed=direction_ok and length_floor_ok and closeness_ok and divergence_ok,
        direction_ok=direction_ok,
        length_floor_ok=length_floor_ok,
        closeness_ok=closeness_ok,
        divergence_ok=divergence_ok,
        edge_lengths=lengths,
        joint_gaps=joints,
        divergences=divs,
    )


def _fiber_element(rs: RootSystem, coords) -> GroupPoint:
    return point(rs, coords, np.zeros(rs.dim_a))


def _as_h_coords(rs: RootSystem, value, sign, v):
    """Accept either full H-coordinates or a scalar/vector for the unique
    root on the requested side of v."""
    if isinstance(value, (list, tuple)) and len(value) == rs.n_roots:
        return tuple(np.atleast_1d(np.asarray(x, dtype=float)) for x in value)
    signs = split_signs(rs, v)
    side = [i for i in range(rs.n_roots) if signs[i] == sign]
    if len(side) != 1:
        raise ValidationError(
            "scalar fiber shortcut needs a unique root on that side; pass full coordinates"
        )
    coords = [np.zeros(r.dim_v) for r in rs.roots]
    coords[side[0]] = np.atleast_1d(np.asarray(value, dtype=float))
    return tuple(coords)


def build_commutator_quadrilateral(rs: RootSystem, x_tilde, y_tilde, t, v=None) -> Quadrilateral:
    """Realize the commutator loop x y x^-1 y^-1 as four vertical edges.

    x and y are conjugated fiber elements supported on the positive and
    negative sides of v; the loop closes exactly under the group product.
    At unit fiber size the verdict passes with eta = 0 joints.
    """
    if v is None:
        if rs.dim_a != 1:
            raise ValidationError("v is required when dim_a > 1")
        v = np.array([1.0])
    v = np.asarray(v, dtype=float)
    vhat = v / np.linalg.norm(v)
    if t <= 0:
        raise PreconditionError("t > 0", "edge length floor fails at t = 0")
    xp = _as_h_coords(rs, x_tilde, 1.0, v)
    ym = _as_h_coords(rs, y_tilde, -1.0, v)
    signs = split_signs(rs, v)
    for i in range(rs.n_roots):
        if signs[i] < 0 and np.linalg.norm(xp[i]) > 0:
            raise ValidationError(f"x_tilde has support on the negative root {i}")
        if signs[i] > 0 and np.linalg.norm(ym[i]) > 0:
            raise ValidationError(f"y_tilde has support on the positive root {i}")
    if all(np.linalg.norm(x) == 0 for x in xp) or all(np.linalg.norm(y) == 0 for y in ym):
        raise PreconditionError("x_tilde != 0 and y_tilde != 0", "degenerate loop")

    up = _fiber_element(rs, xp)
    um = _fiber_element(rs, ym)
    up_inv = _fiber_element(rs, tuple(-x for x in xp))
    um_inv = _fiber_element(rs, tuple(-y for y in ym))
    a_up = point(rs, [np.zeros(r.dim_v) for r in rs.roots], 2 * t * vhat)
    a_dn = point(rs, [np.zeros(r.dim_v) for r in rs.roots], -2 * t * vhat)

    g = identity(rs)
    corners = [g]
    for step in (a_up, up, a_dn, um, a_up, up_inv, a_dn, um_inv):
        g = multiply(rs, g, step)
        corners.append(g)
    residual = embedded_distance(rs, g, identity(rs))
    if residual > 1e-9:
        raise ValidationError(f"commutator loop failed to close: residual {residual}")
    # Edges are the A-steps; fiber steps are the joints between them.
    edges = tuple((corners[2 * i], corners[2 * i + 1]) for i in range(4))
    return Quadrilateral(group=rs, edges=edges, v=v)


def orientation_pattern(q: Quadrilateral):
    """Signs of the edge directions along v, plus conformance with the
    alternating pattern (+,-,+,-) up to rotation."""
    vhat = q.v / np.linalg.norm(q.v)
    signs = tuple(
        int(np.sign(float((e.t - b.t) @ vhat))) for b, e in q.edges
    )
    conformant = all(signs[i] == -signs[(i + 1) % 4] for i in range(4)) and 0 not in signs
    return signs, conformant


@dataclass(frozen=True)
class WordResult:
    residual: float  # sup-norm of the final point's coordinates
    embedded_residual: float
    closes: bool
    r_sum_difference: float  # (r0 + r2) - (r1 + r3)
    spread_values: np.ndarray  # |r_i - r_{i+1}|
    spread_bounds: np.ndarray  # d(e, u_{i+1}) + d(e, u_{i+3})
    spread_ok: bool


def word_residual(rs: RootSystem, r_values, us, v=None, eta=None, tol=1e-9) -> WordResult:
    """Evaluate (r0,0)u0(-r1,0)u1(r2,0)u2(-r3,0)u3 and check the size bounds.

    u0, u2 must lie in W_v^+ and u1, u3 in W_v^-.  When the word closes, the
    spread |r_i - r_{i+1}| is checked against d(e, u_{i+1}) + d(e, u_{i+3})
    in the embedded metric.
    """
    if v is None:
        if rs.dim_a != 1:
            raise ValidationError("v is required when dim_a > 1")
        v = np.array([1.0])
    v = np.asarray(v, dtype=float)
    vhat = v / np.linalg.norm(v)
    signs = split_signs(rs, v)
    r = [float(x) for x in r_values]
    if len(r) != 4 or len(us) != 4:
        raise ValidationError("need four r values and four fiber elements")
    coords = [_as_h_coords(rs, u, 1.0 if k % 2 == 0 else -1.0, v) for k, u in enumerate(us)]
    for k, c in enumerate(coords):
        want = 1.0 if k % 2 == 0 else -1.0
        for i in range(rs.n_roots):
            if signs[i] != want and np.linalg.norm(c[i]) > 0:
                side = "W+" if want > 0 else "W-"
                raise PreconditionError(
                    f"u_{k} in {side}", f"support on root {i} with alpha(v) sign {signs[i]}"
                )
    e = identity(rs)
    d_u = [embedded_distance(rs, _fiber_element(rs, c), e) for c in coords]
    if eta is not None:
        total = sum(r)
        for k in range(4):
            if not d_u[k] <= eta * (r[k] + r[(k + 1) % 4]) + 1e-12:
                raise PreconditionError(
                    "d(u_j, e) <= eta (r_j + r_{j+1})",
                    f"j = {k}: d = {d_u[k]:.6g}",
                )
            if not r[k] > 2 * eta * total:
                raise PreconditionError("r_j > 2 eta sum r", f"j = {k}: r = {r[k]}")
    g = identity(rs)
    seq = [
        point(rs, [np.zeros(rr.dim_v) for rr in rs.roots], r[0] * vhat),
        _fiber_element(rs, coords[0]),
        point(rs, [np.zeros(rr.dim_v) for rr in rs.roots], -r[1] * vhat),
        _fiber_element(rs, coords[1]),
        point(rs, [np.zeros(rr.dim_v) for rr in rs.roots], r[2] * vhat),
        _fiber_element(rs, coords[2]),
        point(rs, [np.zeros(rr.dim_v) for rr in rs.roots], -r[3] * vhat),
        _fiber_element(rs, coords[3]),
    ]
    for s in seq:
        g = multiply(rs, g, s)
    coord_residual = max(
        max((float(np.max(np.abs(xi))) for xi in g.x), default=0.0),
        float(np.max(np.abs(g.t))),
    )
    closes = coord_residual <= tol
    spread = np.array([abs(r[i] - r[(i + 1) % 4]) for i in range(4)])
    bounds = np.array([d_u[(i + 1) % 4] + d_u[(i + 3) % 4] for i in range(4)])
    spread_ok = bool(closes and np.all(spread <= bounds + 1e-9))
    return WordResult(
        residual=float(coord_residual),
        embedded_residual=float(embedded_distance(rs, g, e)),
        closes=bool(closes),
        r_sum_difference=(r[0] + r[2]) - (r[1] + r[3]),
        spread_values=spread,
        spread_bounds=bounds,
        spread_ok=spread_ok,
    )


@dataclass(frozen=True)
class StructureReport:
    length_spread: float
    length_spread_bound: float
    length_spread_ok: bool
    coset_classes: tuple  # per vertex quadruple, "+" or "-"
    coset_proximities: np.ndarray
    coset_bound: float
    coset_ok: bool
    alternating: bool


def _coset_proximity(rs: RootSystem, pts, rep: GroupPoint, plus_class, v):
    """Distance of the quadruple to rep * W (pinned in the opposite class).

    Per point, the pinned roots contribute max(0, U(gap) - alpha(t)) each,
    the coarse cost of their fiber mismatch at that height.
    """
    signs = split_signs(rs, v)
    pinned = [
        i
        for i in range(rs.n_roots)
        if (signs[i] < 0 if plus_class else signs[i] > 0)
    ]
    worst = 0.0
    for p in pts:
        total = 0.0
        for i in pinned:
            gap = float(np.linalg.norm(p.x[i] - rep.x[i]))
            poly = weight_poly(rs, i)
            h = float(rs.alpha(i, p.t))
            if np.exp(-h) * poly(h) * gap <= 1.0:
                continue
            u_val = _u_at_boundary(poly, gap)
            if u_val is None:
                continue
            total += max(0.0, u_val - h)
        worst = max(worst, total)
    return worst


def structure_report(q: Quadrilateral, eta) -> StructureReport:
    """Edge-length spread and vertex-quadruple coset proximity.

    The quadruple {b_i, e_{i+1}, b_{i+2}, e_{i+3}} must sit near a coset of
    W_v^+ or W_v^-, with the class alternating in i.
    """
    rs = q.group
    lengths = q.edge_lengths()
    total = float(np.sum(lengths))
    spread = float(np.max(lengths) - np.min(lengths))
    spread_ok = spread <= eta * total + 1e-9
    classes, proxes = [], []
    for i in range(4):
        pts = [
            q.edges[i][0],
            q.edges[(i + 1) % 4][1],
            q.edges[(i + 2) % 4][0],
            q.edges[(i + 3) % 4][1],
        ]
        prox_plus = _coset_proximity(rs, pts, pts[0], True, q.v)
        prox_minus = _coset_proximity(rs, pts, pts[0], False, q.v)
        if prox_plus <= prox_minus:
            classes.append("+")
            proxes.append(prox_plus)
        else:
            classes.append("-")
            proxes.append(prox_minus)
    proxes = np.array(proxes)
    alternating = classes[0] != classes[1] and classes[0] == classes[2] and classes[1] == classes[3]
    bound = eta * total
    return StructureReport(
        length_spread=spread,
        length_spread_bound=float(eta * total),
        length_spread_ok=bool(spread_ok),
        coset_classes=tuple(classes),
        coset_proximities=proxes,
        coset_bound=float(bound),
        coset_ok=bool(np.all(proxes <= bound + 1e-9)),
        alternating=bool(alternating),
    )


def snap_to_quadrilateral(rs: RootSystem, segments, eta_hint=0.0):
    """Snap four approximate oriented segments to a common-direction quadrilateral.

    Segments are (b, e) GroupPoint pairs.  Directions are aligned to the
    alternating pattern, averaged into one v, and each edge is rebuilt
    vertically through its own base point with its height extent preserved.
    Returns the quadrilateral and the smallest eta at which it passes.
    """
    if len(segments) != 4:
        raise ValidationError("need four segments")
    dirs = []
    for b, e in segments:
        d = e.t - b.t
        n = np.linalg.norm(d)
        if n <= 0:
            raise PreconditionError("nondegenerate segment directions")
        dirs.append(d / n)
    v = dirs[0] - dirs[1] + dirs[2] - dirs[3]
    if np.linalg.norm(v) <= 0:
        raise PreconditionError("alternating directions must not cancel")
    v = v / np.linalg.norm(v)
    vhat = v
    edges = []
    for b, e in segments:
        h = float((e.t - b.t) @ vhat)
        e_new = point(rs, [np.array(x) for x in b.x], b.t + h * vhat)
        edges.append((b, e_new))
    quad = Quadrilateral(group=rs, edges=tuple(edges), v=v)
    lengths = quad.edge_lengths()
    verdict = check_quadrilateral(quad, eta_hint)
    needed = eta_hint
    if float(np.sum(lengths)) > 0:
        joint_eta = max(
            verdict.joint_gaps[i] / (lengths[i] + lengths[(i + 1) % 4])
            for i in range(4)
        )
        needed = max(eta_hint, float(joint_eta))
    return quad, float(needed)
