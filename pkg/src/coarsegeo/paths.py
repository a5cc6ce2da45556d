"""Discrete quasi-geodesics, subdivision, and the efficiency-scale machinery.

Paths are finitely sampled curves.  The continuous subdivision rule (cut at
exact distance r) is replaced by its discrete first-crossing analogue: the
next breakpoint is the first sample at distance >= r from the previous one,
so consecutive gaps overshoot r by at most the mesh.

The A-factor carries two norms: the restriction of the embedded metric
(sum over roots of |alpha(dt)|), used for subdivisions and scale ladders,
and the Euclidean norm, used for chord and projection geometry.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ValidationError
from .groups import GroupPoint, RootSystem
from .embed import embedded_distance_arrays, pairwise_embedded

QUASI_SLACK = 1e-9


def default_hbar(n_roots: int, kappa: float) -> float:
    """Default confinement constant 2^(2(|roots|-1)) * 80 * kappa.

    Read off the proof chain (the rank-one bound 80*kappa*s plus one doubling
    and one kappa-doubling per eliminated root); deliberately conservative.
    """
    return (4.0 ** (n_roots - 1)) * 80.0 * kappa


class APath:
    """A sampled curve in the A-factor (or any R^k), with a choice of norm.

    metric="euclidean" uses |dt|_2; metric="roots" uses sum_i |alpha_i(dt)|
    with the functionals stacked in ``weights``.
    """

    def __init__(self, points, metric="euclidean", weights=None, kappa=1.0, c_add=0.0):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.points.shape[0] < 2:
            raise ValidationError("a path needs at least 2 samples")
        if not np.all(np.isfinite(self.points)):
            raise ValidationError("path has non-finite samples")
        self.metric = metric
        if metric == "roots":
            if weights is None:
                raise ValidationError("metric='roots' needs the weights matrix")
            self.weights = np.atleast_2d(np.asarray(weights, dtype=float))
        elif metric == "euclidean":
            self.weights = None
        else:
            raise ValidationError(f"unknown metric {metric!r}")
        self.kappa = float(kappa)
        self.c_add = float(c_add)

    @property
    def n_samples(self):
        return self.points.shape[0]

    def _dist(self, a, b):
        diff = b - a
        if self.metric == "euclidean":
            return np.linalg.norm(diff, axis=-1)
        return np.sum(np.abs(diff @ self.weights.T), axis=-1)

    def point_dist(self, i, j):
        return float(self._dist(self.points[i], self.points[j]))

    def dist_from(self, i, js):
        return self._dist(self.points[i][None, :], self.points[js])

    def endpoint_gap(self, i0=0, i1=None):
        i1 = self.n_samples - 1 if i1 is None else i1
        return self.point_dist(i0, i1)

    def chain_length(self, i0=0, i1=None):
        i1 = self.n_samples - 1 if i1 is None else i1
        return float(np.sum(self._dist(self.points[i0:i1], self.points[i0 + 1 : i1 + 1])))

    def domain_length(self, i0=0, i1=None):
        return self.chain_length(i0, i1)

    def mesh(self, i0=0, i1=None):
        i1 = self.n_samples - 1 if i1 is None else i1
        return float(np.max(self._dist(self.points[i0:i1], self.points[i0 + 1 : i1 + 1])))


class Path:
    """A sampled quasi-geodesic in G with declared constants (kappa, C).

    Columns: ``base`` (n, dim_a) and per-root ``fibers`` (n, dim_v).  The
    declared bounds (1/kappa)|ds| - C <= d <= kappa |ds| + C are verified on
    sampled index pairs at construction (all pairs up to 512 samples, a
    seeded subset beyond).
    """

    def __init__(
        self,
        group: RootSystem,
        base,
        fibers,
        params=None,
        kappa=1.0,
        c_add=0.0,
        is_geodesic=False,
        validate=True,
    ):
        self.group = group
        self.base = np.atleast_2d(np.asarray(base, dtype=float))
        n = self.base.shape[0]
        if n < 2:
            raise ValidationError("a path needs at least 2 samples")
        if self.base.shape[1] != group.dim_a:
            raise ValidationError(
                f"base has width {self.base.shape[1]}, expected {group.dim_a}"
            )
        self.fibers = tuple(
            np.atleast_2d(np.asarray(f, dtype=float)).reshape(n, group.roots[i].dim_v)
            for i, f in enumerate(fibers)
        )
        if params is None:
            params = np.arange(n, dtype=float)
        self.params = np.asarray(params, dtype=float)
        if self.params.shape != (n,):
            raise ValidationError("params must match the sample count")
        if np.any(np.diff(self.params) <= 0):
            raise ValidationError("params must be strictly increasing")
        if kappa < 1:
            raise ValidationError("kappa must be >= 1")
        if c_add < 0:
            raise ValidationError("c_add must be >= 0")
        self.kappa = float(kappa)
        self.c_add = float(c_add)
        self.is_geodesic = bool(is_geodesic)
        self._alpha_vals = self.base @ group.alpha_matrix().T  # (n, n_roots)
        if validate:
            self.check_quasi_constants()

    @property
    def n_samples(self):
        return self.base.shape[0]

    def point(self, i) -> GroupPoint:
        return GroupPoint(x=tuple(f[i] for f in self.fibers), t=self.base[i])

    def point_dist(self, i, j):
        return float(
            embedded_distance_arrays(
                self.group,
                [f[i] for f in self.fibers],
                self.base[i],
                [f[j] for f in self.fibers],
                self.base[j],
            )
        )

    def dist_from(self, i, js):
        return embedded_distance_arrays(
            self.group,
            [f[i][None, :] for f in self.fibers],
            self.base[i][None, :],
            [f[js] for f in self.fibers],
            self.base[js],
        )

    def pairwise(self):
        return pairwise_embedded(self.group, self.fibers, self.base)

    def endpoint_gap(self, i0=0, i1=None):
        i1 = self.n_samples - 1 if i1 is None else i1
        return self.point_dist(i0, i1)

    def chain_length(self, i0=0, i1=None):
        i1 = self.n_samples - 1 if i1 is None else i1
        idx = np.arange(i0, i1)
        d = embedded_distance_arrays(
            self.group,
            [f[idx] for f in self.fibers],
            self.base[idx],
            [f[idx + 1] for f in self.fibers],
            self.base[idx + 1],
        )
        return float(np.sum(d))

    def domain_length(self, i0=0, i1=None):
        i1 = self.n_samples - 1 if i1 is None else i1
        return float(self.params[i1] - self.params[i0])

    def mesh(self, i0=0, i1=None):
        i1 = self.n_samples - 1 if i1 is None else i1
        idx = np.arange(i0, i1)
        d = embedded_distance_arrays(
            self.group,
            [f[idx] for f in self.fibers],
            self.base[idx],
            [f[idx + 1] for f in self.fibers],
            self.base[idx + 1],
        )
        return float(np.max(d))

    def base_apath(self, metric="roots"):
        w = self.group.alpha_matrix() if metric == "roots" else None
        return APath(
            self.points_in_a(), metric=metric, weights=w, kappa=self.kappa, c_add=self.c_add
        )

    def points_in_a(self):
        return np.array(self.base, dtype=float)

    def check_quasi_constants(self, max_pairs=512, seed=0):
        n = self.n_samples
        if n <= max_pairs:
            ii, jj = np.triu_indices(n, k=1)
        else:
            rng = np.random.default_rng(seed)
            ii = rng.integers(0, n - 1, size=4 * max_pairs)
            jj = rng.integers(1, n, size=4 * max_pairs)
            ii, jj = np.minimum(ii, jj - 1), np.maximum(ii + 1, jj)
            ii, jj = np.concatenate([ii, np.arange(n - 1)]), np.concatenate([jj, np.arange(1, n)])
        d = embedded_distance_arrays(
            self.group,
            [f[ii] for f in self.fibers],
            self.base[ii],
            [f[jj] for f in self.fibers],
            self.base[jj],
        )
        ds = np.abs(self.params[jj] - self.params[ii])
        lo = ds / self.kappa - self.c_add - QUASI_SLACK
        hi = self.kappa * ds + self.c_add + QUASI_SLACK
        bad = (d < lo) | (d > hi)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise ValidationError(
                f"declared ({self.kappa}, {self.c_add}) quasi-geodesic bounds fail at "
                f"pair ({ii[k]}, {jj[k]}): d = {d[k]:.6g}, |ds| = {ds[k]:.6g}"
            )


# ---------------------------------------------------------------------------
# Subdivision

@dataclass(frozen=True)
class Subdivision:
    """Discrete first-crossing subdivision of a path (or of an index window)."""

    indices: np.ndarray
    r: float
    gaps: np.ndarray
    mesh: float

    @property
    def n_segments(self):
        return len(self.indices) - 1


def _subdivide_window(path, r, i0, i1):
    idx = [i0]
    i = i0
    while i < i1:
        js = np.arange(i + 1, i1 + 1)
        d = path.dist_from(i, js)
        hits = np.nonzero(d >= r)[0]
        if hits.size == 0:
            break
        i = int(js[hits[0]])
        idx.append(i)
    if idx[-1] != i1:
        idx.append(i1)
    return idx


def subdivide(path, r, i0=0, i1=None) -> Subdivision:
    """Breakpoints q0 = start, q_{k+1} = first sample at distance >= r from q_k.

    The final sample is appended regardless of its distance to the previous
    breakpoint; all earlier gaps lie in [r, r + mesh).
    """
    if r <= 0:
        raise PreconditionError("r > 0", f"got r = {r}")
    i1 = path.n_samples - 1 if i1 is None else i1
    idx = _subdivide_window(path, r, i0, i1)
    gaps = np.array(
        [path.point_dist(a, b) for a, b in zip(idx[:-1], idx[1:])], dtype=float
    )
    return Subdivision(
        indices=np.array(idx, dtype=int), r=float(r), gaps=gaps, mesh=path.mesh(i0, i1)
    )


def is_efficient(path, eps, rtilde, i0=0, i1=None) -> bool:
    """Subdivided chord-sum test: sum of gaps <= (1 + eps) * endpoint gap."""
    if not 0 < rtilde <= 1:
        raise PreconditionError("0 < rtilde <= 1", f"got rtilde = {rtilde}")
    i1 = path.n_samples - 1 if i1 is None else i1
    gap = path.endpoint_gap(i0, i1)
    if gap <= 0:
        return False
    sub = subdivide(path, rtilde * gap, i0, i1)
    return float(np.sum(sub.gaps)) <= (1.0 + eps) * gap


# ---------------------------------------------------------------------------
# Chord geometry (Euclidean, on the A factor)

def _point_segment_dist(p, a, b):
    """Euclidean distance from points p (m,k) to segment [a, b]."""
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(p - a, axis=-1)
    s = np.clip(((p - a) @ ab) / denom, 0.0, 1.0)
    proj = a[None, :] + s[:, None] * ab[None, :]
    return np.linalg.norm(p - proj, axis=-1)


def chord_hausdorff(points, n_dense=512) -> float:
    """Symmetric Hausdorff distance between a polyline and its endpoint chord."""
    if isinstance(points, APath):
        points = points.points
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a, b = pts[0], pts[-1]
    d1 = float(np.max(_point_segment_dist(pts, a, b)))
    m = max(n_dense, 4 * len(pts))
    s = np.linspace(0.0, 1.0, m)
    chord = a[None, :] + s[:, None] * (b - a)[None, :]
    best = np.full(m, np.inf)
    for k in range(len(pts) - 1):
        best = np.minimum(best, _point_segment_dist(chord, pts[k], pts[k + 1]))
    d2 = float(np.max(best))
    return max(d1, d2)


# ---------------------------------------------------------------------------
# Efficiency scale

@dataclass(frozen=True)
class ScaleReport:
    """Output of the efficiency-scale finder."""

    rho: float
    scale_index: int
    r_values: np.ndarray
    deltas: np.ndarray
    level_sizes: np.ndarray
    accepted: bool
    found: bool
    eps: float
    n_bound: float
    l_stop: float

    def to_json(self):
        return {
            "rho_j": self.rho,
            "scale_index": self.scale_index,
            "r_values": list(map(float, self.r_values)),
            "deltas": list(map(float, self.deltas)),
            "level_sizes": list(map(int, self.level_sizes)),
            "accepted": bool(self.accepted),
            "found": bool(self.found),
        }


def efficiency_length_condition(eps, n_bound, l_stop, kappa, L, hbar):
    """The admissibility inequality on L, plus the required lower bound."""
    q = 0.5 * eps ** 0.25
    lhs = (np.log(l_stop) - np.log(2 * kappa * L)) / np.log(q) - 1.0
    rhs = hbar * (2 * kappa) ** 2 * n_bound / eps
    log_required = (
        np.log(l_stop)
        - ((hbar * (2 * kappa) ** 2 * n_bound + eps) / eps) * np.log(q)
        - np.log(2 * kappa)
    )
    required = np.exp(log_required) if log_required < 700 else np.inf
    return lhs >= rhs, required


def _nested_levels(path, r_values, i0=0, i1=None):
    """Nested subdivisions: level 0 is the undivided window, each ladder
    level refines the previous level's segments."""
    i1 = path.n_samples - 1 if i1 is None else i1
    levels = [[i0, i1]]
    for r in r_values:
        prev = levels[-1]
        refined = [prev[0]]
        for a, b in zip(prev[:-1], prev[1:]):
            inner = _subdivide_window(path, r, a, b)
            refined.extend(inner[1:])
        levels.append(refined)
    return levels


def _level_deltas(path, levels, eps, scale):
    """Gap-weighted bad fraction delta_b per level."""
    deltas, sizes = [], []
    for idx in levels:
        gaps = np.array(
            [path.point_dist(a, b) for a, b in zip(idx[:-1], idx[1:])], dtype=float
        )
        bad = np.zeros(len(gaps), dtype=bool)
        for k, (a, b) in enumerate(zip(idx[:-1], idx[1:])):
            if gaps[k] <= 0:
                bad[k] = True
                continue
            bad[k] = not is_efficient(path, eps, scale, a, b)
        total = float(np.sum(gaps))
        deltas.append(float(np.sum(gaps[bad])) / total if total > 0 else 0.0)
        sizes.append(len(gaps))
    return np.array(deltas), np.array(sizes, dtype=int)


def _scale_ladder(gap, eps, l_stop, max_levels):
    q = 0.5 * eps ** 0.25
    rs = []
    r = q * gap
    while r > l_stop and len(rs) < max_levels:
        rs.append(r)
        r *= q
    rs.append(max(l_stop, r))
    return np.array(rs), q


def find_efficiency_scale(
    zeta, eps, n_bound, l_stop, hbar=None, enforce_length=True, max_levels=64
) -> ScaleReport:
    """Find a scale at which at most 1/N of the subsegments are inefficient.

    Builds the nested ladder r_0 = (eps^(1/4)/2)|lambda|, r_{b+1} =
    (eps^(1/4)/2) r_b down to l_stop, computes the gap-weighted bad fraction
    delta_b per level, and returns the coarsest level with delta_J <= 1/N
    whose next scale still clears l_stop.
    """
    if not 0 < eps < 1:
        raise PreconditionError("0 < eps < 1", f"got eps = {eps}")
    lam = zeta.base_apath() if isinstance(zeta, Path) else zeta
    kappa = lam.kappa
    if hbar is None:
        n_roots = zeta.group.n_roots if isinstance(zeta, Path) else 2
        hbar = default_hbar(n_roots, kappa)
    L = zeta.domain_length() if isinstance(zeta, Path) else lam.domain_length()
    ok, required = efficiency_length_condition(eps, n_bound, l_stop, kappa, L, hbar)
    if enforce_length and not ok:
        raise PreconditionError(
            "L_stop / (eps^(1/4)/2)^((hbar (2k)^2 N + eps)/eps) <= 2 kappa L",
            f"domain length {L:.6g} < required {required:.6g}",
        )
    gap = lam.endpoint_gap()
    if gap <= 0:
        raise PreconditionError("|lambda| > 0")
    ladder, q = _scale_ladder(gap, eps, l_stop, max_levels)
    # Scale index 0 is the whole path (rho = 1, the paper's shortcut case);
    # the geometric ladder follows underneath.
    r_values = np.concatenate([[gap], ladder])
    levels = _nested_levels(lam, ladder)
    deltas, sizes = _level_deltas(lam, levels, eps, q)
    candidates = [
        b
        for b in range(len(r_values))
        if deltas[b] <= 1.0 / n_bound and q * r_values[b] >= l_stop * (1 - 1e-12)
    ]
    found = bool(candidates)
    j = candidates[0] if found else -1
    rho = float(r_values[j] / gap) if found else float("nan")
    report = ScaleReport(
        rho=rho,
        scale_index=j,
        r_values=r_values,
        deltas=deltas,
        level_sizes=sizes,
        accepted=ok,
        found=found,
        eps=eps,
        n_bound=n_bound,
        l_stop=l_stop,
    )
    if enforce_length and not found:
        raise PreconditionError(
            "exists J with delta_J <= 1/N",
            "no qualifying scale despite the length condition; deltas = "
            + json.dumps(list(map(float, deltas))),
        )
    return report


@dataclass(frozen=True)
class FamilyScaleReport:
    rho: float
    scale_index: int
    member_deltas: np.ndarray  # (n_members, n_levels)
    mean_deltas: np.ndarray
    subset: np.ndarray  # indices into the family (F_0)
    accepted: bool
    found: bool


def find_efficiency_scale_family(
    family, eps, n_bound, n0, l_stop, hbar=None, enforce_length=True, max_levels=64
) -> FamilyScaleReport:
    """Family version: pick J by the mean bad fraction, extract F0 by Chebyshev.

    F0 collects members with delta_J <= 1/N0; when the mean at J is <= 1/N
    this subset has relative size at least 1 - N0/N.
    """
    if not family:
        raise PreconditionError("family nonempty")
    q = 0.5 * eps ** 0.25
    all_deltas, gaps = [], []
    for zeta in family:
        lam = zeta.base_apath() if isinstance(zeta, Path) else zeta
        kappa = lam.kappa
        hb = hbar
        if hb is None:
            hb = default_hbar(zeta.group.n_roots if isinstance(zeta, Path) else 2, kappa)
        L = zeta.domain_length() if isinstance(zeta, Path) else lam.domain_length()
        ok, required = efficiency_length_condition(eps, n_bound, l_stop, kappa, L, hb)
        if enforce_length and not ok:
            raise PreconditionError(
                "every member passes the length condition",
                f"member domain length {L:.6g} < required {required:.6g}",
            )
        gap = lam.endpoint_gap()
        ladder, _ = _scale_ladder(gap, eps, l_stop, max_levels)
        levels = _nested_levels(lam, ladder)
        deltas, _ = _level_deltas(lam, levels, eps, q)
        all_deltas.append(deltas)
        gaps.append(gap)
    depth = min(len(d) for d in all_deltas)
    member_deltas = np.array([d[:depth] for d in all_deltas])
    mean_deltas = member_deltas.mean(axis=0)
    # Scale index b corresponds to rho = q^b (b = 0 is the whole path).
    candidates = [
        b
        for b in range(depth)
        if mean_deltas[b] <= 1.0 / n_bound
        and all(q ** (b + 1) * g >= l_stop * (1 - 1e-12) for g in gaps)
    ]
    found = bool(candidates)
    j = candidates[0] if found else -1
    subset = (
        np.nonzero(member_deltas[:, j] <= 1.0 / n0)[0] if found else np.array([], dtype=int)
    )
    return FamilyScaleReport(
        rho=float(q**j) if found else float("nan"),
        scale_index=j,
        member_deltas=member_deltas,
        mean_deltas=mean_deltas,
        subset=subset,
        accepted=True,
        found=found,
    )


def efficient_subsegment_fraction(lam, eps, breakpoints, r_s, r_b):
    """Fraction of coarse cells that fail eps^(1/2)-efficiency at scale eps^(1/4)/2.

    The proof bounds this bad fraction by eps^(1/2) * r_b / r_s; the lemma's
    statement reads as the complement and is treated as a typo.  Efficiency
    is enforced both at the path's own scale and on the union of the cells'
    subdivisions (the inequality the proof actually sums over); with the
    latter in place the guarantee is sound.
    """
    idx = list(map(int, breakpoints))
    if len(idx) < 2:
        raise PreconditionError("at least one coarse cell")
    L = lam.endpoint_gap()
    scale = 0.5 * eps ** 0.25
    if not is_efficient(lam, eps, scale):
        raise PreconditionError("lambda is eps-efficient at scale eps^(1/4)/2")
    union_chain = 0.0
    for a, b in zip(idx[:-1], idx[1:]):
        cell_gap = lam.point_dist(a, b)
        if cell_gap <= 0:
            continue
        sub = subdivide(lam, scale * cell_gap, a, b)
        union_chain += float(np.sum(sub.gaps))
    if union_chain > (1.0 + eps) * L + 1e-9 * max(1.0, L):
        raise PreconditionError(
            "union of cell subdivisions is eps-efficient",
            f"chain {union_chain:.6g} > (1+eps) L = {(1 + eps) * L:.6g}",
        )
    lo, hi = eps ** 0.25 * L, L
    tol = 1e-9 * max(1.0, hi)
    for name, r in (("r_s", r_s), ("r_b", r_b)):
        if not lo - tol <= r <= hi + tol:
            raise PreconditionError(
                "r_s, r_b in [eps^(1/4) L, L]", f"{name} = {r:.6g}, window [{lo:.6g}, {hi:.6g}]"
            )
    gaps = np.array([lam.point_dist(a, b) for a, b in zip(idx[:-1], idx[1:])])
    if np.any(gaps < r_s - tol) or np.any(gaps > r_b + tol):
        raise PreconditionError(
            "r_s <= d(q_i, q_{i+1}) <= r_b", f"gaps range [{gaps.min():.6g}, {gaps.max():.6g}]"
        )
    bad = sum(
        0 if is_efficient(lam, np.sqrt(eps), scale, a, b) else 1
        for a, b in zip(idx[:-1], idx[1:])
    )
    frac = bad / (len(idx) - 1)
    return frac, float(np.sqrt(eps) * r_b / r_s)


# ---------------------------------------------------------------------------
# Confinement

@dataclass(frozen=True)
class ConfinementReport:
    max_distance: float
    ratio: float
    hbar: float
    ok: bool
    base_diameter: float


def confinement_check(zeta: Path, s, hbar=None, n_chains=64, chain_len=8, seed=0) -> ConfinementReport:
    """Check max pair distance <= hbar * s on a confined quasi-geodesic.

    Preconditions: the A-projection has diameter at most s in the root norm,
    and the detour ratio (sum of chain gaps over endpoint gap) stays below
    2 kappa on seeded random index chains.
    """
    alpha_vals = zeta._alpha_vals
    n = zeta.n_samples
    # Pairwise root-norm diameter of the projection.
    d_base = np.zeros((n, n))
    for r in range(alpha_vals.shape[1]):
        col = alpha_vals[:, r]
        d_base += np.abs(col[:, None] - col[None, :])
    diam = float(np.max(d_base))
    if diam > s * (1 + 1e-9):
        raise PreconditionError(
            "diam(pi_A(zeta)) <= s", f"diameter {diam:.6g} exceeds s = {s:.6g}"
        )
    rng = np.random.default_rng(seed)
    pair = zeta.pairwise()
    for _ in range(n_chains):
        k = min(chain_len, n)
        idx = np.sort(rng.choice(n, size=k, replace=False))
        den = pair[idx[0], idx[-1]]
        if den <= 0:
            continue
        num = float(np.sum(pair[idx[:-1], idx[1:]]))
        if num / den > 2 * zeta.kappa * (1 + 1e-9):
            raise PreconditionError(
                "sum d(zeta(i_j), zeta(i_{j+1})) / d(zeta(i_0), zeta(i_n)) <= 2 kappa",
                f"chain ratio {num / den:.6g}",
            )
    if hbar is None:
        hbar = default_hbar(zeta.group.n_roots, zeta.kappa)
    max_d = float(np.max(pair))
    ratio = max_d / s if s > 0 else float("inf")
    return ConfinementReport(
        max_distance=max_d, ratio=ratio, hbar=float(hbar), ok=ratio <= hbar, base_diameter=diam
    )
