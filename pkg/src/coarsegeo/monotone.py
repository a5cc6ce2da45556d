"""Monotonicity tests, the monotone-scale ladder, uniform points, and
geodesic approximation of monotone quasi-geodesics.

Projection-level coincidence is discretized by bucketing the orthogonal
chord projection with bucket width equal to the projection mesh; exact level
equality has measure zero on samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .embed import embedded_distance_arrays
from .paths import (
    APath,
    Path,
    chord_hausdorff,
    default_hbar,
    is_efficient,
    subdivide,
    _nested_levels,
    _subdivide_window,
)


@dataclass(frozen=True)
class MonotoneVerdict:
    is_monotone: bool
    worst_pair: tuple  # sample indices, or None
    worst_ratio: float  # worst d / allowed bound
    bound: float  # allowed bound at the worst pair


def _chord_projection(points):
    a, b = points[0], points[-1]
    chord = b - a
    norm = float(np.linalg.norm(chord))
    if norm <= 0:
        raise PreconditionError("endpoint chord nondegenerate")
    u = chord / norm
    return (points - a) @ u, u, norm


def _bucket_groups(proj):
    steps = np.abs(np.diff(proj))
    w = float(np.max(steps)) if steps.size else 0.0
    if w <= 0:
        return [np.arange(len(proj))]
    keys = np.floor((proj - proj.min()) / w).astype(int)
    groups = {}
    for i, k in enumerate(keys):
        groups.setdefault(int(k), []).append(i)
    return [np.array(g, dtype=int) for g in groups.values() if len(g) > 1]


def _pair_distances(zeta: Path, idx):
    f1 = [f[idx][:, None, :] for f in zeta.fibers]
    f2 = [f[idx][None, :, :] for f in zeta.fibers]
    b = zeta.base[idx]
    return embedded_distance_arrays(zeta.group, f1, b[:, None, :], f2, b[None, :, :])


def _monotone_scan(zeta, i0, i1, bound_fn):
    """Worst same-bucket pair against a per-pair bound function."""
    window = np.arange(i0, i1 + 1)
    proj, _, _ = _chord_projection(zeta.base[window])
    worst = (None, 0.0, np.inf)  # pair, ratio, bound
    for g in _bucket_groups(proj):
        idx = window[g]
        d = _pair_distances(zeta, idx)
        bounds = bound_fn(idx)
        ii, jj = np.triu_indices(len(idx), k=1)
        if ii.size == 0:
            continue
        ratios = d[ii, jj] / bounds[ii, jj]
        k = int(np.argmax(ratios))
        if ratios[k] > worst[1]:
            worst = ((int(idx[ii[k]]), int(idx[jj[k]])), float(ratios[k]), float(bounds[ii[k], jj[k]]))
    pair, ratio, bound = worst
    return MonotoneVerdict(
        is_monotone=ratio <= 1.0,
        worst_pair=pair,
        worst_ratio=ratio,
        bound=bound if np.isfinite(bound) else 0.0,
    )


def is_delta_monotone(
    zeta: Path, delta, i0=0, i1=None, check_chord=True, hbar=None, chord_eps=None
) -> MonotoneVerdict:
    """Same-bucket pairs of the chord projection must stay within delta * gap.

    The chord precondition delta >= 4 * hbar * eps (eps the recorded chord
    closeness of the A-projection) is enforced unless check_chord is False.
    """
    i1 = zeta.n_samples - 1 if i1 is None else i1
    if check_chord:
        pts = zeta.base[i0 : i1 + 1]
        _, _, chord_norm = _chord_projection(pts)
        eps = chord_eps if chord_eps is not None else chord_hausdorff(pts) / chord_norm
        hb = hbar if hbar is not None else default_hbar(zeta.group.n_roots, zeta.kappa)
        if not delta >= 4 * hb * eps:
            raise PreconditionError(
                "delta >= 4*hbar*eps", f"delta = {delta}, hbar = {hb}, eps = {eps:.6g}"
            )
    gap = zeta.point_dist(i0, i1)
    allowed = delta * gap

    def bound_fn(idx):
        return np.full((len(idx), len(idx)), allowed)

    return _monotone_scan(zeta, i0, i1, bound_fn)


def is_weakly_monotone(
    zeta: Path, nu, c1, i0=0, i1=None, check_chord=True, hbar=None, chord_eps=None
) -> MonotoneVerdict:
    """Like is_delta_monotone with the start-biased bound nu*d(zeta(t), zeta(0)) + C1."""
    i1 = zeta.n_samples - 1 if i1 is None else i1
    if check_chord:
        pts = zeta.base[i0 : i1 + 1]
        _, _, chord_norm = _chord_projection(pts)
        eps = chord_eps if chord_eps is not None else chord_hausdorff(pts) / chord_norm
        hb = hbar if hbar is not None else default_hbar(zeta.group.n_roots, zeta.kappa)
        if not nu >= 4 * hb * eps:
            raise PreconditionError(
                "nu >= 4*hbar*eps", f"nu = {nu}, hbar = {hb}, eps = {eps:.6g}"
            )
    d0 = zeta.dist_from(i0, np.arange(i0, i1 + 1))

    def bound_fn(idx):
        # Only the upper triangle is read, so the column index is the later
        # sample: bound nu * d(zeta(later), zeta(start)) + C1.
        vals = nu * d0[idx - i0] + c1
        return np.broadcast_to(vals[None, :], (len(idx), len(idx)))

    return _monotone_scan(zeta, i0, i1, bound_fn)


# ---------------------------------------------------------------------------
# Monotone scale

@dataclass(frozen=True)
class MonotoneScaleReport:
    rho: float
    rho_next: float
    scale_index: int
    l_values: np.ndarray
    flats: np.ndarray  # efficient-but-not-monotone fraction per level
    naturals: np.ndarray  # monotone but opposite orientation to parent
    level_sizes: np.ndarray
    accepted: bool
    found: bool

    def to_json(self):
        return {
            "rho_i": self.rho,
            "rho_next": self.rho_next,
            "scale_index": self.scale_index,
            "l_values": list(map(float, self.l_values)),
            "flats": list(map(float, self.flats)),
            "naturals": list(map(float, self.naturals)),
            "accepted": bool(self.accepted),
            "found": bool(self.found),
        }


def monotone_eps_cap(delta, hbar):
    return min((delta / (2 * hbar)) ** 4, (delta / (3.01 * hbar)) ** 8, 0.01**8)


def monotone_length_condition(delta, eps, n_bound, l_a, kappa, L, hbar):
    denom = 1.0 - np.sqrt(eps) * hbar
    if denom <= 0:
        return False, np.inf
    lhs = np.log((2.0 / (3.0 * eps**0.125)) * l_a / (2 * kappa * L)) / np.log(delta)
    rhs = (2 * kappa) ** 2 * hbar * (2 * n_bound) / (denom * delta)
    required = (2 * l_a / (3 * eps**0.125)) / (delta**rhs) / (2 * kappa)
    return lhs >= rhs, required


def _monotone_ladder(gap, delta, eps, l_a, max_levels):
    """Gaps L_1 = delta*gap, L_{k+1} = delta*L_k, clamped at l_a/(1.5 eps^(1/8))."""
    floor = l_a / (1.5 * eps**0.125)
    if delta * gap <= floor:
        raise PreconditionError(
            "delta * d(zeta(0), zeta(L)) > L_a / (1.5 eps^(1/8))",
            f"ladder empty: delta*gap = {delta * gap:.6g}, floor = {floor:.6g}",
        )
    ls = []
    l = delta * gap
    while l > floor and len(ls) < max_levels:
        ls.append(l)
        l *= delta
    ls.append(floor)
    return np.array(ls)


def _level_stats(zeta, lam, levels, delta, eps):
    """Per level: efficient mask C, non-monotone-in-C mask B, orientation sets."""
    scale = 0.5 * eps**0.25
    stats = []
    for idx in levels:
        segs = list(zip(idx[:-1], idx[1:]))
        eff = np.zeros(len(segs), dtype=bool)
        mono = np.zeros(len(segs), dtype=bool)
        chords = np.zeros((len(segs), zeta.base.shape[1]))
        for k, (a, b) in enumerate(segs):
            chords[k] = zeta.base[b] - zeta.base[a]
            if b <= a:
                continue
            gap_a = lam.point_dist(a, b)
            if gap_a <= 0:
                continue
            eff[k] = is_efficient(lam, np.sqrt(eps), scale, a, b)
            if eff[k]:
                verdict = is_delta_monotone(zeta, delta, a, b, check_chord=False)
                mono[k] = verdict.is_monotone
        stats.append({"segs": segs, "eff": eff, "mono": mono, "chords": chords})
    return stats


def _orientation_fractions(stats):
    """flat_k = |B_k| / |C_k|; natural_k = wrong-orientation children / |C_k|."""
    flats, naturals = [], []
    for k, st in enumerate(stats):
        n_eff = int(np.sum(st["eff"]))
        n_bad = int(np.sum(st["eff"] & ~st["mono"]))
        flats.append(n_bad / n_eff if n_eff else 0.0)
        if k == 0:
            naturals.append(0.0)
            continue
        parent = stats[k - 1]
        parent_starts = np.array([a for a, _ in parent["segs"]])
        good_parent = parent["eff"] & parent["mono"]
        n_wrong = 0
        for j, (a, b) in enumerate(st["segs"]):
            if not (st["eff"][j] and st["mono"][j]):
                continue
            pj = int(np.searchsorted(parent_starts, a, side="right") - 1)
            if pj < 0 or not good_parent[pj]:
                continue
            if float(st["chords"][j] @ parent["chords"][pj]) < 0:
                n_wrong += 1
        naturals.append(n_wrong / n_eff if n_eff else 0.0)
    return np.array(flats), np.array(naturals)


def find_monotone_scale(
    zeta: Path,
    delta,
    eps,
    n_bound,
    l_a,
    hbar=None,
    enforce=True,
    max_levels=32,
) -> MonotoneScaleReport:
    """Two consecutive scales at which at most 1/N of the efficient
    subsegments are non-monotone or orientation-flipped.

    The ladder subdivides zeta itself (embedded metric) at gaps L_1 =
    delta * d(endpoints), L_{k+1} = delta * L_k, stopping at the floor
    l_a / (1.5 eps^(1/8)).
    """
    if hbar is None:
        hbar = default_hbar(zeta.group.n_roots, zeta.kappa)
    lam = zeta.base_apath()
    if enforce:
        cap = monotone_eps_cap(delta, hbar)
        if not eps <= cap:
            raise PreconditionError(
                "eps <= min{(delta/2hbar)^4, (delta/3.01hbar)^8, 0.01^8}",
                f"eps = {eps:.3g}, cap = {cap:.3g}",
            )
        if not is_efficient(lam, eps, 0.5 * eps**0.25):
            raise PreconditionError("pi_A(zeta) eps-efficient at scale eps^(1/4)/2")
        ok, required = monotone_length_condition(
            delta, eps, n_bound, l_a, zeta.kappa, zeta.domain_length(), hbar
        )
        if not ok:
            raise PreconditionError(
                "(2 L_a / 3 eps^(1/8)) / delta^((2k)^2 hbar 2N / ((1-eps^(1/2) hbar) delta)) <= 2 kappa L",
                f"domain length {zeta.domain_length():.6g} < required {required:.6g}",
            )
    gap = zeta.endpoint_gap()
    l_values = _monotone_ladder(gap, delta, eps, l_a, max_levels)
    levels = _nested_levels(zeta, l_values)[1:]  # drop the undivided level
    stats = _level_stats(zeta, lam, levels, delta, eps)
    flats, naturals = _orientation_fractions(stats)
    sigma = flats + naturals
    candidates = [
        k for k in range(len(sigma) - 1) if sigma[k] <= 1 / n_bound and sigma[k + 1] <= 1 / n_bound
    ]
    found = bool(candidates)
    k = candidates[0] if found else -1
    report = MonotoneScaleReport(
        rho=float(l_values[k] / gap) if found else float("nan"),
        rho_next=float(l_values[k + 1] / gap) if found else float("nan"),
        scale_index=k,
        l_values=l_values,
        flats=flats,
        naturals=naturals,
        level_sizes=np.array([len(ix) - 1 for ix in levels], dtype=int),
        accepted=True,
        found=found,
    )
    if enforce and not found:
        raise PreconditionError(
            "exist consecutive scales with flat + natural <= 1/N",
            f"fractions = {list(np.round(sigma, 4))}",
        )
    return report


@dataclass(frozen=True)
class FamilyMonotoneReport:
    rho: float
    rho_next: float
    scale_index: int
    member_sigma: np.ndarray
    mean_sigma: np.ndarray
    subset: np.ndarray
    found: bool


def find_monotone_scale_family(
    family, delta, eps, n_bound, n0, l_a, hbar=None, enforce=True, max_levels=32
) -> FamilyMonotoneReport:
    """Family average of flat + natural per scale; Chebyshev extraction of F0.

    F0 keeps members below 1/N0 at both returned scales, so its relative
    size is at least 1 - 2 N0 / N when the means qualify.
    """
    sigmas = []
    for zeta in family:
        rep = find_monotone_scale(
            zeta, delta, eps, n_bound, l_a, hbar=hbar, enforce=enforce, max_levels=max_levels
        )
        sigmas.append(rep.flats + rep.naturals)
    depth = min(len(s) for s in sigmas)
    member_sigma = np.array([s[:depth] for s in sigmas])
    mean_sigma = member_sigma.mean(axis=0)
    candidates = [
        k
        for k in range(depth - 1)
        if mean_sigma[k] <= 1 / n_bound and mean_sigma[k + 1] <= 1 / n_bound
    ]
    found = bool(candidates)
    k = candidates[0] if found else -1
    subset = (
        np.nonzero(
            (member_sigma[:, k] <= 1 / n0) & (member_sigma[:, k + 1] <= 1 / n0)
        )[0]
        if found
        else np.array([], dtype=int)
    )
    return FamilyMonotoneReport(
        rho=float(delta ** (k + 1)) if found else float("nan"),
        rho_next=float(delta ** (k + 2)) if found else float("nan"),
        scale_index=k,
        member_sigma=member_sigma,
        mean_sigma=mean_sigma,
        subset=subset,
        found=found,
    )


# ---------------------------------------------------------------------------
# Uniform points

@dataclass(frozen=True)
class UniformPointReport:
    uniform_indices: np.ndarray  # sample indices of uniform breakpoints
    breakpoint_indices: np.ndarray
    non_uniform_fraction: float
    max_ratio: np.ndarray  # per breakpoint, max over T of P(x, T) / T
    bad_fraction: float


def uniform_points(
    zeta: Path, l_s, m_factor, delta=None, bad_mask=None
) -> UniformPointReport:
    """Mark breakpoints of the gap-l_s subdivision as uniform.

    A breakpoint x is uniform when, for every window radius T on the
    breakpoint grid, the bad measure inside [x - T, x + T] (chain coordinate)
    is at most m_factor * (overall bad fraction) * T.  The bad set is
    supplied as a mask over subdivision segments, or computed as "not
    delta-monotone, or monotone with orientation opposite to zeta".
    """
    sub = subdivide(zeta, l_s)
    idx = sub.indices
    segs = list(zip(idx[:-1], idx[1:]))
    if bad_mask is None:
        if delta is None:
            raise PreconditionError("delta or bad_mask required")
        chord = zeta.base[-1] - zeta.base[0]
        bad = np.zeros(len(segs), dtype=bool)
        for k, (a, b) in enumerate(segs):
            v = is_delta_monotone(zeta, delta, a, b, check_chord=False)
            seg_chord = zeta.base[b] - zeta.base[a]
            bad[k] = (not v.is_monotone) or float(seg_chord @ chord) < 0
    else:
        bad = np.asarray(bad_mask, dtype=bool)
        if bad.shape != (len(segs),):
            raise PreconditionError("bad_mask must have one entry per subdivision segment")

    gaps = sub.gaps
    edges = np.concatenate([[0.0], np.cumsum(gaps)])
    total = edges[-1]
    bad_measure = float(np.sum(gaps[bad]))
    mu = bad_measure / total if total > 0 else 0.0
    positions = edges  # breakpoint k sits at chain coordinate edges[k]
    n_pts = len(positions)
    max_ratio = np.zeros(n_pts)
    uniform = np.ones(n_pts, dtype=bool)
    if mu > 0:
        starts = edges[:-1][bad]
        stops = edges[1:][bad]
        for k, x in enumerate(positions):
            # Violations of P <= M mu T are maximal at window edges.
            ts = np.unique(np.abs(np.concatenate([starts, stops]) - x))
            ts = ts[ts > 0]
            if ts.size == 0:
                continue
            lo = np.maximum(starts[None, :], x - ts[:, None])
            hi = np.minimum(stops[None, :], x + ts[:, None])
            p = np.sum(np.maximum(hi - lo, 0.0), axis=1)
            ratios = p / ts
            max_ratio[k] = float(np.max(ratios))
            uniform[k] = bool(np.all(p <= m_factor * mu * ts + 1e-12))
    return UniformPointReport(
        uniform_indices=idx[uniform],
        breakpoint_indices=idx,
        non_uniform_fraction=float(np.mean(~uniform)),
        max_ratio=max_ratio,
        bad_fraction=mu,
    )


# ---------------------------------------------------------------------------
# Geodesic approximation

@dataclass(frozen=True)
class GeodesicApproximation:
    segment: Path
    deviations: np.ndarray  # per zeta sample, distance to the segment
    hausdorff: float
    bound: float
    certified: bool
    level_indices: np.ndarray
    wall_clear_fraction: float
    mode: tuple


def _cross_distance(zeta: Path, seg: Path):
    f1 = [f[:, None, :] for f in zeta.fibers]
    f2 = [f[None, :, :] for f in seg.fibers]
    return embedded_distance_arrays(
        zeta.group, f1, zeta.base[:, None, :], f2, seg.base[None, :, :]
    )


def _wall_samples(zeta: Path, n_per_dim=9):
    """Grid samples of the walls (root-kernel translates) based at zeta(0)."""
    rs = zeta.group
    t0 = zeta.base[0]
    extent = float(np.max(np.linalg.norm(zeta.base - t0, axis=1)))
    pts = []
    for i in range(rs.n_roots):
        alpha = np.array(rs.roots[i].alpha, dtype=float)
        # Orthonormal basis of ker(alpha).
        _, _, vt = np.linalg.svd(alpha[None, :])
        kernel = vt[1:]
        if kernel.shape[0] == 0:
            pts.append(t0.copy())
            continue
        grid = np.linspace(-extent, extent, n_per_dim)
        meshes = np.meshgrid(*[grid] * kernel.shape[0], indexing="ij")
        coords = np.stack([m.ravel() for m in meshes], axis=1)
        pts.extend(t0 + coords @ kernel)
    return np.atleast_2d(np.array(pts))


def wall_clearance(zeta: Path, eta_wall, c_wall, n_per_dim=9):
    """Fraction of samples outside the (eta, C) linear neighborhood of the walls.

    The walls pass through zeta(0), so samples within C of the start are
    excluded from the count.
    """
    walls = _wall_samples(zeta, n_per_dim)
    zero_fibers = [np.zeros((walls.shape[0], r.dim_v)) for r in zeta.group.roots]
    start_fibers = [f[0][None, :] for f in zeta.fibers]
    # Wall points share the start's fibers (left translate of the kernel).
    wall_fibers = [np.broadcast_to(sf, zf.shape) for sf, zf in zip(start_fibers, zero_fibers)]
    d_wall = embedded_distance_arrays(
        zeta.group,
        [f[:, None, :] for f in zeta.fibers],
        zeta.base[:, None, :],
        [wf[None, :, :] for wf in wall_fibers],
        walls[None, :, :],
    )  # (n_samples, n_walls)
    d_origin = embedded_distance_arrays(
        zeta.group,
        [np.broadcast_to(sf, (walls.shape[0], sf.shape[1])) for sf in start_fibers],
        walls,
        wall_fibers,
        np.broadcast_to(zeta.base[0], walls.shape),
    )
    radius = eta_wall * d_origin[None, :] + c_wall
    inside = np.any(d_wall <= radius, axis=1)
    d_start = zeta.dist_from(0, np.arange(zeta.n_samples))
    relevant = d_start > c_wall
    if not np.any(relevant):
        return 1.0
    return float(np.mean(~inside[relevant]))


def geodesic_approximation(
    zeta: Path,
    mode,
    eps=None,
    hbar=None,
    wall_eta=None,
    check_walls=True,
    check_monotone=True,
) -> GeodesicApproximation:
    """Fit a geodesic segment to a monotone quasi-geodesic.

    ``mode`` is ("monotone", delta) or ("weak", eta, c1).  Per root the
    fiber coordinate is taken from the lowest-height level point of the
    chord-level decomposition at spacing delta * |AB|; the A-part of the
    segment is the full projection chord.  Certifies the paper-level
    deviation bound for its mode.
    """
    rs = zeta.group
    n_roots = rs.n_roots
    if hbar is None:
        hbar = default_hbar(n_roots, zeta.kappa)
    proj, u, chord_norm = _chord_projection(zeta.base)
    eps_rec = eps if eps is not None else chord_hausdorff(zeta.base) / chord_norm
    gap = zeta.endpoint_gap()

    kind = mode[0]
    if kind == "monotone":
        delta = float(mode[1])
        if check_monotone:
            v = is_delta_monotone(zeta, delta, check_chord=False)
            if not v.is_monotone:
                raise PreconditionError(
                    "zeta is delta-monotone", f"worst ratio {v.worst_ratio:.3g}"
                )
    elif kind == "weak":
        eta_w, c1 = float(mode[1]), float(mode[2])
        delta = max(eta_w, 1e-3)
        if check_monotone:
            v = is_weakly_monotone(zeta, eta_w, c1, check_chord=False)
            if not v.is_monotone:
                raise PreconditionError(
                    "zeta is (eta, C1) weakly monotone", f"worst ratio {v.worst_ratio:.3g}"
                )
    else:
        raise PreconditionError("mode in {monotone, weak}")

    # Level decomposition of the chord at spacing s = delta |AB|, widened if
    # necessary so the per-root level steps can clear the h0 > 2 gate of the
    # vertical fits; the certificate uses the effective delta.
    slopes = np.abs(rs.alpha_matrix() @ u)
    if np.any(slopes <= 0):
        raise PreconditionError("chord direction off every root kernel")
    spacing = chord_norm / max(zeta.n_samples - 1, 1)
    s_needed = (2.0 + 1.2 * spacing * float(slopes.max())) / float(slopes.min())
    s = max(delta * chord_norm, s_needed)
    delta = s / chord_norm
    if s <= 0:
        raise PreconditionError("delta * |AB| > 0")
    j_max = int(np.floor(float(np.max(proj)) / s))
    if j_max < 1:
        raise PreconditionError("at least two chord levels", f"levels = {j_max + 1}")
    level_idx = []
    for j in range(j_max + 1):
        below = np.nonzero(proj <= j * s + 1e-12)[0]
        level_idx.append(int(below[-1]))
    level_idx = np.array(sorted(set(level_idx)), dtype=int)
    if len(level_idx) < 2:
        raise PreconditionError("at least two distinct level points")

    # Wall-proximity gate: per root, level heights must step by more than 2,
    # monotonically; otherwise the vertical fits of the lemma cannot run.
    heights = zeta._alpha_vals[level_idx]  # (n_levels, n_roots)
    dh = np.diff(heights, axis=0)
    for i in range(n_roots):
        col = dh[:, i]
        if np.any(np.abs(col) <= 2.0) or not (np.all(col > 0) or np.all(col < 0)):
            raise PreconditionError(
                "h0 > 2",
                f"root {i} level steps {np.round(col, 3)} must be monotone with |step| > 2",
            )

    wall_frac = 1.0
    if check_walls:
        eta_wall = wall_eta if wall_eta is not None else min(0.99, 3.0 / (delta * gap))
        wall_frac = wall_clearance(zeta, eta_wall, max(zeta.c_add, 1.0))

    # Per-root fiber from the lowest-height level point; A-part = full chord.
    fit_fibers = []
    for i in range(n_roots):
        k = int(np.argmin(heights[:, i]))
        fit_fibers.append(np.array(zeta.fibers[i][level_idx[k]]))
    # Sample the segment at the path's own chord fractions (so an exact
    # geodesic matches its fit sample-for-sample), plus a uniform fill.
    ss = np.unique(
        np.concatenate([np.clip(proj / chord_norm, 0.0, 1.0), np.linspace(0.0, 1.0, 64)])
    )
    m = len(ss)
    seg_base = zeta.base[0][None, :] + ss[:, None] * (zeta.base[-1] - zeta.base[0])[None, :]
    seg = Path(
        rs,
        seg_base,
        [np.broadcast_to(f[None, :], (m, f.shape[0])).copy() for f in fit_fibers],
        params=np.linspace(0.0, max(gap, 1e-9), m),
        kappa=max(zeta.kappa, n_roots),
        c_add=max(zeta.c_add, 1.0),
        is_geodesic=True,
        validate=False,
    )
    cross = _cross_distance(zeta, seg)
    deviations = cross.min(axis=1)
    hausdorff = float(max(deviations.max(), cross.min(axis=0).max()))

    s_tilde = np.sqrt(delta**2 + 4 * eps_rec**2) * chord_norm
    if kind == "monotone":
        bound = 2 * n_roots * (hbar * s_tilde + delta * gap)
        certified = bool(hausdorff <= bound)
    else:
        const = n_roots * (hbar * s_tilde + c1)
        d_start = zeta.dist_from(0, np.arange(zeta.n_samples))
        per_sample = n_roots * eta_w * d_start + const
        certified = bool(np.all(deviations <= per_sample))
        bound = float(const)
    return GeodesicApproximation(
        segment=seg,
        deviations=deviations,
        hausdorff=hausdorff,
        bound=float(bound),
        certified=certified,
        level_indices=level_idx,
        wall_clear_fraction=wall_frac,
        mode=tuple(mode),
    )
