"""Boxes B(Omega), Folner statistics, tilings, geodesic families, and the
good-box / standard-map experiments.

A box over a product of intervals Omega in A is the product set, in
coordinates, of one fiber brick [0, e^(max alpha_j(Omega))]^dim(V_j) per
root with Omega itself; the volume element in these coordinates is
Lebesgue because the roots sum to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError, ValidationError
from .embed import embedded_distance_arrays
from .groups import RootSystem
from .monotone import find_monotone_scale, geodesic_approximation, uniform_points
from .paths import Path, find_efficiency_scale_family
from .synthetic import PhiSpec, apply_phi, map_path, straight_geodesic, substream


def _interval_array(omega):
    om = np.atleast_2d(np.asarray(omega, dtype=float))
    if om.shape[1] != 2 or np.any(om[:, 1] <= om[:, 0]):
        raise PreconditionError(
            "Omega a product of nondegenerate intervals", f"got {om.tolist()}"
        )
    return om


def _alpha_range(rs: RootSystem, omega, i):
    """[min, max] of alpha_i over the interval product."""
    alpha = np.array(rs.roots[i].alpha, dtype=float)
    lo = float(np.sum(np.where(alpha >= 0, alpha * omega[:, 0], alpha * omega[:, 1])))
    hi = float(np.sum(np.where(alpha >= 0, alpha * omega[:, 1], alpha * omega[:, 0])))
    return lo, hi


@dataclass(frozen=True)
class Box:
    group: RootSystem
    omega: np.ndarray  # (dim_a, 2)
    fiber_log_lengths: np.ndarray  # a_j = max alpha_j(Omega) per root

    @property
    def fiber_lengths(self):
        return np.exp(self.fiber_log_lengths)

    def side_lengths(self):
        return self.omega[:, 1] - self.omega[:, 0]

    def a_diameter(self):
        return float(np.linalg.norm(self.side_lengths()))

    def barycenter(self):
        return 0.5 * (self.omega[:, 0] + self.omega[:, 1])


def build_box(rs: RootSystem, omega) -> Box:
    om = _interval_array(omega)
    if om.shape[0] != rs.dim_a:
        raise ValidationError(f"Omega has {om.shape[0]} axes, expected {rs.dim_a}")
    logs = np.array([_alpha_range(rs, om, i)[1] for i in range(rs.n_roots)])
    return Box(group=rs, omega=om, fiber_log_lengths=logs)


@dataclass(frozen=True)
class FolnerStats:
    volume: float
    log_volume: float
    boundary_area: float
    shell_fraction: float
    shell_constant: float  # shell_fraction * diam / eps


def folner_stats(rs: RootSystem, omega, r, eps_shell) -> FolnerStats:
    """Closed-form volume and boundary area of B(r Omega).

    vol = (prod_j e^(r a_j dim V_j)) r^n |Omega|.  The boundary splits into
    the fiber-brick faces (estimated by the proof's closed form with the box
    shadows on the root kernels) and the A-faces (prod e^(r a_j) r^(n-1)
    |dOmega|).  The reported shell fraction is eps * area / volume.
    """
    om = _interval_array(omega)
    n = rs.dim_a
    sides = om[:, 1] - om[:, 0]
    vol_omega = float(np.prod(sides))
    ranges = [_alpha_range(rs, om, i) for i in range(rs.n_roots)]
    dims = np.array(rs.fiber_dims())
    log_brick = float(sum(r * hi * d for (lo, hi), d in zip(ranges, dims)))
    log_volume = log_brick + n * np.log(r) + np.log(vol_omega)
    volume = float(np.exp(log_volume))

    # A-faces: brick area times the boundary of r Omega.
    surf_omega = 2.0 * sum(
        float(np.prod(np.delete(sides, k))) for k in range(n)
    )
    term_a = np.exp(log_brick) * r ** (n - 1) * surf_omega

    # Brick faces: 2 sum_j (prod_{i != j} e^(r a_i)) (e^(r a_j) - e^(r b_j))
    # shadow_j(r Omega), with the shadow of a coordinate box on ker(alpha).
    term_brick = 0.0
    for i in range(rs.n_roots):
        lo, hi = ranges[i]
        alpha = np.array(rs.roots[i].alpha, dtype=float)
        u = alpha / np.linalg.norm(alpha)
        shadow = float(np.sum(np.abs(u) * np.array(
            [np.prod(np.delete(sides, k)) for k in range(n)]
        )))
        # Faces of this root's brick repeat per fiber dimension.
        other = log_brick - r * hi  # one factor of e^(r a_i) removed
        face = np.exp(other) * (np.exp(r * hi) - np.exp(r * lo))
        term_brick += 2.0 * dims[i] * face * r ** (n - 1) * shadow
    area = float(term_a + term_brick)
    frac = eps_shell * area / volume if volume > 0 else float("inf")
    diam = float(np.linalg.norm(r * sides))
    return FolnerStats(
        volume=volume,
        log_volume=float(log_volume),
        boundary_area=area,
        shell_fraction=float(frac),
        shell_constant=float(frac * diam / eps_shell) if eps_shell > 0 else 0.0,
    )


def monte_carlo_volume(rs: RootSystem, omega, r, n_samples, seed, pad=0.25):
    """Hit-or-miss volume estimate of B(r Omega) in a padded coordinate box."""
    om = _interval_array(omega) * r
    rng = np.random.default_rng(seed)
    ranges = [_alpha_range(rs, om / r, i) for i in range(rs.n_roots)]
    dims = rs.fiber_dims()
    log_total = 0.0
    inside = np.ones(n_samples, dtype=bool)
    for i in range(rs.n_roots):
        hi = np.exp(r * ranges[i][1])
        for _ in range(dims[i]):
            width = hi * (1 + pad)
            xs = rng.uniform(0.0, width, n_samples)
            inside &= xs <= hi
            log_total += np.log(width)
    for k in range(rs.dim_a):
        lo, hi = om[k]
        width = (hi - lo) * (1 + pad)
        ts = rng.uniform(lo, lo + width, n_samples)
        inside &= ts <= hi
        log_total += np.log(width)
    return float(np.mean(inside) * np.exp(log_total))


@dataclass(frozen=True)
class Tiling:
    """Translates of B(rho Omega) inside B(Omega), plus the leftover fraction.

    Tile counts along fiber axes grow exponentially with the box, so tiles
    are indexed lazily: ``tile_count`` is exact, and ``tile_index_of`` maps a
    point to its tile's integer index vector.
    """

    box: Box
    rho: float
    a_counts: np.ndarray  # per A-axis
    a_tile_sides: np.ndarray
    fiber_counts: tuple  # per root, int count per fiber axis
    fiber_tile_log_lengths: np.ndarray
    leftover_fraction: float
    tile_volume_fraction: float

    @property
    def tile_count(self):
        total = 1
        for c in self.a_counts:
            total *= int(c)
        for cnt, dim in zip(self.fiber_counts, self.box.group.fiber_dims()):
            total *= int(cnt) ** dim
        return total

    def tile_index_of(self, fibers, t):
        """Integer tile index of a point, or None if it falls in the leftover."""
        om = self.box.omega
        idx = []
        for k in range(om.shape[0]):
            pos = (t[k] - om[k, 0]) / self.a_tile_sides[k]
            j = int(np.floor(pos))
            if j < 0 or j >= int(self.a_counts[k]):
                return None
            idx.append(j)
        for i, f in enumerate(fibers):
            width = float(np.exp(self.fiber_tile_log_lengths[i]))
            for x in np.atleast_1d(f):
                j = int(np.floor(x / width))
                if j < 0 or j >= int(self.fiber_counts[i]):
                    return None
                idx.append(j)
        return tuple(idx)


def tile_box(box: Box, rho) -> Tiling:
    """Tile by integer translates of B(rho Omega), rho scaled from the barycenter."""
    if not 0 < rho <= 1:
        raise PreconditionError("0 < rho <= 1", f"rho = {rho}")
    rs = box.group
    sides = box.side_lengths()
    a_counts = np.maximum(np.floor(1.0 / rho + 1e-12), 1).astype(int) * np.ones(
        rs.dim_a, dtype=int
    )
    a_tile_sides = rho * sides
    center = box.barycenter()
    sub_omega = np.c_[center - 0.5 * a_tile_sides, center + 0.5 * a_tile_sides]
    sub_logs = np.array([_alpha_range(rs, sub_omega, i)[1] for i in range(rs.n_roots)])
    fiber_counts = tuple(
        max(int(np.floor(np.exp(box.fiber_log_lengths[i] - sub_logs[i]) + 1e-12)), 1)
        for i in range(rs.n_roots)
    )
    dims = rs.fiber_dims()
    covered = 1.0
    for k in range(rs.dim_a):
        covered *= a_counts[k] * rho
    for i in range(rs.n_roots):
        covered *= (fiber_counts[i] * np.exp(sub_logs[i] - box.fiber_log_lengths[i])) ** dims[i]
    tile_fraction = covered / np.prod(a_counts.astype(float)) / np.prod(
        [float(fiber_counts[i]) ** dims[i] for i in range(rs.n_roots)]
    )
    return Tiling(
        box=box,
        rho=float(rho),
        a_counts=a_counts,
        a_tile_sides=a_tile_sides,
        fiber_counts=fiber_counts,
        fiber_tile_log_lengths=sub_logs,
        leftover_fraction=float(1.0 - covered),
        tile_volume_fraction=float(tile_fraction),
    )


# ---------------------------------------------------------------------------
# Geodesic families

@dataclass(frozen=True)
class GeodesicSegment:
    """p * (segment a -> b in A) with endpoints on the boundary of Omega."""

    fibers_at: tuple
    a: np.ndarray
    b: np.ndarray

    def direction(self):
        d = self.b - self.a
        return d / np.linalg.norm(d)

    def path(self, rs: RootSystem, n=64) -> Path:
        return straight_geodesic(rs, self.fibers_at, self.a, self.b, n=n)


def _boundary_point(om, rng):
    n = om.shape[0]
    axis = int(rng.integers(0, n))
    side = int(rng.integers(0, 2))
    t = np.array([rng.uniform(om[k, 0], om[k, 1]) for k in range(n)])
    t[axis] = om[axis, side]
    return t


def sample_geodesic_family(box: Box, m, density, seed, n_chords=24):
    """L(Omega)[m]: boundary-to-boundary chords over a fiber lattice.

    Chord endpoints lie on the boundary of Omega with length / diam(Omega)
    in [1/m, m] (Euclidean); every base point of the fiber lattice carries
    the same chord catalog.  m = 1 degenerates to the main diagonals.
    """
    if m < 1:
        raise PreconditionError("m >= 1", f"m = {m}")
    rs = box.group
    om = box.omega
    rng = substream(seed, 0)
    diam = box.a_diameter()
    chords = []
    if m == 1:
        lo, hi = om[:, 0], om[:, 1]
        chords.append((lo.copy(), hi.copy()))
    else:
        guard = 0
        while len(chords) < n_chords and guard < 200 * n_chords:
            guard += 1
            a = _boundary_point(om, rng)
            b = _boundary_point(om, rng)
            L = float(np.linalg.norm(b - a))
            if L <= 0:
                continue
            if 1.0 / m <= L / diam <= m:
                chords.append((a, b))
        if len(chords) < n_chords:
            raise ValidationError("boundary chord sampling starved; check m")
    lattices = []
    for i in range(rs.n_roots):
        width = float(box.fiber_lengths[i])
        offs = (np.arange(density) + 0.5) * width / density
        lattices.append(offs)
    base_points = [[]]
    for i in range(rs.n_roots):
        new = []
        for partial in base_points:
            for off in lattices[i]:
                new.append(partial + [np.full(rs.roots[i].dim_v, off)])
        base_points = new
    family = []
    for fibers in base_points:
        for a, b in chords:
            family.append(GeodesicSegment(fibers_at=tuple(fibers), a=a, b=b))
    return family


# ---------------------------------------------------------------------------
# Experiments

@dataclass
class MemberRecord:
    index: int
    tile: tuple
    good: bool
    stage: str  # "ok" or the first stage that failed
    detail: str = ""


@dataclass
class BoxReport:
    good_tiles: list
    tile_stats: dict  # tile index -> {"count", "good_fraction", "fit_error"}
    theta: float  # fraction of bad tiles
    good_fraction: float  # fraction of good members overall
    rho_eff: float
    rho_mono: float
    tile_rho: float
    members: list
    fit_errors: dict

    def to_json(self):
        return {
            "theta": self.theta,
            "good_fraction": self.good_fraction,
            "rho_eff": self.rho_eff,
            "rho_mono": self.rho_mono,
            "tile_rho": self.tile_rho,
            "n_tiles": len(self.tile_stats),
            "n_good_tiles": len(self.good_tiles),
            "tiles": {
                str(k): {
                    "count": v["count"],
                    "good_fraction": v["good_fraction"],
                    "fit_error": v["fit_error"],
                }
                for k, v in self.tile_stats.items()
            },
            "failures": {
                r.stage: sum(1 for x in self.members if x.stage == r.stage)
                for r in self.members
                if r.stage != "ok"
            },
        }


def sin_angle_to_kernels(rs: RootSystem, u):
    """min over roots of |alpha(u)| / (|alpha| |u|): the sine of the angle
    between the direction and the nearest root kernel."""
    u = np.asarray(u, dtype=float)
    mat = rs.alpha_matrix()
    return float(
        np.min(np.abs(mat @ u) / (np.linalg.norm(mat, axis=1) * np.linalg.norm(u)))
    )


DEFAULT_EXPERIMENT = {
    "m": 4,
    "density": 2,
    "n_chords": 18,
    "n_samples": 96,
    "delta": 0.03,
    "eta": 0.35,
    "eta_tilde": 0.05,
    "eps": 0.02,
    "N": 16,
    "L_stop_factor": 0.02,
    "L_a_factor": 5e-4,
    "hbar": 1.0,
    "tile_rho": 0.5,
    "uniform_M": 16.0,
    # Guarantee-level bad fraction: a tile is good when at least
    # 1 - sqrt(q_tilde) of its members are good.  The theorem's Chebyshev
    # step uses the pipeline's guaranteed fraction, not the measured one.
    "q_tilde": 0.04,
    # A good tile must also admit a standard-map fit within this fraction
    # of its cloud diameter (the theorem's conclusion on good tiles).
    "eta_hat": 0.1,
}


def good_box_experiment(rs: RootSystem, phi: PhiSpec, omega, params=None, seed=0) -> BoxReport:
    """Map a geodesic family through phi, find family scales, classify tiles.

    Pipeline: sample L(Omega)[m]; image the members; family efficiency scale;
    family monotone scale; per-member uniform points and geodesic
    approximation with the angle condition; tile the box and call a tile
    good when at least 1 - sqrt(q~) of its members are good (q~ the overall
    bad fraction).  Stage failures are recorded per member, never fatal.
    Desk-scale knobs (hbar, ladder floors) come from ``params``.
    """
    p = dict(DEFAULT_EXPERIMENT)
    if params:
        p.update(params)
    box = build_box(rs, omega)
    family = sample_geodesic_family(
        box, p["m"], p["density"], seed, n_chords=p["n_chords"]
    )
    members = [seg.path(rs, n=p["n_samples"]) for seg in family]
    images = [map_path(phi, path) for path in members]
    records = [MemberRecord(index=k, tile=None, good=False, stage="ok") for k in range(len(family))]

    gaps = [im.endpoint_gap() for im in images]
    l_stop = p["L_stop_factor"] * float(np.median(gaps))
    l_a = p["L_a_factor"] * float(np.median(gaps))
    eff = find_efficiency_scale_family(
        images, p["eps"], p["N"], np.sqrt(p["N"]), l_stop,
        hbar=p["hbar"], enforce_length=False,
    )
    eff_ok = set(map(int, eff.subset)) if eff.found else set()
    for r in records:
        if r.index not in eff_ok:
            r.stage = "efficiency"

    survivors = sorted(eff_ok)
    mono_ok = set()
    rho_mono = float("nan")
    if survivors:
        reports = []
        for k in survivors:
            try:
                rep = find_monotone_scale(
                    images[k], p["delta"], p["eps"], p["N"], l_a,
                    hbar=p["hbar"], enforce=False,
                )
                reports.append((k, rep))
            except PreconditionError as exc:
                records[k].stage = "monotone"
                records[k].detail = str(exc)
        sigmas = [rep.flats + rep.naturals for _, rep in reports]
        if sigmas:
            depth = min(len(s) for s in sigmas)
            if depth > 0:
                arr = np.array([s[:depth] for s in sigmas])
                means = arr.mean(axis=0)
                cands = [
                    i for i in range(depth - 1)
                    if means[i] <= 1 / p["N"] and means[i + 1] <= 1 / p["N"]
                ] or ([0] if depth >= 2 and means[0] <= 1 / p["N"] else [])
                if cands:
                    i0 = cands[0]
                    rho_mono = float(p["delta"] ** (i0 + 1))
                    thr = 1 / np.sqrt(p["N"])
                    for (k, rep), s in zip(reports, sigmas):
                        lo = min(i0 + 1, len(s) - 1)
                        if s[i0] <= thr and s[lo] <= thr:
                            mono_ok.add(k)
                        else:
                            records[k].stage = "monotone"
                else:
                    for k, _ in reports:
                        records[k].stage = "monotone"
    for k in sorted(mono_ok):
        im = images[k]
        try:
            up = uniform_points(im, max(l_a, 4 * im.mesh()), p["uniform_M"], delta=p["delta"])
            if up.non_uniform_fraction > 2.0 / p["uniform_M"] + 1e-9:
                records[k].stage = "uniform"
                continue
            ga = geodesic_approximation(
                im, ("monotone", p["delta"]), hbar=p["hbar"], check_walls=False,
                check_monotone=False,
            )
            if not ga.certified:
                records[k].stage = "approximation"
                records[k].detail = f"hausdorff {ga.hausdorff:.3g} > bound {ga.bound:.3g}"
                continue
            u = ga.segment.base[-1] - ga.segment.base[0]
            if sin_angle_to_kernels(rs, u) < p["eta_tilde"]:
                records[k].stage = "angle"
                continue
            records[k].good = True
        except PreconditionError as exc:
            records[k].stage = "approximation"
            records[k].detail = str(exc)

    tiling = tile_box(box, p["tile_rho"])
    tile_stats = {}
    for k, (seg, path) in enumerate(zip(family, members)):
        mid = path.base[path.n_samples // 2]
        idx = tiling.tile_index_of(seg.fibers_at, mid)
        records[k].tile = idx
        if idx is None:
            continue
        st = tile_stats.setdefault(idx, {"count": 0, "good": 0})
        st["count"] += 1
        st["good"] += int(records[k].good)

    n_good = sum(1 for r in records if r.good)
    threshold = 1.0 - np.sqrt(max(float(p["q_tilde"]), 0.0))
    candidates = []
    for idx, st in tile_stats.items():
        st["good_fraction"] = st["good"] / st["count"]
        st["fit_error"] = float("nan")
        if st["good_fraction"] >= threshold - 1e-12:
            candidates.append(idx)

    # A candidate tile is good only if a standard map fits its good members'
    # points within eta_hat of the cloud diameter.
    good_tiles = []
    fit_errors = {}
    for idx in candidates:
        pts_base, pts_fibers = [], None
        for k, (seg, path) in enumerate(zip(family, members)):
            if records[k].tile != idx or not records[k].good:
                continue
            sel = np.arange(0, path.n_samples, max(path.n_samples // 8, 1))
            pts_base.append(path.base[sel])
            fs = [f[sel] for f in path.fibers]
            if pts_fibers is None:
                pts_fibers = [[f] for f in fs]
            else:
                for lst, f in zip(pts_fibers, fs):
                    lst.append(f)
        if not pts_base:
            continue
        base = np.vstack(pts_base)
        fibers = [np.vstack(lst) for lst in pts_fibers]
        fit = standard_map_fit(rs, phi, base, fibers)
        fit_errors[idx] = fit.sup_error_fraction
        tile_stats[idx]["fit_error"] = fit.sup_error_fraction
        if fit.sup_error_fraction <= float(p["eta_hat"]) + 1e-12:
            good_tiles.append(idx)
    theta = 1.0 - (len(good_tiles) / len(tile_stats)) if tile_stats else 1.0
    return BoxReport(
        good_tiles=good_tiles,
        tile_stats=tile_stats,
        theta=float(theta),
        good_fraction=float(n_good / len(records)) if records else 0.0,
        rho_eff=float(eff.rho) if eff.found else float("nan"),
        rho_mono=rho_mono,
        tile_rho=float(p["tile_rho"]),
        members=records,
        fit_errors=fit_errors,
    )


# ---------------------------------------------------------------------------
# Standard-map fitting

@dataclass(frozen=True)
class StandardMapFit:
    a_matrix: np.ndarray
    a_offset: np.ndarray
    fiber_scales: tuple  # per root (scale vector, offset vector)
    sup_error: float
    sup_error_fraction: float
    rank_ok: bool


def standard_map_fit(rs: RootSystem, phi: PhiSpec, base, fibers) -> StandardMapFit:
    """Least-squares standard map g x f against phi on a point cloud.

    f is affine on A (plain lstsq of the image A-parts).  g is per root a
    coordinatewise affine fiber map, fitted with metric weights
    exp(-2(h - h_min)) at the image heights: fiber displacement costs are
    height-uniform in these coordinates, so the low-height points (where the
    metric magnifies fiber mismatch the most) pin the scale.  The reported
    error is the sup over points of the embedded distance between phi(p)
    and (g x f)(p), also as a fraction of the cloud's embedded diameter.
    """
    base = np.asarray(base, dtype=float)
    fibers = [np.asarray(f, dtype=float) for f in fibers]
    ib, ifib = apply_phi(rs, phi, base, fibers)
    n = base.shape[0]
    design = np.hstack([base, np.ones((n, 1))])
    sol, _, rank, _ = np.linalg.lstsq(design, ib, rcond=None)
    rank_ok = rank == rs.dim_a + 1
    a_matrix = sol[:-1].T
    a_offset = sol[-1]
    fitted_base = design @ sol
    fitted_fibers = []
    scales = []
    for i in range(rs.n_roots):
        f = fibers[i]
        g = ifib[i]
        h = rs.alpha(i, ib)
        w = np.sqrt(np.exp(-2.0 * np.clip(h - h.min(), 0.0, 350.0)))
        cols_scale, cols_off = [], []
        fit_cols = []
        for c in range(f.shape[1]):
            d = np.vstack([f[:, c], np.ones(n)]).T
            s, _, rk, _ = np.linalg.lstsq(d * w[:, None], g[:, c] * w, rcond=None)
            rank_ok = rank_ok and (rk == 2 or np.ptp(f[:, c]) == 0)
            cols_scale.append(float(s[0]))
            cols_off.append(float(s[1]))
            fit_cols.append(d @ s)
        scales.append((tuple(cols_scale), tuple(cols_off)))
        fitted_fibers.append(np.stack(fit_cols, axis=1))
    err = embedded_distance_arrays(rs, ifib, ib, fitted_fibers, fitted_base)
    sup = float(np.max(err)) if n else 0.0
    # Embedded diameter of the image cloud, estimated on a subsample.
    sel = np.arange(0, n, max(n // 48, 1))
    d = embedded_distance_arrays(
        rs,
        [g[sel][:, None, :] for g in ifib],
        ib[sel][:, None, :],
        [g[sel][None, :, :] for g in ifib],
        ib[sel][None, :, :],
    )
    diam = float(np.max(d)) if n else 1.0
    return StandardMapFit(
        a_matrix=a_matrix,
        a_offset=a_offset,
        fiber_scales=tuple(scales),
        sup_error=sup,
        sup_error_fraction=float(sup / diam) if diam > 0 else 0.0,
        rank_ok=bool(rank_ok),
    )
