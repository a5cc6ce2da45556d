"""Synthetic inputs: path generators and the catalog of test maps.

The experiments need ground-truth maps (the toolkit cannot construct real
quasi-isometries between genuinely distinct groups): identity plus bounded
noise, standard maps (affine on A respecting root kernels, blockwise affine
on fibers), compositions with left translations, and structure-violating
negative controls.  Noise is keyed to the point coordinates so every map is
well defined; amplitudes are bounded in the embedded metric.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .groups import RootSystem
from .paths import Path

_FREQ = np.array([12.9898, 78.233, 37.719, 4.581, 93.9898, 53.539])


def substream(seed, index):
    """Deterministic child generator keyed by item index."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _point_noise(base, seed, width, freq=1.0):
    """Deterministic bounded pseudo-noise keyed to the point coordinates.

    Keying noise to coordinates keeps the map well defined (the same point
    always has the same image); ``freq`` controls how fast it varies, and
    slopes below 1 keep noisy images monotone along their chords.
    """
    k = base.shape[1]
    out = np.zeros_like(base)
    for j in range(k):
        phase = freq * (base @ _FREQ[:k]) * (1.0 + 0.37 * j) + seed * 0.7131 + 3.1 * j
        out[:, j] = width * np.sin(phase)
    return out


@dataclass(frozen=True)
class PhiSpec:
    """A map from the synthetic catalog, serializable as JSON."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def to_json(self):
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}


def declared_constants(rs: RootSystem, spec: PhiSpec):
    """(kappa, C) declared for the map, generous enough to be valid."""
    p = spec.params
    if spec.kind == "identity":
        return 1.0, 0.0
    if spec.kind == "noise":
        return 1.0, 2.0 * float(p.get("c", 1.0)) + 2.0
    if spec.kind == "translate":
        return 1.0, 0.0
    if spec.kind == "standard":
        scales = p.get("fiber_scale", [1.0] * rs.n_roots)
        c = sum(abs(np.log(abs(s))) for s in scales) + 2.0 * float(p.get("noise", 0.0)) + 2.0
        return 1.0, c
    if spec.kind == "shear":
        # Not a quasi-isometry; constants declared loosely for plumbing only.
        return 4.0, 8.0
    raise ValidationError(f"unknown phi kind {spec.kind!r}")


def apply_phi(rs: RootSystem, spec: PhiSpec, base, fibers):
    """Apply the map to arrays (base (n, dim_a), fibers per root (n, dim_v))."""
    base = np.array(base, dtype=float)
    fibers = [np.array(f, dtype=float) for f in fibers]
    p = spec.params
    if spec.kind == "identity":
        return base, fibers
    if spec.kind == "noise":
        c = float(p.get("c", 1.0))
        freq = float(p.get("freq", 0.01))
        norm1 = float(np.sum(np.abs(rs.alpha_matrix())))
        t_width = 0.5 * c / max(norm1, 1.0) / rs.dim_a
        base2 = base + _point_noise(base, spec.seed, t_width, freq=freq / max(t_width, 0.1))
        fibers2 = []
        for i, f in enumerate(fibers):
            h = rs.alpha(i, base)
            u = _point_noise(np.hstack([f, base]), spec.seed + 17 * (i + 1), 0.45, freq=freq)[
                :, : f.shape[1]
            ]
            fibers2.append(f + np.exp(h)[:, None] * u)
        return base2, fibers2
    if spec.kind == "translate":
        t0 = np.asarray(p.get("t0", np.zeros(rs.dim_a)), dtype=float)
        x0 = p.get("x0", [np.zeros(r.dim_v) for r in rs.roots])
        base2 = base + t0[None, :]
        fibers2 = [
            np.asarray(x0[i], dtype=float)[None, :] + np.exp(rs.alpha(i, t0)) * f
            for i, f in enumerate(fibers)
        ]
        return base2, fibers2
    if spec.kind == "standard":
        flip = bool(p.get("flip", False))
        a_offset = np.asarray(p.get("a_offset", np.zeros(rs.dim_a)), dtype=float)
        scales = [float(s) for s in p.get("fiber_scale", [1.0] * rs.n_roots)]
        offsets = p.get("fiber_offset", [0.0] * rs.n_roots)
        perm = list(p.get("root_perm", range(rs.n_roots)))
        base2 = (-base if flip else base) + a_offset[None, :]
        fibers2 = [None] * rs.n_roots
        for i in range(rs.n_roots):
            j = perm[i]
            fibers2[j] = scales[i] * fibers[i] + np.atleast_1d(offsets[i])[None, :]
        noise = float(p.get("noise", 0.0))
        if noise > 0:
            sub = PhiSpec(
                kind="noise",
                params={"c": noise, "freq": p.get("noise_freq", 0.01)},
                seed=spec.seed,
            )
            base2, fibers2 = apply_phi(rs, sub, base2, fibers2)
        return base2, fibers2
    if spec.kind == "shear":
        rate = float(p.get("rate", 1.5))
        amp = float(p.get("amp", 1.0))
        root = int(p.get("root", 0))
        fibers2 = [np.array(f) for f in fibers]
        h = rs.alpha(root, base)
        fibers2[root] = fibers2[root] + amp * np.exp(rate * h)[:, None]
        return np.array(base), fibers2
    raise ValidationError(f"unknown phi kind {spec.kind!r}")


def map_path(spec: PhiSpec, path: Path, validate=False) -> Path:
    """Image of a sampled path under a catalog map, with declared constants."""
    rs = path.group
    base2, fibers2 = apply_phi(rs, spec, path.base, path.fibers)
    kappa, c_add = declared_constants(rs, spec)
    kappa = max(kappa, path.kappa)
    c_add = c_add + path.c_add
    return Path(
        rs,
        base2,
        fibers2,
        params=path.params,
        kappa=kappa,
        c_add=c_add,
        is_geodesic=False,
        validate=validate,
    )


# ---------------------------------------------------------------------------
# Path generators

def straight_geodesic(rs: RootSystem, fibers_at, a, b, n=64) -> Path:
    """The geodesic p * segment(a -> b): constant fibers, straight A-part."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.linspace(0.0, 1.0, n)
    base = a[None, :] + s[:, None] * (b - a)[None, :]
    fibers = [
        np.broadcast_to(np.atleast_1d(np.asarray(x, dtype=float))[None, :], (n, rs.roots[i].dim_v)).copy()
        for i, x in enumerate(fibers_at)
    ]
    norm = np.sum(np.abs(rs.alpha_matrix() @ (b - a)))
    params = s * max(norm, 1e-12)
    return Path(rs, base, fibers, params=params, kappa=1.0, c_add=0.0, is_geodesic=True,
                validate=False)


def dyadic_straight_path(rs: RootSystem, direction, n, step=0.0625, fiber_pauses=()):
    """Straight dyadic A-path with optional fiber-jump pauses.

    ``fiber_pauses`` is a sequence of (position_index, root, jump) triples;
    each inserts a repeated base sample whose fiber jumps by ``jump``, the
    planted monotonicity violation.  A-coordinates are dyadic so chord sums
    are exact in binary floating point.
    """
    direction = np.asarray(direction, dtype=float)
    rows = [direction * (k * step) for k in range(n)]
    fibers = [[np.zeros(rs.roots[i].dim_v)] for i in range(rs.n_roots)]
    base = [rows[0]]
    current = [np.zeros(rs.roots[i].dim_v) for i in range(rs.n_roots)]
    pause_at = {int(pos): (int(root), np.atleast_1d(np.asarray(j, dtype=float)))
                for pos, root, j in fiber_pauses}
    for k in range(1, n):
        if k in pause_at:
            root, jump = pause_at[k]
            base.append(rows[k])
            current = [c.copy() for c in current]
            current[root] = current[root] + jump
            for i in range(rs.n_roots):
                fibers[i].append(current[i])
        base.append(rows[k])
        for i in range(rs.n_roots):
            fibers[i].append(current[i])
    base = np.array(base)
    fibers = [np.array(f) for f in fibers]
    m = base.shape[0]
    # Generous declared constants: pauses stall the parameter.
    params = np.arange(m, dtype=float)
    norm = np.sum(np.abs(rs.alpha_matrix() @ direction)) * step
    kappa = max(2.0, 2.0 / max(norm, 1e-9), 2.0 * norm)
    jumps = [np.max(np.abs(j)) for _, j in pause_at.values()] or [0.0]
    c_add = 4.0 + 2.0 * max(jumps)
    return Path(rs, base, fibers, params=params, kappa=kappa, c_add=c_add, validate=False)


def staircase_apath(n_steps, step_len, rise, samples_per_leg=8):
    """Axis-aligned staircase in the plane (Euclidean APath points)."""
    pts = [np.zeros(2)]
    for _ in range(n_steps):
        last = pts[-1]
        for s in np.linspace(0, 1, samples_per_leg + 1)[1:]:
            pts.append(last + np.array([s * step_len, 0.0]))
        last = pts[-1]
        for s in np.linspace(0, 1, samples_per_leg + 1)[1:]:
            pts.append(last + np.array([0.0, s * rise]))
    return np.array(pts)


def bump_apath(length, bump_pos, bump_width, bump_height, n=256):
    """A straight planar path with one rectangular detour bump."""
    x = np.linspace(0.0, length, n)
    y = np.where((x >= bump_pos) & (x <= bump_pos + bump_width), bump_height, 0.0)
    return np.c_[x, y]


def efficient_wiggle(rng, length, amplitude, waves, n=256):
    """Low-amplitude sinusoidal perturbation of a planar chord."""
    x = np.linspace(0.0, length, n)
    phase = rng.uniform(0, 2 * np.pi)
    y = amplitude * np.sin(2 * np.pi * waves * x / length + phase)
    window = np.sin(np.pi * x / length)  # pinned endpoints
    return np.c_[x, y * window]


def confined_quasigeodesic(rs: RootSystem, s, n, rng, kappa=2.0, max_tries=64):
    """Rejection-sampled quasi-geodesic whose A-projection stays in a ball
    of diameter s (root norm).

    The A-part advances monotonically along a random direction across the
    ball with a small transverse wiggle; fibers drift by unit-size steps at
    the current height.  Rejection enforces the declared constants on
    random index chains.
    """
    W = rs.alpha_matrix()
    for _ in range(max_tries):
        u = rng.normal(size=rs.dim_a)
        u /= np.linalg.norm(u)
        norm_u = np.sum(np.abs(W @ u))
        span = 0.9 * s / norm_u  # Euclidean extent along u fitting the ball
        ts = np.linspace(0.0, span, n)
        wig_dir = rng.normal(size=rs.dim_a)
        wig_dir -= (wig_dir @ u) * u
        wig_norm = np.linalg.norm(wig_dir)
        base = ts[:, None] * u[None, :]
        if wig_norm > 0:
            wig_dir /= wig_norm
            amp = 0.04 * span * rng.uniform(0.2, 1.0)
            base = base + (amp * np.sin(np.linspace(0, 6.3, n)))[:, None] * wig_dir[None, :]
        fibers = []
        for i in range(rs.n_roots):
            h = rs.alpha(i, base)
            steps = rng.uniform(-0.4, 0.4, size=(n, rs.roots[i].dim_v))
            drift = np.cumsum(np.exp(h)[:, None] * steps * np.diff(ts, prepend=ts[0])[:, None], axis=0)
            fibers.append(0.2 * drift)
        params = ts * norm_u
        params = params + np.arange(n) * 1e-9  # strictly increasing
        try:
            path = Path(rs, base, fibers, params=params, kappa=kappa, c_add=2.0 + 0.1 * s)
        except Exception:
            continue
        d_base = np.abs((base @ W.T)[:, None, :] - (base @ W.T)[None, :, :]).sum(axis=2)
        if float(d_base.max()) <= s:
            return path
    raise ValidationError("confined path sampler failed; loosen s or kappa")
