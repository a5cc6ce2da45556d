import numpy as np
import pytest

from coarsegeo.errors import PreconditionError, ValidationError
from coarsegeo.paths import (
    APath,
    Path,
    chord_hausdorff,
    confinement_check,
    default_hbar,
    efficient_subsegment_fraction,
    find_efficiency_scale,
    find_efficiency_scale_family,
    is_efficient,
    subdivide,
)
from coarsegeo.synthetic import bump_apath, confined_quasigeodesic, efficient_wiggle

import oracles


def straight_sol_path(sol, t_hi=5.0, n=101):
    base = np.linspace(0, t_hi, n).reshape(-1, 1)
    fib = [np.zeros((n, 1)), np.zeros((n, 1))]
    return Path(sol, base, fib, params=np.linspace(0, 2 * t_hi, n), is_geodesic=True)


def test_quasi_constant_validation(sol):
    n = 20
    base = np.linspace(0, 5, n).reshape(-1, 1)
    fib = [np.zeros((n, 1)), np.zeros((n, 1))]
    with pytest.raises(ValidationError, match="quasi-geodesic bounds"):
        # A straight Sol line moves 2 units of distance per unit of t, so
        # claiming it is parametrized by arclength with kappa = 1 fails.
        Path(sol, base, fib, params=np.linspace(0, 5, n), kappa=1.0, c_add=0.0)


def test_subdivide_straight_line(sol):
    p = straight_sol_path(sol)
    sub = subdivide(p, 2.0)
    assert list(sub.indices) == [0, 20, 40, 60, 80, 100]
    assert np.allclose(sub.gaps, 2.0)


def test_subdivide_r_larger_than_gap(sol):
    p = straight_sol_path(sol)
    sub = subdivide(p, 100.0)
    assert list(sub.indices) == [0, 100]


def test_subdivide_circle_quarter_length():
    th = np.linspace(0, 2 * np.pi, 1000)
    c = APath(np.c_[np.cos(th), np.sin(th)], metric="euclidean")
    sub = subdivide(c, c.chain_length() / 4)
    assert len(sub.indices) == 5


def test_subdivision_gap_window(sol, rng):
    # All gaps except the final appended one lie in [r, r + mesh).
    for _ in range(5):
        n = 120
        base = np.cumsum(rng.uniform(0.01, 0.12, size=(n, 1)), axis=0)
        fib = [np.zeros((n, 1)), np.zeros((n, 1))]
        p = Path(sol, base, fib, params=np.linspace(0, 30, n), kappa=40.0, c_add=1.0)
        r = 1.3
        sub = subdivide(p, r)
        mesh = p.mesh()
        assert np.all(sub.gaps[:-1] >= r - 1e-12)
        assert np.all(sub.gaps[:-1] < r + mesh)


def test_subdivide_matches_oracle(sol, rng):
    n = 90
    base = np.cumsum(rng.uniform(0.01, 0.15, size=(n, 1)), axis=0)
    fib = [np.zeros((n, 1)), np.zeros((n, 1))]
    p = Path(sol, base, fib, params=np.linspace(0, 30, n), kappa=60.0, c_add=1.0)
    d = oracles.path_dist_fn(sol.alpha_matrix(), p.base, p.fibers)
    assert list(subdivide(p, 1.7).indices) == oracles.subdivide_indices(d, n, 1.7)


def test_efficiency_straight_and_l_path(sol):
    p = straight_sol_path(sol)
    for eps in (0.0, 0.01, 1.0):
        assert is_efficient(p, eps, 0.5)
    L = APath([[0, 0], [0, 1], [1, 1]], metric="euclidean")
    root2 = np.sqrt(2)
    assert is_efficient(L, root2 - 1 + 1e-9, 0.5)
    assert not is_efficient(L, root2 - 1 - 1e-9, 0.5)


def test_efficiency_dense_zigzag():
    # length / gap = 3: inefficient for every eps < 2 at a fine scale.
    n_teeth = 30
    xs, ys = [0.0], [0.0]
    dx = 1.0 / n_teeth
    amp = dx * np.sqrt(2.0)  # each tooth is 3x longer than its advance
    for k in range(n_teeth):
        xs += [xs[-1] + dx / 2, xs[-1] + dx]
        ys += [amp, 0.0]
    zig = APath(np.c_[xs, ys], metric="euclidean")
    assert zig.chain_length() / zig.endpoint_gap() == pytest.approx(3.0, rel=1e-2)
    assert not is_efficient(zig, 1.9, 0.02)
    assert is_efficient(zig, 2.1, 0.02)


def test_chord_hausdorff_examples():
    seg = np.c_[np.linspace(0, 4, 50), np.zeros(50)]
    assert chord_hausdorff(seg) == pytest.approx(0.0, abs=1e-12)
    th = np.linspace(0, np.pi, 500)
    arc = np.c_[np.cos(th), np.sin(th)]
    assert chord_hausdorff(arc) == pytest.approx(1.0, abs=0.01)


def test_chord_bound_for_certified_efficient_curves(rng):
    r = 0.25
    for _ in range(40):
        pts = efficient_wiggle(rng, 10.0, rng.uniform(0.02, 0.4), rng.integers(1, 5))
        lam = APath(pts, metric="euclidean")
        gap = lam.endpoint_gap()
        # certify the largest eps at which the curve passes, then bound
        for eps in (1e-4, 1e-3, 1e-2, 1e-1):
            if is_efficient(lam, eps, r):
                bound = (r + 1.5 * eps**0.25) * gap
                assert chord_hausdorff(pts) <= bound + 1e-9
                break


def test_efficiency_scale_straight_top(sol):
    p = straight_sol_path(sol)
    rep = find_efficiency_scale(p, eps=0.9, n_bound=5, l_stop=0.1, hbar=0.1)
    assert rep.rho == 1.0
    assert np.all(rep.deltas == 0.0)
    assert rep.accepted and rep.found


def test_efficiency_scale_postcondition_and_oracle(rng):
    q_of = lambda eps: 0.5 * eps**0.25
    for trial in range(6):
        pts = bump_apath(12.0, rng.uniform(2, 8), rng.uniform(0.5, 2.0),
                         rng.uniform(0.5, 3.0), n=220)
        lam = APath(pts, metric="euclidean", kappa=4.0, c_add=2.0)
        eps, N, l_stop, hb = 0.5, 4.0, 0.05, 0.002
        rep = find_efficiency_scale(lam, eps, N, l_stop, hbar=hb)
        assert rep.found
        assert rep.deltas[rep.scale_index] <= 1.0 / N
        assert q_of(eps) * rep.rho * lam.endpoint_gap() >= l_stop * (1 - 1e-12)
        d = oracles.apath_dist_fn(lam.points)
        deltas, _ = oracles.efficiency_deltas(d, lam.n_samples, eps, l_stop,
                                              lam.endpoint_gap())
        assert np.allclose(rep.deltas, deltas[: len(rep.deltas)], atol=1e-9)


def test_efficiency_scale_rejects_short_paths(sol):
    p = straight_sol_path(sol)
    with pytest.raises(PreconditionError) as exc:
        find_efficiency_scale(p, eps=0.5, n_bound=50, l_stop=1.0, hbar=1.0)
    assert "required" in str(exc.value)


def test_efficiency_scale_family(sol, rng):
    members = [straight_sol_path(sol, t_hi=5.0 + 0.1 * k) for k in range(9)]
    pts = bump_apath(10.0, 4.0, 1.0, 2.5, n=200)
    noisy = APath(np.c_[pts[:, 0] * 1.2, pts[:, 1]], metric="euclidean",
                  kappa=4.0, c_add=2.0)
    fam = [m.base_apath() for m in members] + [noisy]
    rep = find_efficiency_scale_family(fam, 0.5, 10.0, np.sqrt(10.0), 0.05, hbar=0.002)
    assert rep.found
    assert len(rep.subset) >= (1 - np.sqrt(10.0) / 10.0) * len(fam)
    # Singleton family reduces to the single-path finder.
    single = find_efficiency_scale_family([fam[0]], 0.5, 4.0, 2.0, 0.05, hbar=0.002)
    alone = find_efficiency_scale(fam[0], 0.5, 4.0, 0.05, hbar=0.002)
    assert single.scale_index == alone.scale_index


def test_efficient_subsegment_fraction():
    n = 401
    pts = np.c_[np.linspace(0, 10, n), np.zeros(n)]
    lam = APath(pts, metric="euclidean")
    eps = 1e-4  # window [eps^(1/4) L, L] = [1, 10]
    idx = list(range(0, n, 50))  # even cells of size 1.25
    if idx[-1] != n - 1:
        idx.append(n - 1)
    gaps = [lam.point_dist(a, b) for a, b in zip(idx[:-1], idx[1:])]
    frac, bound = efficient_subsegment_fraction(lam, eps, idx, min(gaps), max(gaps))
    assert frac == 0.0
    assert frac <= bound


def test_efficient_subsegment_fraction_rejects_hidden_spike():
    # A spike tall enough for the cell-scale subdivision but hidden between
    # two path-scale anchors passes the definition-level efficiency check yet
    # breaks the inequality the proof sums over; the op must reject it,
    # otherwise its guaranteed bound would be violated.
    eps = 1.0 / 16.0
    n = 401
    x = np.linspace(0, 10, n)
    y = np.zeros(n)
    y[(x > 5.6) & (x < 6.0)] = 2.0
    lam = APath(np.c_[x, y], metric="euclidean", kappa=8.0, c_add=5.0)
    assert is_efficient(lam, eps, 0.5 * eps**0.25)  # definition-level check
    idx = [0, n // 2, n - 1]
    assert not is_efficient(lam, np.sqrt(eps), 0.5 * eps**0.25, n // 2, n - 1)
    with pytest.raises(PreconditionError, match="union"):
        efficient_subsegment_fraction(lam, eps, idx, 5.0, 10.0)


def test_efficient_subsegment_fraction_randomized(rng):
    # Smooth efficient curves always stay within the proof's bound.
    for _ in range(15):
        pts = efficient_wiggle(rng, 10.0, rng.uniform(0.01, 0.06), rng.integers(1, 4), n=400)
        lam = APath(pts, metric="euclidean", kappa=3.0, c_add=1.0)
        eps = 1e-4
        idx = list(range(0, 400, 60)) + [399]
        gaps = [lam.point_dist(a, b) for a, b in zip(idx[:-1], idx[1:])]
        if min(gaps) < eps**0.25 * lam.endpoint_gap():
            continue
        frac, bound = efficient_subsegment_fraction(lam, eps, idx, min(gaps), max(gaps))
        assert frac <= bound + 1e-12


def test_confinement_single_point(sol):
    base = np.zeros((2, 1))
    fib = [np.zeros((2, 1)), np.zeros((2, 1))]
    p = Path(sol, base, fib, params=np.array([0.0, 1.0]), kappa=1.0, c_add=1.0)
    rep = confinement_check(p, s=1.0)
    assert rep.max_distance == 0.0 and rep.ok


def test_confinement_pure_a_path(sol):
    n = 60
    base = np.linspace(0, 2.0, n).reshape(-1, 1)
    fib = [np.zeros((n, 1)), np.zeros((n, 1))]
    p = Path(sol, base, fib, params=np.linspace(0, 4.0, n))
    rep = confinement_check(p, s=4.0)
    assert rep.max_distance <= 4.0 + 1e-9
    assert rep.ok


def test_confinement_diameter_precondition(sol):
    p = straight_sol_path(sol)  # projection diameter 10 in the root norm
    with pytest.raises(PreconditionError, match="diam"):
        confinement_check(p, s=5.0)


def test_confinement_monte_carlo(sol, rank2, rng):
    for rs in (sol, rank2):
        for s in (5.0, 10.0):
            for k in range(6):
                path = confined_quasigeodesic(rs, s, 40, rng)
                rep = confinement_check(path, s)
                assert rep.ok, f"ratio {rep.ratio} vs hbar {rep.hbar}"


def test_default_hbar_formula():
    assert default_hbar(2, 1.0) == pytest.approx(4.0 * 80.0)
    assert default_hbar(3, 2.0) == pytest.approx(16.0 * 160.0)
