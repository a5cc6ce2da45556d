"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as the
criteria execute.  Tolerances and budgets are pinned here, not configured.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from coarsegeo.boxes import folner_stats, good_box_experiment, monte_carlo_volume
from coarsegeo.combinatorics import (
    IncidenceStructure,
    mediant_dominance,
    pingpong_bound_check,
    pingpong_bound_check_exact,
    thin_triangle_check,
)
from coarsegeo.embed import embedded_distance_arrays, pairwise_embedded
from coarsegeo.monotone import find_monotone_scale, uniform_points
from coarsegeo.paths import APath, confinement_check, chord_hausdorff, find_efficiency_scale, is_efficient, subdivide
from coarsegeo.quadrilaterals import word_residual
from coarsegeo.synthetic import (
    PhiSpec,
    bump_apath,
    confined_quasigeodesic,
    dyadic_straight_path,
    efficient_wiggle,
    staircase_apath,
    substream,
)
from coarsegeo.weightspace import (
    MetricPolynomial,
    estimate_u_bound_constant,
    u_inverse,
    weight_distance_arrays,
)

from test_quadrilaterals import make_trivial_word
import oracles


def _report(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else "")
    print(line)
    assert ok, line


def _random_poly(rng):
    parts = []
    for _ in range(int(rng.integers(1, 3))):
        deg = int(rng.integers(1, 4))
        parts.append(tuple([0.0] + [float(c) for c in rng.uniform(-2, 2, deg)]))
    return MetricPolynomial(parts=tuple(parts))


def test_criterion_01_u_bounds():
    t0 = time.perf_counter()
    rng = substream(101, 0)
    violations = 0
    ds = np.exp(np.linspace(1.0, np.log(1e8), 200))
    for _ in range(10):
        poly = _random_poly(rng)
        c_q = estimate_u_bound_constant(poly)  # frozen per polynomial
        for d in ds:
            u = u_inverse(poly, d)
            if not (np.log(d) - c_q <= u <= 2 * np.log(d) + c_q):
                violations += 1
    elapsed = time.perf_counter() - t0
    _report(
        "criterion 1: U_Q bounds ln d - C <= U <= 2 ln d + C",
        violations == 0 and elapsed < 5.0,
        f"violations={violations}, {elapsed:.2f}s",
    )


def test_criterion_02_metric_sanity(sol):
    rng = substream(102, 0)
    n = 10_000
    x1 = rng.uniform(-1e6, 1e6, size=(n, 1))
    x2 = rng.uniform(-1e6, 1e6, size=(n, 1))
    t1 = rng.uniform(-12, 12, n)
    t2 = rng.uniform(-12, 12, n)
    q1 = MetricPolynomial()
    d12 = weight_distance_arrays(x1, t1, x2, t2, q1)
    d21 = weight_distance_arrays(x2, t2, x1, t1, q1)
    dself = weight_distance_arrays(x1, t1, x1, t1, q1)
    ok = bool(np.all(d12 == d21) and np.all(d12 >= 0) and np.all(dself == 0))
    # Embedded distance on Sol over the same pairs.
    f1 = [x1, rng.uniform(-1e6, 1e6, size=(n, 1))]
    f2 = [x2, rng.uniform(-1e6, 1e6, size=(n, 1))]
    b1 = rng.uniform(-12, 12, size=(n, 1))
    b2 = rng.uniform(-12, 12, size=(n, 1))
    e12 = embedded_distance_arrays(sol, f1, b1, f2, b2)
    e21 = embedded_distance_arrays(sol, f2, b2, f1, b1)
    eself = embedded_distance_arrays(sol, f1, b1, f1, b1)
    ok = ok and bool(np.all(e12 == e21) and np.all(e12 >= 0) and np.all(eself == 0))
    _report("criterion 2: metric symmetry/nonnegativity/diagonal", ok, f"{n} pairs")


def test_criterion_03_confinement(sol, rank2):
    t0 = time.perf_counter()
    violations = 0
    count = 0
    for rs in (sol, rank2):
        rng = substream(103, rs.n_roots)
        for k in range(500):
            s = (5.0, 10.0, 20.0)[k % 3]
            path = confined_quasigeodesic(rs, s, 32, rng)
            rep = confinement_check(path, s, n_chains=16)
            count += 1
            if not rep.ok:
                violations += 1
    elapsed = time.perf_counter() - t0
    _report(
        "criterion 3: confinement max distance <= hbar s",
        violations == 0 and elapsed < 30.0 and count == 1000,
        f"{count} paths, violations={violations}, {elapsed:.1f}s",
    )


def _admissible_paths(rng, count):
    paths = []
    while len(paths) < count:
        kind = len(paths) % 3
        if kind == 0:
            n = 160
            pts = np.c_[np.linspace(0, 12, n), np.zeros(n)]
            paths.append(APath(pts, metric="euclidean", kappa=4.0, c_add=2.0))
        elif kind == 1:
            pts = bump_apath(12.0, rng.uniform(2, 8), rng.uniform(0.4, 2.0),
                             rng.uniform(0.5, 3.0), n=160)
            paths.append(APath(pts, metric="euclidean", kappa=4.0, c_add=2.0))
        else:
            pts = staircase_apath(int(rng.integers(3, 7)), 2.0, float(rng.uniform(0.5, 2.0)),
                                  samples_per_leg=6)
            paths.append(APath(pts, metric="euclidean", kappa=6.0, c_add=3.0))
    return paths


def test_criterion_04_efficiency_scale(rng):
    eps, n_bound, l_stop, hb = 0.5, 4.0, 0.05, 0.002
    q = 0.5 * eps**0.25
    checked = 0
    for lam in _admissible_paths(rng, 200):
        rep = find_efficiency_scale(lam, eps, n_bound, l_stop, hbar=hb)
        assert rep.accepted and rep.found
        assert rep.deltas[rep.scale_index] <= 1.0 / n_bound
        assert q * rep.rho * lam.endpoint_gap() >= l_stop * (1 - 1e-12)
        d = oracles.apath_dist_fn(lam.points)
        deltas, _ = oracles.efficiency_deltas(
            d, lam.n_samples, eps, l_stop, lam.endpoint_gap()
        )
        assert np.allclose(rep.deltas, deltas[: len(rep.deltas)], atol=1e-9)
        checked += 1
    _report("criterion 4: efficiency-scale postcondition + oracle", checked == 200,
            f"{checked} paths, exact delta agreement at 1e-9")


def test_criterion_05_monotone_scale(sol, rng):
    delta, eps, n_bound, l_a, hb = 0.5, 1e-16, 3.0, 0.2, 1e-5
    checked = 0
    accepted = 0
    for k in range(200):
        n = 257
        n_pauses = int(rng.integers(0, 4))
        positions = sorted(rng.choice(np.arange(40, 220), size=n_pauses, replace=False))
        pauses = [(int(pos), 0, float(np.exp(rng.uniform(3.0, 4.2)))) for pos in positions]
        p = dyadic_straight_path(sol, [1.0], n, fiber_pauses=pauses)
        rep = find_monotone_scale(p, delta, eps, n_bound, l_a, hbar=hb, enforce=False)
        if rep.found:
            accepted += 1
            sigma = rep.flats + rep.naturals
            assert sigma[rep.scale_index] <= 1.0 / n_bound
            assert sigma[rep.scale_index + 1] <= 1.0 / n_bound
        d = oracles.path_dist_fn(sol.alpha_matrix(), p.base, p.fibers)
        lam_d = oracles.apath_dist_fn(p.base, weights=sol.alpha_matrix())
        flats, naturals = oracles.monotone_fractions(
            d, lam_d, p.base, p.n_samples, delta, eps, rep.l_values
        )
        assert np.allclose(rep.flats, flats, atol=1e-9)
        assert np.allclose(rep.naturals, naturals, atol=1e-9)
        checked += 1
    _report(
        "criterion 5: monotone-scale postcondition + oracle",
        checked == 200 and accepted >= 150,
        f"{checked} paths ({accepted} with qualifying scales), exact fractions",
    )


def test_criterion_06_uniform_points(sol, rng):
    violations = 0
    for k in range(200):
        m = (10.0, 100.0)[k % 2]
        n = 257
        base = (np.arange(n) * 0.0625).reshape(-1, 1)
        fib = [np.zeros((n, 1)), np.zeros((n, 1))]
        from coarsegeo.paths import Path

        p = Path(sol, base, fib, params=np.arange(n) * 0.125, is_geodesic=True,
                 validate=False)
        sub = subdivide(p, 1.0)
        n_seg = len(sub.indices) - 1
        n_bad = int(rng.integers(0, max(2, n_seg // 8)))
        bad = np.zeros(n_seg, dtype=bool)
        if n_bad:
            bad[rng.choice(n_seg, size=n_bad, replace=False)] = True
        rep = uniform_points(p, 1.0, m, bad_mask=bad)
        if rep.non_uniform_fraction > 2.0 / m + 1e-12:
            violations += 1
    _report("criterion 6: non-uniform fraction <= 2/M", violations == 0,
            "200 delta-monotone paths, M in {10, 100}")


def test_criterion_07_chord_bound(rng):
    r = 0.25
    violations = 0
    tested = 0
    while tested < 500:
        pts = efficient_wiggle(rng, 10.0, rng.uniform(0.01, 0.5), int(rng.integers(1, 6)),
                               n=220)
        lam = APath(pts, metric="euclidean")
        gap = lam.endpoint_gap()
        eps_cert = None
        for eps in (1e-4, 1e-3, 1e-2, 1e-1, 0.5):
            if is_efficient(lam, eps, r):
                eps_cert = eps
                break
        if eps_cert is None:
            continue
        tested += 1
        if chord_hausdorff(pts) > (r + 1.5 * eps_cert**0.25) * gap + 1e-9:
            violations += 1
    _report("criterion 7: chord Hausdorff <= (r + 1.5 eps^(1/4)) gap",
            violations == 0, f"{tested} certified curves")


def test_criterion_08_folner(sol, rank2):
    st = folner_stats(sol, [[-1.0, 1.0]], 1.0, 0.0)
    mc = monte_carlo_volume(sol, [[-1.0, 1.0]], 1.0, 1_000_000, 108)
    ok = abs(mc - st.volume) / st.volume < 0.05
    st2 = folner_stats(rank2, [[-1.0, 1.0], [-0.5, 0.5]], 1.0, 0.0)
    mc2 = monte_carlo_volume(rank2, [[-1.0, 1.0], [-0.5, 0.5]], 1.0, 1_000_000, 109)
    ok = ok and abs(mc2 - st2.volume) / st2.volume < 0.05
    detail = f"MC rel err {abs(mc - st.volume) / st.volume:.4f}, {abs(mc2 - st2.volume) / st2.volume:.4f}"
    for rs, omega in ((sol, [[-1.0, 1.0]]), (rank2, [[-1.0, 1.0], [-1.0, 1.0]])):
        fr = {r: folner_stats(rs, omega, r, 0.5).shell_fraction for r in (8.0, 16.0, 32.0)}
        ok = ok and abs(fr[16.0] / fr[8.0] - 0.5) <= 0.05
        ok = ok and abs(fr[32.0] / fr[16.0] - 0.5) <= 0.05
    _report("criterion 8: Folner volume MC + shell halving", ok, detail)


def test_criterion_09_quadrilateral_words(sol, rng):
    n_ok = 0
    while n_ok < 500:
        made = make_trivial_word(sol, rng)
        if made is None:
            continue
        rs_vals, us = made
        res = word_residual(sol, rs_vals, us)
        assert res.residual <= 1e-9
        assert res.r_sum_difference == 0.0  # exact
        assert res.spread_ok
        n_ok += 1
    _report("criterion 9: 500 trivial words close with spread bound", True,
            "residual <= 1e-9, r0+r2 = r1+r3 exactly")


def test_criterion_10_lemma_suites(rng):
    # mixing
    n = 100_000
    a = rng.uniform(0, 10, n)
    b = rng.uniform(0, 10, n)
    A = rng.uniform(0.1, 10, n)
    B = rng.uniform(0.1, 10, n)
    ra, rb = a / A, b / B
    med = (a + b) / (A + B)
    det = ra != rb
    c_alpha = np.where(det, (med - rb) / np.where(det, ra - rb, 1.0), 0.5)
    mixing_bad = int(np.sum(det & (c_alpha >= 0.5) & (A < B)))
    for _ in range(2000):  # scalar spot-check against the same oracle
        res = mediant_dominance(*(float(v) for v in (a[_], b[_], A[_], B[_])))
        assert res.dominance_holds or not res.implies_dominance

    # triangle
    c = rng.uniform(0.5, 20, n)
    eps = rng.uniform(0, 0.5, n)
    lam = rng.uniform(0.05, 0.95, n)
    ta = lam * (1 + eps) * c
    tb = (1 + eps) * c - ta
    valid = (ta + tb >= c) & (ta + c >= tb) & (tb + c >= ta) & (np.minimum(ta, tb) > 0)
    s = 0.5 * (ta + tb + c)
    area2 = np.maximum(s * (s - ta) * (s - tb) * (s - c), 0.0)
    height = 2.0 * np.sqrt(area2) / c
    bound = 1.5 * eps**0.25 * c
    triangle_bad = int(np.sum(valid & (height > bound + 1e-12)))

    # ping-pong, enumerated instances
    pingpong_bad = 0
    rng2 = substream(110, 1)
    for _ in range(100_000 // 100):  # 1000 enumerated instances per loop is
        # costly; run 1000 structured instances x 100 random subsets
        na, nb = 4, 4
        rel = rng2.random((na, nb)) < 0.75
        rel[np.arange(na), np.arange(nb)] = True
        wa = rng2.integers(1, 6, na).astype(float)
        wb = rng2.integers(1, 6, nb).astype(float)
        inc = IncidenceStructure(wa, wb, rel)
        m_a, m_b = inc.side_ratios()
        s_max = 1.0 / (m_a * m_b)
        for _ in range(100):
            t = float(rng2.uniform(0.25, 1.0))
            order = np.argsort(wa)
            sub, total = [], 0.0
            s_val = float(rng2.uniform(0.3, 1.0)) * s_max
            for i in order:
                if total + wa[i] <= s_val * wa.sum():
                    sub.append(int(i))
                    total += wa[i]
            if not sub:
                continue
            if not pingpong_bound_check(inc, sub, s_val, t).holds:
                pingpong_bad += 1

    # exact-arithmetic verification on integer-weight instances
    exact_bad = 0
    for _ in range(200):
        na, nb = 3, 4
        rel = rng2.random((na, nb)) < 0.8
        rel[0, :] = True
        rel[:, 0] = True
        wa = [int(x) for x in rng2.integers(1, 5, na)]
        wb = [int(x) for x in rng2.integers(1, 5, nb)]
        inc = IncidenceStructure(np.array(wa, float), np.array(wb, float), rel)
        m_a, m_b = inc.side_ratios()
        s = Fraction(1, int(np.ceil(m_a * m_b)) + 1)
        sub = [int(np.argmin(wa))]
        if Fraction(wa[sub[0]]) > s * sum(wa):
            continue
        measured, bound = pingpong_bound_check_exact(wa, wb, rel, sub, s, Fraction(1, 2))
        if measured > bound:
            exact_bad += 1
    ok = mixing_bad == 0 and triangle_bad == 0 and pingpong_bad == 0 and exact_bad == 0
    _report(
        "criterion 10: lemma suites (mixing/triangle/ping-pong)",
        ok,
        f"bad = {mixing_bad}/{triangle_bad}/{pingpong_bad}, exact = {exact_bad}",
    )


def test_criterion_11_pipeline(sol):
    t0 = time.perf_counter()
    omega = [[-32.0, 32.0]]  # side 64
    rep_id = good_box_experiment(sol, PhiSpec(kind="identity"), omega, seed=1)
    ok_id = (
        len(rep_id.good_tiles) == len(rep_id.tile_stats)
        and rep_id.theta == 0.0
        and all(e <= 1e-12 for e in rep_id.fit_errors.values())
    )
    phi_std = PhiSpec(
        kind="standard",
        params={"a_offset": [1.5], "fiber_scale": [2.0, 0.5], "noise": 5.0},
        seed=3,
    )
    rep_std = good_box_experiment(sol, phi_std, omega, seed=1)
    frac_std = len(rep_std.good_tiles) / max(len(rep_std.tile_stats), 1)
    ok_std = frac_std >= 0.9 and all(e <= 0.1 for e in rep_std.fit_errors.values())
    phi_bad = PhiSpec(kind="shear", params={"rate": 4.0, "amp": 1.0, "root": 0}, seed=3)
    rep_bad = good_box_experiment(sol, phi_bad, omega, seed=1)
    frac_bad = len(rep_bad.good_tiles) / max(len(rep_bad.tile_stats), 1)
    ok_bad = frac_bad <= 0.5
    elapsed = time.perf_counter() - t0
    _report(
        "criterion 11: good-box pipeline end to end",
        ok_id and ok_std and ok_bad and elapsed < 60.0,
        f"identity {len(rep_id.good_tiles)}/{len(rep_id.tile_stats)}, "
        f"standard {frac_std:.2f}, shear {frac_bad:.2f}, {elapsed:.1f}s",
    )
