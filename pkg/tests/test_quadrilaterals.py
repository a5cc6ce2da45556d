import numpy as np
import pytest

from coarsegeo.errors import PreconditionError, ValidationError
from coarsegeo.groups import point
from coarsegeo.quadrilaterals import (
    Quadrilateral,
    build_commutator_quadrilateral,
    check_quadrilateral,
    orientation_pattern,
    quadrilateral_from_json,
    rank1_distance,
    snap_to_quadrilateral,
    structure_report,
    word_residual,
)


def make_trivial_word(sol, rng, r_lo=2.0, r_hi=12.0):
    """Dyadic r's with |r_i - r_{i+1}| <= ~0.7 and unit-plus fiber sizes,
    solving the closure condition exactly."""
    r0 = int(rng.integers(int(r_lo * 16), int(r_hi * 16))) / 16.0
    shift = lambda: int(rng.integers(-11, 12)) / 16.0  # |shift| <= 0.6875
    r1 = r0 + shift()
    r2 = r1 + shift()
    r3 = (r0 + r2) - r1
    if min(r0, r1, r2, r3) <= 1.0:
        return None
    u0 = float(rng.uniform(2.1, 5.0)) * rng.choice([-1.0, 1.0])
    u1 = float(rng.uniform(2.1, 5.0)) * rng.choice([-1.0, 1.0])
    u2 = -np.exp(r1 - r2) * u0  # + root closure (alpha = +1)
    u3 = -np.exp(-(r0 - r1)) * u1  # - root closure (alpha(v) = -1)
    return [r0, r1, r2, r3], [u0, u1, u2, u3]


def test_commutator_passes_at_eta_zero(sol):
    q = build_commutator_quadrilateral(sol, 1.0, 1.0, 3.0)
    assert np.allclose(q.edge_lengths(), 6.0)  # 4 edges of height 2t
    v = check_quadrilateral(q, 0.0)
    assert v.passed
    assert np.allclose(v.joint_gaps, 0.0)
    assert np.allclose(v.divergences, 12.0)


def test_commutator_degenerate_inputs(sol):
    with pytest.raises(PreconditionError, match="t > 0"):
        build_commutator_quadrilateral(sol, 1.0, 1.0, 0.0)
    with pytest.raises(PreconditionError, match="x_tilde != 0"):
        build_commutator_quadrilateral(sol, 0.0, 1.0, 2.0)


def test_commutator_scaling(sol):
    q1 = build_commutator_quadrilateral(sol, 1.0, 1.0, 3.0)
    q2 = build_commutator_quadrilateral(sol, 0.5, 1.0, 3.0)
    # Same A-heights, scaled fiber offsets.
    assert np.allclose(q2.edge_lengths(), q1.edge_lengths())
    b1 = q1.edges[1][0].x[0][0]
    b2 = q2.edges[1][0].x[0][0]
    assert b2 == pytest.approx(0.5 * b1)


def test_orientation_pattern(sol):
    q = build_commutator_quadrilateral(sol, 1.0, 1.0, 3.0)
    signs, conformant = orientation_pattern(q)
    assert signs == (1, -1, 1, -1)
    assert conformant
    # Rotated labeling keeps the pattern conformant.
    rolled = Quadrilateral(group=sol, edges=q.edges[1:] + q.edges[:1], v=q.v)
    signs2, conf2 = orientation_pattern(rolled)
    assert conf2 and signs2 == (-1, 1, -1, 1)
    # Forbidden same-sign neighbors are flagged.
    e0, e1, e2, e3 = q.edges
    flipped = Quadrilateral(group=sol, edges=(e0, (e1[1], e1[0]), e2, e3), v=q.v)
    _, conf3 = orientation_pattern(flipped)
    assert not conf3


def test_word_residual_trivial_and_perturbed(sol):
    res = word_residual(sol, [6.0, 6.0, 6.0, 6.0], [1.0, 1.0, -1.0, -1.0])
    assert res.residual == 0.0
    assert res.closes and res.spread_ok
    assert res.r_sum_difference == 0.0
    bad = word_residual(sol, [6.0, 6.0, 6.0, 6.0], [1.0, 1.0, -1.0 + 1e-3, -1.0])
    assert bad.residual > 0.0 and not bad.closes


def test_word_residual_degenerate_loop(sol):
    res = word_residual(sol, [4.0, 4.0, 4.0, 4.0], [0.0, 0.0, 0.0, 0.0])
    assert res.residual == 0.0
    assert np.all(res.spread_values == 0.0)


def test_word_membership_enforced(sol):
    with pytest.raises(PreconditionError, match="W"):
        word_residual(
            sol,
            [4.0, 4.0, 4.0, 4.0],
            [
                [np.array([1.0]), np.array([1.0])],  # support on both sides
                [np.array([0.0]), np.array([1.0])],
                [np.array([1.0]), np.array([0.0])],
                [np.array([0.0]), np.array([1.0])],
            ],
        )


def test_randomized_trivial_words(sol, rng):
    n_ok = 0
    while n_ok < 100:
        made = make_trivial_word(sol, rng)
        if made is None:
            continue
        rs_vals, us = made
        res = word_residual(sol, rs_vals, us)
        assert res.residual <= 1e-9
        assert res.r_sum_difference == 0.0  # exact dyadic arithmetic
        assert res.spread_ok
        n_ok += 1


def test_structure_report_commutator(sol):
    q = build_commutator_quadrilateral(sol, 1.0, 1.0, 3.0)
    sr = structure_report(q, 0.0)
    assert sr.length_spread == 0.0
    assert sr.coset_ok
    assert sr.alternating
    assert sr.coset_classes in (("+", "-", "+", "-"), ("-", "+", "-", "+"))


def test_structure_report_perturbed_joints(sol, rng):
    # eta-perturbed joints: spread and coset proximity within eta * sum |T|.
    t = 4.0
    eta = 0.05
    q0 = build_commutator_quadrilateral(sol, 1.0, 1.0, t)
    total = float(np.sum(q0.edge_lengths()))
    edges = []
    for k, (b, e) in enumerate(q0.edges):
        wig = (rng.uniform(-1, 1) * eta * 2 * t) / 4
        e2 = point(sol, [np.array(x) for x in e.x], e.t + np.array([wig]))
        edges.append((b, e2))
    q = Quadrilateral(group=sol, edges=tuple(edges), v=q0.v)
    sr = structure_report(q, eta)
    assert sr.length_spread <= eta * total + 1e-9
    assert sr.length_spread_ok


def test_structure_report_flags_bad_lengths(sol):
    q0 = build_commutator_quadrilateral(sol, 1.0, 1.0, 3.0)
    b, e = q0.edges[0]
    stretched = point(sol, [np.array(x) for x in e.x], e.t + np.array([4.0]))
    q = Quadrilateral(group=sol, edges=((b, stretched),) + q0.edges[1:], v=q0.v)
    sr = structure_report(q, 0.01)
    assert not sr.length_spread_ok


def test_snap_to_quadrilateral(sol):
    q0 = build_commutator_quadrilateral(sol, 1.0, 1.0, 3.0)
    segs = []
    for k, (b, e) in enumerate(q0.edges):
        segs.append((b, e))
    quad, eta_hat = snap_to_quadrilateral(sol, segs)
    assert eta_hat <= 1e-9
    assert check_quadrilateral(quad, 0.0).passed


def test_quadrilateral_json_roundtrip(sol):
    q = build_commutator_quadrilateral(sol, 1.0, 1.0, 3.0)
    q2 = quadrilateral_from_json(sol, q.to_json())
    assert np.allclose(q2.edge_lengths(), q.edge_lengths())
    assert check_quadrilateral(q2, 0.0).passed


def test_rank1_distance_height_only(sol):
    p1 = point(sol, [[0.0], [0.0]], [0.0])
    p2 = point(sol, [[0.0], [0.0]], [5.0])
    assert rank1_distance(sol, p1, p2, np.array([1.0])) == pytest.approx(5.0)
