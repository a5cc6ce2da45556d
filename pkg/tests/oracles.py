"""Brute-force reference implementations used to cross-check the library.

Everything here is written as plain loops straight from the definitions and
shares no code with the package: distances re-derive the two-case formula,
subdivision re-runs the first-crossing rule index by index, and the scale
fractions are recomputed segment by segment.
"""

import math

import numpy as np


def weight_dist_trivial(x1, h1, x2, h2):
    """Two-case distance with Q = 1 (U(d) = ln d), lower-clamped by |dh|."""
    d = abs(np.linalg.norm(np.atleast_1d(x1) - np.atleast_1d(x2)))
    dh = abs(h1 - h2)
    if d <= 1.0 or math.exp(-h1) * d <= 1.0 or math.exp(-h2) * d <= 1.0:
        return dh
    return max(dh, math.log(d) - (h1 + h2))


def embedded_dist(alphas, fibers1, t1, fibers2, t2):
    """Sum of per-root trivial-Q weight distances."""
    total = 0.0
    for i, a in enumerate(alphas):
        h1 = float(np.dot(a, t1))
        h2 = float(np.dot(a, t2))
        total += weight_dist_trivial(fibers1[i], h1, fibers2[i], h2)
    return total


def path_dist_fn(alphas, base, fibers):
    def d(i, j):
        return embedded_dist(
            alphas,
            [f[i] for f in fibers],
            base[i],
            [f[j] for f in fibers],
            base[j],
        )

    return d


def apath_dist_fn(points, weights=None):
    def d(i, j):
        diff = points[j] - points[i]
        if weights is None:
            return float(np.linalg.norm(diff))
        return float(np.sum(np.abs(weights @ diff)))

    return d


def subdivide_indices(dist, n, r, i0=0, i1=None):
    i1 = n - 1 if i1 is None else i1
    idx = [i0]
    i = i0
    while True:
        nxt = None
        for j in range(i + 1, i1 + 1):
            if dist(i, j) >= r:
                nxt = j
                break
        if nxt is None:
            break
        idx.append(nxt)
        i = nxt
    if idx[-1] != i1:
        idx.append(i1)
    return idx


def is_efficient(dist, n, eps, rtilde, i0=0, i1=None):
    i1 = n - 1 if i1 is None else i1
    gap = dist(i0, i1)
    if gap <= 0:
        return False
    idx = subdivide_indices(dist, n, rtilde * gap, i0, i1)
    total = sum(dist(a, b) for a, b in zip(idx[:-1], idx[1:]))
    return total <= (1.0 + eps) * gap


def efficiency_deltas(dist, n, eps, l_stop, gap, max_levels=64):
    """Nested-ladder gap-weighted bad fractions, index 0 = whole path."""
    q = 0.5 * eps**0.25
    ladder = []
    r = q * gap
    while r > l_stop and len(ladder) < max_levels:
        ladder.append(r)
        r *= q
    ladder.append(max(l_stop, r))
    levels = [[0, n - 1]]
    for r in ladder:
        prev = levels[-1]
        nxt = [prev[0]]
        for a, b in zip(prev[:-1], prev[1:]):
            nxt.extend(subdivide_indices(dist, n, r, a, b)[1:])
        levels.append(nxt)
    deltas = []
    for idx in levels:
        gaps = [dist(a, b) for a, b in zip(idx[:-1], idx[1:])]
        bad = [
            0.0 if is_efficient(dist, n, eps, q, a, b) else g
            for (a, b), g in zip(zip(idx[:-1], idx[1:]), gaps)
        ]
        total = sum(gaps)
        deltas.append(sum(bad) / total if total > 0 else 0.0)
    return np.array(deltas), [gap] + ladder


def chord_projection(points):
    a, b = points[0], points[-1]
    u = (b - a) / np.linalg.norm(b - a)
    return (points - a) @ u


def delta_monotone(dist, base, delta, i0, i1, gap=None):
    """Bucketized revisit test, straight from the definition."""
    pts = base[i0 : i1 + 1]
    proj = chord_projection(pts)
    steps = np.abs(np.diff(proj))
    w = steps.max() if steps.size else 0.0
    gap = dist(i0, i1) if gap is None else gap
    if w <= 0:
        groups = {0: list(range(len(proj)))}
    else:
        groups = {}
        for k, p in enumerate(proj):
            groups.setdefault(int((p - proj.min()) // w), []).append(k)
    for g in groups.values():
        for a in range(len(g)):
            for b in range(a + 1, len(g)):
                if dist(i0 + g[a], i0 + g[b]) > delta * gap:
                    return False
    return True


def monotone_fractions(dist, apath_dist, base, n, delta, eps, l_values):
    """(flat_k, natural_k) per ladder level, from the definitions."""
    q = 0.5 * eps**0.25
    levels = []
    prev = [0, n - 1]
    for L in l_values:
        nxt = [prev[0]]
        for a, b in zip(prev[:-1], prev[1:]):
            nxt.extend(subdivide_indices(dist, n, L, a, b)[1:])
        levels.append(nxt)
        prev = nxt
    stats = []
    for idx in levels:
        segs = list(zip(idx[:-1], idx[1:]))
        eff, mono, chords = [], [], []
        for a, b in segs:
            g = apath_dist(a, b)
            ok = g > 0 and is_efficient(apath_dist, n, math.sqrt(eps), q, a, b)
            eff.append(ok)
            mono.append(ok and delta_monotone(dist, base, delta, a, b))
            chords.append(base[b] - base[a])
        stats.append((segs, eff, mono, chords))
    flats, naturals = [], []
    for k, (segs, eff, mono, chords) in enumerate(stats):
        n_eff = sum(eff)
        n_bad = sum(1 for e, m in zip(eff, mono) if e and not m)
        flats.append(n_bad / n_eff if n_eff else 0.0)
        if k == 0:
            naturals.append(0.0)
            continue
        psegs, peff, pmono, pchords = stats[k - 1]
        wrong = 0
        for j, (a, b) in enumerate(segs):
            if not (eff[j] and mono[j]):
                continue
            pj = max(i for i, (pa, _) in enumerate(psegs) if pa <= a)
            if not (peff[pj] and pmono[pj]):
                continue
            if float(np.dot(chords[j], pchords[pj])) < 0:
                wrong += 1
        naturals.append(wrong / n_eff if n_eff else 0.0)
    return np.array(flats), np.array(naturals)
