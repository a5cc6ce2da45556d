"""Stand-alone combinatorial and Euclidean lemmas as verifiable utilities:
ping-pong averaging over weighted incidence structures, mediant dominance,
thin-triangle height bounds, and greedy spread-point selection on direction
sets.

These are proved statements; the checkers recompute both sides so that any
counterexample flags an implementation bug, not a mathematical one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import PreconditionError, ValidationError


@dataclass(frozen=True)
class IncidenceStructure:
    """Two weighted finite sets with a symmetric relation between them."""

    weights_a: np.ndarray
    weights_b: np.ndarray
    relation: np.ndarray  # boolean (|A|, |B|)

    def __post_init__(self):
        wa = np.asarray(self.weights_a, dtype=float)
        wb = np.asarray(self.weights_b, dtype=float)
        rel = np.asarray(self.relation, dtype=bool)
        if np.any(wa < 0) or np.any(wb < 0):
            raise ValidationError("weights must be nonnegative")
        if rel.shape != (wa.size, wb.size):
            raise ValidationError("relation shape must be (|A|, |B|)")
        object.__setattr__(self, "weights_a", wa)
        object.__setattr__(self, "weights_b", wb)
        object.__setattr__(self, "relation", rel)

    def side_ratios(self):
        """M_A = max/min over a of mu_b(B_a); M_B likewise over b."""
        mb_of_a = self.relation @ self.weights_b
        ma_of_b = self.relation.T @ self.weights_a
        if np.any(mb_of_a <= 0) or np.any(ma_of_b <= 0):
            raise PreconditionError(
                "every element related to positive weight",
                "some B_a or A_b has zero measure",
            )
        return float(mb_of_a.max() / mb_of_a.min()), float(ma_of_b.max() / ma_of_b.min())


@dataclass(frozen=True)
class PingPongResult:
    measured_fraction: float
    bound_fraction: float
    holds: bool
    m_a: float
    m_b: float


def pingpong_bound_check(inc: IncidenceStructure, a_sub, s, t) -> PingPongResult:
    """Enumerate B^{s,t} = {b : mu(A_b cap A_s) >= t mu(A_b)} and check the bound.

    Requires s <= 1/(M_A M_B), t in (0, 1], and mu(a_sub) <= s mu(A).  The
    asserted bound is mu(B^{s,t}) <= (s/t) M_A M_B mu(B), reported as
    fractions of mu(B).
    """
    m_a, m_b = inc.side_ratios()
    if not 0 < t <= 1:
        raise PreconditionError("t in (0, 1]", f"t = {t}")
    if not s <= 1.0 / (m_a * m_b) + 1e-12:
        raise PreconditionError("s <= 1/(M_A M_B)", f"s = {s}, M_A M_B = {m_a * m_b}")
    mask = np.zeros(inc.weights_a.size, dtype=bool)
    mask[np.asarray(a_sub, dtype=int)] = True
    mu_a = float(inc.weights_a.sum())
    mu_sub = float(inc.weights_a[mask].sum())
    if not mu_sub <= s * mu_a + 1e-12:
        raise PreconditionError("mu(A_s) <= s mu(A)", f"mu(A_s) = {mu_sub}, s mu(A) = {s * mu_a}")
    ma_of_b = inc.relation.T @ inc.weights_a
    hit = inc.relation.T @ (inc.weights_a * mask)
    selected = hit >= t * ma_of_b - 1e-12
    mu_b = float(inc.weights_b.sum())
    measured = float(inc.weights_b[selected].sum()) / mu_b if mu_b > 0 else 0.0
    bound = (s / t) * m_a * m_b
    return PingPongResult(
        measured_fraction=measured,
        bound_fraction=float(bound),
        holds=bool(measured <= bound + 1e-12),
        m_a=m_a,
        m_b=m_b,
    )


def pingpong_bound_check_exact(weights_a, weights_b, relation, a_sub, s: Fraction, t: Fraction):
    """Integer/rational-weight variant evaluated in exact arithmetic.

    Returns (measured mu(B^{s,t}), bound (s/t) M_A M_B mu(B)) as Fractions.
    """
    wa = [Fraction(w) for w in weights_a]
    wb = [Fraction(w) for w in weights_b]
    rel = np.asarray(relation, dtype=bool)
    mb_of_a = [sum(wb[j] for j in range(len(wb)) if rel[i, j]) for i in range(len(wa))]
    ma_of_b = [sum(wa[i] for i in range(len(wa)) if rel[i, j]) for j in range(len(wb))]
    m_a = max(mb_of_a) / min(mb_of_a)
    m_b = max(ma_of_b) / min(ma_of_b)
    sub = set(int(i) for i in a_sub)
    measured = Fraction(0)
    for j in range(len(wb)):
        hit = sum(wa[i] for i in range(len(wa)) if rel[i, j] and i in sub)
        if hit >= t * ma_of_b[j]:
            measured += wb[j]
    bound = (s / t) * m_a * m_b * sum(wb)
    return measured, bound


@dataclass(frozen=True)
class MediantResult:
    c_alpha: float
    c_beta: float
    determined: bool
    implies_dominance: bool  # c_alpha >= c_beta
    dominance_holds: bool  # A >= B


def mediant_dominance(a, b, A, B) -> MediantResult:
    """Solve (a+b)/(A+B) = c_a (a/A) + c_b (b/B) with c_a + c_b = 1.

    Whenever c_a >= c_b the lemma asserts A >= B.  The degenerate case
    a/A = b/B leaves the coefficients undetermined and the dominance vacuous.
    """
    if A <= 0 or B <= 0:
        raise PreconditionError("A, B > 0", f"A = {A}, B = {B}")
    if a < 0 or b < 0:
        raise PreconditionError("a, b >= 0", f"a = {a}, b = {b}")
    ra, rb = a / A, b / B
    mediant = (a + b) / (A + B)
    if ra == rb:
        return MediantResult(
            c_alpha=0.5, c_beta=0.5, determined=False, implies_dominance=False,
            dominance_holds=A >= B,
        )
    c_alpha = (mediant - rb) / (ra - rb)
    c_beta = 1.0 - c_alpha
    implies = c_alpha >= c_beta
    return MediantResult(
        c_alpha=float(c_alpha),
        c_beta=float(c_beta),
        determined=True,
        implies_dominance=bool(implies),
        dominance_holds=bool((not implies) or A >= B),
    )


@dataclass(frozen=True)
class ThinTriangleResult:
    epsilon: float
    height: float
    bound: float
    holds: bool


def thin_triangle_check(a, b, c) -> ThinTriangleResult:
    """Height of the apex over the long side against 1.5 eps^(1/4) c.

    eps = (a+b)/c - 1, admitted for eps <= 0.5; sides must satisfy the
    triangle inequality.
    """
    if min(a, b, c) < 0 or a + b < c - 1e-15 or a + c < b or b + c < a:
        raise PreconditionError("triangle inequality", f"sides = ({a}, {b}, {c})")
    eps = (a + b) / c - 1.0
    if eps > 0.5 + 1e-12:
        raise PreconditionError("(a+b)/c <= 1.5", f"eps = {eps}")
    s = 0.5 * (a + b + c)
    area_sq = max(s * (s - a) * (s - b) * (s - c), 0.0)
    height = 2.0 * np.sqrt(area_sq) / c
    bound = 1.5 * max(eps, 0.0) ** 0.25 * c
    return ThinTriangleResult(
        epsilon=float(eps), height=float(height), bound=float(bound),
        holds=bool(height <= bound + 1e-12),
    )


@dataclass(frozen=True)
class SpreadResult:
    points: np.ndarray  # (k+1, k+1) selected unit vectors
    indices: np.ndarray
    min_distance: float
    m_k: float
    shortfall: float  # W(upsilon) = max(0, M_k - achieved)


def _antipodal_dist(x, y):
    return np.minimum(
        np.linalg.norm(x - y, axis=-1), np.linalg.norm(x + y, axis=-1)
    )


def spread_points(directions, weights=None, upsilon=0.0) -> SpreadResult:
    """Greedy farthest-point selection of k+1 directions in R^(k+1).

    Directions are unit vectors identified with their antipodes (they stand
    for hyperplanes via their normals); the reference value M_k = sqrt(2) is
    the common pairwise distance of the coordinate-hyperplane normals.  The
    admissible set is the input itself; its weight is assumed to be at least
    (1 - upsilon) of the ambient measure.
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(norms <= 0):
        raise ValidationError("zero direction vector")
    dirs = dirs / norms[:, None]
    k_plus_1 = dirs.shape[1]
    if dirs.shape[0] < k_plus_1:
        raise PreconditionError(
            "enough admissible directions", f"need {k_plus_1}, got {dirs.shape[0]}"
        )
    w = np.ones(dirs.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    m_k = float(np.sqrt(2.0))
    # Start from the heaviest direction, then maximize the minimum distance.
    chosen = [int(np.argmax(w))]
    while len(chosen) < k_plus_1:
        dmin = np.full(dirs.shape[0], np.inf)
        for c in chosen:
            dmin = np.minimum(dmin, _antipodal_dist(dirs, dirs[c][None, :]))
        dmin[chosen] = -np.inf
        chosen.append(int(np.argmax(dmin)))
    pts = dirs[chosen]
    dm = np.inf
    for i in range(len(chosen)):
        for j in range(i + 1, len(chosen)):
            dm = min(dm, float(_antipodal_dist(pts[i], pts[j])))
    if k_plus_1 == 1:
        dm = m_k  # single point, vacuous
    return SpreadResult(
        points=pts,
        indices=np.array(chosen, dtype=int),
        min_distance=float(dm),
        m_k=m_k,
        shortfall=float(max(0.0, m_k - dm)),
    )
