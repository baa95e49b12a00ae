"""Certified two-sided bounds and crystalline representations of the tension.

Both bounds are crystalline densities nu |-> sum_j w_j |<nu, u_j>| over the
interaction directions:

- averaging (upper): replace every coupling by the directional mean
  a_xi = alpha_xi + (beta_xi - alpha_xi) theta_xi. A flat interface through
  the averaged medium costs sum_xi a_xi |<nu, xi>| per unit section, and the
  true minimum never exceeds a fixed competitor's cost in expectation over
  translations, so phi <= averaging density pointwise.

- projection (lower): along each direction xi the lattice splits into
  xi-lines {i + k xi}. Every spin path from the -1 to the +1 pinned phase
  breaks at least one pair on each line it crosses, and a line costs at
  least its cheapest coupling. Per unit interface section normal to nu,
  |<nu, xi>| distinct xi-lines cross, giving
  phi >= sum_xi p_xi |<nu, xi>| with p_xi the mean over lines of the line
  minimum. For two-valued fields p_xi = alpha_xi + (beta_xi - alpha_xi) q_xi
  where q_xi is the fraction of lines that are purely strong - an exact
  rational.

The other half of the module turns direction samples into certified convex
objects: `membership_test` asks (by linear programming) whether a sampled
tension fits under any averaging density with a prescribed mean volume
fraction; `crystalline_approx` fits a best uniform crystalline density over
a chosen direction dictionary; `support_envelope` intersects the slabs
|<u_k, y>| <= v_k and returns the support function of the resulting
symmetric polytope - in two dimensions decomposed into a crystalline density
via the polygon's edge vectors (every centrally symmetric polygon is a
zonogon), in three as a vertex-maximum callable.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from .errors import PreconditionError, UnsupportedFieldError, ValidationError
from .lattice import (
    InteractionSet,
    Label,
    PeriodicBondField,
    volume_fractions,
)

__all__ = [
    "CrystallineDensity",
    "SupportDensity",
    "AveragingBound",
    "ProjectionBound",
    "MembershipResult",
    "averaging_bound",
    "projection_bound",
    "membership_test",
    "crystalline_approx",
    "support_envelope",
]


@dataclass(frozen=True)
class CrystallineDensity:
    """One-homogeneous even density nu |-> sum_j w_j |<nu, u_j>|."""

    weights: tuple[float, ...]
    vectors: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.vectors):
            raise ValidationError("one weight per vector required")
        if any(w < 0 for w in self.weights):
            raise ValidationError("crystalline weights must be >= 0")
        object.__setattr__(
            self, "weights", tuple(float(w) for w in self.weights)
        )
        object.__setattr__(
            self,
            "vectors",
            tuple(tuple(float(c) for c in v) for v in self.vectors),
        )

    def __call__(self, nu: Sequence[float]) -> float:
        v = np.asarray(nu, dtype=np.float64)
        mat = np.array(self.vectors)
        return float(np.abs(mat @ v) @ np.array(self.weights))


@dataclass(frozen=True)
class SupportDensity:
    """Support function of a polytope given by its vertices (d = 3 envelopes)."""

    vertices: tuple[tuple[float, ...], ...]

    def __call__(self, nu: Sequence[float]) -> float:
        v = np.asarray(nu, dtype=np.float64)
        return float((np.array(self.vertices) @ v).max())


@dataclass(frozen=True)
class AveragingBound:
    """Upper bound: averaged couplings, with exact per-direction weights."""

    density: CrystallineDensity
    exact_weights: tuple[Fraction, ...]

    def __call__(self, nu: Sequence[float]) -> float:
        return self.density(nu)


@dataclass(frozen=True)
class ProjectionBound:
    """Lower bound: per-line minima, with exact per-direction weights.

    pure_line_fractions[j] is the exact fraction of direction-j lines whose
    couplings are all strong.
    """

    density: CrystallineDensity
    exact_weights: tuple[Fraction, ...]
    pure_line_fractions: tuple[Fraction, ...]

    def __call__(self, nu: Sequence[float]) -> float:
        return self.density(nu)


def averaging_bound(field: PeriodicBondField) -> AveragingBound:
    """Upper crystalline bound from exact volume fractions."""
    if not field.is_periodic:
        raise UnsupportedFieldError("bounds are defined for periodic fields")
    inter = field.interactions
    theta = volume_fractions(field).per_direction
    exact = tuple(
        Fraction(a) + (Fraction(b) - Fraction(a)) * t
        for a, b, t in zip(inter.alpha, inter.beta, theta)
    )
    density = CrystallineDensity(
        tuple(float(w) for w in exact), inter.directions
    )
    return AveragingBound(density, exact)


def _pure_line_fraction(field: PeriodicBondField, j: int) -> Fraction:
    """Exact fraction of direction-j lines consisting of strong bonds only."""
    inter = field.interactions
    xi = inter.directions[j]
    strong = field.labels[j] == int(Label.BETA)
    acc = strong.copy()
    rolled = strong
    for _ in range(1, field.period):
        rolled = np.roll(rolled, tuple(-c for c in xi),
                         axis=tuple(range(inter.dim)))
        acc &= rolled
    # acc[i] == line through i is purely strong; each line holds equally
    # many sites, so the site fraction equals the line fraction
    return Fraction(int(acc.sum()), field.period ** inter.dim)


def projection_bound(field: PeriodicBondField) -> ProjectionBound:
    """Lower crystalline bound from exact per-line minima."""
    if not field.is_periodic:
        raise UnsupportedFieldError("bounds are defined for periodic fields")
    inter = field.interactions
    fractions = tuple(
        _pure_line_fraction(field, j) for j in range(inter.count)
    )
    exact = tuple(
        Fraction(a) + (Fraction(b) - Fraction(a)) * q
        for a, b, q in zip(inter.alpha, inter.beta, fractions)
    )
    density = CrystallineDensity(
        tuple(float(w) for w in exact), inter.directions
    )
    return ProjectionBound(density, exact, fractions)


# ---------------------------------------------------------------------------
# membership: can a sampled tension sit under an averaging density with a
# prescribed mean volume fraction?
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipResult:
    """LP certificate for the averaging-bound membership question."""

    feasible: bool
    fractions: tuple[float, ...] | None  # per-direction, mean == target
    minimal_average: float | None        # smallest achievable mean fraction
    target_average: float


def membership_test(
    interactions: InteractionSet,
    target_average: float,
    samples: Sequence[tuple[Sequence[float], float]],
    tol: float = 1e-9,
) -> MembershipResult:
    """Test whether per-direction fractions t in [0,1] with mean(t) ==
    target_average exist whose averaging density dominates every sample.

    Each sample is (direction vector, required value at that vector); both
    sides are one-homogeneous, so samples need not be unit vectors. The LP
    minimizes the mean fraction subject to domination; feasibility holds iff
    that minimum is <= target_average (raising fractions keeps domination).
    The reported fractions are padded, largest direction first, to hit the
    target mean exactly.
    """
    t_target = float(target_average)
    if not (0.0 <= t_target <= 1.0):
        raise ValidationError("target average fraction must lie in [0, 1]")
    if len(samples) == 0:
        raise ValidationError("membership needs at least one sample")
    m = interactions.count
    dirs = interactions.direction_array().astype(np.float64)
    alpha = np.array(interactions.alpha)
    beta = np.array(interactions.beta)
    rows = []
    rhs = []
    for nu, value in samples:
        v = np.asarray(nu, dtype=np.float64)
        if v.shape != (interactions.dim,):
            raise ValidationError("sample direction has wrong dimension")
        proj = np.abs(dirs @ v)
        # sum_j (beta-alpha)_j proj_j t_j >= value - sum_j alpha_j proj_j
        rows.append(-(beta - alpha) * proj)
        rhs.append(-(float(value) - float(alpha @ proj)))
    res = linprog(
        c=np.ones(m),
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        bounds=[(0.0, 1.0)] * m,
        method="highs",
    )
    if not res.success:
        return MembershipResult(False, None, None, t_target)
    minimal_avg = float(res.x.sum() / m)
    if minimal_avg > t_target + tol:
        return MembershipResult(False, None, minimal_avg, t_target)
    # pad up to the exact target mean without breaking the box constraints
    t = np.minimum(1.0, np.maximum(0.0, res.x.copy()))
    deficit = t_target * m - float(t.sum())
    for j in range(m):
        if deficit <= 0:
            break
        room = 1.0 - t[j]
        add = min(room, deficit)
        t[j] += add
        deficit -= add
    return MembershipResult(True, tuple(float(x) for x in t),
                            minimal_avg, t_target)


# ---------------------------------------------------------------------------
# best uniform crystalline approximation over a direction dictionary
# ---------------------------------------------------------------------------


def crystalline_approx(
    samples: Sequence[tuple[Sequence[float], float]],
    vectors: Sequence[Sequence[float]],
) -> tuple[CrystallineDensity, float]:
    """Weights w >= 0 over `vectors` minimizing the sup deviation on samples.

    Returns the fitted density and the optimal uniform gap
    max_i |sum_j w_j |<nu_i, u_j>| - value_i|.
    """
    if len(samples) == 0:
        raise ValidationError("approximation needs at least one sample")
    if len(vectors) == 0:
        raise ValidationError("approximation needs at least one vector")
    mat = np.array([[abs(float(np.dot(nu, u))) for u in vectors]
                    for nu, _ in samples])
    vals = np.array([float(v) for _, v in samples])
    n, m = mat.shape
    # variables: w_1..w_m, s; minimize s
    c = np.zeros(m + 1)
    c[m] = 1.0
    a_ub = np.vstack([
        np.hstack([mat, -np.ones((n, 1))]),
        np.hstack([-mat, -np.ones((n, 1))]),
    ])
    b_ub = np.concatenate([vals, -vals])
    res = linprog(
        c=c, A_ub=a_ub, b_ub=b_ub,
        bounds=[(0.0, None)] * m + [(0.0, None)],
        method="highs",
    )
    if not res.success:
        raise PreconditionError(f"approximation LP failed: {res.message}")
    density = CrystallineDensity(
        tuple(float(w) for w in res.x[:m]),
        tuple(tuple(float(c_) for c_ in u) for u in vectors),
    )
    return density, float(res.x[m])


# ---------------------------------------------------------------------------
# support envelope of direction samples
# ---------------------------------------------------------------------------


def _symmetric_polytope_vertices(
    directions: Sequence[Sequence[float]], values: Sequence[float]
) -> np.ndarray:
    d = len(directions[0])
    rows = []
    for u, v in zip(directions, values):
        uv = np.asarray(u, dtype=np.float64)
        norm = float(np.linalg.norm(uv))
        if norm == 0.0:
            raise ValidationError("envelope directions must be nonzero")
        if float(v) <= 0.0:
            raise ValidationError("envelope values must be positive")
        rows.append(np.append(uv, -float(v)))
        rows.append(np.append(-uv, -float(v)))
    hs = HalfspaceIntersection(np.array(rows), np.zeros(d))
    verts = hs.intersections
    # dedupe up to solver noise
    key = np.round(verts / max(1e-12, np.abs(verts).max()) * 1e9)
    _, idx = np.unique(key, axis=0, return_index=True)
    return verts[np.sort(idx)]


def support_envelope(
    directions: Sequence[Sequence[float]], values: Sequence[float]
) -> CrystallineDensity | SupportDensity:
    """Support function of P = {y : |<u_k, y>| <= v_k for all k}.

    This is the largest even convex one-homogeneous function h with
    h(u_k) <= v_k. In two dimensions P is a centrally symmetric polygon,
    hence a zonogon: with counterclockwise edge vectors E_1..E_2m,
    h(nu) = sum over one edge per +- pair of |<nu, E_j / 2>|, returned as a
    crystalline density. In three dimensions the vertex set is returned as
    a max-over-vertices callable.
    """
    if len(directions) != len(values):
        raise ValidationError("one value per direction required")
    d = len(directions[0])
    if d not in (2, 3):
        raise PreconditionError("support envelopes exist for d = 2 and 3")
    verts = _symmetric_polytope_vertices(directions, values)
    if d == 3:
        return SupportDensity(tuple(tuple(float(c) for c in v) for v in verts))
    order = np.argsort(np.arctan2(verts[:, 1], verts[:, 0]))
    verts = verts[order]
    edges = np.roll(verts, -1, axis=0) - verts
    # keep one edge per centrally symmetric pair: angle in [0, pi)
    keep = (edges[:, 1] > 1e-12) | (
        (np.abs(edges[:, 1]) <= 1e-12) & (edges[:, 0] > 0)
    )
    half = edges[keep] / 2.0
    return CrystallineDensity(
        (1.0,) * len(half), tuple(tuple(float(c) for c in e) for e in half)
    )
