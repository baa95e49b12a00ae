"""Periodic microgeometries whose tension matches a crystalline target.

Target: psi(nu) = sum_xi c_xi |<nu, xi>| with c_xi = t_xi beta + (1-t_xi)
alpha, realized at volume fractions theta_xi >= t_xi. Construction, per
direction xi (primitive):

- The period cell splits into T^(d-1) xi-lines (orbits of i -> i + xi on the
  torus), each with T sites.
- A fraction t_xi of the lines - the lexicographically last ones - become
  fully strong: they force the projection bound's pure-line fraction, hence
  the lower bound phi >= psi.
- The remaining "weak" lines keep alpha at every designated site: a site is
  designated for an interaction direction v when the T-periodic family of
  hyperplanes normal to v (spacing T gcd(v) in <., v> units) crosses the
  bond leaving it. A planar competitor interface normal to any v in V then
  pays alpha on every weak line it crosses and beta on the strong ones,
  which keeps the tension at most psi. Exact integer crossing test for a
  site at height h = <i, w> (w the primitive vector of v, s = <xi, w>,
  g = T): crossing iff some multiple of g lies in [h, h+s) for s > 0, or in
  (h+s, h] for s < 0.
- Whatever weak-line sites remain undesignated absorb strong filler bonds,
  placed in lexicographic site order, until exactly theta_xi T^d strong
  bonds exist. Feasible iff #designated <= (1 - theta_xi) T^d - the count
  form of the capacity condition, checked exactly.

choose_period searches the smallest period making all counts integral and
the capacity condition pass. All selections are lexicographic, so identical
targets produce bit-identical fields.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .bounds import CrystallineDensity, projection_bound
from .errors import (
    InvalidBasisError,
    InvalidTargetError,
    PeriodSearchError,
    PreconditionError,
)
from .lattice import (
    InteractionSet,
    Label,
    PeriodicBondField,
    volume_fractions,
)
from .tension import Schedule, TensionEstimate, estimate_phi

__all__ = [
    "DesignTarget",
    "DirectionAudit",
    "DesignResult",
    "DesignReport",
    "count_C",
    "orthogonal_basis",
    "choose_period",
    "design_microstructure",
    "verify_design",
    "psi_density",
]


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)  # exact binary value of the float
    return Fraction(x)


@dataclass(frozen=True)
class DesignTarget:
    """Per-direction coefficient fractions t and volume fractions theta.

    The realized tension coefficient is c_xi = t_xi beta_xi + (1-t_xi)
    alpha_xi; the field's strong-bond fraction per direction is theta_xi.
    Requires 0 < t_xi <= theta_xi < 1 (rationals).
    """

    coefficient_fractions: tuple[Fraction, ...]
    volume_fractions: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        t = tuple(_as_fraction(x) for x in self.coefficient_fractions)
        th = tuple(_as_fraction(x) for x in self.volume_fractions)
        if len(t) != len(th):
            raise InvalidTargetError(
                "coefficient and volume fraction tuples must align"
            )
        for a, b in zip(t, th):
            if not (0 < a < 1) or not (0 < b < 1):
                raise InvalidTargetError(
                    "fractions must lie strictly between 0 and 1"
                )
            if a > b:
                raise InvalidTargetError(
                    f"coefficient fraction {a} exceeds volume fraction {b}"
                )
        object.__setattr__(self, "coefficient_fractions", t)
        object.__setattr__(self, "volume_fractions", th)

    @staticmethod
    def uniform(count: int, t, theta=None) -> "DesignTarget":
        tf = _as_fraction(t)
        th = tf if theta is None else _as_fraction(theta)
        return DesignTarget((tf,) * count, (th,) * count)

    @property
    def average_fraction(self) -> Fraction:
        return Fraction(sum(self.volume_fractions),
                        len(self.volume_fractions))


def psi_density(
    interactions: InteractionSet, target: DesignTarget
) -> CrystallineDensity:
    """The crystalline density the design realizes."""
    _check_alignment(interactions, target)
    weights = tuple(
        float(Fraction(a) + (Fraction(b) - Fraction(a)) * t)
        for a, b, t in zip(interactions.alpha, interactions.beta,
                           target.coefficient_fractions)
    )
    return CrystallineDensity(weights, interactions.directions)


def psi_exact_weights(
    interactions: InteractionSet, target: DesignTarget
) -> tuple[Fraction, ...]:
    return tuple(
        Fraction(a) + (Fraction(b) - Fraction(a)) * t
        for a, b, t in zip(interactions.alpha, interactions.beta,
                           target.coefficient_fractions)
    )


def _check_alignment(
    interactions: InteractionSet, target: DesignTarget
) -> None:
    if len(target.coefficient_fractions) != interactions.count:
        raise InvalidTargetError(
            "target needs one fraction pair per interaction direction"
        )
    for xi in interactions.directions:
        arr = np.asarray(xi, dtype=np.int64)
        if np.abs(_primitive(arr) - arr).max() != 0:
            raise InvalidTargetError(
                f"designs need primitive directions; {tuple(xi)} is not"
            )


def _primitive(v: Sequence[int]) -> np.ndarray:
    arr = np.asarray(v, dtype=np.int64)
    g = math.gcd(*(int(abs(c)) for c in arr))
    if g == 0:
        raise PreconditionError("zero vector has no direction")
    return arr // g


def orthogonal_basis(xi: Sequence[int], entry_cap: int = 16) -> tuple[
    tuple[int, ...], ...
]:
    """Orthogonal integer basis of Z^d whose last vector is xi (d = 2, 3).

    Transverse vectors are chosen with minimal sup-norm (lexicographic tie
    break); entries beyond entry_cap abort with an error. Recorded in design
    audits; line enumeration itself works directly on torus orbits.
    """
    v = np.asarray(xi, dtype=np.int64)
    d = len(v)
    if d == 2:
        perp = np.array([-v[1], v[0]])
        if np.abs(perp).max() > entry_cap:
            raise InvalidBasisError("transverse vector exceeds the entry cap")
        return (tuple(int(c) for c in perp), tuple(int(c) for c in v))
    if d != 3:
        raise InvalidBasisError("orthogonal bases implemented for d = 2, 3")
    best = None
    rng = range(-entry_cap, entry_cap + 1)
    for x in rng:
        for y in rng:
            for z in rng:
                u = np.array([x, y, z])
                if not u.any() or int(u @ v) != 0:
                    continue
                key = (int(np.abs(u).max()), int(u @ u), (x, y, z))
                if best is None or key < best[0]:
                    best = (key, u)
    if best is None:
        raise InvalidBasisError("no transverse integer vector within the cap")
    u = best[1]
    w = np.cross(v, u)
    g = math.gcd(*(int(abs(c)) for c in w))
    if g:
        w = w // g
    if np.abs(w).max() > entry_cap:
        raise InvalidBasisError("transverse vector exceeds the entry cap")
    return (
        tuple(int(c) for c in u),
        tuple(int(c) for c in w),
        tuple(int(c) for c in v),
    )


# ---------------------------------------------------------------------------
# lines and designated crossing sites
# ---------------------------------------------------------------------------


def _torus_lines(period: int, xi: np.ndarray, dim: int) -> list[np.ndarray]:
    """Orbits of i -> i + xi on the period torus, ordered by smallest member.

    For primitive xi every orbit has exactly `period` sites, giving
    period^(d-1) lines; reached sites are enumerated from each
    lexicographically smallest unvisited representative.
    """
    shape = (period,) * dim
    total = period ** dim
    visited = np.zeros(shape, dtype=bool)
    sites = np.indices(shape).reshape(dim, total).T  # lex order
    lines: list[np.ndarray] = []
    for s in sites:
        if visited[tuple(s)]:
            continue
        orbit = []
        p = s.copy()
        while not visited[tuple(p)]:
            visited[tuple(p)] = True
            orbit.append(p.copy())
            p = (p + xi) % period
        lines.append(np.array(orbit, dtype=np.int64))
    return lines


def _crossing_mask(
    orbit: np.ndarray, xi: np.ndarray, w: np.ndarray, period: int
) -> np.ndarray:
    """Sites of one line whose outgoing bond meets the periodic plane family.

    Planes: {<x, w> = m g}, g = period (w primitive). The bond from a site
    at height h spans (h, h + s]; it crosses iff a multiple of g lies in
    [h, h+s) when s > 0, or in (h+s, h] when s < 0 (exact integers; a plane
    through a site is charged to the bond on the side the plane family
    advances).
    """
    s = int(xi @ w)
    if s == 0:
        raise PreconditionError("crossing count undefined for <v, xi> = 0")
    g = period
    h = orbit @ w
    if s > 0:
        ceil_mult = -((-h) // g) * g  # smallest multiple of g >= h
        return ceil_mult < h + s
    floor_mult = (h // g) * g  # largest multiple of g <= h
    return floor_mult > h + s


def count_C(
    v: Sequence[int], xi: Sequence[int], period: int
) -> int:
    """Crossings of the v-plane family with one xi-line, per period.

    Exact enumeration on the torus; the count is the same for every line
    (the plane spacing divides the line's height advance per period), and
    equals |<xi, primitive(v)>|.
    """
    xi_arr = np.asarray(xi, dtype=np.int64)
    w = _primitive(v)
    lines = _torus_lines(int(period), xi_arr, len(xi_arr))
    counts = {int(_crossing_mask(ln, xi_arr, w, int(period)).sum())
              for ln in lines}
    if len(counts) != 1:
        raise PreconditionError(
            "crossing counts differ across lines; non-primitive direction?"
        )
    return counts.pop()


# ---------------------------------------------------------------------------
# period search and construction
# ---------------------------------------------------------------------------


def _direction_plan(
    interactions: InteractionSet,
    target: DesignTarget,
    period: int,
    j: int,
) -> tuple[np.ndarray, dict]:
    """Labels for direction j at the given period, with audit counters.

    Returns (block, audit_dict); raises InvalidTargetError when the exact
    counts cannot be realized at this period.
    """
    d = interactions.dim
    xi = np.asarray(interactions.directions[j], dtype=np.int64)
    t = target.coefficient_fractions[j]
    theta = target.volume_fractions[j]
    cell = period ** d
    n_lines = period ** (d - 1)
    n_weak_frac = (1 - t) * n_lines
    beta_total_frac = theta * cell
    if n_weak_frac.denominator != 1 or beta_total_frac.denominator != 1:
        raise InvalidTargetError(
            f"period {period} does not make the direction-{tuple(xi)} "
            "counts integral"
        )
    n_weak = int(n_weak_frac)
    beta_total = int(beta_total_frac)

    lines = _torus_lines(period, xi, d)
    weak_lines = lines[:n_weak]
    strong_lines = lines[n_weak:]

    block = np.zeros((period,) * d, dtype=np.uint8)
    for ln in strong_lines:
        block[tuple(ln.T)] = int(Label.BETA)

    designated = np.zeros((period,) * d, dtype=bool)
    count_table = {}
    for v in interactions.directions:
        w = _primitive(v)
        s = int(xi @ w)
        if s == 0:
            continue
        count_table[tuple(v)] = abs(s)
        for ln in weak_lines:
            mask = _crossing_mask(ln, xi, w, period)
            designated[tuple(ln[mask].T)] = True

    n_designated = int(designated.sum())
    capacity = cell - beta_total  # alpha sites available on weak lines
    if n_designated > capacity:
        raise InvalidTargetError(
            f"direction {tuple(xi)}: {n_designated} designated weak sites "
            f"exceed the {capacity} available at volume fraction {theta}"
        )

    filler_needed = beta_total - len(strong_lines) * period
    if filler_needed < 0:
        raise InvalidTargetError(
            f"direction {tuple(xi)}: strong lines already exceed the "
            "volume fraction budget"
        )
    if filler_needed > 0:
        weak_sites = np.vstack(weak_lines)
        order = np.lexsort(weak_sites.T[::-1])
        weak_sites = weak_sites[order]
        open_mask = ~designated[tuple(weak_sites.T)]
        candidates = weak_sites[open_mask]
        if filler_needed > len(candidates):
            raise InvalidTargetError(
                f"direction {tuple(xi)}: not enough undesignated sites "
                "for the filler bonds"
            )
        chosen = candidates[:filler_needed]
        block[tuple(chosen.T)] = int(Label.BETA)

    # literal capacity comparison reported alongside the enforced count form
    sum_counts = sum(count_table.values())
    literal_ok = (1 - t) * sum_counts <= period * (1 - theta)
    audit = {
        "direction": tuple(int(c) for c in xi),
        "basis": orthogonal_basis(xi),
        "n_weak_lines": n_weak,
        "n_strong_lines": len(strong_lines),
        "designated_sites": n_designated,
        "alpha_capacity": capacity,
        "filler_bonds": int(max(filler_needed, 0)),
        "crossing_counts": count_table,
        "count_condition_ok": True,
        "literal_condition_ok": bool(literal_ok),
    }
    assert int((block == int(Label.BETA)).sum()) == beta_total
    return block, audit


def choose_period(
    interactions: InteractionSet,
    target: DesignTarget,
    max_period: int = 512,
) -> int:
    """Smallest period realizing the target exactly (deterministic search)."""
    _check_alignment(interactions, target)
    for period in range(1, max_period + 1):
        try:
            for j in range(interactions.count):
                _direction_plan(interactions, target, period, j)
        except InvalidTargetError:
            continue
        return period
    raise PeriodSearchError(
        f"no period up to {max_period} realizes the target exactly"
    )


@dataclass(frozen=True)
class DirectionAudit:
    direction: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]
    n_weak_lines: int
    n_strong_lines: int
    designated_sites: int
    alpha_capacity: int
    filler_bonds: int
    crossing_counts: Mapping[tuple[int, ...], int]
    count_condition_ok: bool
    literal_condition_ok: bool


@dataclass(frozen=True)
class DesignResult:
    interactions: InteractionSet
    target: DesignTarget
    period: int
    field: PeriodicBondField
    psi: CrystallineDensity
    audits: tuple[DirectionAudit, ...]


def design_microstructure(
    interactions: InteractionSet,
    target: DesignTarget,
    period: int | None = None,
    max_period: int = 512,
) -> DesignResult:
    """Construct the periodic field realizing the target density."""
    _check_alignment(interactions, target)
    if period is None:
        period = choose_period(interactions, target, max_period)
    blocks = []
    audits = []
    for j in range(interactions.count):
        block, audit = _direction_plan(interactions, target, period, j)
        blocks.append(block)
        audits.append(DirectionAudit(**audit))
    field = PeriodicBondField(interactions, period, blocks)
    return DesignResult(
        interactions=interactions,
        target=target,
        period=period,
        field=field,
        psi=psi_density(interactions, target),
        audits=tuple(audits),
    )


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignReport:
    fractions_exact: bool
    projection_reaches_psi: bool
    projection_gaps: tuple[Fraction, ...]  # exact p_xi - psi_xi per direction
    tension_checks: tuple[tuple[tuple[int, ...], float, float], ...]
    # (direction v, phi_hat at v/|v|, psi at v/|v|)
    max_relative_deviation: float
    ok: bool

    def lines(self) -> list[str]:
        out = [
            f"fractions exact: {self.fractions_exact}",
            f"projection reaches psi: {self.projection_reaches_psi}",
            f"max |phi_hat/psi - 1| at V: {self.max_relative_deviation:.6f}",
        ]
        for v, est, target in self.tension_checks:
            out.append(
                f"  v={v}: phi_hat={est:.6f} psi={target:.6f}"
            )
        return out


def verify_design(
    result: DesignResult,
    schedule: Schedule | None = None,
    tension_tolerance: float = 0.10,
) -> DesignReport:
    """Recompute fractions, exact projection bound, and tension at V-directions."""
    inter = result.interactions
    vf = volume_fractions(result.field)
    fractions_exact = vf.per_direction == result.target.volume_fractions

    pb = projection_bound(result.field)
    psi_exact = psi_exact_weights(inter, result.target)
    gaps = tuple(p - s for p, s in zip(pb.exact_weights, psi_exact))
    projection_ok = all(g >= 0 for g in gaps)

    if schedule is None:
        schedule = Schedule((8.0, 16.0, 32.0))
    checks = []
    worst = 0.0
    for j, v in enumerate(inter.directions):
        nu = np.asarray(v, dtype=np.float64)
        nu = nu / np.linalg.norm(nu)
        est: TensionEstimate = estimate_phi(result.field, nu, schedule)
        target = result.psi(nu)
        checks.append((tuple(int(c) for c in v), est.value, target))
        worst = max(worst, abs(est.value / target - 1.0))
    return DesignReport(
        fractions_exact=bool(fractions_exact),
        projection_reaches_psi=bool(projection_ok),
        projection_gaps=gaps,
        tension_checks=tuple(checks),
        max_relative_deviation=worst,
        ok=bool(fractions_exact and projection_ok
                and worst <= tension_tolerance),
    )
