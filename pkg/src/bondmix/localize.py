"""Non-periodic fields from macroscopic volume-fraction profiles.

A MacroProfile prescribes a piecewise-constant strong-phase fraction theta
on a dyadic grid of cubes of side 2^-level over an axis-aligned box.
synthesize_field realizes it on the lattice eps Z^d: each cube's shrunken
core (side fraction 1 - delta) is tiled with the periodic design for its
fraction, the remaining margins - the guard strips - are all-strong, and so
is everything outside the window. Degenerate fractions 0 and 1 get single-
phase cores directly.

coarse_grain_theta recovers box-averaged local fractions exactly
(theta_hat = eps^d count / h^d per cell; empty cells are NaN, not zero);
refining the grid by 2 makes parents the exact mean of their children.

local_tension solves the pinned ball problem at physical center x, radius
rho, and returns the value normalized by w_{d-1} (rho/eps)^(d-1), the same
normalization the periodic estimator uses, so values are directly
comparable to homogenized tensions and to the per-cell mixture bounds
sum_xi (theta_xi beta_xi + (1 - theta_xi) alpha_xi) |<nu, xi>|.

m_regularity_probe measures the empirical angular modulus of the local
minima - |m(nu_1) - m(nu_2)| / R^(d-1) against C arccos<nu_1, nu_2> plus an
8/R discretization allowance - and the nested-ball comparisons m(R_2) <=
m(R_1) + (annulus flat-interface cost) + seam allowance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .design import DesignTarget, design_microstructure
from .errors import (
    OutOfDomainError,
    PreconditionError,
    ValidationError,
)
from .lattice import (
    InteractionSet,
    Label,
    WindowBondField,
)
from .mincut import solve_ground_state
from .tension import flat_section_measure
from .lattice import HalfSpaceTrace

__all__ = [
    "MacroProfile",
    "SynthesizedField",
    "CoarseGrain",
    "LocalTension",
    "RegularityReport",
    "LocalReport",
    "synthesize_field",
    "coarse_grain_theta",
    "local_tension",
    "m_regularity_probe",
    "run_local_probes",
    "report_to_json",
    "probes_to_csv",
]


@dataclass(frozen=True)
class MacroProfile:
    """Piecewise-constant fraction profile on a dyadic cube partition.

    The domain is the box prod_k [origin_k, origin_k + shape_k] * 2^-level;
    theta[n] is the strong-phase fraction of the cube with multi-index n,
    whose center sits at (origin + n + 1/2) * 2^-level.
    """

    level: int
    theta: np.ndarray
    origin: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.theta, dtype=np.float64)
        if arr.ndim < 1:
            raise ValidationError("theta must have one axis per dimension")
        if not ((arr >= 0.0) & (arr <= 1.0)).all():
            raise ValidationError("theta values must lie in [0, 1]")
        origin = self.origin
        if origin is None:
            origin = (0,) * arr.ndim
        origin = tuple(int(c) for c in origin)
        if len(origin) != arr.ndim:
            raise ValidationError("origin must match the dimension")
        arr.setflags(write=False)
        object.__setattr__(self, "theta", arr)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "level", int(self.level))

    @property
    def dim(self) -> int:
        return self.theta.ndim

    @property
    def cell_size(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def domain_lo(self) -> tuple[float, ...]:
        return tuple(o * self.cell_size for o in self.origin)

    @property
    def domain_hi(self) -> tuple[float, ...]:
        return tuple(
            (o + s) * self.cell_size
            for o, s in zip(self.origin, self.theta.shape)
        )

    def cell_center(self, index: Sequence[int]) -> tuple[float, ...]:
        return tuple(
            (o + int(n) + 0.5) * self.cell_size
            for o, n in zip(self.origin, index)
        )


@dataclass(frozen=True)
class SynthesizedField:
    """A synthesized lattice field together with its physical scale."""

    field: WindowBondField
    epsilon: float
    profile: MacroProfile
    delta: float
    core_margin: int  # guard width per side, in lattice sites
    sites_per_cell: int
    cell_fractions: np.ndarray  # realized strong fraction per cell (averaged)

    @property
    def interactions(self) -> InteractionSet:
        return self.field.interactions

    @property
    def domain_lo(self) -> tuple[float, ...]:
        return tuple(c * self.epsilon for c in self.field.lo)

    @property
    def domain_hi(self) -> tuple[float, ...]:
        return tuple(c * self.epsilon for c in self.field.hi)


def _sites_per_cell(profile: MacroProfile, epsilon: float) -> int:
    ratio = profile.cell_size / float(epsilon)
    s = round(ratio)
    if abs(ratio - s) > 1e-9 * max(1.0, ratio):
        raise PreconditionError(
            "cell size must be an integer number of lattice sites"
        )
    if s < 8:
        raise PreconditionError(
            "need epsilon <= 2^-level / 8 (at least 8 sites per cell side)"
        )
    return int(s)


def synthesize_field(
    profile: MacroProfile,
    interactions: InteractionSet,
    epsilon: float,
    delta: float = 0.1,
    targets: Mapping[tuple[int, ...], DesignTarget] | None = None,
) -> SynthesizedField:
    """Realize the profile on eps Z^d with all-strong guard strips.

    Each cube keeps a guard margin of ceil(delta * S / 2) sites per side
    (S sites per cube side); the core is tiled with the periodic design for
    the cube's fraction, anchored at the cube's low corner. Fractions 0 and
    1 give single-phase cores. `targets` overrides the per-cube design
    target (feasibility errors from the designer propagate).
    """
    if interactions.dim != profile.dim:
        raise ValidationError("interactions dimension must match the profile")
    if not (0.0 <= delta < 1.0):
        raise ValidationError("guard fraction delta must lie in [0, 1)")
    s = _sites_per_cell(profile, epsilon)
    margin = math.ceil(delta * s / 2 - 1e-12)
    d = profile.dim
    shape_cells = profile.theta.shape
    lo = tuple(o * s for o in profile.origin)
    hi = tuple((o + n) * s for o, n in zip(profile.origin, shape_cells))
    window_shape = tuple(n * s for n in shape_cells)

    blocks = [
        np.full(window_shape, int(Label.BETA), dtype=np.uint8)
        for _ in range(interactions.count)
    ]

    design_cache: dict = {}

    def _cell_design(key):
        if key not in design_cache:
            design_cache[key] = design_microstructure(interactions, key)
        return design_cache[key]

    for index in np.ndindex(*shape_cells):
        theta = float(profile.theta[index])
        target = None if targets is None else targets.get(tuple(index))
        core = tuple(
            slice(n * s + margin, (n + 1) * s - margin) for n in index
        )
        core_shape = tuple(
            sl.stop - sl.start for sl in core
        )
        if any(n <= 0 for n in core_shape):
            raise ValidationError(
                "guard margin leaves no core sites; reduce delta"
            )
        if target is None and theta == 0.0:
            for block in blocks:
                block[core] = int(Label.ALPHA)
            continue
        if target is None and theta == 1.0:
            continue  # already strong
        if target is None:
            frac = _dyadic_fraction(theta)
            target = DesignTarget.uniform(interactions.count, frac)
        design = _cell_design(target)
        T = design.period
        rel = [
            (np.arange(sl.start, sl.stop) - index[k] * s - lo[k]) % T
            for k, sl in enumerate(core)
        ]
        grid = np.ix_(*rel)
        for j in range(interactions.count):
            blocks[j][core] = design.field.labels[j][grid]

    field = WindowBondField(interactions, lo, hi, blocks, default=Label.BETA)
    counts = np.zeros(shape_cells, dtype=np.float64)
    for index in np.ndindex(*shape_cells):
        sl = tuple(slice(n * s, (n + 1) * s) for n in index)
        strong = sum(
            int((block[sl] == int(Label.BETA)).sum()) for block in blocks
        )
        counts[index] = strong / (interactions.count * s**d)
    counts.setflags(write=False)
    return SynthesizedField(
        field=field,
        epsilon=float(epsilon),
        profile=profile,
        delta=float(delta),
        core_margin=margin,
        sites_per_cell=s,
        cell_fractions=counts,
    )


def _dyadic_fraction(theta: float):
    from fractions import Fraction

    frac = Fraction(theta).limit_denominator(64)
    if abs(float(frac) - theta) > 1e-12:
        raise ValidationError(
            f"cell fraction {theta} needs an explicit design target"
        )
    return frac


# ---------------------------------------------------------------------------
# coarse graining
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoarseGrain:
    """Box-averaged local strong fractions on a grid of side h."""

    h: float
    epsilon: float
    grid_lo: tuple[float, ...]
    per_direction: tuple[np.ndarray, ...]  # NaN where the box holds no site
    average: np.ndarray
    site_counts: np.ndarray

    def cell_of(self, x: Sequence[float]) -> tuple[int, ...]:
        idx = tuple(
            int(math.floor((float(c) - lo) / self.h))
            for c, lo in zip(x, self.grid_lo)
        )
        for k, n in enumerate(idx):
            if not (0 <= n < self.average.shape[k]):
                raise OutOfDomainError(f"point {tuple(x)} outside the grid")
        return idx


def coarse_grain_theta(
    sample: SynthesizedField, h: float
) -> CoarseGrain:
    """Exact per-box strong fractions theta_hat = eps^d count / h^d."""
    eps = sample.epsilon
    if h < 4 * eps - 1e-12:
        raise PreconditionError("coarse grid h must be at least 4 epsilon")
    field = sample.field
    d = field.interactions.dim
    lo_phys = sample.domain_lo
    hi_phys = sample.domain_hi
    n_cells = tuple(
        max(1, math.ceil((hi - lo) / h - 1e-9))
        for lo, hi in zip(lo_phys, hi_phys)
    )
    shape = tuple(h_ - l_ for l_, h_ in zip(field.lo, field.hi))
    coords = [
        (np.arange(l_, h_) + 0.0) * eps for l_, h_ in zip(field.lo, field.hi)
    ]
    cell_idx = [
        np.clip(((c - lo) / h).astype(np.int64), 0, n - 1)
        for c, lo, n in zip(coords, lo_phys, n_cells)
    ]
    # accumulate exact integer counts per box with bincount on flat indices
    flat_cell = np.zeros(shape, dtype=np.int64)
    for k in range(d):
        reshape = [1] * d
        reshape[k] = shape[k]
        stride = int(np.prod(n_cells[k + 1:], dtype=np.int64))
        flat_cell = flat_cell + cell_idx[k].reshape(reshape) * stride
    total = int(np.prod(n_cells, dtype=np.int64))
    site_counts = np.bincount(flat_cell.ravel(), minlength=total)
    scale = eps**d / h**d
    per_dir = []
    for block in field.labels:
        strong = np.bincount(
            flat_cell.ravel(),
            weights=(block == int(Label.BETA)).ravel().astype(np.float64),
            minlength=total,
        )
        vals = strong * scale
        vals[site_counts == 0] = np.nan
        per_dir.append(vals.reshape(n_cells))
    avg = np.mean(per_dir, axis=0)
    for arr in per_dir:
        arr.setflags(write=False)
    counts = site_counts.reshape(n_cells)
    counts.setflags(write=False)
    avg.setflags(write=False)
    return CoarseGrain(
        h=float(h),
        epsilon=eps,
        grid_lo=lo_phys,
        per_direction=tuple(per_dir),
        average=avg,
        site_counts=counts,
    )


# ---------------------------------------------------------------------------
# local tension probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalTension:
    """One pinned ball probe, normalized like the periodic estimator."""

    center: tuple[float, ...]
    direction: tuple[float, ...]
    rho: float
    lattice_radius: float
    raw_value: float
    value: float
    exact: bool


def _require_ball_inside(sample: SynthesizedField, x, rho) -> None:
    for c, lo, hi in zip(x, sample.domain_lo, sample.domain_hi):
        if c - rho < lo - 1e-9 or c + rho > hi + 1e-9:
            raise OutOfDomainError(
                f"ball of radius {rho} at {tuple(x)} leaves the domain"
            )


def local_tension(
    sample: SynthesizedField,
    x: Sequence[float],
    direction: Sequence[float],
    rho: float,
    min_ratio: float = 16.0,
) -> LocalTension:
    """Normalized pinned-ball minimum at physical center x, radius rho."""
    eps = sample.epsilon
    d = sample.interactions.dim
    if len(x) != d:
        raise ValidationError("probe center must match the dimension")
    if rho / eps < min_ratio - 1e-9:
        raise PreconditionError(
            f"need rho/epsilon >= {min_ratio} for a stable probe"
        )
    _require_ball_inside(sample, x, rho)
    radius = rho / eps
    center = tuple(float(c) / eps for c in x)
    nu = np.asarray(direction, dtype=np.float64)
    nu = nu / np.linalg.norm(nu)
    trace = HalfSpaceTrace(center, tuple(nu))
    res = solve_ground_state(sample.field, center, radius, trace)
    w = flat_section_measure(d)
    return LocalTension(
        center=tuple(float(c) for c in x),
        direction=tuple(float(c) for c in nu),
        rho=float(rho),
        lattice_radius=radius,
        raw_value=res.value,
        value=res.value / (w * radius ** (d - 1)),
        exact=res.exact,
    )


# ---------------------------------------------------------------------------
# regularity of the local minima
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    """Empirical angular modulus and nested-ball comparisons."""

    center: tuple[float, ...]
    constant: float
    probes: tuple[LocalTension, ...]
    angle_checks: tuple[
        tuple[tuple[float, ...], tuple[float, ...], float, float, float, bool],
        ...
    ]  # (nu1, nu2, rho, |difference|/R^(d-1), bound, ok)
    nested_checks: tuple[
        tuple[tuple[float, ...], float, float, float, float, bool], ...
    ]  # (nu, rho1, rho2, lhs, rhs, ok)
    all_ok: bool


def regularity_constant(interactions: InteractionSet) -> float:
    """4 sum_xi beta_xi |xi|: the angular modulus constant used in checks."""
    return 4.0 * sum(
        b * float(np.linalg.norm(xi))
        for b, xi in zip(interactions.beta, interactions.directions)
    )


def seam_allowance(interactions: InteractionSet) -> float:
    """8 sum_xi beta_xi |xi|: additive slack for nested-ball seams."""
    return 8.0 * sum(
        b * float(np.linalg.norm(xi))
        for b, xi in zip(interactions.beta, interactions.directions)
    )


def m_regularity_probe(
    sample: SynthesizedField,
    x: Sequence[float],
    directions: Sequence[Sequence[float]],
    radii: Sequence[float],
    constant: float | None = None,
) -> RegularityReport:
    """Probe the continuity of the local minima in direction and radius.

    Angular: |m(nu1) - m(nu2)| / R^(d-1) <= C arccos<nu1, nu2> + 8/R for
    every direction pair at every radius. Nested: for rho1 < rho2, extending
    a ground state of the smaller ball by the flat trace bounds the larger:
    m(rho2) <= m(rho1) + (strong flat annulus cost) + seam allowance.
    """
    inter = sample.interactions
    d = inter.dim
    C = regularity_constant(inter) if constant is None else float(constant)
    w = flat_section_measure(d)
    rho_list = tuple(sorted(float(r) for r in radii))
    dirs = []
    for nu in directions:
        arr = np.asarray(nu, dtype=np.float64)
        dirs.append(tuple(arr / np.linalg.norm(arr)))

    probes: dict[tuple, LocalTension] = {}
    out = []
    for rho in rho_list:
        for nu in dirs:
            p = local_tension(sample, x, nu, rho)
            probes[(nu, rho)] = p
            out.append(p)

    angle_checks = []
    for rho in rho_list:
        R = rho / sample.epsilon
        for a in range(len(dirs)):
            for b in range(a + 1, len(dirs)):
                n1, n2 = dirs[a], dirs[b]
                cosang = float(np.clip(np.dot(n1, n2), -1.0, 1.0))
                angle = math.acos(cosang)
                diff = abs(
                    probes[(n1, rho)].raw_value - probes[(n2, rho)].raw_value
                ) / R ** (d - 1)
                bound = C * angle + 8.0 / R
                angle_checks.append(
                    (n1, n2, rho, diff, bound, diff <= bound + 1e-12)
                )

    strong_flat = {
        nu: sum(
            b * abs(float(np.dot(nu, xi)))
            for b, xi in zip(inter.beta, inter.directions)
        )
        for nu in dirs
    }
    allowance = seam_allowance(inter)
    nested_checks = []
    for nu in dirs:
        for i in range(len(rho_list)):
            for j in range(i + 1, len(rho_list)):
                r1, r2 = rho_list[i], rho_list[j]
                R1, R2 = r1 / sample.epsilon, r2 / sample.epsilon
                lhs = probes[(nu, r2)].raw_value
                annulus = strong_flat[nu] * w * (
                    R2 ** (d - 1) - R1 ** (d - 1)
                )
                rhs = probes[(nu, r1)].raw_value + annulus + allowance
                nested_checks.append(
                    (nu, r1, r2, lhs, rhs, lhs <= rhs + 1e-9)
                )

    all_ok = all(c[-1] for c in angle_checks) and all(
        c[-1] for c in nested_checks
    )
    return RegularityReport(
        center=tuple(float(c) for c in x),
        constant=C,
        probes=tuple(out),
        angle_checks=tuple(angle_checks),
        nested_checks=tuple(nested_checks),
        all_ok=all_ok,
    )


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalReport:
    """Coarse-grained fractions, probes at cell centers, sandwich verdicts."""

    grain: CoarseGrain
    probes: tuple[LocalTension, ...]
    lower_bounds: tuple[float, ...]
    upper_bounds: tuple[float, ...]
    slack: float
    verdicts: tuple[bool, ...]
    all_ok: bool


def run_local_probes(
    sample: SynthesizedField,
    h: float,
    probe_cells: Sequence[Sequence[int]],
    directions: Sequence[Sequence[float]],
    rho: float,
    slack_constant: float | None = None,
) -> LocalReport:
    """Probe cell centers and test the local mixture sandwich.

    For each probed cell center x and direction nu, with theta_hat the
    coarse fractions of the box containing x:

        sum_xi alpha_xi |<nu, xi>| - s
            <= local_tension(x, nu, rho)
            <= sum_xi (theta_hat_xi beta_xi + (1-theta_hat_xi) alpha_xi)
               |<nu, xi>| + s

    with s = slack_constant / (rho/eps), defaulting the constant to the
    regularity constant of the interaction set.
    """
    inter = sample.interactions
    grain = coarse_grain_theta(sample, h)
    C = (
        regularity_constant(inter)
        if slack_constant is None
        else float(slack_constant)
    )
    slack = C / (rho / sample.epsilon)
    probes = []
    lowers = []
    uppers = []
    verdicts = []
    for cell in probe_cells:
        x = sample.profile.cell_center(cell)
        box = grain.cell_of(x)
        for nu in directions:
            p = local_tension(sample, x, nu, rho)
            lower = sum(
                a * abs(float(np.dot(p.direction, xi)))
                for a, xi in zip(inter.alpha, inter.directions)
            )
            upper = 0.0
            for j, xi in enumerate(inter.directions):
                th = float(grain.per_direction[j][box])
                upper += (
                    th * inter.beta[j] + (1.0 - th) * inter.alpha[j]
                ) * abs(float(np.dot(p.direction, xi)))
            ok = lower - slack <= p.value <= upper + slack
            probes.append(p)
            lowers.append(lower)
            uppers.append(upper)
            verdicts.append(bool(ok))
    return LocalReport(
        grain=grain,
        probes=tuple(probes),
        lower_bounds=tuple(lowers),
        upper_bounds=tuple(uppers),
        slack=slack,
        verdicts=tuple(verdicts),
        all_ok=all(verdicts),
    )


def report_to_json(report: LocalReport) -> str:
    """Serialize a local report deterministically (no timestamps)."""

    def _arr(a: np.ndarray) -> list:
        return [
            None if (isinstance(v, float) and math.isnan(v)) else v
            for v in (float(x) for x in a.ravel())
        ]

    grain = report.grain
    payload = {
        "grid": {
            "h": grain.h,
            "epsilon": grain.epsilon,
            "lo": list(grain.grid_lo),
            "shape": list(grain.average.shape),
            "theta_average": _arr(grain.average),
            "theta_per_direction": [
                _arr(a) for a in grain.per_direction
            ],
        },
        "slack": report.slack,
        "probes": [
            {
                "x": list(p.center),
                "nu": list(p.direction),
                "rho": p.rho,
                "value": p.value,
                "lower": lo,
                "upper": up,
                "ok": ok,
            }
            for p, lo, up, ok in zip(
                report.probes,
                report.lower_bounds,
                report.upper_bounds,
                report.verdicts,
            )
        ],
        "all_ok": report.all_ok,
    }
    return json.dumps(payload, sort_keys=True, indent=2)


def probes_to_csv(probes: Sequence[LocalTension]) -> str:
    """CSV rows (x, nu, rho, value) for a batch of probes."""
    if not probes:
        return "x,nu,rho,value\n"
    d = len(probes[0].center)
    head = (
        [f"x_{k}" for k in range(d)]
        + [f"nu_{k}" for k in range(d)]
        + ["rho", "value"]
    )
    lines = [",".join(head)]
    for p in probes:
        row = (
            [f"{c:.17g}" for c in p.center]
            + [f"{c:.17g}" for c in p.direction]
            + [f"{p.rho:.17g}", f"{p.value:.17g}"]
        )
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
