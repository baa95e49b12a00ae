"""Two-phase bond fields on the integer lattice and their interface energies.

Model
-----
A configuration assigns a spin u_i in {-1, +1} to every site i of Z^d. Sites
interact along a finite set V of lattice directions (V always contains the
coordinate directions e_1..e_d; each undirected pair {i, i+xi} appears once,
indexed by its tail i and direction xi). Every bond carries one of two
coupling strengths: a weak phase alpha_xi or a strong phase beta_xi with
0 < alpha_xi < beta_xi, recorded as a two-valued label per (site, direction).

The energy of a region counts each interacting pair with at least one
endpoint in the region exactly once: a broken pair (opposite spins)
contributes its coupling c_{i,xi}, an aligned pair contributes zero.
This is (1/4) c_{i,xi} (u_i - u_{i+xi})^2 summed over pairs touching the
region; spins outside the evaluation window come from a half-space trace.
Counting pairs (rather than only bonds whose tail lies inside) keeps the
energy consistent with the pinned ball problems downstream: every route from
the positive to the negative pinned phase crosses a counted bond.
Consequence: energies of two disjoint regions add exactly when the regions
are separated by more than the interaction range; adjacent regions share
their boundary pairs.

Volume fractions of a periodic field report, per direction, the fraction of
strong bonds in one period cell, as exact rationals.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    PreconditionError,
    UnsupportedFieldError,
    ValidationError,
)

__all__ = [
    "Label",
    "InteractionSet",
    "PeriodicBondField",
    "WindowBondField",
    "BondField",
    "SpinState",
    "HalfSpaceTrace",
    "VolumeFractions",
    "volume_fractions",
    "evaluate_energy",
    "homogeneous_field",
    "laminate_field",
    "random_field",
    "explicit_field",
    "window_field",
    "ball_region",
    "box_region",
    "field_to_text",
    "field_from_text",
    "write_field_file",
    "read_field_file",
    "field_hash",
]


class Label(IntEnum):
    """Two-valued bond occupancy: weak phase or strong phase."""

    ALPHA = 0
    BETA = 1


def _as_direction(xi: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(c) for c in xi)
    for c, raw in zip(out, xi):
        if c != raw:
            raise ValidationError(f"direction {xi!r} has non-integer components")
    return out


@dataclass(frozen=True)
class InteractionSet:
    """The directions sites interact along, with both coupling strengths.

    directions must be pairwise distinct nonzero integer vectors and must
    contain every coordinate direction e_1..e_d; alpha and beta are aligned
    with directions and satisfy 0 < alpha < beta componentwise.
    """

    dim: int
    directions: tuple[tuple[int, ...], ...]
    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self) -> None:
        d = self.dim
        if d < 1:
            raise ValidationError("dimension must be positive")
        dirs = tuple(_as_direction(xi) for xi in self.directions)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if not (len(dirs) == len(self.alpha) == len(self.beta)):
            raise ValidationError("directions, alpha, beta must have equal length")
        for xi in dirs:
            if len(xi) != d:
                raise ValidationError(f"direction {xi} has wrong dimension")
            if all(c == 0 for c in xi):
                raise ValidationError("zero vector is not a valid direction")
        if len(set(dirs)) != len(dirs):
            raise ValidationError("directions must be pairwise distinct")
        for i in range(d):
            e = tuple(1 if j == i else 0 for j in range(d))
            if e not in dirs:
                raise ValidationError(f"coordinate direction {e} missing")
        for xi, a, b in zip(dirs, self.alpha, self.beta):
            if not (0.0 < a < b):
                raise ValidationError(
                    f"need 0 < alpha < beta at direction {xi}, got {a}, {b}"
                )

    # -- convenience constructors -------------------------------------------------

    @staticmethod
    def nearest_neighbor(dim: int, alpha: float, beta: float) -> "InteractionSet":
        dirs = tuple(
            tuple(1 if j == i else 0 for j in range(dim)) for i in range(dim)
        )
        return InteractionSet(dim, dirs, (alpha,) * dim, (beta,) * dim)

    @staticmethod
    def with_diagonals(
        alpha: float, beta: float, diag_alpha: float | None = None,
        diag_beta: float | None = None,
    ) -> "InteractionSet":
        """d=2 nearest neighbors plus both diagonals."""
        da = alpha if diag_alpha is None else diag_alpha
        db = beta if diag_beta is None else diag_beta
        dirs = ((1, 0), (0, 1), (1, 1), (1, -1))
        return InteractionSet(2, dirs, (alpha, alpha, da, da), (beta, beta, db, db))

    # -- lookups ------------------------------------------------------------------

    def index_of(self, xi: Sequence[int]) -> int:
        key = tuple(int(c) for c in xi)
        try:
            return self.directions.index(key)
        except ValueError:
            raise ValidationError(f"{key} is not an interaction direction") from None

    @property
    def count(self) -> int:
        return len(self.directions)

    def direction_array(self) -> np.ndarray:
        return np.array(self.directions, dtype=np.int64)

    def reach(self) -> int:
        """Largest sup-norm of any interaction direction."""
        return int(np.abs(self.direction_array()).max())


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class PeriodicBondField:
    """Bond labels on Z^d, periodic with the same period T in every axis.

    labels[j] has shape (T,)*d and holds Label values for direction j;
    the label of (site i, direction xi_j) is labels[j][i mod T].
    """

    is_periodic = True

    def __init__(self, interactions: InteractionSet, period: int,
                 labels: Sequence[np.ndarray]):
        period = int(period)
        if period < 1:
            raise ValidationError("period must be >= 1")
        if len(labels) != interactions.count:
            raise ValidationError("one label block per direction required")
        shape = (period,) * interactions.dim
        blocks = []
        for block in labels:
            arr = np.array(block, dtype=np.uint8)
            if arr.shape != shape:
                raise ValidationError(f"label block must have shape {shape}")
            if not np.isin(arr, (int(Label.ALPHA), int(Label.BETA))).all():
                raise ValidationError("labels must be ALPHA (0) or BETA (1)")
            blocks.append(_readonly(arr))
        self.interactions = interactions
        self.period = period
        self.labels = tuple(blocks)

    def labels_at(self, points: np.ndarray, j: int) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64)
        idx = tuple((pts[:, k] % self.period) for k in range(self.interactions.dim))
        return self.labels[j][idx]

    def coeff_at(self, points: np.ndarray, j: int) -> np.ndarray:
        lab = self.labels_at(points, j)
        return np.where(lab == int(Label.BETA),
                        self.interactions.beta[j], self.interactions.alpha[j])


class WindowBondField:
    """Bond labels given explicitly on a finite box, a default label outside.

    The window is the half-open box prod_k [lo_k, hi_k); labels[j] has shape
    hi - lo. Used for synthesized non-periodic designs.
    """

    is_periodic = False

    def __init__(self, interactions: InteractionSet, lo: Sequence[int],
                 hi: Sequence[int], labels: Sequence[np.ndarray],
                 default: Label = Label.BETA):
        d = interactions.dim
        lo_t = tuple(int(c) for c in lo)
        hi_t = tuple(int(c) for c in hi)
        if len(lo_t) != d or len(hi_t) != d:
            raise ValidationError("window bounds must match the dimension")
        if any(h <= l for l, h in zip(lo_t, hi_t)):
            raise ValidationError("window must be nonempty")
        shape = tuple(h - l for l, h in zip(lo_t, hi_t))
        if len(labels) != interactions.count:
            raise ValidationError("one label block per direction required")
        blocks = []
        for block in labels:
            arr = np.array(block, dtype=np.uint8)
            if arr.shape != shape:
                raise ValidationError(f"label block must have shape {shape}")
            if not np.isin(arr, (int(Label.ALPHA), int(Label.BETA))).all():
                raise ValidationError("labels must be ALPHA (0) or BETA (1)")
            blocks.append(_readonly(arr))
        self.interactions = interactions
        self.lo = lo_t
        self.hi = hi_t
        self.labels = tuple(blocks)
        self.default = Label(default)

    def labels_at(self, points: np.ndarray, j: int) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64)
        d = self.interactions.dim
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        inside = np.logical_and(pts >= lo, pts < hi).all(axis=1)
        out = np.full(len(pts), int(self.default), dtype=np.uint8)
        if inside.any():
            rel = pts[inside] - lo
            out[inside] = self.labels[j][tuple(rel[:, k] for k in range(d))]
        return out

    def coeff_at(self, points: np.ndarray, j: int) -> np.ndarray:
        lab = self.labels_at(points, j)
        return np.where(lab == int(Label.BETA),
                        self.interactions.beta[j], self.interactions.alpha[j])


BondField = PeriodicBondField | WindowBondField


@dataclass(frozen=True)
class SpinState:
    """Spins +-1 on the half-open box prod_k [lo_k, hi_k)."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]
    values: np.ndarray  # int8, shape hi - lo

    def __post_init__(self) -> None:
        lo = tuple(int(c) for c in self.lo)
        hi = tuple(int(c) for c in self.hi)
        arr = np.array(self.values, dtype=np.int8)
        shape = tuple(h - l for l, h in zip(lo, hi))
        if arr.shape != shape:
            raise ValidationError(f"spin block must have shape {shape}")
        if not np.isin(arr, (-1, 1)).all():
            raise ValidationError("spins must be -1 or +1")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "values", _readonly(arr))

    @staticmethod
    def from_function(lo: Sequence[int], hi: Sequence[int], fn) -> "SpinState":
        lo_t = tuple(int(c) for c in lo)
        hi_t = tuple(int(c) for c in hi)
        grids = np.meshgrid(
            *[np.arange(l, h) for l, h in zip(lo_t, hi_t)], indexing="ij"
        )
        pts = np.stack([g.ravel() for g in grids], axis=1)
        vals = fn(pts).astype(np.int8).reshape([h - l for l, h in zip(lo_t, hi_t)])
        return SpinState(lo_t, hi_t, vals)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64)
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        return np.logical_and(pts >= lo, pts < hi).all(axis=1)

    def values_at(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.int64)
        if not self.contains(pts).all():
            raise PreconditionError("point outside the spin window")
        rel = pts - np.array(self.lo)
        return self.values[tuple(rel[:, k] for k in range(len(self.lo)))]


def _tie_sign(normal: tuple[float, ...]) -> int:
    """Spin assigned on the separating hyperplane itself.

    Chosen odd under normal -> -normal so that flipping all spins maps the
    interface problem for normal onto the one for -normal exactly, plane
    sites included. For normals whose first nonzero component is positive
    this is -1 (the plane sides with the negative phase).
    """
    for c in normal:
        if c > 0:
            return -1
        if c < 0:
            return 1
    raise ValidationError("normal vector must be nonzero")


@dataclass(frozen=True)
class HalfSpaceTrace:
    """Sharp interface through `center` with unit normal `normal`.

    Sites y with <y - center, normal> > 0 get +1, sites with < 0 get -1;
    sites exactly on the hyperplane get the tie spin described in _tie_sign.
    """

    center: tuple[float, ...]
    normal: tuple[float, ...]

    def __post_init__(self) -> None:
        ctr = tuple(float(c) for c in self.center)
        nrm = np.array([float(c) for c in self.normal], dtype=np.float64)
        norm = float(np.linalg.norm(nrm))
        if norm == 0.0:
            raise ValidationError("normal vector must be nonzero")
        nrm = nrm / norm
        object.__setattr__(self, "center", ctr)
        object.__setattr__(self, "normal", tuple(float(c) for c in nrm))
        object.__setattr__(self, "_tie", _tie_sign(self.normal))

    def values_at(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        h = (pts - np.array(self.center)) @ np.array(self.normal)
        out = np.where(h > 0, 1, -1).astype(np.int8)
        out[h == 0] = self._tie
        return out


@dataclass(frozen=True)
class VolumeFractions:
    """Exact per-direction strong-bond fractions of one period cell."""

    per_direction: tuple[Fraction, ...]
    average: Fraction

    def __post_init__(self) -> None:
        for f in self.per_direction:
            if not (0 <= f <= 1):
                raise ValidationError("volume fractions must lie in [0, 1]")
        mean = Fraction(sum(self.per_direction), len(self.per_direction))
        if mean != self.average:
            raise ValidationError("average must equal the mean of the fractions")

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(f) for f in self.per_direction)


def volume_fractions(field: BondField) -> VolumeFractions:
    """Exact strong-phase fractions per direction; periodic fields only."""
    if not field.is_periodic:
        raise UnsupportedFieldError(
            "volume fractions are defined for periodic fields only"
        )
    cell = field.period ** field.interactions.dim
    fracs = tuple(
        Fraction(int((block == int(Label.BETA)).sum()), cell)
        for block in field.labels
    )
    return VolumeFractions(fracs, Fraction(sum(fracs), len(fracs)))


# ---------------------------------------------------------------------------
# regions and energy evaluation
# ---------------------------------------------------------------------------


def box_region(lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """All lattice sites of the half-open box prod_k [lo_k, hi_k)."""
    grids = np.meshgrid(
        *[np.arange(int(l), int(h)) for l, h in zip(lo, hi)], indexing="ij"
    )
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def ball_region(center: Sequence[float], radius: float) -> np.ndarray:
    """All lattice sites strictly inside the open ball B_radius(center)."""
    ctr = np.array([float(c) for c in center])
    r = float(radius)
    if r <= 0:
        raise PreconditionError("ball radius must be positive")
    lo = np.floor(ctr - r).astype(np.int64)
    hi = np.ceil(ctr + r).astype(np.int64) + 1
    pts = box_region(lo, hi)
    keep = ((pts - ctr) ** 2).sum(axis=1) < r * r
    return pts[keep]


def _encode(points: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Collision-free integer keys for lattice points within a known box."""
    rel = points - lo
    key = np.zeros(len(points), dtype=np.int64)
    for k in range(points.shape[1]):
        key = key * span[k] + rel[:, k]
    return key


def evaluate_energy(
    field: BondField,
    state: SpinState,
    trace: HalfSpaceTrace,
    region: np.ndarray,
) -> float:
    """Energy of the spins in `region`: sum of couplings over broken pairs.

    Counts every unordered interacting pair {i, i + xi} with at least one
    endpoint in `region`, once, with coupling c_{i,xi}. Spins come from
    `state` inside its window and from `trace` outside. Requires
    region within the state window.
    """
    region = np.asarray(region, dtype=np.int64)
    if region.ndim != 2 or region.shape[1] != field.interactions.dim:
        raise PreconditionError("region must be an (N, d) array of sites")
    if len(region) == 0:
        return 0.0
    if not state.contains(region).all():
        raise PreconditionError("region must lie inside the state window")

    dirs = field.interactions.direction_array()
    reach = field.interactions.reach()
    lo = region.min(axis=0) - 2 * reach - 1
    hi = region.max(axis=0) + 2 * reach + 2
    span = hi - lo
    region_keys = np.sort(_encode(region, lo, span))

    def spins(points: np.ndarray) -> np.ndarray:
        inside = state.contains(points)
        out = np.empty(len(points), dtype=np.int8)
        if inside.any():
            out[inside] = state.values_at(points[inside])
        if (~inside).any():
            out[~inside] = trace.values_at(points[~inside])
        return out

    total = 0.0
    for j in range(field.interactions.count):
        xi = dirs[j]
        tails = np.vstack([region, region - xi])
        keys = _encode(tails, lo, span)
        _, first = np.unique(keys, return_index=True)
        tails = tails[first]
        heads = tails + xi
        touching = np.logical_or(
            np.isin(_encode(tails, lo, span), region_keys),
            np.isin(_encode(heads, lo, span), region_keys),
        )
        tails = tails[touching]
        heads = heads[touching]
        broken = spins(tails) != spins(heads)
        if broken.any():
            total += float(field.coeff_at(tails[broken], j).sum())
    return total


# ---------------------------------------------------------------------------
# field factories
# ---------------------------------------------------------------------------


def homogeneous_field(
    interactions: InteractionSet, label: Label, period: int = 1
) -> PeriodicBondField:
    """Single-phase field: every bond carries `label`."""
    shape = (int(period),) * interactions.dim
    blocks = [np.full(shape, int(Label(label)), dtype=np.uint8)
              for _ in range(interactions.count)]
    return PeriodicBondField(interactions, period, blocks)


def laminate_field(
    interactions: InteractionSet,
    axis: int,
    layers: Sequence[int],
    directions: Iterable[Sequence[int]] | None = None,
) -> PeriodicBondField:
    """Layered field: label depends only on (site[axis] mod T).

    layers[r] is the Label of every bond in layer residue r, applied to the
    listed directions (all directions when omitted); other directions stay
    weak.
    """
    d = interactions.dim
    if not (0 <= axis < d):
        raise ValidationError(f"axis must be in [0, {d})")
    period = len(layers)
    if period < 1:
        raise ValidationError("at least one layer required")
    layer_arr = np.array([int(Label(v)) for v in layers], dtype=np.uint8)
    affected = (
        set(range(interactions.count))
        if directions is None
        else {interactions.index_of(xi) for xi in directions}
    )
    shape = (period,) * d
    grids = np.meshgrid(*[np.arange(period)] * d, indexing="ij")
    per_site = layer_arr[grids[axis]]
    blocks = [
        per_site.copy() if j in affected
        else np.zeros(shape, dtype=np.uint8)
        for j in range(interactions.count)
    ]
    return PeriodicBondField(interactions, period, blocks)


def _target_count(cell: int, theta) -> int:
    """Number of strong bonds for a fraction target: nearest integer to cell*theta."""
    if isinstance(theta, Fraction):
        return round(cell * theta)
    return round(cell * float(theta))


def random_field(
    interactions: InteractionSet,
    period: int,
    theta: Sequence[float | Fraction],
    seed: int,
) -> PeriodicBondField:
    """Seeded uniform placement with exactly round(T^d * theta_j) strong bonds per direction."""
    d = interactions.dim
    period = int(period)
    if len(theta) != interactions.count:
        raise ValidationError("one fraction target per direction required")
    for t in theta:
        if not (0 <= float(t) <= 1):
            raise ValidationError("fraction targets must lie in [0, 1]")
    cell = period ** d
    rng = np.random.default_rng(int(seed))
    blocks = []
    for t in theta:
        k = _target_count(cell, t)
        flat = np.zeros(cell, dtype=np.uint8)
        flat[rng.permutation(cell)[:k]] = int(Label.BETA)
        blocks.append(flat.reshape((period,) * d))
    return PeriodicBondField(interactions, period, blocks)


def explicit_field(
    interactions: InteractionSet,
    period: int,
    labels: Sequence[np.ndarray] | Mapping[tuple[int, ...], np.ndarray],
) -> PeriodicBondField:
    """Periodic field with label blocks given directly (mapping keys are directions)."""
    if isinstance(labels, Mapping):
        blocks = [labels[xi] for xi in interactions.directions]
    else:
        blocks = list(labels)
    return PeriodicBondField(interactions, period, blocks)


def window_field(
    interactions: InteractionSet,
    lo: Sequence[int],
    hi: Sequence[int],
    labels: Sequence[np.ndarray],
    default: Label = Label.BETA,
) -> WindowBondField:
    """Non-periodic field on a finite window with a default label outside."""
    return WindowBondField(interactions, lo, hi, labels, default)


# ---------------------------------------------------------------------------
# text format: header lines, then one 0/1 block per direction in row-major
# site order
# ---------------------------------------------------------------------------

_FLOAT_FMT = "%.17g"


def field_to_text(field: PeriodicBondField) -> str:
    """Serialize a periodic field; inverse of field_from_text, bit exact."""
    if not field.is_periodic:
        raise UnsupportedFieldError("only periodic fields serialize to text")
    inter = field.interactions
    lines = [
        f"d={inter.dim}",
        f"T={field.period}",
        "V=" + ";".join("(" + ",".join(str(c) for c in xi) + ")"
                        for xi in inter.directions),
        "alpha=" + ",".join(_FLOAT_FMT % a for a in inter.alpha),
        "beta=" + ",".join(_FLOAT_FMT % b for b in inter.beta),
    ]
    for block in field.labels:
        lines.append("".join("1" if v else "0" for v in block.ravel(order="C")))
    return "\n".join(lines) + "\n"


def field_from_text(text: str) -> PeriodicBondField:
    """Parse the text format produced by field_to_text."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    header: dict[str, str] = {}
    blocks_raw: list[str] = []
    for ln in lines:
        m = re.match(r"^(d|T|V|alpha|beta)=(.*)$", ln)
        if m and m.group(1) not in header:
            header[m.group(1)] = m.group(2)
        else:
            blocks_raw.append(ln)
    for key in ("d", "T", "V", "alpha", "beta"):
        if key not in header:
            raise ValidationError(f"field text is missing '{key}='")
    d = int(header["d"])
    period = int(header["T"])
    dirs = []
    for tok in header["V"].split(";"):
        tok = tok.strip().strip("()")
        dirs.append(tuple(int(c) for c in tok.split(",")))
    alpha = tuple(float(t) for t in header["alpha"].split(","))
    beta = tuple(float(t) for t in header["beta"].split(","))
    inter = InteractionSet(d, tuple(dirs), alpha, beta)
    digits = re.sub(r"\s", "", "".join(blocks_raw))
    cell = period ** d
    if len(digits) != cell * inter.count or not set(digits) <= {"0", "1"}:
        raise ValidationError(
            f"expected {cell * inter.count} 0/1 label characters, got {len(digits)}"
        )
    blocks = []
    for j in range(inter.count):
        flat = np.frombuffer(
            digits[j * cell:(j + 1) * cell].encode(), dtype=np.uint8
        ) - ord("0")
        blocks.append(flat.reshape((period,) * d))
    return PeriodicBondField(inter, period, blocks)


def write_field_file(field: PeriodicBondField, path) -> None:
    with open(path, "w") as fh:
        fh.write(field_to_text(field))


def read_field_file(path) -> PeriodicBondField:
    with open(path) as fh:
        return field_from_text(fh.read())


def field_hash(field: BondField) -> str:
    """Stable content hash of a field (hex sha256)."""
    if field.is_periodic:
        payload = field_to_text(field).encode()
    else:
        inter = field.interactions
        head = (
            f"window d={inter.dim} lo={field.lo} hi={field.hi} "
            f"default={int(field.default)} V={inter.directions} "
            f"alpha={tuple(_FLOAT_FMT % a for a in inter.alpha)} "
            f"beta={tuple(_FLOAT_FMT % b for b in inter.beta)}\n"
        ).encode()
        payload = head + b"".join(block.tobytes() for block in field.labels)
    return hashlib.sha256(payload).hexdigest()
