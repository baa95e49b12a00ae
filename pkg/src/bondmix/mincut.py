"""Pinned ball ground states via exact integer minimum cut.

The discrete cell problem: spins outside the open ball B_R(x) are pinned to
a half-space trace; the energy of the ball (pair-incident counting, see
`lattice.evaluate_energy`) is minimized over the free spins inside. With two
labels and nonnegative pair couplings this is exactly an s-t minimum cut:
free sites are nodes, every interacting pair an undirected edge with
capacity equal to its coupling, and pinned endpoints are merged into the
source (+1 trace) or the sink (-1 trace). Pairs with both endpoints outside
the ball touch no ball site and never enter the instance, so the optimal cut
value equals the region energy of the reported state exactly.

Capacities are rescaled to integers before solving. When every coupling is a
rational with a small common denominator the scaling is exact and the
reported value is an exact ratio of integers; otherwise a documented
approximate scaling (about nine significant digits) is used and the result
carries exact=False.

The reported state is canonical: spins are +1 exactly on the sites reachable
from the source in the final residual network. That set is the
inclusion-minimal source side among all minimum cuts and is the same for
every maximum flow, so results do not depend on solver internals.

A brute-force oracle enumerates all 2^n free assignments (n <= 20,
vectorized in chunks, first-minimum tie break) over the same integer
capacities, giving an independent route to both value and optimality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .errors import DegenerateRegionError, SizeLimitError
from .lattice import (
    BondField,
    HalfSpaceTrace,
    SpinState,
    ball_region,
)

__all__ = [
    "CutInstance",
    "CutResult",
    "build_instance",
    "solve_ground_state",
    "brute_force_ground_state",
    "instance_to_text",
    "PIN_POS",
    "PIN_NEG",
]

PIN_POS = -1  # endpoint merged into the source (+1 trace spin)
PIN_NEG = -2  # endpoint merged into the sink  (-1 trace spin)

_EXACT_SCALE_MAX = 1 << 20   # largest common denominator used exactly
_TOTAL_BUDGET = 1 << 30      # scaled capacities must sum below this
# (the max-flow backend works in 32-bit totals: capacities summing past
# 2^31 - 1 overflow silently, so both scaling paths respect _TOTAL_BUDGET)


@dataclass(frozen=True)
class CutInstance:
    """One pinned ball problem reduced to pair lists with integer capacities.

    tail_idx/head_idx index free_sites; PIN_POS / PIN_NEG mark endpoints
    merged into a terminal. Capacities are tail-indexed couplings.
    """

    center: tuple[float, ...]
    radius: float
    free_sites: np.ndarray   # (n, d) int64, lexicographic order
    tail_sites: np.ndarray   # (m, d) int64 pair tails (for dumps/audits)
    head_sites: np.ndarray   # (m, d) int64 pair heads
    tail_idx: np.ndarray     # (m,) int64
    head_idx: np.ndarray     # (m,) int64
    caps: np.ndarray         # (m,) float64
    caps_int: np.ndarray     # (m,) int64
    scale: int
    exact: bool

    @property
    def n_free(self) -> int:
        return len(self.free_sites)

    @property
    def n_pairs(self) -> int:
        return len(self.caps)


@dataclass(frozen=True)
class CutResult:
    """Minimum value and canonical optimal state of one pinned ball problem."""

    value: float
    state: SpinState
    n_free: int
    n_pairs: int
    exact: bool
    scale: int
    units: int  # value * scale, exact integer when exact


def _scale_caps(caps: np.ndarray) -> tuple[int, np.ndarray, bool]:
    """Integer capacities: exact when the common denominator is small.

    Exact path: scale = least common denominator of the distinct couplings,
    accepted when it is small and the scaled total stays within the backend
    budget; rint is then error free (products below 2^53). Otherwise an
    approximate scale spends the whole budget on the capacity total, which
    quantizes each coupling to about budget / (n_pairs * coupling) units.
    """
    uniq = np.unique(caps)
    total = float(caps.sum())
    scale = 1
    small = True
    for v in uniq:
        den = Fraction(float(v)).denominator
        scale = scale // math.gcd(scale, den) * den
        if scale > _EXACT_SCALE_MAX:
            small = False
            break
    if small and total * scale <= _TOTAL_BUDGET:
        scaled = caps * float(scale)
        caps_int = np.rint(scaled).astype(np.int64)
        return scale, caps_int, True
    scale = max(1, int(_TOTAL_BUDGET / total))
    scaled = caps * float(scale)
    caps_int = np.rint(scaled).astype(np.int64)
    exact = bool(np.all(caps_int == scaled))
    return scale, caps_int, exact


def _lex_sorted(points: np.ndarray) -> np.ndarray:
    order = np.lexsort(points.T[::-1])
    return points[order]


def build_instance(
    field: BondField,
    center: Sequence[float],
    radius: float,
    trace: HalfSpaceTrace,
) -> CutInstance:
    """Collect every pair touching B_radius(center) and merge pinned endpoints."""
    inter = field.interactions
    d = inter.dim
    free = _lex_sorted(ball_region(center, radius))
    if len(free) == 0:
        raise DegenerateRegionError("ball contains no lattice sites")

    reach = inter.reach()
    lo = free.min(axis=0) - 2 * reach - 1
    span = free.max(axis=0) + 2 * reach + 2 - lo

    def encode(pts: np.ndarray) -> np.ndarray:
        rel = pts - lo
        key = np.zeros(len(pts), dtype=np.int64)
        for k in range(d):
            key = key * span[k] + rel[:, k]
        return key

    free_keys = encode(free)
    order = np.argsort(free_keys)
    sorted_keys = free_keys[order]

    def free_index(pts: np.ndarray) -> np.ndarray:
        keys = encode(pts)
        pos = np.searchsorted(sorted_keys, keys)
        pos_c = np.minimum(pos, len(sorted_keys) - 1)
        hit = sorted_keys[pos_c] == keys
        return np.where(hit, order[pos_c], -1)

    dirs = inter.direction_array()
    all_tails, all_heads, all_caps = [], [], []
    all_ti, all_hi = [], []
    for j in range(inter.count):
        xi = dirs[j]
        cand = np.vstack([free, free - xi])
        keys = encode(cand)
        _, first = np.unique(keys, return_index=True)
        tails = cand[first]
        heads = tails + xi
        ti = free_index(tails)
        hi_idx = free_index(heads)
        # endpoints outside the ball are pinned to the trace
        for idx_arr, pts in ((ti, tails), (hi_idx, heads)):
            outside = idx_arr == -1
            if outside.any():
                sgn = trace.values_at(pts[outside])
                idx_arr[outside] = np.where(sgn > 0, PIN_POS, PIN_NEG)
        all_tails.append(tails)
        all_heads.append(heads)
        all_ti.append(ti)
        all_hi.append(hi_idx)
        all_caps.append(field.coeff_at(tails, j))

    tails = np.vstack(all_tails)
    heads = np.vstack(all_heads)
    ti = np.concatenate(all_ti)
    hi_idx = np.concatenate(all_hi)
    caps = np.concatenate(all_caps).astype(np.float64)
    scale, caps_int, exact = _scale_caps(caps)
    return CutInstance(
        center=tuple(float(c) for c in center),
        radius=float(radius),
        free_sites=free,
        tail_sites=tails,
        head_sites=heads,
        tail_idx=ti,
        head_idx=hi_idx,
        caps=caps,
        caps_int=caps_int,
        scale=scale,
        exact=exact,
    )


def _state_from_spins(
    instance: CutInstance,
    spins: np.ndarray,
    trace: HalfSpaceTrace,
    reach: int,
) -> SpinState:
    """Trace values on a bounding box, overwritten by the solved free spins."""
    ctr = np.array(instance.center)
    r = instance.radius
    lo = np.floor(ctr - r).astype(np.int64) - reach
    hi = np.ceil(ctr + r).astype(np.int64) + reach + 1
    state = SpinState.from_function(tuple(lo), tuple(hi), trace.values_at)
    vals = np.array(state.values)
    rel = instance.free_sites - lo
    vals[tuple(rel[:, k] for k in range(rel.shape[1]))] = spins
    return SpinState(tuple(lo), tuple(hi), vals)


def _constant_shortcut(
    instance: CutInstance, trace: HalfSpaceTrace, reach: int
) -> CutResult | None:
    """All pins on one side: the matching constant state costs zero."""
    has_pos = bool(np.any(instance.tail_idx == PIN_POS) or
                   np.any(instance.head_idx == PIN_POS))
    has_neg = bool(np.any(instance.tail_idx == PIN_NEG) or
                   np.any(instance.head_idx == PIN_NEG))
    if has_pos and has_neg:
        return None
    fill = 1 if has_pos else -1
    spins = np.full(instance.n_free, fill, dtype=np.int8)
    state = _state_from_spins(instance, spins, trace, reach)
    return CutResult(0.0, state, instance.n_free, instance.n_pairs,
                     instance.exact, instance.scale, 0)


def solve_ground_state(
    field: BondField,
    center: Sequence[float],
    radius: float,
    trace: HalfSpaceTrace,
) -> CutResult:
    """Exact minimum of the pinned ball energy and its canonical minimizer."""
    inter = field.interactions
    instance = build_instance(field, center, radius, trace)
    reach = inter.reach()
    short = _constant_shortcut(instance, trace, reach)
    if short is not None:
        return short

    n = instance.n_free
    src, snk = n, n + 1
    ti, hi_idx, cap = instance.tail_idx, instance.head_idx, instance.caps_int

    def node(idx: np.ndarray) -> np.ndarray:
        out = idx.copy()
        out[idx == PIN_POS] = src
        out[idx == PIN_NEG] = snk
        return out

    u = node(ti)
    v = node(hi_idx)
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    data = np.concatenate([cap, cap])
    graph = coo_matrix(
        (data, (rows, cols)), shape=(n + 2, n + 2), dtype=np.int64
    ).tocsr()  # duplicate entries (parallel pairs into a terminal) sum up

    res = maximum_flow(graph, src, snk)
    residual = graph - res.flow
    residual.data = np.where(residual.data > 0, residual.data, 0)
    residual.eliminate_zeros()
    reached = breadth_first_order(
        residual, src, directed=True, return_predecessors=False
    )
    spins = np.full(n, -1, dtype=np.int8)
    spins[reached[reached < n]] = 1

    state = _state_from_spins(instance, spins, trace, reach)
    units = int(res.flow_value)
    return CutResult(units / instance.scale, state, n, instance.n_pairs,
                     instance.exact, instance.scale, units)


def brute_force_ground_state(
    field: BondField,
    center: Sequence[float],
    radius: float,
    trace: HalfSpaceTrace,
    limit: int = 20,
    chunk: int = 1 << 14,
) -> CutResult:
    """Independent oracle: enumerate all 2^n free assignments, n <= limit.

    Ranks states by exact integer energy; among minimizers returns the first
    in enumeration order (site k spin = +1 iff bit k of the state index is
    set, sites in lexicographic order), which is deterministic.
    """
    inter = field.interactions
    instance = build_instance(field, center, radius, trace)
    n = instance.n_free
    if n > limit:
        raise SizeLimitError(
            f"{n} free sites exceed the brute-force limit of {limit}"
        )

    ti, hi_idx, cap = instance.tail_idx, instance.head_idx, instance.caps_int
    ff = (ti >= 0) & (hi_idx >= 0)
    fp = ~ff
    # for free-pinned pairs, f is the free endpoint, s the pinned spin
    f_of_fp = np.where(ti[fp] >= 0, ti[fp], hi_idx[fp])
    s_of_fp = np.where(
        np.where(ti[fp] >= 0, hi_idx[fp], ti[fp]) == PIN_POS, 1, -1
    ).astype(np.int8)

    best_units = None
    best_spins = None
    total = 1 << n
    bits = np.arange(n, dtype=np.uint64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        u = (((idx[:, None] >> bits) & 1) * 2 - 1).astype(np.int8)
        units = np.zeros(len(idx), dtype=np.int64)
        if ff.any():
            broken = u[:, ti[ff]] != u[:, hi_idx[ff]]
            units += broken @ cap[ff]
        if fp.any():
            broken = u[:, f_of_fp] != s_of_fp
            units += broken @ cap[fp]
        k = int(np.argmin(units))
        if best_units is None or units[k] < best_units:
            best_units = int(units[k])
            best_spins = u[k].copy()

    state = _state_from_spins(instance, best_spins, trace, inter.reach())
    return CutResult(best_units / instance.scale, state, n, instance.n_pairs,
                     instance.exact, instance.scale, best_units)


def instance_to_text(instance: CutInstance) -> str:
    """Canonical one-pair-per-line dump of an instance (for audits)."""
    kind = {PIN_POS: "s+", PIN_NEG: "s-"}
    lines = [
        f"center={instance.center} radius={instance.radius:.17g} "
        f"n_free={instance.n_free} n_pairs={instance.n_pairs} "
        f"scale={instance.scale} exact={instance.exact}"
    ]
    for t, h, it, ih, c in zip(
        instance.tail_sites, instance.head_sites,
        instance.tail_idx, instance.head_idx, instance.caps,
    ):
        kt = kind.get(int(it), "f")
        kh = kind.get(int(ih), "f")
        lines.append(
            f"{tuple(t)} {tuple(h)} cap={c:.17g} {kt}-{kh}"
        )
    return "\n".join(lines) + "\n"
