"""Pinned ball minimum cut: frozen values, oracle equivalence, invariants.

The frozen mixed-phase values below are derived by hand. Geometry: the
17-pair neighborhood of the six-site ball B_1.2((0, 0.5)) with the flat
interface y = 0.5. Breaking the three vertical pairs (x, 0)-(x, 1),
x in {-1, 0, 1}, costs 2*alpha + c(0). When the entire column x = 0 is
strong, every deviation still crosses the column (the bonds just below and
above the ball are strong too, and flipping a column site breaks two weak
horizontals on top of a strong vertical), so value = 2*alpha + beta at every
beta. When only the single bond (0,0)-(0,1) is strong, flipping (0,0) to +1
replaces it by three weak pairs while the side columns still pay alpha each:
value = min(2*alpha + beta, 5*alpha), so the bypass wins once beta > 3*alpha.
"""
from __future__ import annotations

import numpy as np
import pytest

from bondmix import (
    DegenerateRegionError,
    HalfSpaceTrace,
    InteractionSet,
    Label,
    SizeLimitError,
    ball_region,
    brute_force_ground_state,
    build_instance,
    evaluate_energy,
    explicit_field,
    homogeneous_field,
    instance_to_text,
    random_field,
    solve_ground_state,
)

CENTER = (0.0, 0.5)  # interface between lattice rows: no on-plane sites
TRACE = HalfSpaceTrace(CENTER, (0.0, 1.0))


def _column_field(alpha: float, beta: float):
    """NN field whose vertical bonds in the column x = 0 (mod 4) are strong."""
    inter = InteractionSet.nearest_neighbor(2, alpha, beta)
    blocks = {
        (1, 0): np.zeros((4, 4), dtype=np.uint8),
        (0, 1): np.zeros((4, 4), dtype=np.uint8),
    }
    blocks[(0, 1)][0, :] = 1
    return explicit_field(inter, 4, blocks)


# ---------------------------------------------------------------------------
# frozen values
# ---------------------------------------------------------------------------


def test_flat_interface_weak_phase_value():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 2.0)
    f = homogeneous_field(inter, Label.ALPHA)
    res = solve_ground_state(f, CENTER, 1.2, TRACE)
    assert res.exact
    assert res.value == 3.0  # three columns cross the interface


def test_strong_column_unavoidable_at_any_beta():
    for beta in (2.5, 4.0):
        res = solve_ground_state(_column_field(1.0, beta), CENTER, 1.2, TRACE)
        assert res.exact
        assert res.value == 2.0 + beta


def test_single_strong_bond_bypassed():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 4.0)
    blocks = {
        (1, 0): np.zeros((4, 4), dtype=np.uint8),
        (0, 1): np.zeros((4, 4), dtype=np.uint8),
    }
    blocks[(0, 1)][0, 0] = 1  # only the bond (0,0)-(0,1) strong near the ball
    f = explicit_field(inter, 4, blocks)
    res = solve_ground_state(f, CENTER, 1.2, TRACE)
    assert res.exact
    assert res.value == 5.0  # detour: 5*alpha beats keeping 2*alpha + beta = 6


def test_frozen_values_match_oracle():
    for beta in (2.5, 4.0):
        f = _column_field(1.0, beta)
        a = solve_ground_state(f, CENTER, 1.2, TRACE)
        b = brute_force_ground_state(f, CENTER, 1.2, TRACE)
        assert a.units == b.units and a.scale == b.scale


# ---------------------------------------------------------------------------
# oracle equivalence on random instances
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("diag", [False, True])
def test_solver_matches_brute_force(seed, diag):
    inter = (InteractionSet.with_diagonals(1.0, 2.5) if diag
             else InteractionSet.nearest_neighbor(2, 1.0, 2.5))
    theta = [0.5] * inter.count
    f = random_field(inter, 4, theta, seed=seed)
    rng = np.random.default_rng(seed + 1000)
    angle = rng.uniform(0, 2 * np.pi)
    trace = HalfSpaceTrace((0.1, 0.2), (np.cos(angle), np.sin(angle)))
    a = solve_ground_state(f, (0.1, 0.2), 2.2, trace)
    b = brute_force_ground_state(f, (0.1, 0.2), 2.2, trace)
    assert a.exact and b.exact and a.scale == b.scale
    assert a.units == b.units  # exact integer agreement
    region = ball_region((0.1, 0.2), 2.2)
    # both reported states actually achieve the optimum
    assert evaluate_energy(f, a.state, trace, region) == pytest.approx(a.value)
    assert evaluate_energy(f, b.state, trace, region) == pytest.approx(b.value)


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


def test_value_equals_state_energy_large_ball():
    inter = InteractionSet.with_diagonals(1.0, 2.5)
    f = random_field(inter, 8, [0.3, 0.6, 0.4, 0.5], seed=5)
    trace = HalfSpaceTrace((0.0, 0.0), (0.6, 0.8))
    res = solve_ground_state(f, (0.0, 0.0), 12.0, trace)
    region = ball_region((0.0, 0.0), 12.0)
    assert evaluate_energy(f, res.state, trace, region) == pytest.approx(
        res.value, rel=1e-12
    )


def test_direction_flip_gives_equal_value_and_flipped_state():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 2.5)
    f = random_field(inter, 4, [0.5, 0.5], seed=12)
    for nu in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8), (2.0, 1.0)]:
        tr_p = HalfSpaceTrace((0.0, 0.0), nu)
        tr_m = HalfSpaceTrace((0.0, 0.0), (-nu[0], -nu[1]))
        a = solve_ground_state(f, (0.0, 0.0), 6.0, tr_p)
        b = solve_ground_state(f, (0.0, 0.0), 6.0, tr_m)
        assert a.units == b.units and a.scale == b.scale


def test_value_monotone_in_couplings():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 2.5)
    weak = random_field(inter, 4, [0.25, 0.25], seed=3)
    # upgrade: strong wherever weak is strong, plus more
    upgraded_blocks = [
        np.maximum(b, random_field(inter, 4, [0.25, 0.25], seed=4).labels[j])
        for j, b in enumerate(weak.labels)
    ]
    strong = explicit_field(inter, 4, upgraded_blocks)
    trace = HalfSpaceTrace((0.0, 0.0), (0.0, 1.0))
    va = solve_ground_state(weak, (0.0, 0.0), 6.0, trace).value
    vb = solve_ground_state(strong, (0.0, 0.0), 6.0, trace).value
    assert vb >= va - 1e-12


def test_ball_inside_one_phase_costs_zero():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 2.5)
    f = random_field(inter, 4, [0.5, 0.5], seed=8)
    trace = HalfSpaceTrace((0.0, 0.0), (0.0, 1.0))
    res = solve_ground_state(f, (0.0, 40.0), 3.0, trace)  # deep in the +1 side
    assert res.value == 0.0
    assert (np.array(res.state.values) == 1).all()


def test_solver_is_deterministic():
    inter = InteractionSet.with_diagonals(1.0, 2.5)
    f = random_field(inter, 4, [0.5] * 4, seed=21)
    trace = HalfSpaceTrace((0.0, 0.0), (0.6, 0.8))
    a = solve_ground_state(f, (0.0, 0.0), 8.0, trace)
    b = solve_ground_state(f, (0.0, 0.0), 8.0, trace)
    assert a.units == b.units
    assert (np.array(a.state.values) == np.array(b.state.values)).all()


def test_degenerate_ball_raises():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 2.0)
    f = homogeneous_field(inter, Label.ALPHA)
    with pytest.raises(DegenerateRegionError):
        solve_ground_state(f, (0.5, 0.5), 0.4, TRACE)


def test_brute_force_size_limit():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 2.0)
    f = homogeneous_field(inter, Label.ALPHA)
    with pytest.raises(SizeLimitError):
        brute_force_ground_state(f, (0.0, 0.0), 2.3, TRACE, limit=20)


def test_instance_counts_and_dump():
    inter = InteractionSet.nearest_neighbor(2, 1.0, 2.0)
    f = homogeneous_field(inter, Label.ALPHA)
    inst = build_instance(f, CENTER, 1.2, TRACE)
    assert inst.n_free == 6
    # every pair touches the ball: at least one endpoint free
    assert ((inst.tail_idx >= 0) | (inst.head_idx >= 0)).all()
    text = instance_to_text(inst)
    assert text.count("\n") == inst.n_pairs + 1
    assert "s+" in text and "s-" in text


def test_approximate_scaling_flagged():
    # couplings with a huge common denominator fall back to approximate mode
    inter = InteractionSet.nearest_neighbor(2, 0.1, 1 / 3)
    f = homogeneous_field(inter, Label.ALPHA)
    res = solve_ground_state(f, CENTER, 1.2, TRACE)
    assert not res.exact
    assert res.value == pytest.approx(0.3, rel=1e-6)
