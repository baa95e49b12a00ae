"""Tension estimates: closed-form targets, symmetries, estimator agreement.

Closed-form targets used here (single-phase fields): a flat interface of
unit length normal to nu breaks |<nu, xi>| pairs per direction xi, so
phi(nu) = sum_xi c_xi |<nu, xi>|. For the axis direction on a single-phase
nearest-neighbor field the ladder samples are exactly 1 - 1/(2R) times the
coupling (2*ceil(R) - 1 rows cross a ball of radius R), so the order-1
extrapolation recovers the coupling exactly.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from bondmix import (
    InteractionSet,
    Label,
    RationalDirectionError,
    Schedule,
    ValidationError,
    calibrate_slack,
    direction_sweep,
    estimate_phi,
    estimate_phi_affine,
    exact_homogeneous_tension,
    flat_section_measure,
    homogeneous_field,
    polygon_to_text,
    random_field,
    sweep_to_csv,
)

NN = InteractionSet.nearest_neighbor(2, 1.0, 2.5)
LADDER = Schedule((8.0, 16.0, 32.0))


def test_flat_section_measure():
    assert flat_section_measure(2) == 2.0
    assert flat_section_measure(3) == math.pi
    with pytest.raises(ValidationError):
        flat_section_measure(4)


def test_schedule_validation():
    with pytest.raises(ValidationError):
        Schedule(())
    with pytest.raises(ValidationError):
        Schedule((8.0, 8.0))
    with pytest.raises(ValidationError):
        Schedule((8.0,), extrapolation_order=1)
    assert Schedule((8.0,), extrapolation_order=0).radii == (8.0,)


def test_axis_direction_extrapolates_exactly():
    f = homogeneous_field(NN, Label.ALPHA)
    est = estimate_phi(f, (1.0, 0.0), LADDER)
    # samples are exactly 1 - 1/(2R): the 1/R fit recovers 1 exactly
    assert est.samples == ((8.0, 0.9375), (16.0, 0.96875), (32.0, 0.984375))
    assert est.value == pytest.approx(1.0, abs=1e-12)
    assert est.exact


def test_exact_homogeneous_formula_vs_estimates():
    for inter in (NN, InteractionSet.with_diagonals(1.0, 2.5)):
        for label in (Label.ALPHA, Label.BETA):
            f = homogeneous_field(inter, label)
            for nu in [(1, 0), (0, 1), (1, 1), (0.6, 0.8), (2, -1)]:
                target = exact_homogeneous_tension(inter, label, nu)
                est = estimate_phi(f, nu, LADDER)
                assert est.value == pytest.approx(target, rel=0.05)


def test_estimate_scales_linearly_with_couplings():
    weak = homogeneous_field(NN, Label.ALPHA)
    strong = homogeneous_field(NN, Label.BETA)  # couplings exactly 2.5x
    for nu in [(1, 0), (1, 1), (0.6, 0.8)]:
        a = estimate_phi(weak, nu, LADDER)
        b = estimate_phi(strong, nu, LADDER)
        assert b.value == pytest.approx(2.5 * a.value, rel=1e-12)


def test_direction_flip_is_exact():
    f = random_field(NN, 4, [0.5, 0.5], seed=7)
    for nu in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8), (-2.0, 3.0)]:
        a = estimate_phi(f, nu, LADDER)
        b = estimate_phi(f, (-nu[0], -nu[1]), LADDER)
        assert a.samples == b.samples  # identical integer cuts per radius
        assert a.value == b.value


def test_samples_monotone_in_couplings():
    weak = random_field(NN, 4, [0.25, 0.25], seed=1)
    blocks = [np.maximum(a, b) for a, b in zip(
        weak.labels, random_field(NN, 4, [0.25, 0.25], seed=2).labels)]
    from bondmix import explicit_field

    strong = explicit_field(NN, 4, blocks)
    ea = estimate_phi(weak, (0.6, 0.8), LADDER)
    eb = estimate_phi(strong, (0.6, 0.8), LADDER)
    for (_, va), (_, vb) in zip(ea.samples, eb.samples):
        assert vb >= va - 1e-12


def test_translation_by_period_is_exact():
    f = random_field(NN, 4, [0.5, 0.5], seed=9)
    a = estimate_phi(f, (0.6, 0.8), LADDER, center=(0.0, 0.0))
    b = estimate_phi(f, (0.6, 0.8), LADDER, center=(4.0, 8.0))
    assert a.samples == b.samples


def test_single_phase_bounds_dressed_field():
    # weak <= mixed <= strong, directionwise, at every ladder radius
    mixed = random_field(NN, 4, [0.5, 0.5], seed=4)
    weak = homogeneous_field(NN, Label.ALPHA)
    strong = homogeneous_field(NN, Label.BETA)
    for nu in [(1, 0), (1, 2)]:
        vw = estimate_phi(weak, nu, LADDER).samples
        vm = estimate_phi(mixed, nu, LADDER).samples
        vs = estimate_phi(strong, nu, LADDER).samples
        for (_, a), (_, b), (_, c) in zip(vw, vm, vs):
            assert a - 1e-12 <= b <= c + 1e-12


# ---------------------------------------------------------------------------
# cylinder estimator
# ---------------------------------------------------------------------------


def test_affine_axis_direction_exact():
    f = homogeneous_field(NN, Label.ALPHA)
    est = estimate_phi_affine(f, (1, 0))
    assert est.value == pytest.approx(1.0, abs=1e-12)
    assert est.err_gauge == 0.0


def test_affine_matches_ball_estimator_single_phase():
    f = homogeneous_field(NN, Label.ALPHA)
    for w in [(1, 1), (2, 1), (0, 1), (3, -1)]:
        target = exact_homogeneous_tension(NN, Label.ALPHA, w)
        est = estimate_phi_affine(f, w)
        assert est.value == pytest.approx(target, rel=0.10)


def test_affine_matches_ball_estimator_mixed_field():
    f = random_field(NN, 4, [0.5, 0.5], seed=2)
    a = estimate_phi_affine(f, (1, 0))
    b = estimate_phi(f, (1, 0), LADDER)
    assert a.value == pytest.approx(b.value, rel=0.10)


def test_affine_normalizes_direction_scale():
    f = homogeneous_field(NN, Label.ALPHA)
    a = estimate_phi_affine(f, (1, 1))
    b = estimate_phi_affine(f, (3, 3))  # same primitive direction
    assert a.samples == b.samples


def test_affine_rejects_non_integer_direction():
    f = homogeneous_field(NN, Label.ALPHA)
    with pytest.raises(RationalDirectionError):
        estimate_phi_affine(f, (1.5, 2.0))


# ---------------------------------------------------------------------------
# sweeps and calibration
# ---------------------------------------------------------------------------


def test_sweep_shapes_and_polygon():
    f = homogeneous_field(NN, Label.ALPHA)
    sched = Schedule((6.0, 12.0))
    sweep = direction_sweep(f, n_directions=8, schedule=sched)
    assert sweep.count == 8
    assert sweep.directions.shape == (8, 2)
    assert sweep.vertices.shape == (8, 2)
    assert sweep.radius_max == 12.0
    # vertices are nu / value
    np.testing.assert_allclose(
        sweep.vertices, sweep.directions / sweep.values[:, None]
    )


def test_sweep_warns_when_sparse():
    f = homogeneous_field(NN, Label.ALPHA)
    with pytest.warns(UserWarning):
        direction_sweep(f, n_directions=4, schedule=Schedule((6.0, 12.0)))


def test_sweep_csv_and_polygon_round_trip():
    f = homogeneous_field(NN, Label.ALPHA)
    sweep = direction_sweep(f, n_directions=8, schedule=Schedule((6.0, 12.0)))
    csv = sweep_to_csv(sweep)
    lines = csv.strip().split("\n")
    assert lines[0] == "angle,nu_x,nu_y,phi_hat,err_gauge,R_max"
    assert len(lines) == 9
    row = lines[1].split(",")
    assert float(row[3]) == sweep.values[0]  # %.17g is lossless
    poly = polygon_to_text(sweep).strip().split("\n")
    assert len(poly) == 8
    x, y = map(float, poly[0].split())
    assert (x, y) == (sweep.vertices[0, 0], sweep.vertices[0, 1])


def test_calibration_smoke():
    cal = calibrate_slack(NN, radius=12.0, n_directions=8, safety=4.0)
    assert cal.constant == 4.0 * cal.worst_deviation
    assert 0.0 < cal.worst_deviation < 10.0
