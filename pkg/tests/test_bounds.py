"""Bounds layer: exact coefficients, ordering, LP certificates, envelopes.

Frozen laminate values: alternating strong/weak layers along the first axis
give, for the line bound, p_(1,0) = alpha (every horizontal line crosses
both layers) and p_(0,1) = (alpha + beta)/2 (half the vertical lines live in
the strong layer); the averaged coefficients are (alpha + beta)/2 in both
directions.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bondmix import (
    InteractionSet,
    Label,
    Schedule,
    ValidationError,
    averaging_bound,
    crystalline_approx,
    estimate_phi,
    exact_homogeneous_tension,
    homogeneous_field,
    laminate_field,
    membership_test,
    projection_bound,
    random_field,
    support_envelope,
)
from bondmix.bounds import CrystallineDensity, SupportDensity

ALPHA, BETA = 1.0, 2.5
NN = InteractionSet.nearest_neighbor(2, ALPHA, BETA)


# ---------------------------------------------------------------------------
# exact coefficients
# ---------------------------------------------------------------------------


def test_laminate_frozen_coefficients():
    lam = laminate_field(NN, axis=0, layers=[Label.BETA, Label.ALPHA])
    pb = projection_bound(lam)
    ab = averaging_bound(lam)
    assert pb.exact_weights == (Fraction(1), Fraction(7, 4))
    assert pb.pure_line_fractions == (Fraction(0), Fraction(1, 2))
    assert ab.exact_weights == (Fraction(7, 4), Fraction(7, 4))


def test_homogeneous_bounds_are_tight():
    for label in (Label.ALPHA, Label.BETA):
        f = homogeneous_field(NN, label)
        pb = projection_bound(f)
        ab = averaging_bound(f)
        for nu in [(1.0, 0.0), (0.6, 0.8), (-1.0, 2.0)]:
            target = exact_homogeneous_tension(NN, label, nu)
            n = np.array(nu) / np.linalg.norm(nu)
            assert pb(n) == pytest.approx(target, rel=1e-12)
            assert ab(n) == pytest.approx(target, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_projection_below_averaging(seed):
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 1, size=2)
    f = random_field(NN, 4, list(theta), seed=seed)
    pb = projection_bound(f)
    ab = averaging_bound(f)
    for p, a in zip(pb.exact_weights, ab.exact_weights):
        assert p <= a  # pure-line fraction never exceeds the volume fraction


def test_densities_even_and_subadditive():
    f = random_field(InteractionSet.with_diagonals(1.0, 2.5), 4,
                     [0.5, 0.3, 0.7, 0.2], seed=7)
    for dens in (projection_bound(f).density, averaging_bound(f).density):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b = rng.normal(size=2), rng.normal(size=2)
            assert dens(-a) == pytest.approx(dens(a), rel=1e-12)
            assert dens(a + b) <= dens(a) + dens(b) + 1e-12


def test_sandwich_on_moderate_radius_samples():
    # certified bounds hold for the R = 32 raw samples up to O(1/R) rim slack
    f = random_field(NN, 4, [0.5, 0.5], seed=3)
    pb = projection_bound(f)
    ab = averaging_bound(f)
    slack = 2.0 / 32.0
    for k in range(8):
        a = math.pi * k / 8
        nu = (math.cos(a), math.sin(a))
        est = estimate_phi(f, nu, Schedule((32.0,), extrapolation_order=0))
        assert pb(nu) - slack <= est.value <= ab(nu) + slack


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def _circle_samples(density, n=9):
    out = []
    for k in range(n):
        a = math.pi * k / n
        nu = (math.cos(a), math.sin(a))
        out.append((nu, density(nu)))
    return out


def test_membership_strong_target_needs_full_fraction():
    strong = averaging_bound(homogeneous_field(NN, Label.BETA)).density
    samples = _circle_samples(strong)
    assert membership_test(NN, 1.0, samples).feasible
    assert not membership_test(NN, 0.0, samples).feasible
    r = membership_test(NN, 0.75, samples)
    assert not r.feasible
    assert r.minimal_average == pytest.approx(1.0, abs=1e-6)


def test_membership_weak_target_always_feasible():
    weak = averaging_bound(homogeneous_field(NN, Label.ALPHA)).density
    samples = _circle_samples(weak)
    r = membership_test(NN, 0.5, samples)
    assert r.feasible
    assert np.mean(r.fractions) == pytest.approx(0.5, abs=1e-12)
    assert all(0.0 <= t <= 1.0 for t in r.fractions)


def test_membership_halfway_density():
    lam = laminate_field(NN, axis=0, layers=[Label.BETA, Label.ALPHA])
    target = averaging_bound(lam).density  # needs mean fraction 1/2
    samples = _circle_samples(target)
    assert membership_test(NN, 0.5, samples).feasible
    assert not membership_test(NN, 0.25, samples).feasible


def test_membership_validation():
    with pytest.raises(ValidationError):
        membership_test(NN, 1.5, [((1.0, 0.0), 1.0)])
    with pytest.raises(ValidationError):
        membership_test(NN, 0.5, [])


# ---------------------------------------------------------------------------
# crystalline approximation
# ---------------------------------------------------------------------------


def test_crystalline_approx_recovers_exact_density():
    target = CrystallineDensity((1.0, 0.5), ((1.0, 0.0), (1.0, 1.0)))
    samples = [((math.cos(a), math.sin(a)), target((math.cos(a), math.sin(a))))
               for a in np.linspace(0, math.pi, 33)[:-1]]
    dens, gap = crystalline_approx(samples, [(1, 0), (0, 1), (1, 1), (1, -1)])
    assert gap <= 1e-9
    for nu, val in samples:
        assert dens(nu) == pytest.approx(val, abs=1e-8)


def test_crystalline_approx_euclidean_gap_shrinks():
    samples = [((math.cos(a), math.sin(a)), 1.0)
               for a in np.linspace(0, math.pi, 65)[:-1]]
    dirs4 = [(1, 0), (0, 1), (1, 1), (1, -1)]
    dirs8 = dirs4 + [(2, 1), (1, 2), (2, -1), (1, -2)]
    _, gap4 = crystalline_approx(samples, dirs4)
    _, gap8 = crystalline_approx(samples, dirs8)
    assert gap8 < gap4
    assert gap8 <= 1.0 - math.cos(math.pi / 16)  # 16 symmetric directions


# ---------------------------------------------------------------------------
# support envelopes
# ---------------------------------------------------------------------------


def test_envelope_square_recovered_exactly():
    s = math.sqrt(0.5)
    env = support_envelope([(1, 0), (0, 1), (s, s)], [1.0, 1.0, math.sqrt(2)])
    assert isinstance(env, CrystallineDensity)
    assert len(env.vectors) == 2  # diagonal slab inactive: plain square
    assert env((1.0, 0.0)) == pytest.approx(1.0, rel=1e-9)
    assert env((s, s)) == pytest.approx(math.sqrt(2), rel=1e-9)


def test_envelope_hexagon_cuts_two_corners():
    # the slab |y1 + y2| <= 1.2 sqrt(2) cuts only the (+,+) and (-,-) corners
    s = math.sqrt(0.5)
    env = support_envelope([(1, 0), (0, 1), (s, s)], [1.0, 1.0, 1.2])
    assert len(env.vectors) == 3
    assert env((1.0, 0.0)) == pytest.approx(1.0, rel=1e-9)
    assert env((s, s)) == pytest.approx(1.2, rel=1e-9)


def test_envelope_matches_vertex_support():
    s = math.sqrt(0.5)
    env = support_envelope([(1, 0), (0, 1), (s, s)], [1.0, 1.0, 1.2])
    # independent evaluation: support = max over the hexagon's vertices
    c = 1.2 * math.sqrt(2) - 1.0
    verts = [(1, c), (c, 1), (-1, 1), (-1, -c), (-c, -1), (1, -1)]
    rng = np.random.default_rng(3)
    for _ in range(25):
        nu = rng.normal(size=2)
        vmax = max(np.dot(v, nu) for v in verts)
        assert env(nu) == pytest.approx(vmax, rel=1e-9)


def test_envelope_below_samples():
    rng = np.random.default_rng(11)
    dirs, vals = [], []
    for _ in range(6):
        a = rng.uniform(0, math.pi)
        dirs.append((math.cos(a), math.sin(a)))
        vals.append(rng.uniform(0.5, 2.0))
    env = support_envelope(dirs, vals)
    for u, v in zip(dirs, vals):
        assert env(u) <= v + 1e-9


def test_envelope_three_dimensional_box():
    env = support_envelope(
        [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [1.0, 2.0, 3.0]
    )
    assert isinstance(env, SupportDensity)
    assert env((0.0, 1.0, 0.0)) == pytest.approx(2.0, rel=1e-9)
    assert env((1.0, 1.0, 1.0)) == pytest.approx(6.0, rel=1e-9)


def test_envelope_validation():
    with pytest.raises(ValidationError):
        support_envelope([(1, 0)], [0.0])
    with pytest.raises(ValidationError):
        support_envelope([(0, 0)], [1.0])
