"""Coefficient bounds on the tension of a mixture, without solving for it.

Two computable crystalline densities bracket the homogenized tension of
any periodic field:

* averaging (upper): replace each direction's couplings by their cell
  average  a_xi = alpha + (beta - alpha) theta_xi;
* projection (lower): keep only lattice lines in direction xi that are
  strong at every site; a line broken anywhere is priced at alpha.

The gap quantifies how much the geometry (not just the fractions) matters.
A linear-programming membership test then asks whether a candidate
density could be the tension of ANY microstructure with the given
fractions — the certificate behind design feasibility.
"""

from fractions import Fraction

from bondmix import (
    InteractionSet,
    averaging_bound,
    membership_test,
    projection_bound,
    random_field,
    volume_fractions,
)

PERIOD = 4
SEEDS = (3, 17, 40)
THETA = Fraction(1, 2)

inter = InteractionSet.nearest_neighbor(2, alpha=1.0, beta=2.0)

print(f"{'seed':>5} {'dir':>7} {'theta':>6} {'pure lines':>11} "
      f"{'projection':>11} {'averaging':>10}")
for seed in SEEDS:
    field = random_field(inter, period=PERIOD,
                         theta=(THETA,) * inter.count, seed=seed)
    vf = volume_fractions(field)
    avg = averaging_bound(field)
    proj = projection_bound(field)
    for j, xi in enumerate(inter.directions):
        print(f"{seed:>5} {str(xi):>7} {str(vf.per_direction[j]):>6} "
              f"{str(proj.pure_line_fractions[j]):>11} "
              f"{float(proj.exact_weights[j]):>11.4f} "
              f"{float(avg.exact_weights[j]):>10.4f}")

# Random placement rarely keeps whole lines strong, so the projection
# weight usually sits at alpha while averaging sits at the mixture mean.
# A laminate with the same fractions would close the gap completely.

field = random_field(inter, period=PERIOD,
                     theta=(THETA,) * inter.count, seed=SEEDS[0])
avg = averaging_bound(field)
proj = projection_bound(field)

# Is the averaging density itself achievable at these fractions?  And a
# density 10% above it?  The LP says: anything between the projection and
# averaging envelopes is consistent with the bounds at this fraction.
candidates = {
    "averaging density": list(zip(avg.density.vectors, avg.density.weights)),
    "averaging * 1.10": [
        (v, 1.10 * w) for v, w in zip(avg.density.vectors,
                                      avg.density.weights)
    ],
    "projection density": list(zip(proj.density.vectors,
                                   proj.density.weights)),
}
theta_mean = float(volume_fractions(field).average)
print(f"\nmembership at average strong fraction {theta_mean}:")
for name, samples in candidates.items():
    res = membership_test(inter, theta_mean, samples)
    print(f"  {name:<20} feasible={res.feasible}")
