"""Pinned ground states of a small random bond mixture, two ways.

A ball of lattice sites is pinned to +/-1 outside by a sharp half-space
trace; inside, spins relax to minimize the bond-incident interface energy

    E(u) = 1/4 sum_i sum_xi c_(i,xi) (u_i - u_(i+xi))^2 .

The min-cut solver and a brute-force enumeration over all 2^n interior
assignments must agree exactly; this script shows both values, the spin
pattern the solver returns, and the exact integer bookkeeping behind the
floating-point value.
"""

from fractions import Fraction

import numpy as np

from bondmix import (
    HalfSpaceTrace,
    InteractionSet,
    ball_region,
    brute_force_ground_state,
    evaluate_energy,
    random_field,
    solve_ground_state,
)

SEED = 42
PERIOD = 3
THETA = Fraction(1, 2)       # strong-bond fraction per direction
CENTER = (0.0, 0.0)
RADIUS = 2.2                 # 13 free sites -> 8192 states to enumerate
NORMAL = (0.6, 0.8)

inter = InteractionSet.with_diagonals(alpha=1.0, beta=2.0)
field = random_field(inter, period=PERIOD,
                     theta=(THETA,) * inter.count, seed=SEED)
trace = HalfSpaceTrace(CENTER, NORMAL)

res = solve_ground_state(field, CENTER, RADIUS, trace)
oracle = brute_force_ground_state(field, CENTER, RADIUS, trace)

print(f"window: |i - {CENTER}| < {RADIUS}, {res.n_free} free sites, "
      f"{res.n_pairs} interacting pairs")
print(f"min-cut value     : {res.value}  "
      f"(= {res.units} integer units / scale {res.scale}, "
      f"exact={res.exact})")
print(f"enumerated minimum: {oracle.value}")
print(f"agreement         : {res.value == oracle.value}")

# The returned state must reproduce the value through the independent
# energy functional evaluated on the same region.
region = ball_region(CENTER, RADIUS)
energy = evaluate_energy(field, res.state, trace, region)
print(f"energy of returned state: {energy}")

# Render the canonical minimizer on its window: free sites (inside the
# ball) as +/-, pinned boundary sites in parentheses-free lowercase.
state = res.state
print("\nground state (rows are y descending; pinned sites lowercased):")
for y in range(state.hi[1] - 1, state.lo[1] - 1, -1):
    row = []
    for x in range(state.lo[0], state.hi[0]):
        s = int(state.values_at(np.array([[x, y]]))[0])
        inside = (x - CENTER[0]) ** 2 + (y - CENTER[1]) ** 2 < RADIUS ** 2
        glyph = "+" if s > 0 else "-"
        row.append(glyph if inside else ("p" if s > 0 else "m"))
    print("   " + " ".join(row))
