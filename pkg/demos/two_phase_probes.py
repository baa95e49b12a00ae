"""Local surface tension of a composite that is weak on one side, strong
on the other.

A macroscopic fraction profile (piecewise constant on dyadic cells) is
synthesized into a concrete bond field at lattice spacing eps.  Local
probes then measure the tension of a ball that is small next to the
domain but large next to the lattice:  eps << rho << 1.  Inside each
phase the probe must reproduce that phase's homogeneous tension; the
coarse-grained fractions theta_hat certify the mixture sandwich

    sum_xi alpha |<nu,xi>| - s  <=  probe  <=
        sum_xi (theta_hat beta + (1-theta_hat) alpha) |<nu,xi>| + s .
"""

import numpy as np

from bondmix import (
    InteractionSet,
    Label,
    MacroProfile,
    coarse_grain_theta,
    exact_homogeneous_tension,
    local_tension,
    run_local_probes,
    synthesize_field,
)

SITES_PER_CELL = 32
RHO_SITES = 32          # probe radius in lattice units
SLACK_CONSTANT = 8.0    # finite-size allowance C; sandwich slack is C/(rho/eps)

inter = InteractionSet.nearest_neighbor(2, alpha=1.0, beta=2.0)

# Left half weak (theta = 0), right half strong (theta = 1), on an
# 8 x 4 grid of dyadic cells of side 1/4: the domain is [0,2] x [0,1].
theta = np.zeros((8, 4))
theta[4:, :] = 1.0
profile = MacroProfile(level=2, theta=theta)
epsilon = profile.cell_size / SITES_PER_CELL
sample = synthesize_field(profile, inter, epsilon, delta=0.0)
print(f"domain {profile.domain_lo} .. {profile.domain_hi}, "
      f"eps = {epsilon}, {SITES_PER_CELL} sites per cell")

# --- coarse graining reads the profile back off the lattice --------------
grain = coarse_grain_theta(sample, h=profile.cell_size)
print("\ncoarse-grained strong fraction (axis-0 direction), rows of cells:")
print(np.array2string(grain.per_direction[0], precision=2))

# --- probes inside each phase ---------------------------------------------
rho = RHO_SITES * epsilon
directions = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0))
probe_cells = {(2, 1): Label.ALPHA, (2, 2): Label.ALPHA,
               (5, 1): Label.BETA, (5, 2): Label.BETA}

print(f"\nlocal probes at rho/eps = {RHO_SITES}:")
print(f"{'cell':>8} {'direction':>14} {'probe':>9} {'phase exact':>12}")
for cell, label in probe_cells.items():
    x = profile.cell_center(cell)
    for nu in directions:
        probe = local_tension(sample, x, nu, rho)
        exact = exact_homogeneous_tension(inter, label, nu)
        print(f"{str(cell):>8} {str(nu):>14} {probe.value:9.5f} "
              f"{exact:12.5f}")

report = run_local_probes(
    sample, h=profile.cell_size, probe_cells=tuple(probe_cells),
    directions=directions, rho=rho, slack_constant=SLACK_CONSTANT,
)
print(f"\nmixture sandwich with slack {SLACK_CONSTANT}/(rho/eps) = "
      f"{SLACK_CONSTANT / RHO_SITES}: all_ok = {report.all_ok}")
