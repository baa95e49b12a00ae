"""Interface energies of two-phase bond mixtures on the integer lattice.

Subpackage map:

- ``lattice``  -- bond fields, spin states, regions, energy evaluation
- ``mincut``   -- pinned ball ground states via max-flow, brute-force oracle
- ``tension``  -- directional interface tension estimates and sweeps
- ``bounds``   -- averaging / projection bounds, membership and envelopes
- ``design``   -- microgeometries attaining the projection bound
- ``localize`` -- macroscopic profiles, synthesized fields, local probes
- ``cli``      -- file-driven command line front end
"""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    BondmixError,
    DegenerateRegionError,
    InvalidBasisError,
    InvalidTargetError,
    OutOfDomainError,
    PeriodSearchError,
    PreconditionError,
    RationalDirectionError,
    SizeLimitError,
    UnsupportedFieldError,
    ValidationError,
)
from .bounds import (
    AveragingBound,
    CrystallineDensity,
    MembershipResult,
    ProjectionBound,
    SupportDensity,
    averaging_bound,
    crystalline_approx,
    membership_test,
    projection_bound,
    support_envelope,
)
from .tension import (
    CalibrationResult,
    Schedule,
    SweepResult,
    TensionEstimate,
    calibrate_slack,
    direction_sweep,
    estimate_phi,
    estimate_phi_affine,
    exact_homogeneous_tension,
    flat_section_measure,
    polygon_to_text,
    sweep_to_csv,
)
from .mincut import (
    CutInstance,
    CutResult,
    brute_force_ground_state,
    build_instance,
    instance_to_text,
    solve_ground_state,
)
from .design import (
    DesignReport,
    DesignResult,
    DesignTarget,
    DirectionAudit,
    choose_period,
    count_C,
    design_microstructure,
    orthogonal_basis,
    psi_density,
    psi_exact_weights,
    verify_design,
)
from .localize import (
    CoarseGrain,
    LocalReport,
    LocalTension,
    MacroProfile,
    RegularityReport,
    SynthesizedField,
    coarse_grain_theta,
    local_tension,
    m_regularity_probe,
    probes_to_csv,
    regularity_constant,
    report_to_json,
    run_local_probes,
    seam_allowance,
    synthesize_field,
)
from .lattice import (
    BondField,
    HalfSpaceTrace,
    InteractionSet,
    Label,
    PeriodicBondField,
    SpinState,
    VolumeFractions,
    WindowBondField,
    ball_region,
    box_region,
    evaluate_energy,
    explicit_field,
    field_from_text,
    field_hash,
    field_to_text,
    homogeneous_field,
    laminate_field,
    random_field,
    read_field_file,
    volume_fractions,
    window_field,
    write_field_file,
)

__all__ = [
    "__version__",
    "BondmixError",
    "ValidationError",
    "PreconditionError",
    "UnsupportedFieldError",
    "DegenerateRegionError",
    "SizeLimitError",
    "RationalDirectionError",
    "InvalidBasisError",
    "InvalidTargetError",
    "PeriodSearchError",
    "OutOfDomainError",
    "CutInstance",
    "CutResult",
    "build_instance",
    "solve_ground_state",
    "brute_force_ground_state",
    "instance_to_text",
    "Schedule",
    "TensionEstimate",
    "SweepResult",
    "CalibrationResult",
    "flat_section_measure",
    "exact_homogeneous_tension",
    "estimate_phi",
    "estimate_phi_affine",
    "direction_sweep",
    "sweep_to_csv",
    "polygon_to_text",
    "calibrate_slack",
    "CrystallineDensity",
    "SupportDensity",
    "AveragingBound",
    "ProjectionBound",
    "MembershipResult",
    "averaging_bound",
    "projection_bound",
    "membership_test",
    "crystalline_approx",
    "support_envelope",
    "DesignTarget",
    "DesignResult",
    "DesignReport",
    "DirectionAudit",
    "orthogonal_basis",
    "count_C",
    "choose_period",
    "design_microstructure",
    "psi_density",
    "psi_exact_weights",
    "verify_design",
    "MacroProfile",
    "SynthesizedField",
    "CoarseGrain",
    "LocalTension",
    "LocalReport",
    "RegularityReport",
    "synthesize_field",
    "coarse_grain_theta",
    "local_tension",
    "regularity_constant",
    "seam_allowance",
    "m_regularity_probe",
    "run_local_probes",
    "report_to_json",
    "probes_to_csv",
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
