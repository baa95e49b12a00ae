"""File-driven command line front end.

Usage: ``bondmix <subcommand> <config-file>``

Subcommands: ``tension`` (direction sweep of one field), ``bounds``
(mixture-bound report), ``design`` (microgeometry synthesis + audit),
``localize`` (profile synthesis + local probes), ``verify`` (exact solver
vs. enumeration oracle on small balls), ``sweep`` (a family of designs
over a fraction grid).

Config files hold one ``key = value`` pair per line; ``#`` starts a
comment. Paths inside a config resolve relative to the config file, so
archived runs stay reproducible from any working directory. Every run
writes its artifacts into the configured output directory plus a
``manifest.json`` carrying the config hash, the package version, and a
sha256 per emitted file; reruns with an identical config are bit-identical
(randomized generators therefore require an explicit ``seed``).

Exit codes: 0 success, 2 malformed config, 3 verification failure (files
are still emitted). Errors print as a single machine-parsable stderr line.
The only environment variable honored is ``BONDMIX_THREADS`` (caps the
linear-algebra thread pools).
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .bounds import averaging_bound, membership_test, projection_bound
from .design import (
    DesignTarget,
    design_microstructure,
    psi_density,
    verify_design,
)
from .errors import BondmixError
from .lattice import (
    InteractionSet,
    Label,
    evaluate_energy,
    field_hash,
    field_to_text,
    homogeneous_field,
    laminate_field,
    random_field,
    read_field_file,
    volume_fractions,
)
from .localize import (
    MacroProfile,
    probes_to_csv,
    report_to_json,
    run_local_probes,
    synthesize_field,
)
from .mincut import brute_force_ground_state, solve_ground_state
from .lattice import HalfSpaceTrace, ball_region
from .tension import Schedule, direction_sweep, polygon_to_text, sweep_to_csv

__all__ = ["main", "main_entry", "parse_config"]


class ConfigError(Exception):
    """Malformed configuration; maps to exit code 2."""


class VerificationFailure(Exception):
    """A verification subcommand found a violation; maps to exit code 3."""


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; later duplicates are rejected."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass
class RunContext:
    cfg: dict[str, str]
    base_dir: Path
    config_bytes: bytes
    used: set = dc_field(default_factory=set)

    _MISSING = object()

    def raw(self, key: str, default=_MISSING) -> str:
        self.used.add(key)
        if key in self.cfg:
            return self.cfg[key]
        if default is RunContext._MISSING:
            raise ConfigError(f"missing required key {key!r}")
        return default

    def get_int(self, key: str, default=_MISSING) -> int:
        val = self.raw(key, default)
        if isinstance(val, int) or val is None:
            return val
        try:
            return int(val)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: expected integer") from exc

    def get_float(self, key: str, default=_MISSING) -> float:
        val = self.raw(key, default)
        if isinstance(val, float) or val is None:
            return val
        try:
            return float(Fraction(val))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"key {key!r}: expected number") from exc

    def get_fraction(self, key: str, default=_MISSING) -> Fraction:
        val = self.raw(key, default)
        if isinstance(val, Fraction) or val is None:
            return val
        try:
            return Fraction(val)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"key {key!r}: expected rational") from exc

    def get_bool(self, key: str, default=_MISSING) -> bool:
        val = self.raw(key, default)
        if isinstance(val, bool):
            return val
        if val in ("true", "yes", "1"):
            return True
        if val in ("false", "no", "0"):
            return False
        raise ConfigError(f"key {key!r}: expected true/false")

    def get_floats(self, key: str, default=_MISSING) -> tuple[float, ...]:
        val = self.raw(key, default)
        if not isinstance(val, str):
            return val
        try:
            return tuple(float(Fraction(tok)) for tok in val.split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"key {key!r}: expected number list") from exc

    def get_fractions(self, key: str, default=_MISSING) -> tuple[Fraction, ...]:
        val = self.raw(key, default)
        if not isinstance(val, str):
            return val
        try:
            return tuple(Fraction(tok) for tok in val.split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"key {key!r}: expected rational list") from exc

    def get_vectors(self, key: str, default=_MISSING, dtype=float) -> tuple:
        val = self.raw(key, default)
        if not isinstance(val, str):
            return val
        try:
            return tuple(
                tuple(dtype(Fraction(tok)) for tok in group.split(","))
                for group in val.split(";")
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"key {key!r}: expected vector list") from exc

    def path(self, key: str, default=_MISSING) -> Path:
        val = self.raw(key, default)
        if val is None:
            return val
        return (self.base_dir / str(val)).resolve()

    def reject_unknown(self) -> None:
        unknown = sorted(set(self.cfg) - self.used)
        if unknown:
            raise ConfigError(f"unknown keys: {', '.join(unknown)}")


class Emitter:
    """Collects output files and writes the manifest last."""

    def __init__(self, out_dir: Path, command: str, config_bytes: bytes):
        self.out_dir = out_dir
        self.command = command
        self.config_sha = hashlib.sha256(config_bytes).hexdigest()
        self.outputs: dict[str, str] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, text: str) -> None:
        data = text.encode()
        (self.out_dir / name).write_bytes(data)
        self.outputs[name] = hashlib.sha256(data).hexdigest()

    def emit_json(self, name: str, payload) -> None:
        self.emit(name, json.dumps(payload, sort_keys=True, indent=2) + "\n")

    def finish(self) -> None:
        manifest = {
            "command": self.command,
            "config_sha256": self.config_sha,
            "version": __version__,
            "outputs": self.outputs,
        }
        (self.out_dir / "manifest.json").write_bytes(
            (json.dumps(manifest, sort_keys=True, indent=2) + "\n").encode()
        )


# ---------------------------------------------------------------------------
# shared constructors
# ---------------------------------------------------------------------------


def _interactions(ctx: RunContext) -> InteractionSet:
    family = ctx.raw("family", "nn")
    alpha = ctx.get_float("alpha", 1.0)
    beta = ctx.get_float("beta", 2.0)
    if family == "nn":
        dim = ctx.get_int("dim", 2)
        return InteractionSet.nearest_neighbor(dim, alpha=alpha, beta=beta)
    if family in ("nn+diag", "nn-diag"):
        return InteractionSet.with_diagonals(alpha=alpha, beta=beta)
    raise ConfigError(f"unknown interaction family {family!r}")


def _field(ctx: RunContext):
    if "field" in ctx.cfg:
        path = ctx.path("field")
        try:
            return read_field_file(path)
        except FileNotFoundError as exc:
            raise ConfigError(f"field file not found: {path}") from exc
    generator = ctx.raw("generator", None)
    if generator is None:
        raise ConfigError("need either field = <path> or generator = <kind>")
    inter = _interactions(ctx)
    if generator == "homogeneous":
        phase = ctx.raw("phase", "alpha")
        if phase not in ("alpha", "beta"):
            raise ConfigError("phase must be alpha or beta")
        label = Label.ALPHA if phase == "alpha" else Label.BETA
        return homogeneous_field(inter, label)
    if generator == "laminate":
        axis = ctx.get_int("axis", 0)
        layers = [int(t) for t in ctx.raw("layers").split(",")]
        return laminate_field(inter, axis, layers)
    if generator == "random":
        if "seed" not in ctx.cfg:
            raise ConfigError("randomized generators require a seed")
        seed = ctx.get_int("seed")
        period = ctx.get_int("period")
        theta = ctx.get_fractions("theta", (Fraction(1, 2),) * inter.count)
        if len(theta) == 1:
            theta = theta * inter.count
        return random_field(inter, period, theta, seed)
    raise ConfigError(f"unknown generator {generator!r}")


def _schedule(ctx: RunContext, default=(16.0, 32.0, 64.0, 128.0)) -> Schedule:
    radii = ctx.get_floats("radii", tuple(default))
    order = ctx.get_int("order", 1 if len(radii) > 1 else 0)
    try:
        return Schedule(tuple(radii), order)
    except BondmixError as exc:
        raise ConfigError(str(exc)) from exc


def _fraction_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_tension(ctx: RunContext, em: Emitter) -> None:
    fld = _field(ctx)
    n = ctx.get_int("directions", 64)
    schedule = _schedule(ctx)
    ctx.reject_unknown()
    sweep = direction_sweep(fld, n, schedule)
    em.emit("sweep.csv", sweep_to_csv(sweep))
    if sweep.vertices is not None:
        em.emit("polygon.txt", polygon_to_text(sweep))


def _cmd_bounds(ctx: RunContext, em: Emitter) -> None:
    fld = _field(ctx)
    ctx.reject_unknown()
    if not fld.is_periodic:
        raise ConfigError("bounds reports need a periodic field")
    inter = fld.interactions
    avg = averaging_bound(fld)
    proj = projection_bound(fld)
    vf = volume_fractions(fld)
    membership = membership_test(
        inter,
        float(vf.average),
        list(zip(proj.density.vectors, proj.density.weights)),
    )
    em.emit_json(
        "bounds.json",
        {
            "directions": [list(v) for v in inter.directions],
            "alpha": list(inter.alpha),
            "beta": list(inter.beta),
            "volume_fractions": [
                _fraction_str(f) for f in vf.per_direction
            ],
            "volume_fraction_average": _fraction_str(vf.average),
            "averaging_weights": list(avg.density.weights),
            "averaging_weights_exact": [
                _fraction_str(f) for f in avg.exact_weights
            ],
            "projection_weights": list(proj.density.weights),
            "projection_weights_exact": [
                _fraction_str(f) for f in proj.exact_weights
            ],
            "pure_line_fractions": [
                _fraction_str(f) for f in proj.pure_line_fractions
            ],
            "projection_membership_feasible": membership.feasible,
        },
    )


def _design_payload(result, report) -> dict:
    return {
        "period": result.period,
        "psi_weights": list(result.psi.weights),
        "targets_t": [
            _fraction_str(f) for f in result.target.coefficient_fractions
        ],
        "targets_theta": [
            _fraction_str(f) for f in result.target.volume_fractions
        ],
        "audits": [
            {
                "direction": list(a.direction),
                "basis": [list(v) for v in a.basis],
                "weak_lines": a.n_weak_lines,
                "strong_lines": a.n_strong_lines,
                "designated_sites": a.designated_sites,
                "alpha_capacity": a.alpha_capacity,
                "filler_bonds": a.filler_bonds,
                "crossing_counts": {
                    ",".join(str(c) for c in v): n
                    for v, n in sorted(a.crossing_counts.items())
                },
                "count_condition_ok": a.count_condition_ok,
                "literal_condition_ok": a.literal_condition_ok,
            }
            for a in result.audits
        ],
        "verification": {
            "fractions_exact": report.fractions_exact,
            "projection_reaches_psi": report.projection_reaches_psi,
            "projection_gaps": [
                _fraction_str(g) for g in report.projection_gaps
            ],
            "tension_checks": [
                {"direction": list(v), "phi_hat": est, "psi": tgt}
                for v, est, tgt in report.tension_checks
            ],
            "max_relative_deviation": report.max_relative_deviation,
            "ok": report.ok,
        },
    }


def _cmd_design(ctx: RunContext, em: Emitter) -> None:
    inter = _interactions(ctx)
    t = ctx.get_fractions("t")
    if len(t) == 1:
        t = t * inter.count
    theta = ctx.get_fractions("theta", None)
    if theta is not None and len(theta) == 1:
        theta = theta * inter.count
    period = ctx.get_int("period", None)
    tolerance = ctx.get_float("tolerance", 0.10)
    schedule = _schedule(ctx, default=(8.0, 16.0, 32.0))
    n_sweep = ctx.get_int("directions", 64)
    ctx.reject_unknown()
    try:
        target = (
            DesignTarget(t, theta)
            if theta is not None
            else DesignTarget(t, t)
        )
        result = design_microstructure(inter, target, period=period)
    except BondmixError as exc:
        raise ConfigError(str(exc)) from exc
    report = verify_design(result, schedule, tolerance)
    em.emit("design_field.txt", field_to_text(result.field))
    em.emit_json("design_audit.json", _design_payload(result, report))
    sweep = direction_sweep(result.field, n_sweep, schedule)
    em.emit("design_sweep.csv", sweep_to_csv(sweep))
    if sweep.vertices is not None:
        em.emit("design_polygon.txt", polygon_to_text(sweep))
    if not report.ok:
        raise VerificationFailure(
            "design verification failed: max relative deviation "
            f"{report.max_relative_deviation:.6f}, tolerance {tolerance}"
        )


def _cmd_localize(ctx: RunContext, em: Emitter) -> None:
    inter = _interactions(ctx)
    level = ctx.get_int("level")
    rows = ctx.get_vectors("profile", dtype=float)
    theta = np.array(rows, dtype=np.float64)
    sites = ctx.get_int("sites_per_cell", 16)
    delta = ctx.get_float("delta", 0.1)
    try:
        profile = MacroProfile(level=level, theta=theta)
        eps = profile.cell_size / sites
        h = ctx.get_float("h", profile.cell_size)
        rho = ctx.get_float("rho", 16 * eps)
        probe_cells = ctx.get_vectors("probe_cells", dtype=int)
        probe_dirs = ctx.get_vectors(
            "probe_directions", ((1.0, 0.0),), dtype=float
        )
        slack = ctx.get_float("slack_constant", None)
        ctx.reject_unknown()
        sample = synthesize_field(profile, inter, eps, delta)
        report = run_local_probes(
            sample, h, probe_cells, probe_dirs, rho, slack
        )
    except BondmixError as exc:
        raise ConfigError(str(exc)) from exc
    em.emit("local_report.json", report_to_json(report))
    em.emit("probes.csv", probes_to_csv(report.probes))
    if not report.all_ok:
        raise VerificationFailure("local sandwich violated by a probe")


def _verify_trace_directions() -> tuple[tuple[float, float], ...]:
    return ((1.0, 0.0), (0.0, 1.0), (math.sqrt(0.5), math.sqrt(0.5)),
            (0.6, 0.8))


def _cmd_verify(ctx: RunContext, em: Emitter) -> None:
    if "seed" not in ctx.cfg:
        raise ConfigError("verify is randomized and requires a seed")
    seed = ctx.get_int("seed")
    cases = ctx.get_int("cases", 20)
    period = ctx.get_int("period", 3)
    radius = ctx.get_float("radius", 2.2)
    alpha = ctx.get_float("alpha", 1.0)
    beta = ctx.get_float("beta", 2.0)
    ctx.reject_unknown()
    families = (
        InteractionSet.nearest_neighbor(2, alpha=alpha, beta=beta),
        InteractionSet.with_diagonals(alpha=alpha, beta=beta),
    )
    dirs = _verify_trace_directions()
    rows = []
    all_equal = True
    for k in range(cases):
        inter = families[k % 2]
        fld = random_field(
            inter, period, (Fraction(1, 2),) * inter.count, seed + k
        )
        nu = dirs[k % len(dirs)]
        trace = HalfSpaceTrace((0.0, 0.0), nu)
        res = solve_ground_state(fld, (0.0, 0.0), radius, trace)
        oracle = brute_force_ground_state(fld, (0.0, 0.0), radius, trace)
        region = ball_region((0.0, 0.0), radius)
        energy = evaluate_energy(fld, res.state, trace, region)
        match = bool(
            res.value == oracle.value
            and math.isclose(energy, res.value, rel_tol=0, abs_tol=1e-9)
        )
        all_equal = all_equal and match
        rows.append(
            {
                "case": k,
                "family": "nn" if k % 2 == 0 else "nn+diag",
                "direction": list(nu),
                "value": res.value,
                "oracle": oracle.value,
                "state_energy": energy,
                "equal": match,
            }
        )
    em.emit_json(
        "verify.json",
        {
            "seed": seed,
            "cases": rows,
            "all_equal": all_equal,
            "radius": radius,
            "period": period,
        },
    )
    if not all_equal:
        raise VerificationFailure("solver disagreed with the oracle")


def _cmd_sweep(ctx: RunContext, em: Emitter) -> None:
    inter = _interactions(ctx)
    thetas = ctx.get_fractions("thetas")
    n_sweep = ctx.get_int("directions", 64)
    schedule = _schedule(ctx, default=(8.0, 16.0, 32.0))
    ctx.reject_unknown()
    summary = []
    for t in thetas:
        try:
            result = design_microstructure(
                inter, DesignTarget.uniform(inter.count, t)
            )
        except BondmixError as exc:
            raise ConfigError(str(exc)) from exc
        tag = f"{t.numerator}_{t.denominator}"
        em.emit(f"design_theta_{tag}.txt", field_to_text(result.field))
        sweep = direction_sweep(result.field, n_sweep, schedule)
        em.emit(f"sweep_theta_{tag}.csv", sweep_to_csv(sweep))
        if sweep.vertices is not None:
            em.emit(f"polygon_theta_{tag}.txt",
                    polygon_to_text(sweep))
        summary.append(
            {
                "theta": _fraction_str(t),
                "period": result.period,
                "psi_weights": list(result.psi.weights),
                "phi_hat_max": float(np.max(sweep.values)),
                "phi_hat_min": float(np.min(sweep.values)),
            }
        )
    em.emit_json("sweep_summary.json", {"designs": summary})


_COMMANDS: dict[str, Callable[[RunContext, Emitter], None]] = {
    "tension": _cmd_tension,
    "bounds": _cmd_bounds,
    "design": _cmd_design,
    "localize": _cmd_localize,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
}


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def _apply_thread_env() -> None:
    threads = os.environ.get("BONDMIX_THREADS")
    if threads is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, threads)


def _fail(kind: str, message: str) -> None:
    flat = " ".join(str(message).split())
    sys.stderr.write(f"bondmix: error={kind} message={flat!r}\n")


def main(argv: Sequence[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    _apply_thread_env()
    if len(args) != 2 or args[0] in ("-h", "--help"):
        sys.stderr.write(
            "usage: bondmix <tension|bounds|design|localize|verify|sweep>"
            " <config-file>\n"
        )
        return 0 if args and args[0] in ("-h", "--help") else 2
    command, config_path = args
    if command not in _COMMANDS:
        _fail("config", f"unknown subcommand {command!r}")
        return 2
    path = Path(config_path)
    try:
        config_bytes = path.read_bytes()
    except OSError as exc:
        _fail("config", f"cannot read config: {exc}")
        return 2
    try:
        cfg = parse_config(config_bytes.decode())
        ctx = RunContext(cfg=cfg, base_dir=path.resolve().parent,
                         config_bytes=config_bytes)
        out_dir = ctx.path("out", ".")
        em = Emitter(out_dir, command, config_bytes)
        _COMMANDS[command](ctx, em)
    except ConfigError as exc:
        _fail("config", str(exc))
        return 2
    except BondmixError as exc:
        _fail("config", str(exc))
        return 2
    except VerificationFailure as exc:
        em.finish()
        _fail("verification", str(exc))
        return 3
    em.finish()
    return 0


def main_entry() -> None:
    raise SystemExit(main())
