import argparse
import logging
import math
import sys

import numpy as np

from .bell_engine import evaluate, quantum_max_fixed_measurements, seesaw_max
from .bounds_engine import BoundModel, classify_value, local_bound, pnc_bound
from .errors import CertificationError, UsageError
from .jm_engine import critical_eta_from_bounds, is_valid_parent, jm_threshold
from .qubit_algebra import BlochVec
from .reports import FORMATS, Report, ScanReport, ScanRow, Verdict, render
from .scenario_model import (
    BUILTIN_SCENARIOS,
    ORTHOGONAL_AXES,
    SIC_AXES,
    TRINE_AXES,
    builtin_scenario,
    read_scenario,
    smear,
)
from .settings import Settings, load_settings
from .steering_engine import (
    SteeringForm,
    assemblage_of,
    build_uniform_lhs,
    linear_steering_bound,
    steering_value,
    verify_lhs,
)

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)

# --- Reference Values ---
# Published numbers for the trine functional Delta_3 and the elegant functional B_3.
REFERENCE = {
    "delta3_local": 5.0,  # (Delta_3)_local <= 5
    "delta3_pnc": 4.0,  # (Delta_3)_pnc <= 4
    "delta3_quantum": 6.0,  # (Delta_3)_Q <= 6, attained with B_x = -A_x
    "b3_local": 6.0,  # (B_3)_local <= 6
    "b3_pnc": 4.0,  # (B_3)_pnc <= 4
    "b3_quantum": 4.0 * SQRT3,  # (B_3)_Q^max = 4 sqrt3
    "delta3_trine_form": 1.5,  # Delta_3 / 4 on the optimal settings; unsteerable bound 1
    "b3_linear_form": SQRT3,  # B_3 / 4 on the optimal settings; unsteerable bound 1
    "delta3_eta_local": 5.0 / 6.0,  # no nonlocality for eta <= 5/6
    "delta3_eta_pnc": 2.0 / 3.0,  # no PNC violation for eta <= 2/3
    "b3_eta_local": SQRT3 / 2.0,  # nonlocality needs eta > sqrt3/2
    "b3_eta_pnc": 1.0 / SQRT3,  # no PNC violation for eta <= 1/sqrt3
    "jm_trine": 2.0 / 3.0,  # triple-wise joint measurability of trine axes
    "jm_orthogonal": 1.0 / SQRT3,  # triple-wise joint measurability of three orthogonal axes
}

JM_FAMILIES = {
    "trine": (TRINE_AXES, 2.0 / 3.0),
    "orthogonal": (ORTHOGONAL_AXES, 1.0 / SQRT3),
    "sic": (SIC_AXES, None),
    "pair": ((BlochVec(1.0, 0.0, 0.0), BlochVec(0.0, 0.0, 1.0)), 1.0 / math.sqrt(2.0)),
}


# --- Report ---

def _report_rows(settings: Settings):
    trine = builtin_scenario("trine_delta3")
    elegant = builtin_scenario("elegant_b3")
    precision = settings.jm_precision
    return [
        ("delta3 local bound", "delta3_local", settings.tol, lambda: local_bound(trine.coeffs).bound),
        ("delta3 pnc bound", "delta3_pnc", settings.tol, lambda: pnc_bound(trine.coeffs, trine.relations).bound),
        ("delta3 quantum value", "delta3_quantum", settings.tol, lambda: quantum_max_fixed_measurements(trine)),
        ("b3 local bound", "b3_local", settings.tol, lambda: local_bound(elegant.coeffs).bound),
        ("b3 pnc bound", "b3_pnc", settings.tol, lambda: pnc_bound(elegant.coeffs, elegant.relations).bound),
        ("b3 quantum value", "b3_quantum", settings.tol, lambda: quantum_max_fixed_measurements(elegant)),
        ("delta3 trine_form", "delta3_trine_form", settings.tol, lambda: steering_value(trine, SteeringForm.TRINE)),
        ("b3 linear_form", "b3_linear_form", settings.tol, lambda: steering_value(elegant, SteeringForm.LINEAR)),
        ("delta3 eta local", "delta3_eta_local", settings.threshold_tol,
         lambda: critical_eta_from_bounds(trine, BoundModel.LOCAL).critical_eta),
        ("delta3 eta pnc", "delta3_eta_pnc", settings.threshold_tol,
         lambda: critical_eta_from_bounds(trine, BoundModel.PNC).critical_eta),
        ("b3 eta local", "b3_eta_local", settings.threshold_tol,
         lambda: critical_eta_from_bounds(elegant, BoundModel.LOCAL).critical_eta),
        ("b3 eta pnc", "b3_eta_pnc", settings.threshold_tol,
         lambda: critical_eta_from_bounds(elegant, BoundModel.PNC).critical_eta),
        ("jm threshold trine", "jm_trine", settings.threshold_tol,
         lambda: jm_threshold(TRINE_AXES, precision).critical_eta),
        ("jm threshold orthogonal", "jm_orthogonal", settings.threshold_tol,
         lambda: jm_threshold(ORTHOGONAL_AXES, precision).critical_eta),
    ]


def cmd_report(settings: Settings) -> Report:
    report = Report(scenario_name="trine_delta3+elegant_b3")
    for label, key, tol, compute in _report_rows(settings):
        try:
            value = compute()
        except CertificationError as exc:
            raise CertificationError(f"report row '{label}' failed: {exc}") from exc
        report.add(label, value, REFERENCE[key], tol)
    failed = [row.quantity for row in report.rows if row.verdict is not Verdict.EQUALS]
    if failed:
        report.notes.append(f"rows disagreeing with their reference: {', '.join(failed)}")
    return report


# --- Single-scenario commands ---

def cmd_bounds(source: str, model: str, settings: Settings) -> Report:
    s = read_scenario(source)
    report = Report(scenario_name=s.name)
    if model == "local":
        cert = local_bound(s.coeffs)
        report.add("local bound", cert.bound, detail=cert.as_dict())
    elif model == "pnc":
        if not s.relations:
            raise UsageError(f"scenario '{s.name}' declares no functional relations; the pnc bound needs at least one")
        cert = pnc_bound(s.coeffs, s.relations)
        report.add("pnc bound", cert.bound, detail=cert.as_dict())
    else:
        report.add("quantum value (fixed measurements)", quantum_max_fixed_measurements(s),
                   detail={"state_value": evaluate(s).value})
        result = seesaw_max(s.coeffs, restarts=settings.restarts, seed=settings.seed)
        report.add(
            "quantum value (see-saw)",
            result.value,
            detail={"iterations": result.iterations, "converged": result.converged, "restarts": settings.restarts},
        )
        if not result.converged:
            report.notes.append("best see-saw restart did not converge")
    return report


def cmd_steering(source: str, form: str, settings: Settings) -> Report:
    s = read_scenario(source)
    report = Report(scenario_name=s.name)
    value = steering_value(s, form)
    bob_bound = linear_steering_bound([o.with_eta(1.0) for o in s.bob])
    report.add(form, value, 1.0, settings.tol, detail={"linear_steering_bound": bob_bound})
    if all(o.sharp for o in s.alice):
        model = build_uniform_lhs(s.alice, s.state)
        if model is None:
            report.notes.append("no mixture identity among Alice's observables; no uniform hidden-state model")
        else:
            error = verify_lhs(assemblage_of(s.state, s.alice, "nontrivial"), model)
            report.add("uniform lhs reconstruction error", error, detail={"hidden_states": len(model.weights)})
    return report


def cmd_jm(target: str, precision: float, settings: Settings) -> Report:
    if target in JM_FAMILIES:
        axes, reference = JM_FAMILIES[target]
    else:
        axes, reference = tuple(o.axis for o in read_scenario(target).alice), None
    threshold = jm_threshold(axes, precision)
    witness = threshold.witness
    detail = {"method": threshold.method.value, "bisection_steps": len(threshold.trace)}
    if witness is not None:
        detail.update(
            witness_eta=witness.eta,
            witness_weights=[float(g) for g in witness.weights],
            witness_valid=is_valid_parent(witness),
        )
    report = Report(scenario_name=target)
    report.add("jm threshold", threshold.critical_eta, reference, settings.threshold_tol, detail=detail)
    report.notes.append(threshold.caveat)
    return report


def cmd_scan(source: str, side: str, start: float, stop: float, steps: int, settings: Settings) -> ScanReport:
    if not 0.0 <= start < stop <= 1.0 or steps < 1:
        raise UsageError(f"scan needs 0 <= from < to <= 1 and steps >= 1, got from={start} to={stop} steps={steps}")
    s = read_scenario(source)
    local = local_bound(s.coeffs).bound
    pnc = pnc_bound(s.coeffs, s.relations).bound if s.relations else None
    scan = ScanReport(scenario_name=s.name, side=side)
    for eta in np.linspace(start, stop, steps + 1):
        quantum = quantum_max_fixed_measurements(smear(s, side, float(eta)))
        regime = classify_value(quantum, local, local if pnc is None else pnc, settings.tol)
        scan.rows.append(ScanRow(eta=float(eta), quantum=quantum, local=local, pnc=pnc, regime=regime.value))
    # crossings are taken against the scanned side at eta=1, the other side keeps its sharpness
    top = quantum_max_fixed_measurements(smear(s, side, 1.0))
    for name, bound in (("local", local), ("pnc", pnc)):
        if bound is None:
            continue
        if top <= 0.0 or bound / top > 1.0:
            logger.info("No %s crossing on the %s sweep of '%s'", name, side, s.name)
            continue
        scan.crossings[name] = bound / top
    return scan


# --- Command line ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contextuality_certification",
        description="Bell, steering and preparation-noncontextuality certificates for qubit scenarios",
    )
    parser.add_argument("--format", choices=FORMATS, default="text", help="Output format (default: text)")
    parser.add_argument("--seed", type=int, default=None, help="See-saw seed (default: PNC_SEED)")
    parser.add_argument("--tol", type=float, default=None, help="Report comparison tolerance (default: PNC_TOL)")
    parser.add_argument("--restarts", type=int, default=None, help="See-saw restarts (default: PNC_RESTARTS)")
    parser.add_argument("--log-level", default=None, help="Logging level (default: PNC_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("report", help="Reproduce every published quantity")

    bounds = sub.add_parser("bounds", help="Local, noncontextual or quantum bound of a scenario")
    bounds.add_argument("scenario", help=f"Built-in name ({', '.join(BUILTIN_SCENARIOS)}) or scenario file")
    bounds.add_argument("model", choices=["local", "pnc", "quantum"])

    steering = sub.add_parser("steering", help="Steering functional value against the unsteerable bound 1")
    steering.add_argument("scenario")
    steering.add_argument("form", choices=[f.value for f in SteeringForm])

    jm = sub.add_parser("jm", help="Joint-measurability threshold of Alice's axes")
    jm.add_argument("target", help=f"Family ({', '.join(JM_FAMILIES)}) or scenario file")
    jm.add_argument("--precision", type=float, default=None, help="Bisection precision (default: PNC_JM_PRECISION)")

    scan = sub.add_parser("scan", help="Quantum value and classical bounds along an unsharpness sweep")
    scan.add_argument("scenario")
    scan.add_argument("--side", choices=["alice", "bob"], default="alice")
    scan.add_argument("--from", dest="start", type=float, default=0.0)
    scan.add_argument("--to", dest="stop", type=float, default=1.0)
    scan.add_argument("--steps", type=int, default=10, help="Number of intervals")
    return parser


def resolve_settings(args: argparse.Namespace) -> Settings:
    settings = load_settings()
    overrides = {
        "seed": args.seed,
        "tol": args.tol,
        "restarts": args.restarts,
        "log_level": args.log_level,
        "jm_precision": getattr(args, "precision", None),
    }
    overrides = {key: value for key, value in overrides.items() if value is not None}
    try:
        return Settings(**{**settings.model_dump(), **overrides})
    except ValueError as exc:
        raise UsageError(f"invalid option: {exc}") from exc


def run(args: argparse.Namespace, settings: Settings):
    if args.command == "report":
        return cmd_report(settings)
    if args.command == "bounds":
        return cmd_bounds(args.scenario, args.model, settings)
    if args.command == "steering":
        return cmd_steering(args.scenario, args.form, settings)
    if args.command == "jm":
        return cmd_jm(args.target, settings.jm_precision, settings)
    return cmd_scan(args.scenario, args.side, args.start, args.stop, args.steps, settings)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args)
    except (UsageError, RuntimeError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return UsageError.exit_code
    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        result = run(args, settings)
    except CertificationError as exc:
        print(f"Error during {args.command}: {exc}", file=sys.stderr)
        logger.debug("%s failed", args.command, exc_info=exc)
        return exc.exit_code
    sys.stdout.write(render(result, args.format))
    if args.command == "report" and result.notes:
        print(f"Error during report: {'; '.join(result.notes)}", file=sys.stderr)
        return CertificationError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
