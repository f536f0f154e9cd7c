"""Command-line entry point: ``mbqc-nogo <command> [options]``.

Commands: ``cluster-wire``, ``aklt-retry``, ``audit``, ``certify-bound``.
Exit codes: 0 all checks pass, 1 a physics check failed (only reachable
through ``--counterfactual``), 2 usage or scenario error.

The JSON report is deterministic for a fixed scenario and seed; wall time
is printed with the human-readable table only.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import aklt, cluster, core, nosignal, qmath
from .expressions import (
    ExpressionError,
    format_angle,
    parse_angle,
    parse_angles,
    parse_state,
    parse_unitary,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
AKLT_MAX_ENUM_R = 12
SIGMA_LIMIT = 5.0


class ScenarioError(ValueError):
    pass


# --------------------------------------------------------------------------
# deterministic JSON
# --------------------------------------------------------------------------


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError("non-finite float in report")
        return format(x, ".17g")
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag])
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(report) + "\n"


# --------------------------------------------------------------------------
# scenarios
# --------------------------------------------------------------------------


@dataclass
class WireSpec:
    angles: tuple[float, ...]
    feed_forward: bool = True


@dataclass
class Scenario:
    backend: str = "cluster"
    n: int | None = None
    programs: list[WireSpec] = field(default_factory=list)
    sigma: np.ndarray | None = None
    sigma_text: object = "+"
    target: np.ndarray | None = None
    r: int = 1
    theta: float = 0.0
    U: object = "I"
    V: object = "I"
    povms: list = field(default_factory=lambda: ["Z", "X"])
    mode: str = "enumerate"
    seed: int | None = None
    shots: int = 1000
    tol: float = nosignal.EQUALITY_TOL
    workers: int = 1
    counterfactual: bool = False
    output: str | None = None

    def logical_sigma(self) -> np.ndarray:
        return self.sigma if self.sigma is not None else qmath.projector(qmath.KET_PLUS)


def _wire_from_json(obj) -> WireSpec:
    if isinstance(obj, dict):
        ff = obj.get("feed_forward", True)
        if "steps" in obj:
            angles = tuple(parse_angle(s["angle"] if isinstance(s, dict) else s) for s in obj["steps"])
        else:
            angles = parse_angles(obj.get("angles", []))
        return WireSpec(angles, bool(ff))
    return WireSpec(parse_angles(obj))


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    return scenario_from_dict(data)


def scenario_from_dict(data: dict) -> Scenario:
    sc = Scenario()
    try:
        sc.backend = data.get("backend", sc.backend)
        resource = data.get("resource", {})
        if resource:
            if resource.get("type", "cluster") != "cluster":
                raise ScenarioError("only cluster wire resources are supported in scenario files")
            if "n" in resource:
                sc.n = int(resource["n"])
        if "n" in data:
            sc.n = int(data["n"])
        ff = bool(data.get("feed_forward", True))
        if "programs" in data:
            sc.programs = [_wire_from_json(p) for p in data["programs"]]
        elif "steps" in data or "angles" in data:
            spec = _wire_from_json({k: data[k] for k in ("steps", "angles") if k in data})
            sc.programs = [WireSpec(spec.angles, ff)]
        if "sigma" in data:
            sc.sigma_text = data["sigma"]
            sc.sigma = parse_state(data["sigma"])
        if "target" in data:
            sc.target = parse_unitary(data["target"])
        for key in ("U", "V"):
            if key in data:
                setattr(sc, key, data[key])
        if "bob_povms" in data:
            sc.povms = list(data["bob_povms"])
        if "r" in data:
            sc.r = int(data["r"])
        if "theta" in data:
            sc.theta = parse_angle(data["theta"])
        sc.mode = data.get("mode", sc.mode)
        if "seed" in data:
            sc.seed = int(data["seed"])
        sc.shots = int(data.get("shots", sc.shots))
        sc.tol = float(data.get("tol", sc.tol))
        sc.counterfactual = bool(data.get("counterfactual", False))
        sc.output = data.get("output")
    except (ExpressionError, TypeError, KeyError) as exc:
        raise ScenarioError(str(exc)) from exc
    return sc


def _parse_program_flag(text: str) -> WireSpec:
    angles, _, opts = text.partition(";")
    ff = True
    for opt in filter(None, (o.strip() for o in opts.split(";"))):
        key, _, val = opt.partition("=")
        if key.strip() != "ff" or val.strip() not in ("on", "off"):
            raise ScenarioError(f"bad program option {opt!r}; use ff=on or ff=off")
        ff = val.strip() == "on"
    return WireSpec(parse_angles(angles), ff)


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    sc = load_scenario(args.scenario) if args.scenario else Scenario()
    if args.command == "aklt-retry":
        sc.backend = "aklt"
    elif args.command in ("cluster-wire", "audit"):
        sc.backend = "cluster"
    try:
        if args.n is not None:
            sc.n = args.n
        if getattr(args, "angles", None) is not None:
            ff = sc.programs[0].feed_forward if sc.programs else True
            sc.programs = [WireSpec(parse_angles(args.angles), ff)]
        if getattr(args, "program", None):
            sc.programs = [_parse_program_flag(p) for p in args.program]
        if getattr(args, "no_feed_forward", False):
            sc.programs = [replace(p, feed_forward=False) for p in sc.programs]
        if args.sigma is not None:
            sc.sigma_text = args.sigma
            sc.sigma = parse_state(args.sigma)
        if args.r is not None:
            sc.r = args.r
        if args.theta is not None:
            sc.theta = parse_angle(args.theta)
        if getattr(args, "U", None) is not None:
            sc.U = args.U
        if getattr(args, "V", None) is not None:
            sc.V = args.V
        if args.mode is not None:
            sc.mode = args.mode
        if args.seed is not None:
            sc.seed = args.seed
        if args.shots is not None:
            sc.shots = args.shots
        if args.tol is not None:
            sc.tol = args.tol
        sc.workers = args.workers
        if getattr(args, "counterfactual", False):
            sc.counterfactual = True
        if args.json is not None:
            sc.output = args.json
    except ExpressionError as exc:
        raise ScenarioError(str(exc)) from exc
    if sc.mode not in ("enumerate", "sample"):
        raise ScenarioError(f"mode must be enumerate or sample, got {sc.mode!r}")
    if sc.mode == "sample":
        if sc.seed is None:
            raise ScenarioError("sample mode requires a seed")
        if sc.shots < 1:
            raise ScenarioError("shots must be positive")
    if sc.workers < 1:
        raise ScenarioError("workers must be positive")
    return sc


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------


def _check(name: str, passed: bool, **values) -> dict:
    return {"check": name, "pass": bool(passed), **values}


def _bits(outcomes: Sequence[int]) -> str:
    return "".join(str(o) for o in outcomes) or "-"


def _within_sigma(count: int, shots: int, p: float) -> tuple[bool, float]:
    freq = count / shots
    sd = math.sqrt(p * (1 - p) / shots)
    if sd == 0:
        return freq == p, 0.0
    z = abs(freq - p) / sd
    return z <= SIGMA_LIMIT, z


def _resolve_wire(sc: Scenario, spec: WireSpec) -> tuple[cluster.ClusterWire, cluster.WireProgram]:
    n = sc.n if sc.n is not None else len(spec.angles) + 1
    if n != len(spec.angles) + 1:
        raise ScenarioError(f"a wire of n={n} sites needs {n - 1} angles, got {len(spec.angles)}")
    try:
        wire = cluster.build_cluster(n, sc.logical_sigma())
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    return wire, cluster.WireProgram(spec.angles, spec.feed_forward)


def _sigma_echo(sc: Scenario):
    return sc.sigma_text if isinstance(sc.sigma_text, str) else qmath.matrix_to_json(sc.logical_sigma())


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_cluster_wire(sc: Scenario) -> tuple[dict, int]:
    if not sc.programs:
        sc.programs = [WireSpec(())]
    if len(sc.programs) != 1:
        raise ScenarioError("cluster-wire runs exactly one program")
    spec = sc.programs[0]
    wire, wp = _resolve_wire(sc, spec)
    prog = cluster.wire_program(wp, wire)
    if sc.target is not None and not qmath.same_up_to_phase(sc.target, prog.target):
        raise ScenarioError("scenario target does not match the unitary the angles implement")
    enumerated = core.enumerate_branches(prog, workers=sc.workers)
    ref = prog.reference_state()
    checks = [
        _check(
            "probability_sum",
            abs(core.total_probability(enumerated) - 1) <= 1e-12,
            value=core.total_probability(enumerated),
        )
    ]
    if wp.feed_forward:
        worst = min(
            (qmath.overlap(b.byproduct.matrix() @ ref, b.output_state) for b in enumerated
             if b.probability > core.ZERO_PROBABILITY),
            default=1.0,
        )
        checks.append(_check("byproduct_decomposition", worst >= 1 - 1e-9, min_overlap=worst))
    dist = qmath.trace_distance(core.bob_marginal(prog, enumerated), prog.resource.reduced_output())
    checks.append(_check("marginal_equals_reduced_resource", dist <= sc.tol, trace_distance=dist))

    rows = []
    if sc.mode == "enumerate":
        for b in enumerated:
            rows.append({
                "outcomes": _bits(b.outcomes),
                "probability": b.probability,
                "byproduct": b.byproduct.label if b.byproduct else None,
            })
    else:
        sampled = core.sample_branches(prog, sc.seed, sc.shots)
        counts: dict[tuple[int, ...], int] = {}
        for b in sampled:
            counts[b.outcomes] = counts.get(b.outcomes, 0) + 1
        worst_z = 0.0
        ok = True
        for b in enumerated:
            c = counts.get(b.outcomes, 0)
            within, z = _within_sigma(c, sc.shots, b.probability)
            ok = ok and within
            worst_z = max(worst_z, z)
            if c:
                rows.append({
                    "outcomes": _bits(b.outcomes),
                    "count": c,
                    "frequency": c / sc.shots,
                    "probability": b.probability,
                    "byproduct": b.byproduct.label if b.byproduct else None,
                })
        checks.append(_check("sampling_matches_enumeration", ok, max_z=worst_z, limit=SIGMA_LIMIT))

    passed = all(c["pass"] for c in checks)
    report = {
        "command": "cluster-wire",
        "parameters": {
            "n": wire.n,
            "angles": [format_angle(a) for a in wp.angles],
            "feed_forward": wp.feed_forward,
            "sigma": _sigma_echo(sc),
            "mode": sc.mode,
            "seed": sc.seed if sc.mode == "sample" else None,
            "shots": sc.shots if sc.mode == "sample" else None,
            "tol": sc.tol,
        },
        "target": qmath.matrix_to_json(prog.target),
        "branches": rows,
        "byproduct_census": core.byproduct_census(enumerated),
        "byproduct_free": core.is_byproduct_free(prog, enumerated),
        "checks": checks,
        "verdict": "PASS" if passed else "FAIL",
    }
    return report, EXIT_OK if passed else EXIT_VIOLATION


def cmd_aklt_retry(sc: Scenario) -> tuple[dict, int]:
    r = sc.r
    if sc.mode == "enumerate" and not 1 <= r <= AKLT_MAX_ENUM_R:
        raise ScenarioError(f"r must lie in [1, {AKLT_MAX_ENUM_R}] in enumerate mode")
    if not 1 <= r <= aklt.MAX_R:
        raise ScenarioError(f"r must lie in [1, {aklt.MAX_R}]")
    try:
        psi = qmath.pure_vector(sc.logical_sigma())
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    runs = aklt.enumerate_retry(sc.theta, r, psi)
    target = qmath.z_rotation(sc.theta) @ psi
    expected_fail = aklt.failure_probability(r)
    inst = aklt.instrument(sc.theta)
    corrected = min(
        qmath.overlap(run.byproduct.matrix() @ target, run.output_state)
        for run in runs if run.success
    )
    baseline = aklt.retry_marginal(aklt.enumerate_retry(0.0, r, psi))
    theta_dep = qmath.trace_distance(aklt.retry_marginal(runs), baseline)
    checks = [
        _check("failure_probability_exact", aklt.exact_failure(runs) == expected_fail,
               enumerated=aklt.exact_failure(runs), expected=expected_fail),
        _check("total_probability_exact", sum((x.probability for x in runs), Fraction(0)) == 1),
        _check("kraus_completeness", inst.completeness_residual() <= 1e-12,
               residual=inst.completeness_residual()),
        _check("corrected_success_outputs", corrected >= 1 - 1e-9, min_overlap=corrected),
        _check("marginal_theta_independent", theta_dep <= sc.tol, trace_distance=theta_dep),
    ]
    rows = []
    if sc.mode == "enumerate":
        for run in runs:
            rows.append({
                "outcomes": _bits(run.outcomes),
                "probability": run.probability,
                "success": run.success,
                "byproduct": run.byproduct.label if run.byproduct else None,
                "failure_operator": (qmath.matrix_to_json(run.failure_operator)
                                     if run.failure_operator is not None else None),
            })
    else:
        sampled = aklt.sample_retry(sc.theta, r, psi, sc.seed, sc.shots)
        counts: dict[tuple[int, ...], int] = {}
        for run in sampled:
            counts[run.outcomes] = counts.get(run.outcomes, 0) + 1
        ok = True
        worst_z = 0.0
        for run in runs:
            c = counts.get(run.outcomes, 0)
            within, z = _within_sigma(c, sc.shots, float(run.probability))
            ok = ok and within
            worst_z = max(worst_z, z)
            if c:
                rows.append({
                    "outcomes": _bits(run.outcomes),
                    "count": c,
                    "frequency": c / sc.shots,
                    "probability": run.probability,
                    "success": run.success,
                })
        n_fail = sum(1 for run in sampled if not run.success)
        within, z = _within_sigma(n_fail, sc.shots, float(expected_fail))
        checks.append(_check("sampling_matches_enumeration", ok, max_z=worst_z, limit=SIGMA_LIMIT))
        checks.append(_check("sampled_failure_rate", within, frequency=n_fail / sc.shots,
                             z=z, limit=SIGMA_LIMIT))
    passed = all(c["pass"] for c in checks)
    report = {
        "command": "aklt-retry",
        "parameters": {
            "theta": format_angle(sc.theta),
            "r": r,
            "sigma": _sigma_echo(sc),
            "mode": sc.mode,
            "seed": sc.seed if sc.mode == "sample" else None,
            "shots": sc.shots if sc.mode == "sample" else None,
            "tol": sc.tol,
        },
        "branches": rows,
        "success_probability": 1 - expected_fail,
        "failure_probability": aklt.exact_failure(runs),
        "failure_probability_float": float(aklt.exact_failure(runs)),
        "checks": checks,
        "verdict": "PASS" if passed else "FAIL",
    }
    return report, EXIT_OK if passed else EXIT_VIOLATION


def _povm(spec, dim: int) -> list[np.ndarray]:
    if isinstance(spec, str):
        key = spec.strip().upper()
        if key == "Z":
            return nosignal.z_basis_povm(1)
        if key == "X":
            return nosignal.x_basis_povm()
        if key == "I":
            return nosignal.trivial_povm(dim)
        raise ScenarioError(f"unknown POVM {spec!r}; use Z, X, I or a list of effect matrices")
    try:
        return nosignal.validate_povm([qmath.matrix_from_json(e) for e in spec], dim)
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"bad POVM: {exc}") from exc


def cmd_audit(sc: Scenario) -> tuple[dict, int]:
    if not sc.programs:
        raise ScenarioError("audit needs at least one program")
    lengths = {len(p.angles) for p in sc.programs}
    if len(lengths) != 1:
        raise ScenarioError("programs measure different partitions (different wire lengths)")
    wire, _ = _resolve_wire(sc, sc.programs[0])
    resource = cluster.wire_resource(wire)
    programs = [
        cluster.wire_program(cluster.WireProgram(p.angles, p.feed_forward), wire, resource)
        for p in sc.programs
    ]
    povms = [_povm(p, resource.output_dim) for p in sc.povms]
    exp = nosignal.TwoPartyExperiment(resource, tuple(programs), tuple(tuple(p) for p in povms))
    ns = nosignal.check_no_signaling(exp, sc.tol)
    theorem = nosignal.theorem_check(resource, programs, sc.tol, counterfactual=sc.counterfactual)
    passed = ns["pass"] and theorem["verdict"] == "PASS"
    report = {
        "command": "audit",
        "parameters": {
            "n": wire.n,
            "programs": [
                {"angles": [format_angle(a) for a in p.angles], "feed_forward": p.feed_forward}
                for p in sc.programs
            ],
            "sigma": _sigma_echo(sc),
            "bob_povms": [p if isinstance(p, str) else "custom" for p in sc.povms],
            "tol": sc.tol,
            "counterfactual": sc.counterfactual,
        },
        "vacuous": len(programs) < 2,
        "no_signaling": ns,
        "theorem": theorem,
        "verdict": "PASS" if passed else "FAIL",
    }
    return report, EXIT_OK if passed else EXIT_VIOLATION


def cmd_certify_bound(sc: Scenario) -> tuple[dict, int]:
    try:
        U = parse_unitary(sc.U)
        V = parse_unitary(sc.V)
    except ExpressionError as exc:
        raise ScenarioError(str(exc)) from exc
    sigma = sc.logical_sigma()
    if U.shape != V.shape or U.shape != sigma.shape:
        raise ScenarioError("U, V and sigma must act on the same space")
    if sc.r < 1:
        raise ScenarioError("r must be positive")
    # failure operator of the retry protocol: Z applied r times
    fail = np.linalg.matrix_power(qmath.Z, sc.r) if U.shape == (2, 2) else np.eye(U.shape[0])
    res = aklt.discussion_bound(U, V, sigma, sc.r, fail, fail)
    report = {
        "command": "certify-bound",
        "parameters": {
            "U": sc.U,
            "V": sc.V,
            "sigma": _sigma_echo(sc),
            "r": sc.r,
        },
        "lhs": res.lhs,
        "rhs": res.rhs,
        "certified": res.certified,
        "min_certifying_r": aklt.min_certifying_r(U, V, sigma),
        "signaling_gap": nosignal.byproductfree_signaling_gap(U, V, sigma),
        "verdict": "PASS",
    }
    return report, EXIT_OK


COMMANDS = {
    "cluster-wire": cmd_cluster_wire,
    "aklt-retry": cmd_aklt_retry,
    "audit": cmd_audit,
    "certify-bound": cmd_certify_bound,
}


# --------------------------------------------------------------------------
# human-readable output
# --------------------------------------------------------------------------


def render_text(report: dict, elapsed: float) -> str:
    lines = [f"== {report['command']} =="]
    for k, v in report.get("parameters", {}).items():
        lines.append(f"  {k}: {v}")
    rows = report.get("branches")
    if rows:
        cols = list(rows[0].keys())
        cols = [c for c in cols if c != "failure_operator"]
        lines.append("  " + "  ".join(f"{c:>12}" for c in cols))
        for row in rows:
            cells = []
            for c in cols:
                v = row.get(c)
                if isinstance(v, float):
                    v = f"{v:.6f}"
                elif isinstance(v, Fraction):
                    v = f"{v.numerator}/{v.denominator}"
                cells.append(f"{str(v):>12}")
            lines.append("  " + "  ".join(cells))
    for key in ("lhs", "rhs", "certified", "min_certifying_r", "failure_probability"):
        if key in report:
            lines.append(f"  {key}: {report[key]}")
    for c in report.get("checks", []):
        lines.append(f"  [{'PASS' if c['pass'] else 'FAIL'}] {c['check']}")
    for key in ("no_signaling",):
        if key in report:
            sec = report[key]
            lines.append(f"  [{'PASS' if sec['pass'] else 'FAIL'}] {sec['check']} "
                         f"(max deviation {sec['max_deviation']:.3e})")
    if "theorem" in report:
        th = report["theorem"]
        mi = th["marginal_invariance"]
        lines.append(f"  [{'PASS' if mi['pass'] else 'FAIL'}] marginal_invariance "
                     f"(max trace distance {mi['max_deviation']:.3e})")
        for entry in th["census"]:
            lines.append(f"    program {entry['program']} {entry['name']}: "
                         f"byproducts {sorted(entry['byproducts'])}, free={entry['byproduct_free']}")
        if "counterfactual" in th:
            cf = th["counterfactual"]
            lines.append(f"  [{'PASS' if cf['pass'] else 'FAIL'}] counterfactual byproduct-free "
                         f"resource (gap {cf['max_deviation']:.6f}) -- would signal")
        if report.get("vacuous"):
            lines.append("  note: single program, no-signaling comparison is vacuous")
    lines.append(f"  verdict: {report['verdict']}")
    lines.append(f"  wall time: {elapsed:.3f} s")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbqc-nogo",
        description="Byproduct tracking and no-signaling audits for measurement-based computation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="FILE", help="JSON scenario file")
    common.add_argument("--n", type=int, help="wire length (sites)")
    common.add_argument("--r", type=int, help="AKLT retry budget / bound order")
    common.add_argument("--theta", help="AKLT rotation angle, e.g. pi/4")
    common.add_argument("--sigma", help="logical input state: 0, 1, +, -, +i, -i")
    common.add_argument("--seed", type=int)
    common.add_argument("--shots", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--workers", type=int, default=1, help="threads for enumeration")
    common.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--enumerate", dest="mode", action="store_const", const="enumerate")
    mode.add_argument("--sample", dest="mode", action="store_const", const="sample")

    wire = sub.add_parser("cluster-wire", parents=[common], help="enumerate or sample a cluster wire")
    wire.add_argument("--angles", help="comma-separated angles, e.g. '0,pi/4'")
    wire.add_argument("--no-feed-forward", action="store_true")

    sub.add_parser("aklt-retry", parents=[common], help="AKLT retry protocol")

    audit = sub.add_parser("audit", parents=[common], help="no-signaling audit of wire programs")
    audit.add_argument("--program", action="append",
                       help="angles of one program, optionally ';ff=off' (repeatable)")
    audit.add_argument("--no-feed-forward", action="store_true")
    audit.add_argument("--counterfactual", action="store_true",
                       help="also compare byproduct-corrected marginals (expected to signal)")

    bound = sub.add_parser("certify-bound", parents=[common], help="evaluate the failure-branch bound")
    bound.add_argument("--U", help="gate expression, e.g. 'H*RZ(pi/2)'")
    bound.add_argument("--V", help="gate expression")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        sc = scenario_from_args(args)
        report, code = COMMANDS[args.command](sc)
    except (ScenarioError, core.BranchCapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = time.perf_counter() - start
    text = dumps_report(report)
    if sc.output == "-":
        sys.stdout.write(text)
    else:
        sys.stdout.write(render_text(report, elapsed))
        if sc.output:
            Path(sc.output).write_text(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
