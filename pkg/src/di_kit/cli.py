"""Command-line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or
verification failure.
"""
import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bell import (
    all_deterministic_tables,
    chsh_epsilon,
    chsh_value,
    chsh_winning_prob,
    werner_chsh_table,
)
from .bounds import SelfTestParams, eur_rate, overlap_from_moment_bound, prop2_rate, thm1_rate
from .equivalence import ENTROPY_TOL, STAT_TOL, check_equivalence, random_routed_model
from .errors import ConfigError, DiKitError, FixtureMissingError, MarginalMismatchError
from .npo.moments import build_moment_problem
from .npo.sdp import MAX_ITERATIONS, solve_sdp
from .npo.selftest import bound_anticom_sq, bound_com_sq
from .npo.words import chsh_operator
from .pipeline import ScenarioConfig, certificate_bundle, curve_csv, run_scenario
from .reference import format_report, reference_report

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
TSIRELSON = 2 * math.sqrt(2)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def cmd_curve(args, out, err):
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        err.write(f"config: cannot read {args.config} ({exc.strerror})\n")
        return EXIT_USAGE
    try:
        data = json.loads(text)
        if args.tier and isinstance(data, dict):
            data["tier"] = args.tier
        cfg = ScenarioConfig.from_dict(data)
        points, sides = run_scenario(cfg, jobs=args.jobs)
    except json.JSONDecodeError as exc:
        err.write(f"config: invalid JSON ({exc})\n")
        return EXIT_USAGE
    except ConfigError as exc:
        err.write(f"config error: {exc}\n")
        return EXIT_USAGE
    target = Path(args.out)
    target.write_text(curve_csv(points))
    target.with_suffix(".certificates.json").write_text(certificate_bundle(cfg, points, sides) + "\n")
    try:
        report = reference_report(points)
    except FixtureMissingError as exc:
        err.write(f"note: {exc}; deviation report skipped\n")
    else:
        if report:
            target.with_suffix(".reference.csv").write_text(format_report(report))
    failed = [p.qber for p in points if p.status != "ok"]
    out.write(f"wrote {len(points)} points to {target}\n")
    if failed:
        err.write("failed points at qber " + ", ".join(format(q, ".6g") for q in failed) + "\n")
        return EXIT_FAIL
    return EXIT_OK


_TIER_ALIASES = {
    "thm1": "analytic-thm1",
    "analytic-thm1": "analytic-thm1",
    "prop2": "analytic-prop2",
    "analytic-prop2": "analytic-prop2",
    "npo-eur": "npo-eur",
}


def cmd_bound(args, out, err):
    given = [name for name in ("epsilon", "anticom_norm", "moment_bound") if getattr(args, name) is not None]
    if len(given) != 1:
        err.write("bound: give exactly one of --epsilon, --anticom-norm, --moment-bound\n")
        return EXIT_USAGE
    natural = {"epsilon": "analytic-thm1", "anticom_norm": "analytic-prop2", "moment_bound": "npo-eur"}[given[0]]
    tier = natural if args.tier is None else _TIER_ALIASES.get(args.tier)
    if tier is None:
        err.write(f"bound: unknown tier {args.tier!r}\n")
        return EXIT_USAGE
    if tier != natural:
        err.write(f"bound: --{given[0].replace('_', '-')} conflicts with tier {tier}\n")
        return EXIT_USAGE
    q_x = args.qber if args.qber_x is None else args.qber_x
    q_z = args.qber if args.qber_z is None else args.qber_z
    if q_x is None or q_z is None:
        err.write("bound: --qber (or both --qber-x and --qber-z) is required\n")
        return EXIT_USAGE
    try:
        if tier == "analytic-thm1":
            cert = thm1_rate(SelfTestParams(args.epsilon, args.delta_constant), q_x, q_z)
        elif tier == "analytic-prop2":
            if q_x != q_z:
                err.write("bound: the prop2 tier takes a single --qber\n")
                return EXIT_USAGE
            cert = prop2_rate(args.anticom_norm, q_x)
        else:
            cert = eur_rate(overlap_from_moment_bound(args.moment_bound), q_x, q_z)
    except DiKitError as exc:
        err.write(f"bound: {exc}\n")
        return EXIT_USAGE
    out.write(_dump(cert.to_dict()) + "\n")
    return EXIT_OK


def cmd_chsh(args, out, err):
    if not 0.0 <= args.visibility <= 1.0:
        err.write("chsh: --visibility must lie in [0, 1]\n")
        return EXIT_USAGE
    table = werner_chsh_table(args.visibility)
    omega = chsh_winning_prob(table)
    s_max, sol_a = bound_anticom_sq(table, level=args.level)
    c_min, sol_c = bound_com_sq(table, level=args.level)
    report = {
        "visibility": args.visibility,
        "winning_probability": omega,
        "chsh_value": chsh_value(table),
        "epsilon": chsh_epsilon(omega),
        "anticom_sq_max": s_max,
        "com_sq_min": c_min,
        "solver": {"anticom": sol_a.residual_summary(), "com": sol_c.residual_summary()},
    }
    out.write(_dump(report) + "\n")
    ok = math.isfinite(sol_a.certified) and math.isfinite(sol_c.certified)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_equiv_check(args, out, err):
    if args.trials < 1:
        err.write("equiv-check: --trials must be at least 1\n")
        return EXIT_USAGE
    worst_stat = worst_ent = 0.0
    for k in range(args.trials):
        seed = args.seed + k
        rng = np.random.default_rng(seed)
        try:
            report = check_equivalence(random_routed_model(rng, corrupt_marginal=args.corrupt_marginal))
        except MarginalMismatchError as exc:
            err.write(f"MarginalMismatch at seed {seed}: {exc}\n")
            return EXIT_FAIL
        worst_stat = max(worst_stat, report.stat_deviation)
        worst_ent = max(worst_ent, report.entropy_deviation)
        if not report.passed:
            out.write(f"max statistics deviation {worst_stat:.3e}\nmax entropy deviation {worst_ent:.3e}\n")
            err.write(f"equivalence violated at seed {seed}\n")
            return EXIT_FAIL
    out.write(f"trials {args.trials}\nmax statistics deviation {worst_stat:.3e} (limit {STAT_TOL:g})\n"
              f"max entropy deviation {worst_ent:.3e} (limit {ENTROPY_TOL:g})\n")
    return EXIT_OK


def solver_battery(max_iter=MAX_ITERATIONS):
    """Conformance rows ``(name, value, target, deviation, tolerance)``."""
    rows = []
    problem = build_moment_problem({"A": 2, "B": 2}, 1, objective=chsh_operator(), sense="max")
    tsirelson = solve_sdp(problem, max_iter=max_iter).certified
    rows.append(("tsirelson_chsh_level1", tsirelson, TSIRELSON, 1e-5))
    worst_classical = min(bound_anticom_sq(t, max_iter=max_iter)[0] for t in all_deterministic_tables())
    rows.append(("classical_anticom_cap", worst_classical, 4.0, 1e-5))
    rows.append(("ideal_anticom_cap", bound_anticom_sq(werner_chsh_table(1.0), max_iter=max_iter)[0], 0.0, 1e-4))
    caps = [bound_anticom_sq(werner_chsh_table(v), max_iter=max_iter)[0] for v in (0.0, 0.5, 0.9, 0.99, 1.0)]
    rise = max(0.0, max(b - a for a, b in zip(caps, caps[1:])))
    rows.append(("anticom_cap_monotone_in_v", rise, 0.0, 1e-6))
    out = []
    for name, value, target, tol in rows:
        dev = abs(value - target) if math.isfinite(value) else math.inf
        out.append((name, value, target, dev, tol))
    return out


def cmd_sdp_selftest(args, out, err):
    max_iter = 2 if args.inject_loose_tolerance else MAX_ITERATIONS
    rows = solver_battery(max_iter)
    out.write(f"{'check':<28}{'bound':>16}{'target':>16}{'deviation':>12}\n")
    failures = []
    for name, value, target, dev, tol in rows:
        out.write(f"{name:<28}{value:>16.9f}{target:>16.9f}{dev:>12.2e}\n")
        if not dev <= tol:
            failures.append(name)
    if failures:
        err.write("failed: " + ", ".join(failures) + "\n")
        return EXIT_FAIL
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="di-kit", description="Device-independent key-rate certification for routed Bell tests.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("curve", help="key-rate curve for a scenario config")
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--out", required=True, help="CSV output path; certificates go next to it")
    p.add_argument("--tier", choices=("analytic", "npo-eur", "npo-entropy"), help="override the config tier")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("bound", help="single-point rate certificate")
    p.add_argument("--qber", type=float)
    p.add_argument("--qber-x", type=float)
    p.add_argument("--qber-z", type=float)
    p.add_argument("--epsilon", type=float, help="CHSH winning-probability deficit (thm1 tier)")
    p.add_argument("--anticom-norm", type=float, help="operator norm of {A_Z, A_X} (prop2 tier)")
    p.add_argument("--moment-bound", type=float, help="bound on <{A_Z, A_X}^2> (npo-eur tier)")
    p.add_argument("--delta-constant", type=float, default=1.0)
    p.add_argument("--tier", help="thm1, prop2 or npo-eur")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("chsh", help="self-test diagnostics for a Werner local test")
    p.add_argument("--visibility", type=float, default=0.99)
    p.add_argument("--level", type=int, default=2)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("equiv-check", help="routed-model translation checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--corrupt-marginal", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_equiv_check)

    p = sub.add_parser("sdp-selftest", help="solver conformance battery")
    p.add_argument("--inject-loose-tolerance", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_sdp_selftest)
    return parser


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return args.func(args, out, err)


if __name__ == "__main__":
    sys.exit(main())
