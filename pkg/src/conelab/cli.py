"""Command-line interface: experiment orchestration and report emission.

Subcommands
-----------
``associate``  run a convergence study and write CSV + JSON artifacts
``checks``     run the admissibility/estimate check suite, write CSV
``report``     consolidate result CSVs/summaries from a directory
``demo``       print the disjoint-support delta-net table

Configuration is a TOML file (tables ``[experiment]``, ``[schedule]``,
``[kernel]``, ``[transport]``, ``[quadrature]``, ``[output]``) with every
value overridable by a command-line flag.  Exit codes: 0 success, 1 a
scientific check failed or a study did not converge, 2 usage/config error.
The ``CONELAB_WORKERS`` environment variable sets the per-eps worker count.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import association as assoc
from .fields import (FIELD_KINDS, conical_h, embed_negligibility_order, named_field,
                     pullback_commutation_check, rotation_map, scaling_map)
from .kernels import check_test_object, delta_product_demo, make_polynomial_profile
from .orderfit import geometric_schedule
from .quadrature import QuadratureSpec, annulus_points
from .transport import check_admissible

RESULTS_SCHEMA = "conelab-results-v1"
CHECKS_SCHEMA = "conelab-checks-v1"
RESULT_COLUMNS = ["experiment_id", "alpha", "kernel_id", "transport_id", "eps",
                  "I", "I1", "gb_residual", "det_min", "det_max", "clamp_active"]
CHECK_COLUMNS = ["check_id", "eps", "value", "fitted_slope", "passed"]

EXIT_OK = 0
EXIT_SCIENCE = 1
EXIT_USAGE = 2


class ConfigFileError(Exception):
    """Config-file problem; message names the offending table.key."""


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, schema, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: {schema}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if isinstance(row, dict):
                row = [row[c] for c in columns]
            writer.writerow([_fmt(v) for v in row])


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigFileError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:  # carries line/column info
        raise ConfigFileError(f"{path}: {exc}")


def _get(table, section, key, default, cast, check=None, err=""):
    value = table.get(section, {}).get(key, default)
    try:
        value = cast(value)
    except (TypeError, ValueError):
        raise ConfigFileError(f"[{section}].{key}: cannot interpret {value!r}")
    if check is not None and not check(value):
        raise ConfigFileError(f"[{section}].{key}: {err} (got {value!r})")
    return value


def build_experiment(table, args):
    """RunConfig assembly: parse, validate, reject with named-key errors."""
    alpha = args.alpha if args.alpha is not None else _get(
        table, "experiment", "alpha", 0.8, float, lambda a: 0 < a <= 1,
        "alpha must lie in (0, 1]")
    lam = _get(table, "experiment", "lam", 0.5, float, lambda v: v > 0, "lam must be positive")
    mu = _get(table, "experiment", "mu", 1.0, float, lambda v: v > lam, "mu must exceed lam")
    start = _get(table, "schedule", "start", 0.08, float, lambda v: v > 0, "start must be positive")
    ratio = _get(table, "schedule", "ratio", 0.7, float, lambda v: 0 < v < 1,
                 "ratio must lie in (0, 1)")
    count = _get(table, "schedule", "count", 10, int, lambda v: v >= 4,
                 "count must be at least 4")
    explicit = table.get("schedule", {}).get("values")
    if explicit is not None:
        schedule = np.asarray(explicit, dtype=float)
        if schedule.ndim != 1 or np.any(np.diff(schedule) >= 0):
            raise ConfigFileError("[schedule].values: must be strictly decreasing")
    else:
        schedule = geometric_schedule(start, ratio, count)
    kernel_kind = args.kernel or _get(table, "kernel", "kind", "model-q2", str,
                                      lambda k: k in assoc.KERNEL_KINDS,
                                      f"must be one of {assoc.KERNEL_KINDS}")
    transport_kind = args.transport or _get(table, "transport", "kind", "identity", str,
                                            lambda k: k in assoc.TRANSPORT_KINDS,
                                            f"must be one of {assoc.TRANSPORT_KINDS}")
    quad = QuadratureSpec(
        radial_nodes=_get(table, "quadrature", "radial_nodes", 32, int,
                          lambda v: v >= 8, "needs >= 8 nodes"),
        angular_nodes=_get(table, "quadrature", "angular_nodes", 48, int,
                           lambda v: v >= 8, "needs >= 8 nodes"))
    annulus = _get(table, "experiment", "annulus", [0.2, 0.45], list,
                   lambda v: len(v) == 2 and 0 < v[0] < v[1],
                   "must be [r_in, r_out] with 0 < r_in < r_out")
    try:
        cfg = assoc.default_config(
            alpha, kernel=kernel_kind, transport=transport_kind, schedule=schedule,
            lam=lam, mu=mu, quad=quad, annulus=tuple(annulus),
            outer_radial_nodes=_get(table, "quadrature", "outer_radial_nodes", 12, int,
                                    lambda v: v >= 4, "needs >= 4 nodes"),
            outer_angular_nodes=_get(table, "quadrature", "outer_angular_nodes", 48, int,
                                     lambda v: v >= 8, "needs >= 8 nodes"))
    except (assoc.ConfigError, ValueError) as exc:
        raise ConfigFileError(f"experiment invariant violated: {exc}")
    tolerance = _get(table, "experiment", "tolerance", 0.02, float,
                     lambda v: v > 0, "tolerance must be positive")
    return cfg, tolerance


def _out_dir(table, args):
    out = Path(args.out or table.get("output", {}).get("dir", "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_associate(args):
    table = _load_toml(args.config) if args.config else {}
    cfg, tolerance = build_experiment(table, args)
    out = _out_dir(table, args)
    report = assoc.convergence_study(cfg, diagnostics=not args.no_diagnostics)
    stem = out / cfg.experiment_id
    _write_csv(f"{stem}.csv", RESULTS_SCHEMA, RESULT_COLUMNS, list(report.rows()))
    summary = report.summary()
    summary["tolerance"] = tolerance
    summary["within_tolerance"] = bool(report.relative_error <= tolerance)
    with open(f"{stem}.summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"limit = {report.limit:.6f}  target = {report.target:.6f}  "
          f"rel.err = {report.relative_error:.3e}  converged = {report.converged}")
    print(f"wrote {stem}.csv and {stem}.summary.json")
    ok = report.converged and summary["within_tolerance"]
    return EXIT_OK if ok else EXIT_SCIENCE


DEFAULT_CHECKS = ("kernel", "transport", "det-bounds", "taylor", "annulus",
                  "negligibility", "pullback", "delta-product")


def _check_rows(cfg, names, kappa, field_kind="smooth-test"):
    region = annulus_points(cfg.annulus[0], cfg.annulus[1], 3, 8)
    short = cfg.schedule[: max(6, len(cfg.schedule) // 2 + 1)]
    rows, failures = [], []

    def add(check_id, eps, value, slope, passed):
        rows.append([check_id, eps, value, "" if slope is None or not np.isfinite(slope)
                     else slope, passed])
        if not passed:
            failures.append(check_id)

    if "kernel" in names:
        for rep in check_test_object(cfg.kernel, region, short):
            for _, eps, value, slope, passed in rep.rows():
                add(f"kernel/{rep.condition_id}", eps, value, slope, passed)
    if "transport" in names:
        for rep in check_admissible(cfg.transport, region, short,
                                    support_constant=cfg.support_constant):
            for _, eps, value, slope, passed in rep.rows():
                add(f"transport/{rep.condition_id}", eps, value, slope, passed)
    if "det-bounds" in names:
        det = assoc.det_bounds_check(cfg, kappa)
        for eps, dmin, dmax, ok in det.rows:
            add("det-bounds/min", eps, dmin, None, ok)
            add("det-bounds/max", eps, dmax, None, ok)
        add("det-bounds/eps0", det.eps0, det.eps0, None, det.pass_)
    if "taylor" in names:
        tay = assoc.taylor_estimate_check(cfg)
        add("taylor/max-ratio", cfg.schedule[-1], tay.max_ratio, None, tay.pass_)
        add("taylor/lower-half-spread", cfg.schedule[-1], tay.lower_half_spread,
            None, tay.lower_half_spread < 2.0)
    if "annulus" in names:
        ann = assoc.annulus_decay_check(cfg)
        for rep in (ann.eps_fit, ann.radial_fit, ann.origin_fit):
            add(f"annulus/{rep.quantity_id}", rep.samples[-1][0], rep.samples[-1][1],
                rep.slope, rep.pass_)
    if "negligibility" in names:
        field = named_field(field_kind, alpha=cfg.alpha)
        rep = embed_negligibility_order(field, cfg.kernel, cfg.transport, region,
                                        geometric_schedule(0.08, 0.75, 8))
        add(f"negligibility/{field.name}", rep.samples[-1][0], rep.samples[-1][1],
            rep.slope, rep.pass_)
    if "pullback" in names:
        pts = annulus_points(0.25, 0.4, 2, 4)
        for label, mu in (("rotation", rotation_map(np.pi / 4)), ("scaling", scaling_map(2.0))):
            disc = pullback_commutation_check(mu, conical_h(), cfg.kernel, cfg.transport,
                                              0.05, pts)
            add(f"pullback/{label}", 0.05, disc, None, disc < 1e-8)
    if "delta-product" in names:
        rows_demo, fails_demo = _delta_rows()
        rows.extend(rows_demo)
        failures.extend(fails_demo)
    return rows, failures


def _delta_rows():
    demo = delta_product_demo(make_polynomial_profile(1, 2), geometric_schedule(0.05, 0.7, 8))
    rows, failures = [], []
    for eps, cross, self_ in zip(demo.eps, demo.cross_products, demo.self_products):
        rows.append(["delta-product/cross", eps, cross, "", cross == 0.0])
        rows.append(["delta-product/self", eps, self_, demo.self_fit.slope,
                     demo.self_fit.pass_])
    if not demo.cross_all_zero:
        failures.append("delta-product/cross")
    if not demo.self_fit.pass_:
        failures.append("delta-product/self")
    return rows, failures


def cmd_checks(args):
    table = _load_toml(args.config) if args.config else {}
    cfg, _ = build_experiment(table, args)
    out = _out_dir(table, args)
    if args.demo:
        names = [args.demo]
    elif args.checks:
        names = [n.strip() for n in args.checks.split(",")]
        unknown = set(names) - set(DEFAULT_CHECKS)
        if unknown:
            raise ConfigFileError(f"unknown checks: {sorted(unknown)}; "
                                  f"choose from {DEFAULT_CHECKS}")
    else:
        names = list(DEFAULT_CHECKS)
    kappa = _get(table, "experiment", "kappa", 0.3, float,
                 lambda v: 0 < v < cfg.alpha ** 2, "kappa must lie in (0, alpha^2)")
    field_kind = _get(table, "field", "kind", "smooth-test", str,
                      lambda k: k in FIELD_KINDS, f"must be one of {FIELD_KINDS}")
    rows, failures = _check_rows(cfg, names, kappa, field_kind)
    path = out / "checks.csv"
    _write_csv(path, CHECKS_SCHEMA, CHECK_COLUMNS, rows)
    n_fail = len(set(failures))
    print(f"{len(rows)} check rows written to {path}; "
          f"{'all passed' if not failures else f'{n_fail} check(s) FAILED: {sorted(set(failures))}'}")
    return EXIT_OK if not failures else EXIT_SCIENCE


def _read_schema(path):
    with open(path) as fh:
        first = fh.readline().strip()
    if not first.startswith("# schema:"):
        raise ConfigFileError(f"{path}: missing schema header row")
    return first.split(":", 1)[1].strip()


def cmd_report(args):
    directory = Path(args.results_dir)
    if not directory.is_dir():
        print(f"error: {directory} is not a directory", file=sys.stderr)
        return EXIT_USAGE
    summaries = sorted(directory.glob("*.summary.json"))
    csvs = sorted(directory.glob("*.csv"))
    if not summaries and not csvs:
        print(f"error: no result files in {directory}", file=sys.stderr)
        return EXIT_USAGE
    for path in csvs:
        schema = _read_schema(path)
        if schema not in (RESULTS_SCHEMA, CHECKS_SCHEMA):
            raise ConfigFileError(f"{path}: unknown schema {schema!r}")
    if summaries:
        header = f"{'experiment':28s} {'alpha':>6s} {'limit':>12s} {'target':>12s} " \
                 f"{'rel.err':>10s}  ok"
        print(header)
        print("-" * len(header))
        for path in summaries:
            with open(path) as fh:
                s = json.load(fh)
            print(f"{s['experiment_id']:28s} {s['alpha']:6.3f} {s['limit']:12.6f} "
                  f"{s['target']:12.6f} {s['relative_error']:10.3e}  "
                  f"{'yes' if s.get('within_tolerance') else 'NO'}")
    for path in csvs:
        if _read_schema(path) == CHECKS_SCHEMA:
            with open(path) as fh:
                fh.readline()
                rdr = csv.DictReader(fh)
                rows = list(rdr)
            n_fail = sum(1 for r in rows if r["passed"] == "false")
            print(f"{path.name}: {len(rows)} check rows, {n_fail} failed")
    return EXIT_OK


def cmd_demo(args):
    if args.which != "delta-product":
        print(f"error: unknown demo {args.which!r}", file=sys.stderr)
        return EXIT_USAGE
    demo = delta_product_demo(make_polynomial_profile(1, 2),
                              geometric_schedule(0.05, 0.7, 8))
    print(f"{'eps':>12s} {'cross-product':>16s} {'self-product':>16s}")
    for eps, cross, self_ in zip(demo.eps, demo.cross_products, demo.self_products):
        print(f"{eps:12.6f} {cross:16.6e} {self_:16.6e}")
    print(f"cross products all exactly zero: {demo.cross_all_zero}")
    print(f"self-product slope: {demo.self_fit.slope:.4f} (want -1 +- 0.05)")
    ok = demo.cross_all_zero and demo.self_fit.pass_
    return EXIT_OK if ok else EXIT_SCIENCE


def make_parser():
    parser = argparse.ArgumentParser(
        prog="conelab",
        description="Curvature of the conical metric by mollifier regularization.")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("associate", help="run a convergence study")
    pa.add_argument("--config", help="TOML config file")
    pa.add_argument("--alpha", type=float, help="cone parameter in (0, 1]")
    pa.add_argument("--kernel", choices=assoc.KERNEL_KINDS)
    pa.add_argument("--transport", choices=assoc.TRANSPORT_KINDS)
    pa.add_argument("--out", help="output directory (default: results)")
    pa.add_argument("--no-diagnostics", action="store_true",
                    help="skip the Gauss-Bonnet and remainder series")
    pa.set_defaults(func=cmd_associate)

    pc = sub.add_parser("checks", help="run the admissibility/estimate checks")
    pc.add_argument("--config", help="TOML config file")
    pc.add_argument("--alpha", type=float)
    pc.add_argument("--kernel", choices=assoc.KERNEL_KINDS)
    pc.add_argument("--transport", choices=assoc.TRANSPORT_KINDS)
    pc.add_argument("--checks", help=f"comma-separated subset of {DEFAULT_CHECKS}")
    pc.add_argument("--demo", choices=["delta-product"],
                    help="run a single demo instead of the suite")
    pc.add_argument("--out")
    pc.set_defaults(func=cmd_checks)

    pr = sub.add_parser("report", help="consolidate results from a directory")
    pr.add_argument("results_dir")
    pr.set_defaults(func=cmd_report)

    pd = sub.add_parser("demo", help="run a narrative demonstration")
    pd.add_argument("which", choices=["delta-product"])
    pd.set_defaults(func=cmd_demo)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigFileError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (assoc.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
