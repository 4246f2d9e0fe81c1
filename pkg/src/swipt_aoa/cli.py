"""Command-line front end.

Subcommands: ``probs``, ``metrics``, ``simulate``, ``optimize``, ``sweep``
and ``reproduce``. Scenario arguments accept a JSON file path or the name
of a bundled setup (``setup1``, ``setup2``).

Exit codes: 0 success, 1 validation or parse error, 2 infeasible problem or
numeric mismatch, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys

import numpy as np

from . import opt
from .channel import success_probs
from .metrics import METRICS, AccessPolicy, energy_ratio_surface, evaluate, event_probs, metric_surface
from .reproduce import TARGETS, reproduce
from .scenario import ScenarioError, load_scenario, parse_battery
from .sim import MIN_HORIZON, SimConfig, run, zscores

EXIT_OK, EXIT_INVALID, EXIT_MISMATCH, EXIT_IO = 0, 1, 2, 3
SIGMA_LIMIT = 4.0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _dump(obj, out):
    out.write(json.dumps(_jsonable(obj), indent=2) + "\n")


def _table(rows, header, out):
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    for r in [header] + rows:
        out.write("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _num(x, digits=6):
    if x is None:
        return "-"
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return f"{x:.{digits}g}"


def _scenario(args):
    scen = load_scenario(args.scenario)
    q1 = getattr(args, "q1", None)
    q2 = getattr(args, "q2", None)
    if q1 is not None or q2 is not None:
        try:
            scen.policy = AccessPolicy(scen.policy.q1 if q1 is None else q1,
                                       scen.policy.q2 if q2 is None else q2)
        except ValueError as exc:
            name = "q1" if "q1" in str(exc) else "q2"
            raise ScenarioError(f"policy.{name}: {exc}") from None
    if getattr(args, "battery", None) is not None:
        scen.battery = parse_battery(args.battery)
    return scen


# ---------------------------------------------------------------------------


def cmd_probs(args, out):
    scen = _scenario(args)
    ch = scen.channel
    succ = success_probs(ch)
    ev = event_probs(scen.policy, succ)
    record = {"g1": ch.g1, "g2": ch.g2, "success": dataclasses.asdict(succ),
              "policy": dataclasses.asdict(scen.policy), "events": dataclasses.asdict(ev)}
    if args.json:
        _dump(record, out)
        return EXIT_OK
    out.write(f"scenario {scen.name or args.scenario}\n")
    out.write(f"g1 = {ch.g1!r} W   g2 = {ch.g2!r} W\n\n")
    rows = [[k, repr(v), f"{v:.2f}"] for k, v in dataclasses.asdict(succ).items()]
    _table(rows, ["probability", "value", "rounded"], out)
    out.write(f"\nevents at q1={scen.policy.q1:g}, q2={scen.policy.q2:g}\n")
    _table([[k, repr(v)] for k, v in dataclasses.asdict(ev).items()], ["event", "value"], out)
    return EXIT_OK


def cmd_metrics(args, out):
    scen = _scenario(args)
    succ = success_probs(scen.channel)
    rep = evaluate(scen.policy, succ, scen.battery, scen.aoi_threshold, scen.aoa_threshold)
    record = {"policy": dataclasses.asdict(scen.policy), "battery": str(scen.battery),
              "metrics": rep.as_dict()}
    if args.json:
        _dump(record, out)
        return EXIT_OK
    out.write(f"q1={scen.policy.q1:g}  q2={scen.policy.q2:g}  battery={scen.battery}\n")
    _table([[k, _num(v, 10)] for k, v in rep.as_dict().items()], ["metric", "value"], out)
    return EXIT_OK


def _analytic_targets(rep, finite):
    d = rep.as_dict()
    keys = ["mean_aoi", "mean_aoa", "aoi_violation", "aoa_violation", "poma", "pi0",
            "pi0_bar", "p_A"]
    if finite:
        keys += ["pi_m", "drop_rate"]
    targets = {k: d[k] for k in keys}
    targets["p_D"] = 1.0 / d["mean_aoi"] if d["mean_aoi"] > 0 else 0.0
    exact = {}
    if finite:
        exact = {"mean_aoa": d["mean_aoa_exact"], "aoa_violation": d["aoa_violation_exact"]}
    return targets, exact


def cmd_simulate(args, out):
    scen = _scenario(args)
    base = scen.sim or SimConfig()
    overrides = {k: getattr(args, k) for k in ("horizon", "replications", "seed", "mode", "warmup")
                 if getattr(args, k) is not None}
    try:
        config = dataclasses.replace(base, aoi_threshold=scen.aoi_threshold,
                                     aoa_threshold=scen.aoa_threshold, **overrides)
    except ValueError as exc:
        raise ScenarioError(f"sim: {exc}") from None
    succ = success_probs(scen.channel)
    source = scen.channel if config.mode == "physical" else succ
    report = run(config, scen.policy, source, scen.battery)
    analytic = evaluate(scen.policy, succ, scen.battery, scen.aoi_threshold, scen.aoa_threshold)
    targets, exact = _analytic_targets(analytic, scen.battery.is_finite)
    z = zscores(report, targets)
    z_exact = zscores(report, exact)
    bad = sorted(k for k, v in z.items() if not abs(v) <= SIGMA_LIMIT)

    if args.json:
        _dump({"simulation": report.as_dict(), "analytic": targets, "sigma": z,
               "battery_chain": exact, "battery_chain_sigma": z_exact,
               "beyond_limit": bad}, out)
    else:
        out.write(f"q1={scen.policy.q1:g}  q2={scen.policy.q2:g}  battery={scen.battery}  "
                  f"mode={config.mode}  horizon={config.horizon}  "
                  f"replications={config.replications}  seed={config.seed}\n")
        rows = []
        for k, target in targets.items():
            rows.append([k, _num(report.estimates[k]), _num(report.std_errors[k], 3),
                         _num(target), _num(z[k], 3), "" if abs(z[k]) <= SIGMA_LIMIT else "*"])
        for k, target in exact.items():
            rows.append([f"{k} (battery chain)", _num(report.estimates[k]),
                         _num(report.std_errors[k], 3), _num(target), _num(z_exact[k], 3),
                         "" if abs(z_exact[k]) <= SIGMA_LIMIT else "*"])
        _table(rows, ["metric", "simulated", "std_err", "analytic", "sigma", ""], out)
        if bad:
            out.write(f"beyond {SIGMA_LIMIT:g} sigma: {', '.join(bad)}\n")
    return EXIT_MISMATCH if bad else EXIT_OK


_GRID_PROBLEMS = {
    "min-mean-aoi": ("mean_aoi", None),
    "min-mean-aoa": ("mean_aoa", None),
    "min-aoi-violation": ("aoi_violation", None),
    "min-aoa-violation": ("aoa_violation", None),
    "min-aoi-subject-to-aoa": ("mean_aoi", "mean_aoa"),
    "min-poma-subject-to-aoi": ("poma", "mean_aoi"),
}


def cmd_optimize(args, out):
    scen = _scenario(args)
    succ = success_probs(scen.channel)
    kind = opt.ProblemKind(args.problem)
    if _GRID_PROBLEMS[args.problem][1] is not None and args.delta is None:
        raise ScenarioError(f"--delta is required for {args.problem}")
    threshold = args.threshold or (scen.aoi_threshold if "aoi-violation" in args.problem
                                   else scen.aoa_threshold)
    problem = opt.OptProblem(kind, succ, scen.battery, delta=args.delta, threshold=threshold)
    if kind is opt.ProblemKind.MIN_AOI_SUBJECT_TO_AOA and args.delta < 1:
        # no policy has a mean AoA below one slot
        best = opt.minimize_mean_aoa(succ, verify=False)
        result = opt.OptResult(best.q1_star, best.q2_star, math.inf,
                               "infeasible: mean AoA is at least one slot", feasible=False,
                               extras={"unconstrained_aoa": best})
    else:
        result = opt.solve(problem)

    grid = None
    if args.verify_grid is not None:
        objective, cname = _GRID_PROBLEMS[args.problem]
        constraint = None if cname is None else (cname, args.delta)
        grid = opt.grid_oracle(objective, succ, scen.battery, step=args.verify_grid,
                               constraint=constraint, refine=True, threshold=threshold)

    if args.json:
        rec = {"problem": args.problem, "battery": str(scen.battery), "delta": args.delta,
               "result": result.as_dict()}
        if grid is not None:
            rec["grid"] = grid.as_dict()
        _dump(rec, out)
    else:
        rows = [["closed form" if "grid" not in result.case_label else "search",
                 _num(result.q1_star), _num(result.q2_star), _num(result.value),
                 result.case_label, str(result.feasible)]]
        if grid is not None:
            rows.append(["grid oracle", _num(grid.q1_star), _num(grid.q2_star), _num(grid.value),
                         grid.case_label, str(grid.feasible)])
        for key, val in result.extras.items():
            if isinstance(val, opt.OptResult):
                rows.append([key.replace("_", " "), _num(val.q1_star), _num(val.q2_star),
                             _num(val.value), val.case_label, str(val.feasible)])
        _table(rows, ["source", "q1*", "q2*", "value", "case", "feasible"], out)
        if "delta_hat" in result.extras:
            out.write(f"delta_hat = {_num(result.extras['delta_hat'], 10)}\n")
    return EXIT_OK if result.feasible else EXIT_MISMATCH


def sweep_rows(scen, metric, step, threshold=5):
    """Lattice rows ``(q1, q2, value, energy_limited)``, row-major in q1 then q2."""
    q = opt.lattice(step)
    Q1, Q2 = np.meshgrid(q, q, indexing="ij")
    succ = success_probs(scen.channel)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = metric_surface(metric, Q1, Q2, succ, scen.battery, threshold)
        limited = energy_ratio_surface(Q1, Q2, succ) < 1
    return [(float(a), float(b), float(v), int(f))
            for a, b, v, f in zip(Q1.ravel(), Q2.ravel(), vals.ravel(), limited.ravel())]


def cmd_sweep(args, out):
    scen = _scenario(args)
    if not 0 < args.step <= 1:
        raise ScenarioError(f"--step must lie in (0, 1], got {args.step}")
    if args.metric == "drop_rate" and not scen.battery.is_finite:
        raise ScenarioError("drop_rate needs a finite battery (--battery M)")
    threshold = args.threshold or scen.aoa_threshold
    rows = sweep_rows(scen, args.metric, args.step, threshold)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q1", "q2", "value", "energy_limited"])
    for a, b, v, f in rows:
        w.writerow([repr(a), repr(b), repr(v), f])
    if args.output in (None, "-"):
        out.write(buf.getvalue())
    else:
        with open(args.output, "w") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


def cmd_reproduce(args, out):
    items = reproduce(args.target)
    failed = [i for i in items if not i.passed]
    if args.json:
        _dump({"target": args.target,
               "items": [dataclasses.asdict(i) for i in items],
               "passed": len(items) - len(failed), "total": len(items)}, out)
    else:
        for item in items:
            out.write(item.line() + "\n")
        out.write(f"{args.target}: {len(items) - len(failed)}/{len(items)} pass\n")
    return EXIT_MISMATCH if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swipt-aoa", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_text, policy=True, battery=True):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("scenario", help="scenario JSON file or bundled name (setup1, setup2)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if policy:
            sp.add_argument("--q1", type=float, help="override the data access probability")
            sp.add_argument("--q2", type=float, help="override the power access probability")
        if battery:
            sp.add_argument("--battery", help="'infinite' or a capacity in packets")
        return sp

    sp = scenario_cmd("probs", "success and joint event probabilities", battery=False)
    sp.set_defaults(func=cmd_probs)

    sp = scenario_cmd("metrics", "all analytic metrics at the scenario policy")
    sp.set_defaults(func=cmd_metrics)

    sp = scenario_cmd("simulate", "Monte Carlo run compared against the analytic metrics")
    sp.add_argument("--horizon", type=int, help=f"slots per replication (>= {MIN_HORIZON})")
    sp.add_argument("--replications", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--warmup", type=int)
    sp.add_argument("--mode", choices=("abstract", "physical"))
    sp.set_defaults(func=cmd_simulate)

    sp = scenario_cmd("optimize", "optimal access probabilities", policy=False)
    sp.add_argument("--problem", required=True, choices=[k.value for k in opt.ProblemKind])
    sp.add_argument("--delta", type=float, help="bound for the constrained problems")
    sp.add_argument("--threshold", type=int, help="violation threshold in slots")
    sp.add_argument("--verify-grid", type=float, metavar="STEP",
                    help="also run the lattice search at this step")
    sp.set_defaults(func=cmd_optimize)

    sp = scenario_cmd("sweep", "metric over a (q1, q2) lattice as CSV", policy=False)
    sp.add_argument("--metric", required=True, choices=METRICS)
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--threshold", type=int, help="violation threshold in slots")
    sp.add_argument("-o", "--output", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reproduce", help="recompute published tables and figure optima")
    sp.add_argument("target", choices=TARGETS)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args, out)
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


def main_entry():
    sys.exit(main())
