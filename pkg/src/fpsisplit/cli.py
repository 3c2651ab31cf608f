"""Command-line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import output
from .linalg import SolverError

log = logging.getLogger("fpsisplit")

VESSEL_COMMANDS = ("run-vessel", "h-sweep")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_floats(s: str) -> list:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _csv_ints(s: str) -> list:
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration entry (repeatable)")
    common.add_argument("--output", help="output directory (overrides run.output_dir)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="fpsisplit", description="Splitting scheme for fluid / poroelastic plate / "
                "poroelastic layer interaction.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run-mms", parents=[common], help="single manufactured-solution run")
    s = sub.add_parser("conv-space", parents=[common], help="spatial convergence study")
    s.add_argument("--levels", type=_csv_ints, help="cells per unit length, e.g. 20,40,80")
    s.add_argument("--jobs", type=int, default=1)
    s = sub.add_parser("conv-time", parents=[common], help="temporal convergence study")
    s.add_argument("--steps", type=_csv_floats, help="time steps, e.g. 0.04,0.02,0.01")
    s.add_argument("--jobs", type=int, default=1)
    sub.add_parser("energy-longterm", parents=[common], help="numerical vs exact energy")
    s = sub.add_parser("run-vessel", parents=[common], help="pressure pulse in the vessel")
    s.add_argument("--H", type=float, help="plate thickness")
    s = sub.add_parser("h-sweep", parents=[common], help="vessel runs for decreasing H")
    s.add_argument("--H-values", dest="H_values", type=_csv_floats)
    s.add_argument("--jobs", type=int, default=1)
    s = sub.add_parser("check-stability", parents=[common], help="time-step bounds")
    s.add_argument("--unit-constants", action="store_true",
                   help="use unit inequality constants instead of measuring them on the mesh")
    return p


def _settings(args) -> config_mod.Settings:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise config_mod.ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    if args.output:
        overrides["run.output_dir"] = args.output
    if args.command in VESSEL_COMMANDS:
        overrides.setdefault("run.bc", "vessel")
    if args.config:
        s = config_mod.load(args.config, overrides)
    else:
        s = config_mod.parse("", overrides)
    if args.command in VESSEL_COMMANDS and s.run.bc != "vessel":
        raise config_mod.ConfigError(f"{args.command} needs bc = vessel (config has {s.run.bc!r})")
    if args.command not in VESSEL_COMMANDS + ("check-stability",) and s.run.bc != "mms":
        raise config_mod.ConfigError(f"{args.command} needs bc = mms (config has {s.run.bc!r})")
    return s


def _manifest(out: Path, args, s, extra=None):
    argv = {k: v for k, v in vars(args).items() if k not in ("config", "verbose", "jobs")}
    output.write_manifest(out / "manifest.json", args.command, config_mod.as_dict(s),
                          {"arguments": argv, **(extra or {})})


# ------------------------------------------------------------ commands

def cmd_run_mms(args, s, out: Path):
    from .problem import Discretization
    from .scheme import EnergyReport, advance, energy
    from .verification import ERROR_NAMES, mms_errors, mms_problem

    _advise_time_step(s, s.params)
    problem, ex = mms_problem(s.run, s.params)
    disc = Discretization(problem)
    st = disc.interpolate_state(ex, 0.0)
    rows = [energy(disc, st).row()]
    cad = s.run.cadence
    for k in range(1, s.run.n_steps + 1):
        st = advance(disc, st, k)
        rows.append(energy(disc, st).row())
        if cad and k % cad == 0:
            output.fluid_vtk(out / f"fluid_{k:05d}.vtk", disc, st)
            output.structure_vtk(out / f"structure_{k:05d}.vtk", disc, st)
    errs = mms_errors(disc, st, ex)
    output.write_csv(out / "energy.csv", EnergyReport.header(), rows)
    output.write_csv(out / "mms_errors.csv", ["t"] + [f"e_{k}" for k in ERROR_NAMES],
                     [[st.t] + [errs[k] for k in ERROR_NAMES]])
    for k in ERROR_NAMES:
        print(f"e_{k:<4} {errs[k]:.4e}")


def _advise_time_step(s, params):
    from .stability import StabilityConstants, check_time_step
    h = s.run.geometry.length / s.run.mesh.nx
    check_time_step(params, s.run.dt, StabilityConstants(h=h, H=params.H))


def _write_table(path: Path, table):
    slopes = table.slopes
    from .verification import ERROR_NAMES
    output.write_csv(path, table.header(), table.rows(), ["slope"] + [slopes[k] for k in ERROR_NAMES])
    print(",".join(table.header()))
    for r in table.rows():
        print(",".join(output._cell(v) for v in r))
    print("slope," + ",".join(f"{slopes[k]:.3f}" for k in ERROR_NAMES))


def cmd_conv_space(args, s, out: Path):
    from .verification import convergence_space
    levels = args.levels or list(s.study.levels)
    t = convergence_space(levels, s.run.dt, s.run.T_final, s.params, jobs=args.jobs)
    _write_table(out / "conv_space.csv", t)


def cmd_conv_time(args, s, out: Path):
    from .verification import convergence_time
    steps = args.steps or list(s.study.steps)
    t = convergence_time(steps, s.study.n_time, s.study.T_time, s.params, jobs=args.jobs)
    _write_table(out / "conv_time.csv", t)


def cmd_energy_longterm(args, s, out: Path):
    from .verification import long_term_energy
    ser = long_term_energy(s.run, s.params)
    dev = ser.rel_deviation
    output.write_csv(out / "energy_longterm.csv", ["t", "E_numeric", "E_exact", "rel_dev"],
                     np.column_stack([ser.t, ser.numeric, ser.exact, dev]).tolist())
    print(f"max relative deviation {dev.max():.4e} (at t = {ser.t[dev.argmax()]:.4g})")


def cmd_run_vessel(args, s, out: Path):
    from .scheme import EnergyReport
    from .vessel import T_STAR, run_vessel

    H = args.H if args.H is not None else s.study.H
    cfg = s.run
    keep = {cfg.n_steps, int(round(T_STAR / cfg.dt))}

    def cb(k, st, disc):
        if (cfg.cadence and k % cfg.cadence == 0) or k in keep:
            output.write_csv(out / f"w_{k:05d}.csv", ["x", "w"],
                             np.column_stack([disc.mesh.xs, st.w]).tolist())
            output.fluid_vtk(out / f"fluid_{k:05d}.vtk", disc, st)

    _advise_time_step(s, s.params.with_(H=H))
    res = run_vessel(H, cfg, s.params.with_(H=H), callback=cb)
    output.write_csv(out / "energy.csv", EnergyReport.header(), [r.row() for r in res.energy])
    output.write_csv(out / "w_history.csv", ["t"] + [f"x{i}" for i in range(res.x.size)],
                     np.column_stack([res.times, res.w]).tolist())
    print(f"H = {H}: max |w| = {np.abs(res.w).max():.4e}, final E = {res.energy[-1].E:.4e}")


def cmd_h_sweep(args, s, out: Path):
    from .vessel import h_sweep
    Hs = args.H_values or list(s.study.H_values)
    r = h_sweep(Hs, s.run, s.params, t_star=s.study.t_star, jobs=args.jobs)
    output.write_csv(out / "h_sweep_profiles.csv", ["x"] + [f"w_H{h:g}" for h in r.H],
                     np.column_stack([r.x] + list(r.profiles)).tolist())
    diffs = r.differences
    output.write_csv(out / "h_sweep.csv", ["H_a", "H_b", "l2_difference"],
                     [[a, b, d] for a, b, d in zip(r.H, r.H[1:], diffs)])
    output.write_csv(out / "h_sweep_oscillation.csv", ["H", "extrema", "amplitude"],
                     [[h, c, a] for h, c, a in zip(r.H, r.extrema_counts, r.amplitudes)])
    for a, b, d in zip(r.H, r.H[1:], diffs):
        print(f"||w(H={a:g}) - w(H={b:g})|| = {d:.4e}")
    for h, a in zip(r.H, r.amplitudes):
        print(f"H={h:g} oscillation amplitude {a:.4e}")


def cmd_check_stability(args, s, out: Path):
    from .model import check_parameter_conditions
    from .stability import (StabilityConstants, dt_bound_thm54, dt_bound_thm55,
                            estimate_constants, thm55_applicable)

    params = s.params
    if s.run.bc == "vessel":
        params = params.with_(H=s.study.H)
    c1, c2 = check_parameter_conditions(params)
    if args.unit_constants:
        consts = StabilityConstants(h=float(s.run.geometry.length / s.run.mesh.nx), H=params.H)
    else:
        from .problem import Discretization, Problem
        from .problem import generic_boundary
        bcs = generic_boundary()
        if s.run.bc == "vessel":
            from .vessel import PulseInflow, vessel_boundary
            bcs = vessel_boundary(PulseInflow(s.run.P_max, s.run.T_pulse))
        consts = estimate_constants(Discretization(Problem(s.run, params, bcs=bcs)))
    b54, b55 = dt_bound_thm54(params, consts), dt_bound_thm55(params, consts)
    rows = [["alpha^2 < c0*lambda_b", c1], ["alpha_p^2 < 12*c0_p*D", c2],
            ["dt_bound_unconditional", b54], ["dt_bound_conditional", b55],
            ["conditional_bound_applies", thm55_applicable(params)], ["dt", s.run.dt]]
    rows += [[f"constant_{k}", v] for k, v in vars(consts).items()]
    output.write_csv(out / "stability.csv", ["quantity", "value"], rows)
    print(f"parameter condition alpha^2 < c0*lambda_b:  {c1}")
    print(f"parameter condition alpha_p^2 < 12*c0_p*D:  {c2}")
    print(f"dt bound (no parameter conditions):         {b54:.6e}")
    print(f"dt bound (with parameter conditions):       {b55:.6e}"
          + ("" if thm55_applicable(params) else "  [conditions not met, bound does not apply]"))
    print(f"configured dt:                              {s.run.dt:.6e}")


COMMANDS = {
    "run-mms": cmd_run_mms, "conv-space": cmd_conv_space, "conv-time": cmd_conv_time,
    "energy-longterm": cmd_energy_longterm, "run-vessel": cmd_run_vessel,
    "h-sweep": cmd_h_sweep, "check-stability": cmd_check_stability,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        s = _settings(args)
        out = Path(s.run.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        _manifest(out, args, s)
        COMMANDS[args.command](args, s, out)
    except config_mod.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
