"""Command-line entry point.

Subcommands:
  run            execute an experiment (optionally a discount sweep)
  print-schedule print the dt-aware hyper-parameter table for a config

Experiments are described by an INI-style config file (flat sections, see
README) whose values individual flags can override.
"""

import argparse
import configparser
import os
import sys

# Runs are single-threaded by contract; keep BLAS from oversubscribing when
# the harness forks worker processes.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

from cyclerl import harness, schedule
from cyclerl.errors import CycleRlError


def _parse_int_list(text):
    return tuple(int(part) for part in text.replace(",", " ").split())


def load_config_file(path):
    """Read the [experiment], [dt_aware], [sac_gamma] and [overrides]
    sections of an INI config into plain dicts."""
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    experiment = dict(parser["experiment"]) if parser.has_section("experiment") else {}
    dt_aware = dict(parser["dt_aware"]) if parser.has_section("dt_aware") else None
    sac_gamma = dict(parser["sac_gamma"]) if parser.has_section("sac_gamma") else None
    overrides = dict(parser["overrides"]) if parser.has_section("overrides") else {}
    return experiment, dt_aware, sac_gamma, overrides


_INT_KEYS = {"total_env_steps", "num_runs", "base_seed", "env_timestep_ms", "workers"}
_FLOAT_KEYS = {"max_wall_seconds"}
_OVERRIDE_INT_KEYS = {"batch_size", "minibatch_size", "epochs", "replay_capacity",
                      "gradient_steps", "warmup_steps"}


def build_experiment_config(file_values, dt_aware_values, sac_gamma_values,
                            override_values, args):
    values = dict(file_values)
    for key, flag in (("name", "name"), ("env_name", "env"), ("algorithm", "algo"),
                      ("hyper_mode", "mode"), ("total_env_steps", "steps"),
                      ("num_runs", "runs"), ("base_seed", "seed"),
                      ("workers", "workers")):
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            values[key] = flag_value
    if args.dt:
        values["cycle_times_ms"] = tuple(args.dt)
    elif "cycle_times_ms" in values and isinstance(values["cycle_times_ms"], str):
        values["cycle_times_ms"] = _parse_int_list(values["cycle_times_ms"])

    for key in list(values):
        if key in _INT_KEYS:
            values[key] = int(values[key])
        elif key in _FLOAT_KEYS:
            values[key] = float(values[key])
    values.setdefault("name", f"{values.get('env_name', 'env')}-{values.get('algorithm', 'algo')}")

    dt_aware = None
    if dt_aware_values:
        dt_aware = schedule.DtAwareConfig(
            initial_cycle_ms=int(dt_aware_values["initial_cycle_ms"]),
            initial_batch=int(dt_aware_values["initial_batch"]),
            initial_minibatch=int(dt_aware_values["initial_minibatch"]),
            initial_discount=float(dt_aware_values.get("initial_discount", 0.99)),
            initial_trace_decay=float(dt_aware_values.get("initial_trace_decay", 0.95)),
        )
    sac_rule = None
    if sac_gamma_values:
        sac_rule = schedule.SacGammaRule(
            tuned_discount=float(sac_gamma_values["tuned_discount"]),
            mode=sac_gamma_values.get("mode", "scaled"),
        )
    overrides = {}
    for key, value in override_values.items():
        overrides[key] = int(value) if key in _OVERRIDE_INT_KEYS else float(value)

    return harness.ExperimentConfig(dt_aware=dt_aware, sac_gamma_rule=sac_rule,
                                    overrides=overrides, **values)


def _cmd_run(args):
    if args.config:
        file_values, dt_aware_values, sac_gamma_values, override_values = \
            load_config_file(args.config)
    else:
        file_values, dt_aware_values, sac_gamma_values, override_values = {}, None, None, {}
    config = build_experiment_config(file_values, dt_aware_values,
                                     sac_gamma_values, override_values, args)
    if args.gamma_sweep:
        candidates = schedule.default_gamma_grid()
        selected, report = harness.run_gamma_sweep(config, candidates, args.out_dir)
        print(f"selected discount: {selected}")
        for gamma, mean, stderr, phase, chosen in report:
            marker = " *" if chosen else ""
            print(f"  {phase:5s} gamma={gamma:.6f} mean={mean:.6f} se={stderr:.6f}{marker}")
    else:
        rows = harness.run_experiment(config, args.out_dir)
        for row in rows:
            print(f"dt={row[0]}ms runs={row[4]}/{row[3]} "
                  f"mean={row[5]:.6f} se={row[6]:.6f}")
    return 0


def _cmd_print_schedule(args):
    config = schedule.DtAwareConfig(
        initial_cycle_ms=args.dt0,
        initial_batch=args.batch,
        initial_minibatch=args.minibatch,
        initial_discount=args.discount,
        initial_trace_decay=args.trace_decay,
    )
    rows = schedule.schedule_table(config, args.dt or [args.dt0])
    print(f"{'dt_ms':>6} {'b':>7} {'m':>5} {'gamma':>10} {'lambda':>10} {'batch_time_ms':>14}")
    for row in rows:
        print(f"{row['cycle_time_ms']:>6} {row['batch_size']:>7} "
              f"{row['minibatch_size']:>5} {row['discount']:>10.6f} "
              f"{row['trace_decay']:>10.6f} {row['batch_time_ms']:>14}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cyclerl",
        description="Cycle-time-aware policy-gradient experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment")
    run.add_argument("--config", help="INI config file")
    run.add_argument("--name", help="experiment name (output subdirectory)")
    run.add_argument("--env", choices=("reacher2d", "polebalance"))
    run.add_argument("--algo", choices=harness.ALGORITHMS)
    run.add_argument("--dt", type=int, action="append",
                     help="cycle time in ms (repeatable)")
    run.add_argument("--mode", choices=harness.HYPER_MODES)
    run.add_argument("--steps", type=int, help="total env steps per run")
    run.add_argument("--runs", type=int, help="independent runs per cycle time")
    run.add_argument("--seed", type=int, help="base seed")
    run.add_argument("--workers", type=int, help="parallel runs")
    run.add_argument("--out-dir", default="out")
    run.add_argument("--gamma-sweep", action="store_true",
                     help="sweep the SAC discount over the default grid")
    run.set_defaults(func=_cmd_run)

    sched = sub.add_parser("print-schedule",
                           help="print dt-aware hyper-parameters")
    sched.add_argument("--dt0", type=int, required=True,
                       help="initial cycle time in ms")
    sched.add_argument("--batch", type=int, required=True)
    sched.add_argument("--minibatch", type=int, required=True)
    sched.add_argument("--discount", type=float, default=0.99)
    sched.add_argument("--trace-decay", type=float, default=0.95)
    sched.add_argument("--dt", type=int, action="append",
                       help="cycle time to tabulate (repeatable)")
    sched.set_defaults(func=_cmd_print_schedule)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CycleRlError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
