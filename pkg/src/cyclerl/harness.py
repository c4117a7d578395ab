"""Batch experiment runner.

Composes environment, agent, interaction loop and the dt-aware schedule;
manages per-run seed streams; writes one episodes CSV per (cycle time, run)
plus a cross-run summary CSV. Runs are embarrassingly parallel and may be
spread over a process pool; every run writes only its own files.

Output layout: <out>/<experiment>/<dt>ms/run<k>/episodes.csv and
<out>/<experiment>/summary.csv.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from cyclerl import envs as env_registry
from cyclerl import schedule
from cyclerl.agents import (AcAgent, AcConfig, PpoAgent, PpoConfig,
                            RandomAgent, SacAgent, SacConfig)
from cyclerl.errors import ConfigurationError, UsageError
from cyclerl.loop import InteractionConfig, run_interaction

EPISODES_HEADER = ("run_id", "cycle_time_ms", "env_step_at_episode_end",
                   "episode_index", "undiscounted_return", "wall_seconds")
SUMMARY_HEADER = ("cycle_time_ms", "batch_size", "batch_time_ms", "num_runs",
                  "runs_with_episodes", "mean_average_return",
                  "stderr_average_return", "incomplete")

PPO_BASELINE = {"batch_size": 2000, "minibatch_size": 50, "epochs": 10,
                "clip": 0.2, "discount": 0.99, "trace_decay": 0.95, "lr": 3e-4}
SAC_BASELINE = {"replay_capacity": 1_000_000, "minibatch_size": 256,
                "gradient_steps": 1, "discount": 0.99,
                "target_smoothing": 0.005, "policy_lr": 3e-4,
                "critic_lr": 3e-4, "temperature_lr": 3e-4,
                "warmup_steps": 1000}
AC_BASELINE = {"discount": 0.99, "policy_lr": 1e-4, "value_lr": 1e-4}

ALGORITHMS = ("ppo", "sac", "ac", "random")
HYPER_MODES = ("baseline", "dt-aware", "explicit")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    env_name: str
    algorithm: str
    cycle_times_ms: tuple
    total_env_steps: int
    num_runs: int
    base_seed: int = 0
    hyper_mode: str = "baseline"
    env_timestep_ms: int = 0            # 0 keeps the environment default
    dt_aware: schedule.DtAwareConfig = None
    sac_gamma_rule: schedule.SacGammaRule = None
    overrides: dict = field(default_factory=dict)
    max_wall_seconds: float = 0.0       # 0 disables the budget guard
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.hyper_mode not in HYPER_MODES:
            raise ConfigurationError(
                f"hyper_mode must be one of {HYPER_MODES}, got {self.hyper_mode!r}")
        if self.total_env_steps < 1 or self.num_runs < 1:
            raise ConfigurationError("total_env_steps and num_runs must be >= 1")
        if not self.cycle_times_ms:
            raise ConfigurationError("at least one cycle time is required")
        object.__setattr__(self, "cycle_times_ms",
                           tuple(int(dt) for dt in self.cycle_times_ms))
        timestep = self.resolved_env_timestep_ms()
        for dt in self.cycle_times_ms:
            if dt <= 0 or dt % timestep != 0:
                raise ConfigurationError(
                    f"cycle time {dt}ms is not a positive integer multiple of the "
                    f"env timestep {timestep}ms")
        if self.hyper_mode == "dt-aware":
            if self.dt_aware is None:
                raise ConfigurationError("hyper_mode 'dt-aware' needs a dt_aware table")
            if self.algorithm == "sac" and self.sac_gamma_rule is None:
                raise ConfigurationError(
                    "dt-aware SAC needs sac_gamma_rule (tuned discount + mode)")

    def resolved_env_timestep_ms(self):
        if self.env_timestep_ms:
            return self.env_timestep_ms
        return env_registry.make(self.env_name).config.env_timestep_ms


def resolve_hypers(config, dt_ms):
    """Hyper-parameter dict for one cycle time under the config's mode."""
    if config.algorithm == "ppo":
        values = dict(PPO_BASELINE)
        if config.hyper_mode == "dt-aware":
            aware = config.dt_aware
            values["batch_size"] = schedule.scale_batch(aware, dt_ms)
            values["minibatch_size"] = schedule.scale_minibatch(aware, dt_ms)
            values["discount"] = schedule.gamma_dt(aware, dt_ms)
            values["trace_decay"] = schedule.lambda_dt(aware, dt_ms)
    elif config.algorithm == "sac":
        values = dict(SAC_BASELINE)
        if config.hyper_mode == "dt-aware":
            values["discount"] = schedule.sac_gamma(
                config.sac_gamma_rule, dt_ms, config.dt_aware.initial_cycle_ms)
    elif config.algorithm == "ac":
        values = dict(AC_BASELINE)
    else:
        values = {}
    if config.hyper_mode == "explicit":
        unknown = set(config.overrides) - set(values)
        if unknown:
            raise ConfigurationError(
                f"unknown hyper-parameter overrides for {config.algorithm}: {sorted(unknown)}")
        values.update(config.overrides)
    return values


def _interaction_config(algorithm, hypers, dt_ms, env_timestep_ms):
    if algorithm == "ppo":
        period = capacity = int(hypers["batch_size"])
    elif algorithm == "sac":
        period, capacity = 1, int(hypers["replay_capacity"])
    else:
        period, capacity = 1, 1
    return InteractionConfig(dt_ms, env_timestep_ms, period, capacity)


def _make_agent(algorithm, hypers, obs_dim, action_dim, streams):
    env_rng, policy_rng, shuffle_rng, replay_rng = streams
    if algorithm == "ppo":
        return PpoAgent(obs_dim, action_dim, PpoConfig(**hypers), policy_rng, shuffle_rng)
    if algorithm == "sac":
        return SacAgent(obs_dim, action_dim, SacConfig(**hypers), policy_rng, replay_rng)
    if algorithm == "ac":
        return AcAgent(obs_dim, action_dim, AcConfig(**hypers), policy_rng)
    return RandomAgent(action_dim, policy_rng)


def seed_streams(base_seed, run_index):
    """Independent generators (env, policy, shuffle, replay) for one run."""
    root = np.random.SeedSequence(base_seed + run_index)
    return [np.random.default_rng(child) for child in root.spawn(4)]


def average_return_over_learning(returns):
    """Mean undiscounted return over a run's completed episodes, or None
    when no episode completed (missing, not zero)."""
    returns = list(returns)
    if not returns:
        return None
    return float(sum(returns) / len(returns))


class _TimingEnv:
    """Records wall time at each terminal step so episode rows can carry
    elapsed seconds without the loop itself doing any timing."""

    def __init__(self, env):
        self._env = env
        self.config = env.config
        self.obs_dim = env.obs_dim
        self.action_dim = env.action_dim
        self.terminal_times = []
        self._start = time.perf_counter()

    def reset(self, rng):
        return self._env.reset(rng)

    def step(self, action):
        result = self._env.step(action)
        if result.terminal:
            self.terminal_times.append(time.perf_counter() - self._start)
        return result


@dataclass(frozen=True)
class _RunSpec:
    env_name: str
    env_timestep_ms: int
    algorithm: str
    hypers: dict
    cycle_time_ms: int
    run_id: int
    seed: int
    total_env_steps: int
    episodes_path: str


def _execute_run(spec):
    env = env_registry.make(spec.env_name,
                            spec.env_timestep_ms if spec.env_timestep_ms else None)
    streams = seed_streams(spec.seed, spec.run_id)
    agent = _make_agent(spec.algorithm, spec.hypers, env.obs_dim,
                        env.action_dim, streams)
    interaction = _interaction_config(spec.algorithm, spec.hypers,
                                      spec.cycle_time_ms, env.config.env_timestep_ms)
    timed = _TimingEnv(env)
    summary = run_interaction(timed, agent, interaction, spec.total_env_steps,
                              streams[0])

    rows = []
    for episode, wall in zip(summary.episodes, timed.terminal_times):
        rows.append((spec.run_id, spec.cycle_time_ms, episode.env_step_at_end,
                     episode.index, episode.undiscounted_return, wall))
    path = Path(spec.episodes_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(path, EPISODES_HEADER, rows)
    return {
        "cycle_time_ms": spec.cycle_time_ms,
        "run_id": spec.run_id,
        "episodes": len(rows),
        "average_return": average_return_over_learning(
            e.undiscounted_return for e in summary.episodes),
    }


def _format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    """UTF-8, comma-separated, '\\n' line endings, newline-terminated final
    line; floats written with full round-trip precision."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")


def read_csv(path):
    """Rows as dicts of strings, for re-reading our own output."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def _mean_stderr(values):
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var) / math.sqrt(n)


def run_experiment(config, out_dir):
    """Run num_runs independent runs per cycle time and write all CSVs.

    Returns the summary rows (one per cycle time). Per-run seed is
    base_seed + run index; generator streams never cross runs. When the
    wall-clock budget expires, remaining runs are skipped and affected
    summary rows are flagged incomplete.
    """
    out = Path(out_dir) / config.name
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    specs = []
    for dt in config.cycle_times_ms:
        hypers = resolve_hypers(config, dt)
        for run_id in range(config.num_runs):
            specs.append(_RunSpec(
                env_name=config.env_name,
                env_timestep_ms=config.env_timestep_ms,
                algorithm=config.algorithm,
                hypers=hypers,
                cycle_time_ms=dt,
                run_id=run_id,
                seed=config.base_seed,
                total_env_steps=config.total_env_steps,
                episodes_path=str(out / f"{dt}ms" / f"run{run_id}" / "episodes.csv"),
            ))

    results = []
    skipped = []

    def out_of_time():
        return (config.max_wall_seconds > 0
                and time.perf_counter() - started > config.max_wall_seconds)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {pool.submit(_execute_run, spec): spec for spec in specs}
            for future in as_completed(futures):
                results.append(future.result())
                if out_of_time():
                    for pending, spec in futures.items():
                        if pending.cancel():
                            skipped.append(spec)
                    break
    else:
        for spec in specs:
            if out_of_time():
                skipped.append(spec)
                continue
            results.append(_execute_run(spec))

    if skipped:
        (out / "INCOMPLETE").write_text(
            "".join(f"{s.cycle_time_ms}ms run{s.run_id}\n" for s in skipped),
            encoding="utf-8")

    summary_rows = []
    skipped_keys = {(s.cycle_time_ms, s.run_id) for s in skipped}
    for dt in config.cycle_times_ms:
        hypers = resolve_hypers(config, dt)
        batch = int(hypers.get("batch_size", 0))
        dt_results = sorted((r for r in results if r["cycle_time_ms"] == dt),
                            key=lambda r: r["run_id"])
        scores = [r["average_return"] for r in dt_results
                  if r["average_return"] is not None]
        incomplete = int(any(key[0] == dt for key in skipped_keys))
        if scores:
            mean, stderr = _mean_stderr(scores)
        else:
            mean, stderr = float("nan"), float("nan")
        summary_rows.append((dt, batch, dt * batch, config.num_runs,
                             len(scores), mean, stderr, incomplete))
    write_csv(out / "summary.csv", SUMMARY_HEADER, summary_rows)
    return summary_rows


def run_gamma_sweep(config, candidates, out_dir):
    """Sweep SAC's discount over `candidates`, select the argmax by mean
    average return, then re-run the winner on fresh seeds.

    The report separates sweep scores from the rerun score; the selection
    uses only sweep scores, the rerun exists to quote performance without
    maximization bias.
    """
    if config.algorithm != "sac":
        raise UsageError("the discount sweep is defined for the sac algorithm")
    candidates = list(candidates)
    if not candidates:
        raise UsageError("the sweep needs at least one candidate discount")
    if len(config.cycle_times_ms) != 1:
        raise ConfigurationError("sweep one cycle time at a time")

    out = Path(out_dir) / config.name
    report = []
    sweep_scores = []
    for i, gamma in enumerate(candidates):
        sub = replace(config, name=f"{config.name}/sweep-{i:02d}",
                      hyper_mode="explicit",
                      overrides={**config.overrides, "discount": gamma})
        rows = run_experiment(sub, out_dir)
        mean = rows[0][5]
        stderr = rows[0][6]
        sweep_scores.append((gamma, mean))
        report.append((gamma, mean, stderr, "sweep", 0))

    selected = schedule.gamma_sweep_argmax(sweep_scores)
    rerun = replace(config, name=f"{config.name}/rerun",
                    hyper_mode="explicit",
                    overrides={**config.overrides, "discount": selected},
                    base_seed=config.base_seed + config.num_runs)
    rows = run_experiment(rerun, out_dir)
    report = [(g, m, s, phase, int(g == selected)) for g, m, s, phase, _ in report]
    report.append((selected, rows[0][5], rows[0][6], "rerun", 1))

    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep_report.csv",
              ("gamma", "mean_average_return", "stderr_average_return",
               "phase", "selected"), report)
    return selected, report
