"""Cycle-time-aware hyper-parameter transformations.

Batch and minibatch sizes scale inversely with the cycle time so that the
wall-clock duration of a batch (dt * b) stays constant; discount and
trace-decay are exponentiated to the dt/dt0 power only when that lowers them
(larger cycle times), never when it would raise them. SAC's discount rules
start from a value tuned by a sweep at the initial cycle time and either
rescale it per cycle time or hold it constant.

Cycle times are integer milliseconds; ratios are taken as exact rationals and
only converted to float for exponentiation.
"""

from dataclasses import dataclass
from fractions import Fraction

from cyclerl.errors import ConfigurationError, UsageError


@dataclass(frozen=True)
class DtAwareConfig:
    """Initial cycle time and the hyper-parameter values chosen there."""

    initial_cycle_ms: int
    initial_batch: int
    initial_minibatch: int
    initial_discount: float = 0.99
    initial_trace_decay: float = 0.95

    def __post_init__(self):
        if self.initial_cycle_ms <= 0:
            raise ConfigurationError("initial_cycle_ms must be positive")
        if not 1 <= self.initial_minibatch <= self.initial_batch:
            raise ConfigurationError(
                f"need 1 <= minibatch <= batch, got m={self.initial_minibatch}, "
                f"b={self.initial_batch}")
        for name in ("initial_discount", "initial_trace_decay"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ConfigurationError(f"{name} must lie in (0, 1], got {v}")


def _check_dt(dt_ms):
    if dt_ms <= 0:
        raise ConfigurationError(f"cycle time must be positive, got {dt_ms}")


def _scale_count(initial, dt0_ms, dt_ms):
    # round-half-to-even on the exact rational, floored at 1
    scaled = Fraction(dt0_ms * initial, dt_ms)
    return max(1, round(scaled))


def scale_batch(config, dt_ms):
    """Batch size at cycle time dt_ms keeping dt * b constant."""
    _check_dt(dt_ms)
    return _scale_count(config.initial_batch, config.initial_cycle_ms, dt_ms)


def scale_minibatch(config, dt_ms):
    """Minibatch size scaled like the batch, clamped to at most the batch."""
    _check_dt(dt_ms)
    m = _scale_count(config.initial_minibatch, config.initial_cycle_ms, dt_ms)
    return min(m, scale_batch(config, dt_ms))


def _clipped_power(base, dt0_ms, dt_ms):
    exponent = float(Fraction(dt_ms, dt0_ms))
    return min(base, base ** exponent)


def gamma_dt(config, dt_ms):
    """Discount at dt_ms: exponentiated only when dt exceeds the initial
    cycle time, the baseline otherwise."""
    _check_dt(dt_ms)
    return _clipped_power(config.initial_discount, config.initial_cycle_ms, dt_ms)


def lambda_dt(config, dt_ms):
    """Trace decay at dt_ms, clipped the same way as gamma_dt."""
    _check_dt(dt_ms)
    return _clipped_power(config.initial_trace_decay, config.initial_cycle_ms, dt_ms)


@dataclass(frozen=True)
class SacGammaRule:
    """Discount rule for SAC derived from a tuned value: either rescaled per
    cycle time ("scaled") or held constant ("constant")."""

    tuned_discount: float
    mode: str = "scaled"

    def __post_init__(self):
        if not 0.0 < self.tuned_discount <= 1.0:
            raise ConfigurationError(
                f"tuned_discount must lie in (0, 1], got {self.tuned_discount}")
        if self.mode not in ("scaled", "constant"):
            raise ConfigurationError(f"mode must be 'scaled' or 'constant', got {self.mode!r}")


def sac_gamma(rule, dt_ms, dt0_ms):
    """SAC discount at dt_ms given the value tuned at dt0_ms."""
    _check_dt(dt_ms)
    _check_dt(dt0_ms)
    if rule.mode == "constant":
        return rule.tuned_discount
    return rule.tuned_discount ** float(Fraction(dt_ms, dt0_ms))


def gamma_sweep_argmax(results):
    """Best discount from (gamma, average return) pairs; ties break toward
    the smaller gamma."""
    if not results:
        raise UsageError("gamma_sweep_argmax needs at least one result")
    best_gamma, best_score = results[0]
    for gamma, score in results[1:]:
        if score > best_score or (score == best_score and gamma < best_gamma):
            best_gamma, best_score = gamma, score
    return best_gamma


def default_gamma_grid(n=12, base=0.99):
    """Sweep candidates base**(2**k) from k=7 down, plus 1.0: for the default
    n=12 this spans base**128 up to 1.0."""
    if n < 2:
        raise ConfigurationError(f"grid needs at least 2 candidates, got {n}")
    exponents = [2.0 ** k for k in range(7, 7 - (n - 1), -1)]
    return [base ** e for e in exponents] + [1.0]


def schedule_table(config, cycle_times_ms):
    """Rows of (dt_ms, b, m, gamma, lambda) for printing or logging."""
    rows = []
    for dt in cycle_times_ms:
        rows.append({
            "cycle_time_ms": dt,
            "batch_size": scale_batch(config, dt),
            "minibatch_size": scale_minibatch(config, dt),
            "discount": gamma_dt(config, dt),
            "trace_decay": lambda_dt(config, dt),
            "batch_time_ms": dt * scale_batch(config, dt),
        })
    return rows
