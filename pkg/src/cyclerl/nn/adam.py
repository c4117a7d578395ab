"""Adam optimizer over flat parameter vectors."""

from dataclasses import dataclass, field

import numpy as np

from cyclerl.errors import ConfigurationError, NumericalError
from cyclerl.nn import backend


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the step counter."""

    size: int
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    first_moment: np.ndarray = field(init=False)
    second_moment: np.ndarray = field(init=False)
    step_count: int = field(init=False, default=0)

    def __post_init__(self):
        if self.lr <= 0.0:
            raise ConfigurationError(f"lr must be positive, got {self.lr}")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ConfigurationError("beta1 and beta2 must lie in (0, 1)")
        self.first_moment = np.zeros(self.size, dtype=np.float64)
        self.second_moment = np.zeros(self.size, dtype=np.float64)


def adam_step(state, params, grad):
    """Apply one bias-corrected Adam update to params, in place.

    A non-finite gradient rejects the update and leaves state untouched.
    Returns params.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape[0] != state.size or params.shape[0] != state.size:
        raise ConfigurationError(
            f"lengths disagree: params {params.shape[0]}, grad {grad.shape[0]}, "
            f"state {state.size}")
    if not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite gradient; update rejected")
    state.step_count += 1
    backend.adam_update(params, grad, state.first_moment, state.second_moment,
                        state.step_count, state.lr, state.beta1, state.beta2,
                        state.eps)
    return params
