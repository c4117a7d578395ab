from cyclerl.envs.base import Env, EnvConfig, StepResult
from cyclerl.envs.polebalance import PoleBalance
from cyclerl.envs.reacher2d import Reacher2D

from cyclerl.errors import ConfigurationError

_REGISTRY = {
    "reacher2d": Reacher2D,
    "polebalance": PoleBalance,
}


def make(name, env_timestep_ms=None):
    """Construct an environment by name ("reacher2d" or "polebalance")."""
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown environment {name!r}; choices: {sorted(_REGISTRY)}") from None
    if env_timestep_ms is None:
        return cls()
    return cls(env_timestep_ms=env_timestep_ms)


__all__ = ["Env", "EnvConfig", "StepResult", "PoleBalance", "Reacher2D", "make"]
