"""Diagonal Gaussian policy heads."""

from dataclasses import dataclass

import numpy as np

from cyclerl.errors import ConfigurationError

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianHead:
    """Mean/std of a diagonal Gaussian over actions. std must be positive
    and finite."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        if self.mean.shape != self.std.shape:
            raise ConfigurationError(
                f"mean shape {self.mean.shape} != std shape {self.std.shape}")
        if not np.all(np.isfinite(self.std)) or np.any(self.std <= 0.0):
            raise ConfigurationError("std entries must be positive and finite")


def gaussian_log_prob(head, action):
    """log density of `action` under the head, summed over dimensions."""
    action = np.asarray(action, dtype=np.float64)
    if action.shape != head.mean.shape:
        raise ConfigurationError(
            f"action shape {action.shape} != head shape {head.mean.shape}")
    z = (action - head.mean) / head.std
    return float(np.sum(-0.5 * z * z - np.log(head.std) - 0.5 * LOG_2PI))


def reparam_sample(head, noise):
    """mean + noise * std elementwise; noise is an external standard-normal draw."""
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != head.mean.shape:
        raise ConfigurationError(
            f"noise shape {noise.shape} != head shape {head.mean.shape}")
    return head.mean + noise * head.std


def log_prob_batch(mean, std, actions):
    """Row-wise diagonal-Gaussian log densities for (n, dim) arrays."""
    z = (actions - mean) / std
    return np.sum(-0.5 * z * z - np.log(std) - 0.5 * LOG_2PI, axis=-1)
