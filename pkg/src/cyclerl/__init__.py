"""Cycle-time-aware policy-gradient reinforcement learning.

Agents (PPO, SAC, one-step actor-critic) interact with fixed-timestep
environments through a loop that holds each action for an integer number of
environment steps; dt-aware schedules rescale hyper-parameters when the
action-cycle time changes.
"""

__version__ = "0.1.0"
