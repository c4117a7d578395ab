from cyclerl.agents.ac import AcAgent, AcConfig
from cyclerl.agents.common import RandomAgent
from cyclerl.agents.ppo import PpoAgent, PpoConfig
from cyclerl.agents.sac import SacAgent, SacConfig

__all__ = ["AcAgent", "AcConfig", "RandomAgent", "PpoAgent", "PpoConfig",
           "SacAgent", "SacConfig"]
