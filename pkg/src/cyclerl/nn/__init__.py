from cyclerl.nn.adam import AdamState, adam_step
from cyclerl.nn.backend import backend_name
from cyclerl.nn.gaussian import (GaussianHead, gaussian_log_prob,
                                 log_prob_batch, reparam_sample)
from cyclerl.nn.mlp import (MlpSpec, forward_batch, forward_cached,
                            backward_batch, gradient_and_input_gradient,
                            init_params, mlp_forward, mlp_gradient)

__all__ = [
    "AdamState", "adam_step", "backend_name", "GaussianHead",
    "gaussian_log_prob", "log_prob_batch", "reparam_sample", "MlpSpec",
    "forward_batch", "forward_cached", "backward_batch",
    "gradient_and_input_gradient", "init_params", "mlp_forward",
    "mlp_gradient",
]
