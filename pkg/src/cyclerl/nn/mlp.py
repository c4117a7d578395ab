"""Dense feed-forward networks over flat parameter vectors.

Parameters live in a single float64 vector so that one optimizer state can
track a whole network (plus any extra head parameters appended after the
network block). Layout per layer: weight matrix (fan_out, fan_in) row-major,
then bias (fan_out). Hidden layers use tanh or relu; the output is linear.
"""

from dataclasses import dataclass, field

import numpy as np

from cyclerl.errors import ConfigurationError, NumericalError
from cyclerl.nn import backend

_ACT_CODES = {"tanh": backend.ACT_TANH, "relu": backend.ACT_RELU}


@dataclass(frozen=True)
class MlpSpec:
    """Shape and activation of a dense network."""

    input_dim: int
    hidden_dims: tuple[int, ...]
    output_dim: int
    hidden_activation: str = "tanh"
    dims: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.hidden_activation not in _ACT_CODES:
            raise ConfigurationError(
                f"hidden_activation must be 'tanh' or 'relu', got {self.hidden_activation!r}")
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(int(d) < 1 for d in dims):
            raise ConfigurationError(f"all layer dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))

    @property
    def act_code(self):
        return _ACT_CODES[self.hidden_activation]

    @property
    def param_count(self):
        return sum((fi + 1) * fo for fi, fo in zip(self.dims[:-1], self.dims[1:]))

    def layer_slices(self):
        """(weight_slice, bias_slice, shape) per layer, in parameter order."""
        out = []
        off = 0
        for fan_in, fan_out in zip(self.dims[:-1], self.dims[1:]):
            w = slice(off, off + fan_out * fan_in)
            b = slice(off + fan_out * fan_in, off + fan_out * fan_in + fan_out)
            out.append((w, b, (fan_out, fan_in)))
            off = b.stop
        return out


def init_params(spec, rng, extra=0):
    """Fresh parameter vector: weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)],
    biases zero. `extra` appends zero-initialized head parameters."""
    params = np.zeros(spec.param_count + extra, dtype=np.float64)
    for w, _, (fan_out, fan_in) in spec.layer_slices():
        bound = 1.0 / np.sqrt(fan_in)
        params[w] = rng.uniform(-bound, bound, size=fan_out * fan_in)
    return params


def _check_input(spec, params, x):
    if params.shape[0] != spec.param_count:
        raise ConfigurationError(
            f"parameter vector has length {params.shape[0]}, spec needs {spec.param_count}")
    if x.shape[-1] != spec.input_dim:
        raise ConfigurationError(
            f"input has dimension {x.shape[-1]}, spec.input_dim is {spec.input_dim}")


def forward_batch(spec, params, x):
    """Outputs for a batch x of shape (n, input_dim); returns (n, output_dim)."""
    acts = backend.mlp_forward(spec.dims, spec.act_code, params, np.ascontiguousarray(x))
    return acts[-1]


def forward_cached(spec, params, x):
    """Batch forward keeping layer activations for a later backward pass."""
    return backend.mlp_forward(spec.dims, spec.act_code, params, np.ascontiguousarray(x))


def backward_batch(spec, params, acts, gy, need_param_grad=True):
    """Reverse-mode pass for sum_i <output_i, gy_i>. Returns (gparams, gx)."""
    return backend.mlp_backward(spec.dims, spec.act_code, params,
                                acts, np.ascontiguousarray(gy), need_param_grad)


def mlp_forward(spec, params, x):
    """Single-input forward pass; validates shapes and value sanity."""
    x = np.asarray(x, dtype=np.float64)
    _check_input(spec, params[:spec.param_count], x)
    return forward_batch(spec, params[:spec.param_count], x[None, :])[0]


def mlp_gradient(spec, params, x, cotangent):
    """Exact gradient of <mlp_forward(spec, params, x), cotangent> w.r.t. params.

    Raises NumericalError naming the first layer whose activations are not
    finite.
    """
    x = np.asarray(x, dtype=np.float64)
    cotangent = np.asarray(cotangent, dtype=np.float64)
    core = params[:spec.param_count]
    _check_input(spec, core, x)
    if cotangent.shape[0] != spec.output_dim:
        raise ConfigurationError(
            f"cotangent has dimension {cotangent.shape[0]}, spec.output_dim is {spec.output_dim}")
    acts = forward_cached(spec, core, x[None, :])
    for layer, h in enumerate(acts):
        if not np.all(np.isfinite(h)):
            raise NumericalError(f"non-finite activations at layer {layer}")
    gparams, _ = backward_batch(spec, core, acts, cotangent[None, :])
    return gparams


def gradient_and_input_gradient(spec, params, x, cotangent):
    """(gparams, gx) for a single input; used where gradients must also flow
    into the network input."""
    x = np.asarray(x, dtype=np.float64)
    acts = forward_cached(spec, params, x[None, :])
    gparams, gx = backward_batch(spec, params, acts, np.asarray(cotangent)[None, :])
    return gparams, gx[0]
