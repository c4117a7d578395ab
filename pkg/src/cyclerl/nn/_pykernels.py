"""Numpy reference implementation of the dense-network kernels.

Mirrors cyclerl._kernels exactly (same signatures, same parameter layout):
for each layer the flat parameter vector holds the weight matrix with shape
(fan_out, fan_in) in row-major order, followed by the bias vector.
Activation codes: 0 = tanh, 1 = relu; the output layer is always linear.
"""

import numpy as np

ACT_TANH = 0
ACT_RELU = 1


def mlp_forward(dims, act, params, x):
    """Run the network on a batch x of shape (n, dims[0]).

    Returns the list of layer activations [x, h1, ..., h_last, y]; the last
    entry is the linear output, the rest are inputs to each layer.
    """
    acts = [x]
    h = x
    off = 0
    n_layers = len(dims) - 1
    for layer in range(n_layers):
        fan_in = dims[layer]
        fan_out = dims[layer + 1]
        w = params[off:off + fan_out * fan_in].reshape(fan_out, fan_in)
        off += fan_out * fan_in
        b = params[off:off + fan_out]
        off += fan_out
        z = h @ w.T + b
        if layer < n_layers - 1:
            if act == ACT_TANH:
                h = np.tanh(z)
            else:
                h = np.maximum(z, 0.0)
        else:
            h = z
        acts.append(h)
    return acts


def mlp_backward(dims, act, params, acts, gy, need_param_grad=True):
    """Reverse-mode pass for <output, gy>.

    acts is the list returned by mlp_forward. Returns (gparams, gx) where
    gparams is None when need_param_grad is False.
    """
    n_layers = len(dims) - 1
    gparams = np.zeros_like(params) if need_param_grad else None

    # Per-layer parameter offsets.
    offsets = []
    off = 0
    for layer in range(n_layers):
        offsets.append(off)
        off += dims[layer + 1] * dims[layer] + dims[layer + 1]

    g = gy
    for layer in range(n_layers - 1, -1, -1):
        fan_in = dims[layer]
        fan_out = dims[layer + 1]
        off = offsets[layer]
        w = params[off:off + fan_out * fan_in].reshape(fan_out, fan_in)
        h_prev = acts[layer]
        if need_param_grad:
            gw = gparams[off:off + fan_out * fan_in].reshape(fan_out, fan_in)
            gw += g.T @ h_prev
            gparams[off + fan_out * fan_in:off + fan_out * fan_in + fan_out] += g.sum(axis=0)
        g = g @ w
        if layer > 0:
            h = acts[layer]
            if act == ACT_TANH:
                g = g * (1.0 - h * h)
            else:
                g = g * (h > 0.0)
    return gparams, g


def adam_update(params, grad, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected Adam step, in place. t is the step count after
    this update (1 on the first call)."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    params -= lr * m_hat / (np.sqrt(v_hat) + eps)
