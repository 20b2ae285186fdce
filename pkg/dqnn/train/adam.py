import numpy as np
from collections import namedtuple

__all__ = ['AdamState', 'adam_init', 'adam_step']


AdamState = namedtuple('AdamState', ['m', 'v', 't', 'lr', 'beta1', 'beta2', 'eps'])


def adam_init(count, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
    """Fresh optimizer state for `count` parameters."""
    if lr <= 0:
        raise ValueError(f"Learning rate must be positive, got {lr}")
    if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
        raise ValueError(f"ADAM decay rates must lie in [0, 1), got {beta1}, {beta2}")
    return AdamState(m=np.zeros(count), v=np.zeros(count), t=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(state, grad, params, maximize=False):
    """One bias-corrected ADAM update; with `maximize` the step ascends.

    The first step moves every coordinate with a nonzero gradient by about `lr`:
    ```python
    >>> import numpy as np
    >>> state, p = adam_step(adam_init(3), np.array([2.0, -0.5, 0.0]), np.zeros(3))
    >>> [round(float(x), 6) for x in p], state.t
    ([-0.01, 0.01, 0.0], 1)
    >>> round(float(adam_step(adam_init(1), np.array([1.0]), np.zeros(1), maximize=True)[1][0]), 6)
    0.01

    ```

    A constant gradient keeps the step at `lr` times its sign:
    ```python
    >>> state, p = adam_init(2), np.zeros(2)
    >>> for _ in range(100):
    ...     state, p = adam_step(state, np.array([3.0, -0.1]), p)
    >>> [round(float(x), 4) for x in p]
    [-1.0, 1.0]
    >>> adam_step(adam_init(2), np.array([np.nan, 1.0]), np.zeros(2))
    Traceback (most recent call last):
    ...
    FloatingPointError: Non-finite gradient entries [0] at step 1

    ```

    Arguments:
        state {AdamState} -- Optimizer state
        grad {ndarray} -- Gradient of the cost
        params {ndarray} -- Current parameters

    Keyword Arguments:
        maximize {bool} -- Ascend instead of descend (default: {False})

    Raises:
        ValueError: If the shapes disagree
        FloatingPointError: If the gradient has non-finite entries

    Returns:
        tuple -- The new state and the new parameters
    """
    grad = np.asarray(grad, dtype=float)
    params = np.asarray(params, dtype=float)
    if grad.shape != state.m.shape or params.shape != state.m.shape:
        raise ValueError(f"ADAM state holds {state.m.shape[0]} parameters, got gradient {grad.shape} "
                         f"and parameters {params.shape}")
    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise FloatingPointError(f"Non-finite gradient entries {bad.tolist()} at step {state.t + 1}")

    g = -grad if maximize else grad
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g * g
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state._replace(m=m, v=v, t=t), params
