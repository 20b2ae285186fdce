"""Benchmark quantities between channels.

The diamond distance `||E1 - E2||_<>` (no factor one half, values in `[0, 2]`) is estimated
from below by maximizing `||(id (x) (E1 - E2))(|psi><psi|)||_1` over pure states on
reference (x) input: a Monte-Carlo sample of Haar random states followed by stochastic hill
climbing from the best one. The maximally entangled state is always among the candidates,
so the estimate never falls below the trace norm of the Choi difference.

Properties:
```python
>>> from dqnn.rng import seed
>>> from dqnn.channels import random_channel
>>> rng = seed(61)
>>> quick = DiamondConfig(samples=200, refine_steps=20)
>>> pairs = [(random_channel(2, 2, rng), random_channel(2, 2, rng)) for _ in range(5)]
>>> all(diamond_distance(a, b, quick) == diamond_distance(b, a, quick) for a, b in pairs)
True
>>> all(0 <= diamond_distance(a, b, quick) <= 2 for a, b in pairs)
True
>>> nested = [diamond_distance(*pairs[0], DiamondConfig(samples=n, refine_steps=0)) for n in (10, 100, 1000)]
>>> all(b >= a - 1e-12 for a, b in zip(nested, nested[1:]))
True

```
"""
import logging
import math
import warnings
from collections import namedtuple

import numpy as np

from dqnn.linalg import dagger, trace_norm
from dqnn.rng import derive, ginibre, seed, splitmix64

__all__ = ['DiamondConfig', 'DEFAULT_DIAMOND', 'BOUND_SLACK', 'diamond_distance', 'choi_trace_distance',
           'diamond_bound_holds']

logger = logging.getLogger(__name__)

DiamondConfig = namedtuple('DiamondConfig', ['samples', 'refine_steps', 'perturb_scale', 'decay', 'seed'],
                           defaults=(2000, 200, 0.1, 0.98, 0))

DEFAULT_DIAMOND = DiamondConfig()

BOUND_SLACK = 1e-6

# evaluations per vectorized block
CHUNK = 256

REFINE_SALT = 0x5EED


def _check_pair(e1, e2):
    if (e1.d_in, e1.d_out) != (e2.d_in, e2.d_out):
        raise ValueError(f"Channels differ in shape: {e1.d_in} -> {e1.d_out} and {e2.d_in} -> {e2.d_out}")


def _choi_difference(e1, e2):
    # J1 - J2 and J2 - J1 are exact negatives, fix the sign by the first nonzero real component
    delta = np.asarray(e1.choi(), dtype=complex) - np.asarray(e2.choi(), dtype=complex)
    flat = np.ascontiguousarray(delta).view(float).ravel()
    nonzero = np.flatnonzero(flat)
    if nonzero.size and flat[nonzero[0]] < 0:
        delta = -delta
    return delta


def _objective(delta4, d_in, psis):
    # psis: (n, d_in, d_in) with psi_{r,i} the amplitude of |r>_ref |i>_in
    n, d_out = len(psis), delta4.shape[0]
    m = d_in * np.einsum('aibj,nri,nsj->narbs', delta4, psis, psis.conj())
    m = m.reshape(n, d_out * d_in, d_out * d_in)
    m = (m + np.conj(np.swapaxes(m, 1, 2))) / 2
    return np.abs(np.linalg.eigvalsh(m)).sum(axis=1)


def _haar(d_in, rng):
    v = ginibre(d_in * d_in, 1, rng).reshape(d_in, d_in)
    return v / np.linalg.norm(v)


def diamond_distance(e1, e2, cfg=DEFAULT_DIAMOND):
    """Lower-bound estimate of the diamond distance `||E1 - E2||_<>`.

    Sample `k` is drawn from its own stream seeded with `derive(cfg.seed, k)`, the refinement
    runs on a separate stream. The result is identical for swapped arguments.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.channels import identity_channel, unitary_channel, depolarizing_channel
    >>> x = np.array([[0, 1], [1, 0]])
    >>> d = diamond_distance(identity_channel(2), unitary_channel(x))
    >>> abs(d - 2) < 0.02
    True
    >>> diamond_distance(unitary_channel(x), unitary_channel(x))
    0.0
    >>> round(diamond_distance(identity_channel(2), depolarizing_channel(2), DiamondConfig(samples=1, refine_steps=0)), 12)
    1.5
    >>> diamond_distance(identity_channel(2), identity_channel(3))
    Traceback (most recent call last):
    ...
    ValueError: Channels differ in shape: 2 -> 2 and 3 -> 3

    ```

    Arguments:
        e1 {Channel} -- First channel
        e2 {Channel} -- Second channel

    Keyword Arguments:
        cfg {DiamondConfig} -- Estimator settings (default: {DEFAULT_DIAMOND})

    Returns:
        float -- The estimate in `[0, 2]`
    """
    _check_pair(e1, e2)
    if cfg.samples < 1:
        raise ValueError(f"Diamond estimator needs at least one sample, got {cfg.samples}")
    delta = _choi_difference(e1, e2)
    if not np.any(delta):
        return 0.0
    d_in, d_out = e1.d_in, e1.d_out
    delta4 = delta.reshape(d_out, d_in, d_out, d_in)

    best_psi = np.eye(d_in, dtype=complex) / math.sqrt(d_in)
    best = float(_objective(delta4, d_in, best_psi[None])[0])
    for start in range(0, cfg.samples, CHUNK):
        stop = min(start + CHUNK, cfg.samples)
        psis = np.array([_haar(d_in, seed(derive(cfg.seed, k))) for k in range(start, stop)])
        values = _objective(delta4, d_in, psis)
        k = int(np.argmax(values))
        if values[k] > best:
            best, best_psi = float(values[k]), psis[k]

    rng = seed(splitmix64(cfg.seed ^ REFINE_SALT))
    scale = cfg.perturb_scale
    for _ in range(cfg.refine_steps):
        step = ginibre(d_in, d_in, rng)
        step -= best_psi * np.vdot(best_psi, step)
        cand = best_psi + scale * step
        cand /= np.linalg.norm(cand)
        value = float(_objective(delta4, d_in, cand[None])[0])
        if value > best:
            best, best_psi = value, cand
        scale *= cfg.decay
    return min(max(best, 0.0), 2.0)


def choi_trace_distance(e1, e2):
    """Trace distance `1/2 ||J(E1) - J(E2)||_1` of the Choi states.

    Example:
    ```python
    >>> from dqnn.channels import identity_channel, depolarizing_channel
    >>> round(choi_trace_distance(identity_channel(2), depolarizing_channel(2)), 12)
    0.75
    >>> choi_trace_distance(identity_channel(2), identity_channel(2))
    0.0

    ```
    """
    _check_pair(e1, e2)
    delta = np.asarray(e1.choi(), dtype=complex) - np.asarray(e2.choi(), dtype=complex)
    return trace_norm((delta + dagger(delta)) / 2) / 2


def diamond_bound_holds(e1, e2, cfg=DEFAULT_DIAMOND, slack=BOUND_SLACK):
    """Check `D_tr(J(E1), J(E2)) <= ||E1 - E2||_<> / 2` against the estimate.

    Example:
    ```python
    >>> import warnings
    >>> from dqnn.rng import seed
    >>> from dqnn.channels import random_channel
    >>> rng = seed(62)
    >>> quick = DiamondConfig(samples=100, refine_steps=10)
    >>> all(diamond_bound_holds(random_channel(2, 2, rng), random_channel(2, 2, rng), quick) for _ in range(10))
    True
    >>> with warnings.catch_warnings(record=True) as caught:
    ...     warnings.simplefilter('always')
    ...     held = diamond_bound_holds(random_channel(2, 2, rng), random_channel(2, 2, rng), quick._replace(refine_steps=0))
    >>> held, [str(w.message) for w in caught]
    (True, ['Diamond estimate was not refined, the bound check is not conclusive'])

    ```
    """
    if cfg.refine_steps == 0:
        warnings.warn("Diamond estimate was not refined, the bound check is not conclusive", RuntimeWarning,
                      stacklevel=2)
    bound = choi_trace_distance(e1, e2)
    estimate = diamond_distance(e1, e2, cfg)
    holds = bound <= estimate / 2 + slack
    if not holds:
        logger.info("Choi trace distance %.6g exceeds half the diamond estimate %.6g", bound, estimate)
    return holds
