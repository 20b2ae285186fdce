import logging

import numpy as np

from dqnn.channels import random_density_hs
from dqnn.cost import CostKind, evaluate
from dqnn.network import apply, output_jacobian
from dqnn.rng import derive, seed
from dqnn.train._base import (RANDOM_STATE_PROTOCOL, STATE_STREAM, TrainingTrace, check_config, check_target,
                              cost_floor, diamond_due, gradient_average, optimizer_step, plateau_reached,
                              record_diamond, shifted_outputs, uses_finite_difference)
from dqnn.train.adam import adam_init

__all__ = ['random_state_train']

logger = logging.getLogger(__name__)


def random_state_train(net, target, cfg=RANDOM_STATE_PROTOCOL, run_id=None):
    """Train `net` towards `target` on pairs `(E_tar(rho), E_net(rho))` of random input states.

    The training set holds `batches * batch_size` Hilbert-Schmidt random states drawn from the
    run seed's state stream. Iteration `i` works on batch `i mod batches`: its mean cost is
    recorded and the gradients of its pairs are averaged into one ADAM step.

    Plateaus are detected on the recorded batch costs, not on the cost over the whole training
    set: once the mean batch cost over `plateau_window` iterations improves by less than
    `plateau_rel_tol` relative to the window before, `resample_size` states are replaced,
    oldest first, and the iteration is logged as a resampling event. The final row is the mean
    cost over the whole training set.

    A single batch holding one state is plain gradient training on that pair:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> from dqnn.channels import random_channel, random_density_hs
    >>> from dqnn.network import Architecture, Network, apply
    >>> from dqnn.cost import evaluate
    >>> from dqnn.train._base import init_network
    >>> arch = Architecture('extended', [[2], [2]])
    >>> target = random_channel(2, 2, seed(5))
    >>> cfg = RANDOM_STATE_PROTOCOL._replace(batches=1, batch_size=1, resample_size=1, iterations=100, diamond_every=0,
    ...                                      plateau_window=1000)
    >>> trace = random_state_train(init_network(arch, cfg), target, cfg)
    >>> trace.costs[-1] < trace.costs[0], trace.resamples
    (True, [])
    >>> rho = random_density_hs(2, seed(derive(cfg.seed, 1)))
    >>> abs(evaluate('hs', target(rho), apply(trace.network(), rho)) - trace.costs[-1]) < 1e-12
    True

    ```

    Runs are reproducible and resampling shows up in the trace:
    ```python
    >>> cfg = RANDOM_STATE_PROTOCOL._replace(batches=2, batch_size=2, resample_size=4, iterations=60, diamond_every=0,
    ...                                      plateau_window=5, plateau_rel_tol=1.0)
    >>> a = random_state_train(init_network(arch, cfg), target, cfg, run_id='a')
    >>> b = random_state_train(init_network(arch, cfg), target, cfg, run_id='b')
    >>> a.costs == b.costs, a.resamples == b.resamples, a.resamples[:2]
    (True, True, [9, 19])

    ```

    Arguments:
        net {Network} -- The initial network
        target {Channel} -- The channel to learn

    Keyword Arguments:
        cfg {TrainConfig} -- Training settings in `random_state` mode (default: {RANDOM_STATE_PROTOCOL})
        run_id {str} -- Identifier used in log records and errors (default: {None})

    Raises:
        ValueError: If the configuration or the target shape is invalid
        FloatingPointError: If a cost value or gradient is not finite

    Returns:
        TrainingTrace -- Costs, diamond estimates, resampling events and the trained parameters
    """
    cfg = check_config(cfg)
    if cfg.mode != 'random_state':
        raise ValueError(f"Random state training needs mode 'random_state', got {cfg.mode!r}")
    check_target(net, target)
    kind = CostKind.from_tag(cfg.cost)
    floor = cost_floor(kind)
    finite_difference = uses_finite_difference(kind, cfg)

    rng = seed(derive(cfg.seed, STATE_STREAM))
    d_in = net.arch.d_input
    total = cfg.batches * cfg.batch_size
    inputs = [random_density_hs(d_in, rng) for _ in range(total)]
    targets = [target(rho) for rho in inputs]
    oldest = 0
    history = []

    params = net.flat()
    state = adam_init(len(params), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
    trace = TrainingTrace(config=cfg, arch=net.arch)
    logger.info("Run %s: random state training, %s cost, %d x %d states, %d iterations",
                run_id, kind.tag, cfg.batches, cfg.batch_size, cfg.iterations)

    for i in range(cfg.iterations + 1):
        current = net.with_flat(params)
        if i == cfg.iterations:
            outs = [apply(current, rho) for rho in inputs]
            cost = float(np.mean([evaluate(kind, t, o, floor) for t, o in zip(targets, outs)]))
            trace.record(i, cost, run_id)
            if diamond_due(i, cfg):
                record_diamond(trace, i, target, current, cfg, run_id)
            break

        batch = range((i % cfg.batches) * cfg.batch_size, (i % cfg.batches + 1) * cfg.batch_size)
        tangents = None
        if finite_difference:
            outs = [apply(current, inputs[k]) for k in batch]
        else:
            jacobians = [output_jacobian(current, inputs[k]) for k in batch]
            outs = [out for out, _ in jacobians]
            tangents = [t for _, t in jacobians]
        pairs = [(targets[k], out) for k, out in zip(batch, outs)]
        cost = float(np.mean([evaluate(kind, t, o, floor) for t, o in pairs]))
        trace.record(i, cost, run_id)
        logger.debug("Run %s iteration %d: batch cost %.10g", run_id, i, cost)
        if diamond_due(i, cfg):
            record_diamond(trace, i, target, current, cfg, run_id)

        shifted = None
        if finite_difference:
            shifted = shifted_outputs(current, params, cfg.fd_eps,
                                      lambda n: [apply(n, inputs[k]) for k in batch])
        grad = gradient_average(kind, pairs, len(params), tangents, shifted, cfg.fd_eps)
        state, params = optimizer_step(state, grad, params, kind, run_id)

        history.append(cost)
        if plateau_reached(history, cfg.plateau_window, cfg.plateau_rel_tol, kind.maximize):
            for j in range(cfg.resample_size):
                k = (oldest + j) % total
                inputs[k] = random_density_hs(d_in, rng)
                targets[k] = target(inputs[k])
            oldest = (oldest + cfg.resample_size) % total
            trace.resamples.append(i)
            history = []
            logger.info("Run %s iteration %d: resampled %d training states", run_id, i, cfg.resample_size)

    trace.params = params
    return trace
