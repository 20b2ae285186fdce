import logging

from dqnn.cost import CostKind, evaluate
from dqnn.network import choi_jacobian, choi_state
from dqnn.train._base import (CHOI_PROTOCOL, TrainingTrace, check_config, check_target, cost_floor, diamond_due,
                              gradient_average, optimizer_step, record_diamond, shifted_outputs,
                              uses_finite_difference)
from dqnn.train.adam import adam_init

__all__ = ['choi_train']

logger = logging.getLogger(__name__)


def choi_train(net, target, cfg=CHOI_PROTOCOL, run_id=None):
    """Train `net` towards `target` on the cost between the two Choi states.

    Every iteration evaluates `C(J(E_tar), J(E_net))`, records it, and takes one ADAM step along
    the gradient obtained from the derivatives of the network's Choi state. The relative entropy
    and the Chernoff bound, and any cost with `grad_mode='finite_difference'`, use central
    differences over the active parameters instead.

    A network trained towards its own channel sits at the optimum and does not move:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> from dqnn.network import Architecture, Network
    >>> net = Network.random(Architecture('extended', [[2], [2]]), 1.0, seed(3))
    >>> cfg = CHOI_PROTOCOL._replace(iterations=5, diamond_every=0)
    >>> trace = choi_train(net, net.channel(), cfg)
    >>> len(trace.costs), max(trace.costs) < 1e-12, bool(np.array_equal(trace.params, net.flat()))
    (6, True, True)

    ```

    Against a random target the cost decreases:
    ```python
    >>> from dqnn.channels import random_channel
    >>> from dqnn.metrics import DiamondConfig
    >>> from dqnn.train._base import init_network
    >>> target = random_channel(2, 2, seed(4))
    >>> cfg = CHOI_PROTOCOL._replace(iterations=300, diamond_every=100, diamond=DiamondConfig(samples=100, refine_steps=20))
    >>> trace = choi_train(init_network(net.arch, cfg), target, cfg)
    >>> trace.costs[-1] < trace.costs[0], [i for i, _ in trace.diamonds]
    (True, [0, 100, 200, 300])
    >>> trace.diamonds[-1][1] < trace.diamonds[0][1]
    True

    ```

    Arguments:
        net {Network} -- The initial network
        target {Channel} -- The channel to learn

    Keyword Arguments:
        cfg {TrainConfig} -- Training settings in `choi` mode (default: {CHOI_PROTOCOL})
        run_id {str} -- Identifier used in log records and errors (default: {None})

    Raises:
        ValueError: If the configuration or the target shape is invalid
        FloatingPointError: If a cost value or gradient is not finite

    Returns:
        TrainingTrace -- Costs, diamond estimates and the trained parameters
    """
    cfg = check_config(cfg)
    if cfg.mode != 'choi':
        raise ValueError(f"Choi training needs mode 'choi', got {cfg.mode!r}")
    check_target(net, target)
    kind = CostKind.from_tag(cfg.cost)
    floor = cost_floor(kind)
    finite_difference = uses_finite_difference(kind, cfg)

    j_tar = target.choi()
    params = net.flat()
    state = adam_init(len(params), cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
    trace = TrainingTrace(config=cfg, arch=net.arch)
    logger.info("Run %s: Choi training, %s cost, %d iterations", run_id, kind.tag, cfg.iterations)

    for i in range(cfg.iterations + 1):
        current = net.with_flat(params)
        if finite_difference or i == cfg.iterations:
            j_out, tangents = choi_state(current), None
        else:
            j_out, tangents = choi_jacobian(current)
        cost = evaluate(kind, j_tar, j_out, floor)
        trace.record(i, cost, run_id)
        logger.debug("Run %s iteration %d: cost %.10g", run_id, i, cost)
        if diamond_due(i, cfg):
            record_diamond(trace, i, target, current, cfg, run_id)
        if i == cfg.iterations:
            break

        shifted = None
        if finite_difference:
            shifted = shifted_outputs(current, params, cfg.fd_eps, lambda n: [choi_state(n)])
        grad = gradient_average(kind, [(j_tar, j_out)], len(params),
                                None if tangents is None else [tangents], shifted, cfg.fd_eps)
        state, params = optimizer_step(state, grad, params, kind, run_id)

    trace.params = params
    return trace
