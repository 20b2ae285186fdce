"""Training configuration, the trace of a run and the pieces both training schemes share."""
import csv
import io
import json
import logging
import math
from collections import namedtuple

import numpy as np

from dqnn.cost import QRE_FLOOR, CostKind, GradRequest, gradient_term
from dqnn.metrics import DEFAULT_DIAMOND, DiamondConfig, diamond_distance
from dqnn.network import Architecture, Network
from dqnn.rng import derive, seed
from dqnn.train.adam import adam_step

__all__ = [
    'TrainConfig', 'TrainingTrace', 'CHOI_PROTOCOL', 'RANDOM_STATE_PROTOCOL', 'MODES', 'GRAD_MODES',
    'check_config', 'init_params', 'init_network', 'steepest_descent_iteration', 'plateau_reached',
]

logger = logging.getLogger(__name__)

MODES = ('choi', 'random_state')
GRAD_MODES = ('analytic', 'finite_difference')
BATCH_FIELDS = ('batches', 'batch_size', 'resample_size')

# child streams of a run seed
INIT_STREAM = 0
STATE_STREAM = 1

TrainConfig = namedtuple('TrainConfig', [
    'mode', 'cost', 'iterations', 'init_scale', 'seed',
    'lr', 'beta1', 'beta2', 'adam_eps', 'fd_eps', 'grad_mode',
    'batches', 'batch_size', 'resample_size', 'plateau_window', 'plateau_rel_tol',
    'diamond_every', 'diamond',
], defaults=(
    'choi', 'hs', 1000, 1e-2, 0,
    0.01, 0.9, 0.999, 1e-8, 1e-6, 'analytic',
    None, None, None, 20, 1e-4,
    0, DEFAULT_DIAMOND,
))


CHOI_PROTOCOL = TrainConfig(
    mode='choi',
    cost='hs',
    iterations=1000,
    diamond_every=50,
)

# eight batches of four states, all 32 replaced on a plateau
RANDOM_STATE_PROTOCOL = TrainConfig(
    mode='random_state',
    cost='hs',
    iterations=1000,
    batches=8,
    batch_size=4,
    resample_size=32,
    diamond_every=50,
)


def check_config(cfg):
    """Validate a training configuration and return it.

    Batch fields are required in `random_state` mode and rejected otherwise.

    Example:
    ```python
    >>> check_config(CHOI_PROTOCOL) is CHOI_PROTOCOL
    True
    >>> check_config(CHOI_PROTOCOL._replace(batches=8, batch_size=4))
    Traceback (most recent call last):
    ...
    ValueError: Batch fields batches, batch_size are only valid in random_state mode
    >>> check_config(RANDOM_STATE_PROTOCOL._replace(resample_size=None))
    Traceback (most recent call last):
    ...
    ValueError: random_state mode requires resample_size
    >>> check_config(TrainConfig(iterations=0))
    Traceback (most recent call last):
    ...
    ValueError: Training needs at least one iteration, got 0

    ```
    """
    if cfg.mode not in MODES:
        raise ValueError(f"Unknown training mode {cfg.mode!r}, expected one of {', '.join(MODES)}")
    CostKind.from_tag(cfg.cost)
    if cfg.grad_mode not in GRAD_MODES:
        raise ValueError(f"Unknown gradient mode {cfg.grad_mode!r}, expected one of {', '.join(GRAD_MODES)}")
    if cfg.iterations < 1:
        raise ValueError(f"Training needs at least one iteration, got {cfg.iterations}")
    if cfg.init_scale < 0:
        raise ValueError(f"Initialization scale must be non-negative, got {cfg.init_scale}")
    if cfg.lr <= 0 or cfg.fd_eps <= 0:
        raise ValueError(f"Learning rate and finite-difference step must be positive, got {cfg.lr}, {cfg.fd_eps}")
    if cfg.diamond_every < 0:
        raise ValueError(f"diamond_every must be non-negative, got {cfg.diamond_every}")

    given = [f for f in BATCH_FIELDS if getattr(cfg, f) is not None]
    if cfg.mode == 'choi':
        if given:
            raise ValueError(f"Batch fields {', '.join(given)} are only valid in random_state mode")
        return cfg
    missing = [f for f in BATCH_FIELDS if f not in given]
    if missing:
        raise ValueError(f"random_state mode requires {', '.join(missing)}")
    if min(cfg.batches, cfg.batch_size, cfg.resample_size, cfg.plateau_window) < 1:
        raise ValueError("Batch counts, batch size, resample size and plateau window must be positive")
    if cfg.resample_size > cfg.batches * cfg.batch_size:
        raise ValueError(f"Cannot resample {cfg.resample_size} of {cfg.batches * cfg.batch_size} training states")
    return cfg


def _config_to_dict(cfg):
    data = cfg._asdict()
    if data['diamond'] is not None:
        data['diamond'] = data['diamond']._asdict()
    return data


def _config_from_dict(data):
    data = dict(data)
    if data.get('diamond') is not None:
        data['diamond'] = DiamondConfig(**data['diamond'])
    return TrainConfig(**data)


class TrainingTrace(object):
    """Cost per iteration, a sparse diamond-distance series, resampling events and the final parameters.

    Rows `0 .. N-1` are measured before update `i`, row `N` on the trained parameters.

    Example:
    ```python
    >>> trace = TrainingTrace()
    >>> for i, c in enumerate([0.5, 0.25, 0.125]):
    ...     trace.record(i, c)
    >>> trace.record_diamond(0, 1.0); trace.record_diamond(2, 0.1)
    >>> print(trace.to_csv(), end='')
    iteration,cost,diamond
    0,0.5,1.0
    1,0.25,
    2,0.125,0.1
    >>> trace.iterations, trace.final_cost, trace.final_diamond
    (2, 0.125, 0.1)
    >>> trace.record(3, float('nan'), run_id='werner-3')
    Traceback (most recent call last):
    ...
    FloatingPointError: Run werner-3: non-finite cost nan at iteration 3

    ```

    JSON keeps everything, the final parameters included:
    ```python
    >>> import numpy as np
    >>> trace.config, trace.params = CHOI_PROTOCOL, np.array([0.1, -0.2])
    >>> back = TrainingTrace.from_json(trace.to_json())
    >>> back.costs == trace.costs, back.diamonds == trace.diamonds, back.config == CHOI_PROTOCOL
    (True, True, True)
    >>> [float(x) for x in back.params]
    [0.1, -0.2]

    ```
    """

    def __init__(self, costs=(), diamonds=(), resamples=(), params=None, config=None, arch=None):
        self.costs = list(costs)
        self.diamonds = [(int(i), float(d)) for i, d in diamonds]
        self.resamples = list(resamples)
        self.params = params
        self.config = config
        self.arch = arch

    def record(self, iteration, cost, run_id=None):
        if not math.isfinite(cost):
            raise FloatingPointError(f"Run {run_id}: non-finite cost {cost} at iteration {iteration}")
        if iteration != len(self.costs):
            raise ValueError(f"Expected iteration {len(self.costs)}, got {iteration}")
        self.costs.append(float(cost))

    def record_diamond(self, iteration, value):
        if self.diamonds and iteration <= self.diamonds[-1][0]:
            raise ValueError(f"Diamond series must increase, got {iteration} after {self.diamonds[-1][0]}")
        self.diamonds.append((int(iteration), float(value)))

    @property
    def iterations(self):
        return len(self.costs) - 1

    @property
    def final_cost(self):
        return self.costs[-1] if self.costs else None

    @property
    def final_diamond(self):
        return self.diamonds[-1][1] if self.diamonds else None

    def network(self):
        """The trained network, needs `arch` and `params`."""
        if self.arch is None or self.params is None:
            raise ValueError("Trace carries no architecture or parameters")
        return Network.zeros(self.arch).with_flat(self.params)

    def to_csv(self, path=None):
        diamonds = dict(self.diamonds)
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['iteration', 'cost', 'diamond'])
        for i, c in enumerate(self.costs):
            writer.writerow([i, repr(c), repr(diamonds[i]) if i in diamonds else ''])
        text = out.getvalue()
        if path is not None:
            with open(path, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
        return text

    def to_json(self):
        return json.dumps({
            'config': None if self.config is None else _config_to_dict(self.config),
            'arch': None if self.arch is None else self.arch.to_dict(),
            'costs': self.costs,
            'diamonds': self.diamonds,
            'resamples': self.resamples,
            'params': None if self.params is None else [float(x) for x in self.params],
        })

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(
            costs=data['costs'],
            diamonds=data['diamonds'],
            resamples=data['resamples'],
            params=None if data['params'] is None else np.array(data['params']),
            config=None if data['config'] is None else _config_from_dict(data['config']),
            arch=None if data['arch'] is None else Architecture.from_dict(data['arch']),
        )

    def __repr__(self):
        return f"<TrainingTrace iterations={self.iterations} final_cost={self.final_cost}>"


def init_params(net, scale, rng):
    """A network on the same architecture with active angles uniform in `[-scale, scale]`.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> arch = Architecture('extended', [[2], [2]])
    >>> bool(np.array_equal(init_params(Network.zeros(arch), 0, seed(1)).flat(), np.zeros(28)))
    True
    >>> a, b = init_params(Network.zeros(arch), 1e-2, seed(1)), init_params(Network.zeros(arch), 1e-2, seed(1))
    >>> bool(np.array_equal(a.flat(), b.flat())), bool(np.max(np.abs(a.flat())) <= 1e-2)
    (True, True)

    ```
    """
    if scale < 0:
        raise ValueError(f"Initialization scale must be non-negative, got {scale}")
    return Network.random(net.arch, scale, rng)


def init_network(arch, cfg):
    """Initial network of a run, drawn from the run seed's initialization stream."""
    return init_params(Network.zeros(arch), cfg.init_scale, seed(derive(cfg.seed, INIT_STREAM)))


def steepest_descent_iteration(costs):
    """Iteration `i` whose update gives the largest decrease `costs[i] - costs[i + 1]`.

    Example:
    ```python
    >>> steepest_descent_iteration([1.0, 0.9, 0.5, 0.45])
    1
    >>> steepest_descent_iteration([1.0])
    Traceback (most recent call last):
    ...
    ValueError: Need at least two cost values, got 1

    ```
    """
    costs = np.asarray(costs, dtype=float)
    if len(costs) < 2:
        raise ValueError(f"Need at least two cost values, got {len(costs)}")
    return int(np.argmax(costs[:-1] - costs[1:]))


def plateau_reached(history, window, rel_tol, maximize=False):
    """Whether the mean cost of the last `window` iterations improved on the window before
    it by less than `rel_tol` relative.

    Example:
    ```python
    >>> plateau_reached([1.0] * 40, 20, 1e-4)
    True
    >>> plateau_reached([1.0] * 20 + [0.5] * 20, 20, 1e-4), plateau_reached([1.0] * 39, 20, 1e-4)
    (False, False)
    >>> plateau_reached([0.5] * 20 + [0.9] * 20, 20, 1e-4, maximize=True)
    False

    ```
    """
    if len(history) < 2 * window:
        return False
    prev = float(np.mean(history[-2 * window:-window]))
    cur = float(np.mean(history[-window:]))
    gain = cur - prev if maximize else prev - cur
    return gain < rel_tol * max(abs(prev), 1e-300)


def cost_floor(kind):
    return QRE_FLOOR if kind is CostKind.QRE else None


def uses_finite_difference(kind, cfg):
    return cfg.grad_mode == 'finite_difference' or not kind.analytic


def check_target(net, target):
    if (target.d_in, target.d_out) != (net.arch.d_input, net.arch.d_output):
        raise ValueError(f"Target channel {target.d_in} -> {target.d_out} does not match the network "
                         f"{net.arch.d_input} -> {net.arch.d_output}")


def shifted_outputs(net, params, eps, forward):
    """`forward` at `params +- eps e_mu` for every coordinate, regrouped per output.

    `forward(net)` returns a list of outputs; the result holds, for every output, the list of
    `(plus, minus)` pairs in parameter order.
    """
    per_param = []
    for mu in range(len(params)):
        step = np.zeros_like(params)
        step[mu] = eps
        per_param.append((forward(net.with_flat(params + step)), forward(net.with_flat(params - step))))
    count = len(per_param[0][0]) if per_param else 0
    return [[(plus[k], minus[k]) for plus, minus in per_param] for k in range(count)]


def _pair_gradient(kind, tar, out, count, drhos, shifted, eps):
    mode = 'analytic' if shifted is None else 'finite_difference'
    terms = np.empty(count)
    for mu in range(count):
        req = GradRequest(tar, out, None if drhos is None else drhos[mu], mode, eps,
                          None if shifted is None else shifted[mu])
        term = gradient_term(kind, req)
        if term is None:
            return None
        terms[mu] = term
    return terms


def gradient_average(kind, pairs, count, tangents=None, shifted=None, eps=1e-6):
    """Mean parameter gradient over `(rho_tar, rho_out)` pairs.

    Pairs whose states coincide are left out; with none left the gradient is zero.
    `tangents[k]` are the output derivatives of pair `k` (analytic route), `shifted[k]` its
    shifted outputs (finite-difference route).

    Example:
    ```python
    >>> import numpy as np
    >>> rho = np.diag([0.6, 0.4])
    >>> [float(x) for x in gradient_average(CostKind.HS, [(rho, rho)], 2, [[rho, rho]])]
    [0.0, 0.0]

    ```
    """
    kept = []
    for k, (tar, out) in enumerate(pairs):
        g = _pair_gradient(kind, tar, out, count,
                           None if tangents is None else tangents[k],
                           None if shifted is None else shifted[k], eps)
        if g is not None:
            kept.append(g)
    if not kept:
        return np.zeros(count)
    return np.mean(kept, axis=0)


def optimizer_step(state, grad, params, kind, run_id):
    try:
        return adam_step(state, grad, params, maximize=kind.maximize)
    except FloatingPointError as exc:
        raise FloatingPointError(f"Run {run_id}: {exc}") from exc


def diamond_due(iteration, cfg):
    return iteration == cfg.iterations or (cfg.diamond_every > 0 and iteration % cfg.diamond_every == 0)


def record_diamond(trace, iteration, target, net, cfg, run_id):
    value = diamond_distance(target, net.channel(), cfg.diamond or DEFAULT_DIAMOND)
    trace.record_diamond(iteration, value)
    logger.info("Run %s iteration %d: diamond distance %.6g", run_id, iteration, value)
    return value
