"""Experiment specifications and the runner behind `dqnn run`.

A spec is a JSON document. Every kind accepts `kind`, `label`, `arch` (an architecture
description or the name of a bundled one), `seed` and `workers`; the remaining keys depend on
the kind:

    gradient-check   trials, tolerance, abs_floor, costs
    learn-random     channel_count, costs, train
    werner-sweep     alphas, dimension, channel_count, train
    param-report     (nothing else)

Outputs go to `<out>/<kind>[/<label>]/`: one `run_<index>.csv` per run under a directory
named after the run group, `summary.json` with the per-iteration means and `manifest.json`
echoing the spec, the derived seeds and the library versions. Runs are merged by index, so the
outputs do not depend on the number of workers.
"""
import json
import logging
import math
import os
import platform
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np
import scipy

import dqnn
from dqnn.channels import random_channel, random_density_hs, werner_channel
from dqnn.cost import ANALYTIC_KINDS, CostKind, GradRequest, gradient_term
from dqnn.data.importer import resolve
from dqnn.metrics import DiamondConfig
from dqnn.network import Architecture, Network, apply, format_report, output_jacobian, param_report
from dqnn.rng import derive, seed
from dqnn.train import TrainConfig, check_config, init_network, steepest_descent_iteration, train
from dqnn.train._base import shifted_outputs

__all__ = ['KINDS', 'ExperimentSpec', 'Job', 'load_spec', 'run', 'gradient_check_trial']

logger = logging.getLogger(__name__)

KINDS = ('gradient-check', 'learn-random', 'werner-sweep', 'param-report')

COMMON_KEYS = ('kind', 'label', 'arch', 'seed', 'workers')
KIND_KEYS = {
    'gradient-check': ('trials', 'tolerance', 'abs_floor', 'costs'),
    'learn-random': ('channel_count', 'costs', 'train'),
    'werner-sweep': ('alphas', 'dimension', 'channel_count', 'train'),
    'param-report': (),
}

# child stream of a run seed for the target channel
TARGET_STREAM = 2


class ExperimentSpec(namedtuple('ExperimentSpec', [
        'kind', 'label', 'arch', 'seed', 'workers', 'trials', 'tolerance', 'abs_floor', 'costs',
        'channel_count', 'alphas', 'dimension', 'train'])):
    """A validated experiment description.

    Example:
    ```python
    >>> spec = ExperimentSpec.from_dict({'kind': 'werner-sweep', 'arch': 'arch_minimal', 'alphas': [0, 1]})
    >>> spec.arch, spec.dimension, spec.train.mode
    (<Architecture extended [[2], [2]]>, 2, 'choi')
    >>> ExperimentSpec.from_dict({'kind': 'param-report', 'arch': 'arch_minimal', 'alphas': [0], 'depth': 3})
    Traceback (most recent call last):
    ...
    ValueError: Unknown keys for param-report: alphas, depth
    >>> ExperimentSpec.from_dict({'kind': 'learn-random', 'arch': 'arch_minimal', 'train': {'speed': 2}})
    Traceback (most recent call last):
    ...
    ValueError: Unknown training keys: speed

    ```
    """
    __slots__ = ()

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        kind = data.get('kind')
        if kind not in KINDS:
            raise ValueError(f"Unknown experiment kind {kind!r}, expected one of {', '.join(KINDS)}")
        unknown = sorted(set(data) - set(COMMON_KEYS) - set(KIND_KEYS[kind]))
        if unknown:
            raise ValueError(f"Unknown keys for {kind}: {', '.join(unknown)}")
        if 'arch' not in data:
            raise ValueError(f"Experiment {kind} needs an 'arch'")

        arch = data['arch']
        arch = Architecture.from_dict(resolve(arch) if isinstance(arch, str) else arch)
        workers = int(data.get('workers', 1))
        if workers < 1:
            raise ValueError(f"Need at least one worker, got {workers}")
        costs = tuple(CostKind.from_tag(c).tag for c in data.get('costs', [k.tag for k in ANALYTIC_KINDS]))
        if not costs:
            raise ValueError("Experiment needs at least one cost")
        spec = cls(
            kind=kind,
            label=data.get('label'),
            arch=arch,
            seed=int(data.get('seed', 0)),
            workers=workers,
            trials=int(data.get('trials', 50)),
            tolerance=float(data.get('tolerance', 1e-5)),
            abs_floor=float(data.get('abs_floor', 1e-8)),
            costs=costs,
            channel_count=int(data.get('channel_count', 1 if kind == 'werner-sweep' else 100)),
            alphas=tuple(float(a) for a in data.get('alphas', (-1, -0.5, 0, 0.5, 1))),
            dimension=int(data.get('dimension', arch.d_input)),
            train=_train_config(data.get('train', {})),
        )
        return spec.check()

    def check(self):
        if self.trials < 1 or self.channel_count < 1:
            raise ValueError(f"Trial and channel counts must be positive, got {self.trials}, {self.channel_count}")
        if self.kind == 'gradient-check':
            bad = [c for c in self.costs if not CostKind.from_tag(c).analytic]
            if bad:
                raise ValueError(f"No analytic gradient to check for {', '.join(bad)}")
        if self.kind == 'werner-sweep':
            d = self.dimension
            if (self.arch.d_input, self.arch.d_output) != (d, d):
                raise ValueError(f"Werner sweep in dimension {d} needs a {d} -> {d} architecture, "
                                 f"got {self.arch.d_input} -> {self.arch.d_output}")
            if any(not -1 <= a <= 1 for a in self.alphas):
                raise ValueError(f"Werner parameters must lie in [-1, 1], got {list(self.alphas)}")
        return self

    def to_dict(self):
        rv = self._asdict()
        rv['arch'] = self.arch.to_dict()
        rv['costs'] = list(self.costs)
        rv['alphas'] = list(self.alphas)
        train = self.train._asdict()
        train['diamond'] = train['diamond']._asdict()
        rv['train'] = train
        return rv


def _train_config(data):
    data = dict(data)
    unknown = sorted(set(data) - set(TrainConfig._fields))
    if unknown:
        raise ValueError(f"Unknown training keys: {', '.join(unknown)}")
    if isinstance(data.get('diamond'), dict):
        diamond = data['diamond']
        extra = sorted(set(diamond) - set(DiamondConfig._fields))
        if extra:
            raise ValueError(f"Unknown diamond keys: {', '.join(extra)}")
        data['diamond'] = DiamondConfig(**diamond)
    return check_config(TrainConfig(**data))


def load_spec(name_or_path, **overrides):
    """Read a spec from a file or a bundled resource; `None` overrides are ignored.

    Example:
    ```python
    >>> spec = load_spec('spec_werner_sweep', seed=9, iterations=20)
    >>> spec.seed, spec.train.iterations, spec.alphas
    (9, 20, (-1.0, -0.5, 0.0, 0.5, 1.0))
    >>> spec = load_spec('spec_cost_ordering_states')
    >>> spec.train.mode, spec.train.lr, len(spec.costs)
    ('random_state', 0.001, 8)
    >>> sorted({load_spec(n).train.lr for n in ('spec_learn_choi', 'spec_learn_states', 'spec_werner_sweep')})
    [0.001]

    ```
    """
    data = dict(resolve(name_or_path))
    iterations = overrides.pop('iterations', None)
    if iterations is not None:
        data['train'] = dict(data.get('train', {}), iterations=iterations)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec.from_dict(data)


Job = namedtuple('Job', ['index', 'group', 'seed', 'arch', 'train', 'cost', 'target', 'alpha', 'trials',
                         'tolerance', 'abs_floor'])


def _jobs(spec):
    if spec.kind == 'gradient-check':
        for i, cost in enumerate(spec.costs):
            yield Job(i, cost, derive(spec.seed, i), spec.arch, None, cost, None, None, spec.trials,
                      spec.tolerance, spec.abs_floor)
    elif spec.kind == 'learn-random':
        # every cost sees the same channels and initial networks
        for k, cost in enumerate(spec.costs):
            for c in range(spec.channel_count):
                s = derive(spec.seed, c)
                cfg = spec.train._replace(cost=cost, seed=s)
                yield Job(k * spec.channel_count + c, cost, s, spec.arch, cfg, cost, 'random', None, None, None, None)
    elif spec.kind == 'werner-sweep':
        for k, alpha in enumerate(spec.alphas):
            for c in range(spec.channel_count):
                index = k * spec.channel_count + c
                s = derive(spec.seed, index)
                yield Job(index, f"alpha_{alpha:+.2f}", s, spec.arch, spec.train._replace(seed=s),
                          spec.train.cost, 'werner', alpha, None, None, None)


def _target(job):
    arch = job.arch
    if job.target == 'werner':
        return werner_channel(job.alpha, arch.d_input)
    return random_channel(arch.d_input, arch.d_output, seed(derive(job.seed, TARGET_STREAM)))


def gradient_check_trial(arch, cost, rng, tolerance=1e-5, abs_floor=1e-8, eps=1e-6):
    """Compare the analytic gradient with central differences on one random network, input
    state and target state.

    A parameter passes when `|exact - fd| <= max(tolerance * |fd|, abs_floor)`; the relative
    error is reported against `max(|fd|, abs_floor)`.

    Example:
    ```python
    >>> arch = Architecture('extended', [[2], [2]])
    >>> abs_err, rel_err, passed = gradient_check_trial(arch, 'd1', seed(7))
    >>> abs_err < 1e-6, passed
    (True, True)

    ```

    Returns:
        tuple -- Largest absolute error, largest relative error and whether every parameter passed
    """
    kind = CostKind.from_tag(cost)
    net = Network.random(arch, math.pi, rng)
    rho_in = random_density_hs(arch.d_input, rng)
    rho_tar = random_density_hs(arch.d_output, rng)
    params = net.flat()
    out, tangents = output_jacobian(net, rho_in)
    shifted = shifted_outputs(net, params, eps, lambda n: [apply(n, rho_in)])[0]
    worst_abs, worst_rel, passed = 0.0, 0.0, True
    for drho, pm in zip(tangents, shifted):
        exact = gradient_term(kind, GradRequest(rho_tar, out, drho))
        fd = gradient_term(kind, GradRequest(rho_tar, out, mode='finite_difference', eps=eps, shifted=pm))
        if exact is None or fd is None:
            continue
        err = abs(exact - fd)
        worst_abs = max(worst_abs, err)
        worst_rel = max(worst_rel, err / max(abs(fd), abs_floor))
        passed &= err <= max(tolerance * abs(fd), abs_floor)
    return worst_abs, worst_rel, passed


def _run_job(job):
    if job.train is None:
        rng = seed(job.seed)
        rows = []
        for t in range(job.trials):
            abs_err, rel_err, passed = gradient_check_trial(job.arch, job.cost, rng, job.tolerance, job.abs_floor)
            rows.append((t, abs_err, rel_err, passed))
        return job, rows

    net = init_network(job.arch, job.train)
    trace = train(net, _target(job), job.train, run_id=f"{job.group}/{job.index}")
    return job, trace


def _execute(jobs, workers):
    if workers == 1 or len(jobs) < 2:
        results = [_run_job(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    return sorted(results, key=lambda r: r[0].index)


def _write_json(path, data):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write('\n')


def _group_summary(traces):
    costs = np.array([t.costs for t in traces])
    rv = {
        'runs': len(traces),
        'mean_cost': [float(x) for x in costs.mean(axis=0)],
        'final_cost_mean': float(costs[:, -1].mean()),
        'resamples': [len(t.resamples) for t in traces],
    }
    if traces[0].diamonds:
        its = [i for i, _ in traces[0].diamonds]
        values = np.array([[d for _, d in t.diamonds] for t in traces])
        rv['mean_diamond'] = [[i, float(v)] for i, v in zip(its, values.mean(axis=0))]
        rv['final_diamond_mean'] = float(values[:, -1].mean())
        rv['final_diamond_median'] = float(np.median(values[:, -1]))
    rv['steepest_descent'] = steepest_descent_iteration(costs.mean(axis=0))
    return rv


def run(spec, out_dir):
    """Execute an experiment and write its outputs; returns the exit status.

    The status is 0, or 1 when a gradient check failed. Invalid specs raise `ValueError`,
    non-finite numbers during training `FloatingPointError`.

    Example:
    ```python
    >>> import json, os, tempfile
    >>> spec = ExperimentSpec.from_dict({'kind': 'werner-sweep', 'arch': 'arch_minimal', 'alphas': [0.5, 1],
    ...                                  'train': {'iterations': 5, 'diamond_every': 0,
    ...                                            'diamond': {'samples': 20, 'refine_steps': 0}}})
    >>> with tempfile.TemporaryDirectory() as out:
    ...     status = run(spec, out)
    ...     root = os.path.join(out, 'werner-sweep')
    ...     files = sorted(os.listdir(root)), sorted(os.listdir(os.path.join(root, 'alpha_+0.50')))
    ...     summary = json.load(open(os.path.join(root, 'summary.json')))
    >>> status, files
    (0, (['alpha_+0.50', 'alpha_+1.00', 'manifest.json', 'summary.json'], ['run_0.csv']))
    >>> summary['alpha_+1.00']['runs'], len(summary['alpha_+1.00']['mean_cost'])
    (1, 6)

    ```

    Results do not depend on the worker count, and reruns reproduce them:
    ```python
    >>> def outputs(workers):
    ...     spec = ExperimentSpec.from_dict({'kind': 'learn-random', 'arch': 'arch_minimal', 'costs': ['hs'],
    ...                                      'channel_count': 2, 'workers': workers,
    ...                                      'train': {'iterations': 3, 'diamond_every': 0,
    ...                                                'diamond': {'samples': 20, 'refine_steps': 0}}})
    ...     with tempfile.TemporaryDirectory() as out:
    ...         run(spec, out)
    ...         root = os.path.join(out, 'learn-random')
    ...         names = ['summary.json'] + [os.path.join('hs', f"run_{i}.csv") for i in range(2)]
    ...         return [open(os.path.join(root, n), encoding='utf-8').read() for n in names]
    >>> serial = outputs(1)
    >>> outputs(2) == serial, outputs(1) == serial
    (True, True)

    ```
    """
    root = os.path.join(out_dir, spec.kind, *([spec.label] if spec.label else []))
    os.makedirs(root, exist_ok=True)
    jobs = list(_jobs(spec))
    logger.info("Experiment %s: %d job(s) on %d worker(s), output in %s", spec.kind, len(jobs), spec.workers, root)

    summary, status = {}, 0
    if spec.kind == 'param-report':
        rows = param_report(spec.arch)
        with open(os.path.join(root, 'report.txt'), 'w', encoding='utf-8') as f:
            f.write(format_report(rows) + '\n')
        summary = {
            'rows': [r._asdict() for r in rows],
            'active_total': sum(r.active for r in rows),
            'unitary_total': sum(r.unitary for r in rows),
        }
    else:
        results = _execute(jobs, spec.workers)
        groups = {}
        for job, result in results:
            group_dir = os.path.join(root, job.group)
            os.makedirs(group_dir, exist_ok=True)
            path = os.path.join(group_dir, f"run_{job.index}.csv")
            if spec.kind == 'gradient-check':
                with open(path, 'w', encoding='utf-8') as f:
                    f.write('trial,max_abs_error,max_rel_error,passed\n')
                    for t, a, r, ok in result:
                        f.write(f"{t},{a!r},{r!r},{int(ok)}\n")
                passed = all(ok for *_, ok in result)
                summary[job.group] = {
                    'trials': len(result),
                    'max_rel_error': max(r for _, _, r, _ in result),
                    'passed': passed,
                }
                logger.info("Gradient check %s: %s", job.group, 'pass' if passed else 'FAIL')
                if not passed:
                    status = 1
            else:
                result.to_csv(path)
                groups.setdefault(job.group, []).append(result)
            logger.info("Finished job %s/%d", job.group, job.index)
        for group, traces in groups.items():
            summary[group] = _group_summary(traces)

    _write_json(os.path.join(root, 'summary.json'), summary)
    _write_json(os.path.join(root, 'manifest.json'), {
        'spec': spec.to_dict(),
        'seeds': [{'index': job.index, 'group': job.group, 'seed': job.seed} for job in jobs],
        'versions': {
            'dqnn': dqnn.__version__,
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'python': platform.python_version(),
        },
        'timestamp': datetime.now(timezone.utc).isoformat(),
    })
    return status
