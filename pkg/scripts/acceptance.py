import json
import os
import sys

import numpy as np

from dqnn.channels import random_channel, random_density_hs, random_pure
from dqnn.cli import main
from dqnn.rng import seed


def summary(out, *parts):
    with open(os.path.join(out, *parts, 'summary.json'), 'r', encoding='utf-8') as f:
        return json.load(f)


def diamond_at(group, iteration):
    for i, value in group['mean_diamond']:
        if i == iteration:
            return value
    raise KeyError(f"No diamond estimate at iteration {iteration}")


def check(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok


def sampling_checks():
    rng = seed(2024)
    n = 10_000
    results = []

    choi = np.array([random_channel(2, 2, rng).choi() for _ in range(n)])
    z = np.abs(choi.mean(axis=0) - np.eye(4) / 4) / (choi.std(axis=0) / np.sqrt(n) + 1e-15)
    results.append(check("random channel mean", float(z.max()) <= 3, f"worst deviation {z.max():.2f} standard errors"))

    purity = np.array([np.trace(r @ r).real for r in (random_density_hs(2, rng) for _ in range(n))])
    z = abs(purity.mean() - 0.6) / (purity.std() / np.sqrt(n))
    results.append(check("Hilbert-Schmidt purity", z <= 3, f"mean {purity.mean():.4f}, {z:.2f} standard errors"))

    pure = np.array([random_pure(2, rng) for _ in range(n)])
    z = np.abs(pure.mean(axis=0) - np.eye(2) / 2) / (pure.std(axis=0) / np.sqrt(n) + 1e-15)
    results.append(check("Haar pure state mean", float(z.max()) <= 3, f"worst deviation {z.max():.2f} standard errors"))
    return results


if __name__ == '__main__':
    if len(sys.argv) not in (2, 3):
        print(f"Usage: {sys.argv[0]} <OUT_DIR> [WORKERS]")
        print("\tRuns the bundled experiment specs and checks the reproduction thresholds. This takes a while.")
        sys.exit(1)

    out = sys.argv[1]
    workers = sys.argv[2] if len(sys.argv) == 3 else '4'
    results = sampling_checks()

    status = main(['-v', 'run', 'spec_gradient_check', '--out', out, '--workers', workers])
    results.append(check("gradient check", status == 0, f"exit status {status}"))

    for spec in ('spec_learn_choi', 'spec_learn_states', 'spec_cost_ordering', 'spec_cost_ordering_states',
                 'spec_werner_sweep'):
        status = main(['-v', 'run', spec, '--out', out, '--workers', workers])
        if status != 0:
            print(f"{spec} failed with exit status {status}")
            sys.exit(status)

    choi = summary(out, 'learn-random', 'choi')['hs']
    results.append(check("Choi training", choi['final_diamond_mean'] <= 5e-3 and choi['final_diamond_median'] <= 1e-3,
                         f"mean {choi['final_diamond_mean']:.3g}, median {choi['final_diamond_median']:.3g}"))

    ordering = summary(out, 'learn-random', 'cost_ordering')
    finals = {cost: group['final_diamond_mean'] for cost, group in ordering.items()}
    results.append(check("cost ordering", finals['d1'] < finals['qre'] and finals['hs'] < finals['qre']
                         and finals['qre'] >= 0.1, ", ".join(f"{c} {v:.3g}" for c, v in sorted(finals.items()))))

    ordering = summary(out, 'learn-random', 'cost_ordering_states')
    finals = {cost: group['final_diamond_mean'] for cost, group in ordering.items()}
    results.append(check("random state cost ordering", min(finals['f2'], finals['d2']) > finals['hs'],
                         ", ".join(f"{c} {v:.3g}" for c, v in sorted(finals.items()))))

    states = summary(out, 'learn-random', 'random_state')['hs']
    results.append(check("random state plateau",
                         1e-2 <= states['final_diamond_mean'] <= 1.5e-1
                         and states['final_diamond_mean'] > choi['final_diamond_mean'],
                         f"mean {states['final_diamond_mean']:.3g}"))

    werner = summary(out, 'werner-sweep')
    late = [diamond_at(werner[f"alpha_{a:+.2f}"], 500) for a in (0.5, 1)]
    results.append(check("Werner alpha >= 0.5", max(late) <= 1e-2, f"diamond at 500: {late}"))
    anti = werner["alpha_-1.00"]['final_diamond_mean']
    results.append(check("Werner alpha = -1", anti >= 2e-2, f"final diamond {anti:.3g}"))
    delayed = werner["alpha_+0.00"]['steepest_descent']
    results.append(check("Werner alpha = 0", delayed > 100, f"steepest descent at iteration {delayed}"))

    print(f"{sum(results)} of {len(results)} checks passed.")
    sys.exit(0 if all(results) else 1)
