import os
import json
import enum
from collections import OrderedDict

__all__ = ['load', 'resolve', 'Res', 'CACHE_SIZE']
__folder__ = os.path.dirname(__file__)
CACHE_SIZE = 4
CACHE = OrderedDict()


class Res(enum.Enum):
    ARCH_MINIMAL = 1  # one input, one ancilla and one output qubit
    ARCH_DEEP = 2
    ARCH_CONVENTIONAL = 3

    SPEC_GRADIENT_CHECK = 10
    SPEC_LEARN_CHOI = 11
    SPEC_LEARN_STATES = 12
    SPEC_COST_ORDERING = 13
    SPEC_WERNER_SWEEP = 14
    SPEC_PARAM_REPORT = 15
    SPEC_COST_ORDERING_STATES = 16


RESOURCES = {
    Res.ARCH_MINIMAL: 'arch_minimal.json',
    Res.ARCH_DEEP: 'arch_deep.json',
    Res.ARCH_CONVENTIONAL: 'arch_conventional.json',
    Res.SPEC_GRADIENT_CHECK: 'spec_gradient_check.json',
    Res.SPEC_LEARN_CHOI: 'spec_learn_choi.json',
    Res.SPEC_LEARN_STATES: 'spec_learn_states.json',
    Res.SPEC_COST_ORDERING: 'spec_cost_ordering.json',
    Res.SPEC_WERNER_SWEEP: 'spec_werner_sweep.json',
    Res.SPEC_PARAM_REPORT: 'spec_param_report.json',
    Res.SPEC_COST_ORDERING_STATES: 'spec_cost_ordering_states.json',
}


def load(resource_id):
    """Load a bundled JSON resource, keeping the most recent ones cached.

    Example:
    ```python
    >>> load(Res.ARCH_MINIMAL)
    {'style': 'extended', 'layers': [[2], [2]]}

    ```
    """
    if resource_id in CACHE:
        return CACHE[resource_id]

    with open(os.path.join(__folder__, RESOURCES[resource_id]), 'r', encoding='utf-8') as f:
        data = json.load(f)
    if len(CACHE) >= CACHE_SIZE:
        oldest = next(iter(CACHE.keys()))
        CACHE.pop(oldest)

    CACHE[resource_id] = data

    return data


def resolve(name_or_path):
    """Load a bundled resource by name (`'arch_deep'`) or a JSON file by path.

    Example:
    ```python
    >>> resolve('arch_deep')['layers']
    [[2, 2], [2, 2, 2], [2, 2], [2, 2]]
    >>> resolve('no_such_thing')
    Traceback (most recent call last):
    ...
    ValueError: 'no_such_thing' is neither a file nor a bundled resource

    ```
    """
    if os.path.isfile(name_or_path):
        with open(name_or_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    try:
        return load(Res[str(name_or_path).upper()])
    except KeyError:
        raise ValueError(f"{name_or_path!r} is neither a file nor a bundled resource") from None
