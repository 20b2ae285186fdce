"""Seedable random streams.

Every sampling routine takes an explicit generator, there is no global state.
Child seeds (one per channel, per Monte-Carlo sample, per run) are derived from a master
seed with a splitmix64 counter, so results do not depend on evaluation order.
"""
import numpy as np

__all__ = ['MASK64', 'seed', 'splitmix64', 'derive', 'ginibre']

MASK64 = (1 << 64) - 1


def seed(value):
    """Return a new generator seeded with the given value.

    The stream is a `numpy.random.Generator` driven by the MT19937 bit generator.

    Example:
    ```python
    >>> a, b = seed(42), seed(42)
    >>> bool(a.random() == b.random())
    True

    ```

    Arguments:
        value {int} -- The seed value to use, reduced to 64 bits

    Returns:
        numpy.random.Generator -- The seeded generator
    """
    return np.random.Generator(np.random.MT19937(int(value) & MASK64))


def splitmix64(x):
    """A single splitmix64 output for state `x`.

    Example:
    ```python
    >>> hex(splitmix64(0))
    '0xe220a8397b1dcdaf'

    ```
    """
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(master, index):
    """Derive the `index`-th child seed of `master`.

    Example:
    ```python
    >>> derive(7, 0) == derive(7, 0), derive(7, 0) == derive(7, 1)
    (True, False)

    ```
    """
    return splitmix64((splitmix64(int(master) & MASK64) + int(index)) & MASK64)


def ginibre(rows, cols, rng):
    """Complex Ginibre matrix, entries i.i.d. standard complex normal."""
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2)
