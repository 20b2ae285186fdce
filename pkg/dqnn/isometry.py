"""Composite parametrization of isometries and unitaries.

A perceptron isometry `V: C^d_in -> C^d_out` is written as

    V = [prod_{m < d_in} prod_{n > m} L(m, n)] . [prod_{l < d_in} exp(i P_l lam[l, l])] . 1_{d_out x d_in}

with the two-level factors `L(m, n) = exp(i P_n lam[n, m]) exp(i Y_{m,n} lam[m, n])`. Products
are ordered left to right, so the rightmost factor acts first. Only the entries
`{(m, n) : m < d_in or n < d_in}` of the `d_out x d_out` parameter matrix influence `V`.

Isometry property over random draws:
```python
>>> import numpy as np
>>> from dqnn.rng import seed
>>> rng = seed(1)
>>> worst = 0.0
>>> for d_in, d_out, draws in [(2, 2, 100), (2, 4, 100), (2, 8, 100), (4, 8, 100), (3, 9, 100), (1, 1, 5), (4, 16, 20)]:
...     for _ in range(draws):
...         p = ParamMatrix.random(d_in, d_out, np.pi, rng)
...         v = build_isometry(p)
...         worst = max(worst, float(np.max(np.abs(v.conj().T @ v - np.eye(d_in)))))
>>> worst <= 1e-10
True
>>> all(int(active_mask(a, b).sum()) == active_param_count(a, b)
...     for b in range(1, 17) for a in range(1, b + 1))
True

```
"""
import math
from collections import namedtuple

import numpy as np

from dqnn.linalg import dagger, projector

__all__ = [
    'ParamMatrix', 'Generator', 'active_mask', 'active_param_count', 'unitary_param_count',
    'gate_factor', 'build_isometry', 'build_unitary', 'tilde_generator', 'generator_frame',
    'generator_frames', 'isometry_derivative', 'canonicalize', 'is_canonical',
    'projector_generator', 'rotation_generator',
]

TWO_PI = 2 * math.pi


def active_mask(d_in, d_out):
    """Boolean `d_out x d_out` matrix marking the parameters that affect the isometry."""
    if not 1 <= d_in <= d_out:
        raise ValueError(f"Require 1 <= d_in <= d_out, got d_in={d_in}, d_out={d_out}")
    idx = np.arange(d_out)
    return (idx[:, None] < d_in) | (idx[None, :] < d_in)


def active_param_count(d_in, d_out):
    """Number of free real parameters of an isometry `C^d_in -> C^d_out`.

    Example:
    ```python
    >>> active_param_count(3, 3)
    9
    >>> active_param_count(2, 8)
    28
    >>> active_param_count(16, 64), unitary_param_count(64)
    (1792, 4096)
    >>> active_param_count(4, 2)
    Traceback (most recent call last):
    ...
    ValueError: Require 1 <= d_in <= d_out, got d_in=4, d_out=2

    ```

    For a perceptron on a pair of `d = 4` level neurons (`d_in = d`, `d_out = d^2` in the
    extended wiring the count is `d^2 (2d - 1)`):
    ```python
    >>> unitary_param_count(4 * 4), active_param_count(4, 16)
    (256, 112)

    ```
    """
    if not 1 <= d_in <= d_out:
        raise ValueError(f"Require 1 <= d_in <= d_out, got d_in={d_in}, d_out={d_out}")
    return 2 * d_in * d_out - d_in * d_in


def unitary_param_count(d):
    return d * d


class ParamMatrix(object):
    """The real parameter matrix of one perceptron.

    Inactive entries are identically zero. The stored array is read-only, updates produce
    new instances.

    Example:
    ```python
    >>> p = ParamMatrix.zeros(2, 4)
    >>> p
    <ParamMatrix d_in=2 d_out=4 active=12>
    >>> q = p.with_active(range(12))
    >>> [int(x) for x in q.lam[3]]
    [10, 11, 0, 0]
    >>> ParamMatrix(1, 2, [[0, 0], [0, 1]])
    Traceback (most recent call last):
    ...
    ValueError: Inactive parameters must be zero for d_in=1, d_out=2

    ```
    """

    def __init__(self, d_in, d_out, lam=None):
        self.mask = active_mask(d_in, d_out)
        self.d_in = d_in
        self.d_out = d_out
        if lam is None:
            lam = np.zeros((d_out, d_out))
        lam = np.array(lam, dtype=float)
        if lam.shape != (d_out, d_out):
            raise ValueError(f"Expected a {d_out}x{d_out} parameter matrix, got shape {lam.shape}")
        if np.any(lam[~self.mask] != 0):
            raise ValueError(f"Inactive parameters must be zero for d_in={d_in}, d_out={d_out}")
        lam.setflags(write=False)
        self.lam = lam

    @classmethod
    def zeros(cls, d_in, d_out):
        return cls(d_in, d_out)

    @classmethod
    def from_active(cls, d_in, d_out, values):
        return cls.zeros(d_in, d_out).with_active(values)

    @classmethod
    def random(cls, d_in, d_out, scale, rng):
        """Active entries uniform in `[-scale, scale]`."""
        count = active_param_count(d_in, d_out)
        return cls.from_active(d_in, d_out, rng.uniform(-scale, scale, size=count))

    @property
    def count(self):
        return int(self.mask.sum())

    def active(self):
        """The active entries flattened in row-major order of the mask."""
        return self.lam[self.mask].copy()

    def active_indices(self):
        return [tuple(int(i) for i in ij) for ij in np.argwhere(self.mask)]

    def with_active(self, values):
        values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        if values.shape != (self.count,):
            raise ValueError(f"Expected {self.count} active values, got shape {values.shape}")
        lam = np.zeros((self.d_out, self.d_out))
        lam[self.mask] = values
        return ParamMatrix(self.d_in, self.d_out, lam)

    def square(self):
        """The same angles viewed as a full `d_out x d_out` unitary parametrization."""
        return ParamMatrix(self.d_out, self.d_out, self.lam)

    def __repr__(self):
        return f"<ParamMatrix d_in={self.d_in} d_out={self.d_out} active={self.count}>"


class Generator(namedtuple('Generator', ['kind', 'm', 'n', 'dim'])):
    """A phase projector `P_n` (`kind='phase'`, `m == n`) or rotation generator `Y_{m,n}`.

    Example:
    ```python
    >>> import numpy as np
    >>> y = rotation_generator(0, 2, 3).matrix()
    >>> bool(np.allclose(y, y.conj().T)), bool(np.allclose(y @ y, np.diag([1, 0, 1])))
    (True, True)
    >>> p = projector_generator(1, 3).matrix()
    >>> bool(np.allclose(p @ p, p)), int(round(np.trace(p).real))
    (True, 1)

    ```
    """
    __slots__ = ()

    def matrix(self):
        if self.kind == 'phase':
            return projector(self.n, self.dim)
        y = np.zeros((self.dim, self.dim), dtype=complex)
        y[self.m, self.n] = -1j
        y[self.n, self.m] = 1j
        return y


def projector_generator(n, dim):
    return Generator('phase', n, n, dim)


def rotation_generator(m, n, dim):
    if m == n:
        raise ValueError(f"Rotation generator needs distinct indices, got ({m}, {n})")
    return Generator('rotation', m, n, dim)


def _apply_factor(mat, m, n, lam_mn, lam_nm):
    # rows (m, n) <- [[c, s], [-e s, e c]] @ rows (m, n), in place
    c, s = math.cos(lam_mn), math.sin(lam_mn)
    e = complex(math.cos(lam_nm), math.sin(lam_nm))
    rm = mat[m].copy()
    rn = mat[n].copy()
    mat[m] = c * rm + s * rn
    mat[n] = e * (c * rn - s * rm)


def gate_factor(m, n, lam_mn, lam_nm, D):
    """The two-level factor `exp(i P_n lam_nm) exp(i Y_{m,n} lam_mn)` as a dense matrix.

    Example:
    ```python
    >>> import numpy as np
    >>> bool(np.allclose(gate_factor(0, 2, 0.0, 0.0, 4), np.eye(4)))
    True
    >>> bool(np.allclose(gate_factor(0, 1, np.pi / 2, 0.0, 2), [[0, 1], [-1, 0]]))
    True
    >>> g = gate_factor(1, 3, 0.7, -2.1, 5)
    >>> float(np.max(np.abs(g.conj().T @ g - np.eye(5)))) <= 1e-12
    True
    >>> gate_factor(2, 1, 0.0, 0.0, 3)
    Traceback (most recent call last):
    ...
    ValueError: Gate factor requires 0 <= m < n < D, got m=2, n=1, D=3

    ```

    Arguments:
        m {int} -- First level
        n {int} -- Second level, `n > m`
        lam_mn {float} -- Rotation angle
        lam_nm {float} -- Phase on level `n`
        D {int} -- Dimension

    Returns:
        ndarray -- Unitary `D x D` matrix
    """
    if not 0 <= m < n < D:
        raise ValueError(f"Gate factor requires 0 <= m < n < D, got m={m}, n={n}, D={D}")
    g = np.eye(D, dtype=complex)
    _apply_factor(g, m, n, lam_mn, lam_nm)
    return g


def _factor_pairs(d_in, d):
    return [(m, n) for m in range(d_in) for n in range(m + 1, d)]


def _compose(lam, d_in, d, mat):
    # mat <- [prod L(m, n)] [prod phases] mat, rightmost first
    for l in range(d_in):
        mat[l] *= np.exp(1j * lam[l, l])
    for m, n in reversed(_factor_pairs(d_in, d)):
        _apply_factor(mat, m, n, lam[m, n], lam[n, m])
    return mat


def build_isometry(p):
    """The `d_out x d_in` isometry of a parameter matrix.

    Example:
    ```python
    >>> import numpy as np
    >>> bool(np.array_equal(build_isometry(ParamMatrix.zeros(2, 4)), np.eye(4)[:, :2]))
    True
    >>> bool(np.array_equal(build_isometry(ParamMatrix.zeros(3, 3)), np.eye(3)))
    True

    ```

    Arguments:
        p {ParamMatrix} -- The parameters

    Returns:
        ndarray -- `V` with `V^dagger V = I`
    """
    mat = np.eye(p.d_out, p.d_in, dtype=complex)
    return _compose(p.lam, p.d_in, p.d_out, mat)


def build_unitary(p):
    """The full composite unitary of a square parameter matrix.

    Embedding the first `d_in` columns recovers the isometry of the masked parameters:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> p = ParamMatrix.random(2, 6, np.pi, seed(4))
    >>> u = build_unitary(p.square())
    >>> float(np.max(np.abs(u.conj().T @ u - np.eye(6)))) <= 1e-10
    True
    >>> float(np.max(np.abs(u[:, :2] - build_isometry(p)))) <= 1e-12
    True
    >>> bool(np.array_equal(build_unitary(ParamMatrix.zeros(3, 3)), np.eye(3)))
    True
    >>> build_unitary(p)
    Traceback (most recent call last):
    ...
    ValueError: Unitary parametrization requires d_in == d_out, got (2, 6)

    ```
    """
    if p.d_in != p.d_out:
        raise ValueError(f"Unitary parametrization requires d_in == d_out, got ({p.d_in}, {p.d_out})")
    return build_isometry(p)


def tilde_generator(U, x, y):
    """Conjugated generator used by the parameter derivatives.

    Returns `U^dagger Y_{x,y} U` for `x < y`, `P_x` for `x == y` and `U^dagger P_x U` for `x > y`.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> u = build_unitary(ParamMatrix.random(4, 4, np.pi, seed(2)))
    >>> bool(np.array_equal(tilde_generator(u, 0, 0), np.diag([1, 0, 0, 0]).astype(complex)))
    True
    >>> bool(np.allclose(tilde_generator(np.eye(4), 1, 3), rotation_generator(1, 3, 4).matrix()))
    True
    >>> t = tilde_generator(u, 3, 1)
    >>> float(np.max(np.abs(t - t.conj().T))) <= 1e-12
    True

    ```

    Arguments:
        U {ndarray} -- Unitary frame of the perceptron's full dimension
        x {int} -- Row index of the parameter
        y {int} -- Column index of the parameter

    Returns:
        ndarray -- Hermitian matrix
    """
    U = np.asarray(U, dtype=complex)
    D = U.shape[0]
    if x == y:
        return projector(x, D)
    g = rotation_generator(x, y, D) if x < y else projector_generator(x, D)
    return dagger(U) @ g.matrix() @ U


def generator_frames(p):
    """Frames `F` for every active off-diagonal parameter, keyed by `(x, y)`.

    With `U = build_unitary(p.square())`, `dU/dlam[x, y] = U . i . tilde_generator(F, x, y)`
    holds exactly: `F` is the product of all factors to the right of the one carrying
    `lam[x, y]`, including that factor when `x > y`. Diagonal parameters need no frame and map
    to the identity.
    """
    d, d_in, lam = p.d_out, p.d_in, p.lam
    frames = {(l, l): np.eye(d, dtype=complex) for l in range(d_in)}
    right = np.diag([np.exp(1j * lam[l, l]) if l < d_in else 1 for l in range(d)]).astype(complex)
    for m, n in reversed(_factor_pairs(d_in, d)):
        frames[(m, n)] = right.copy()
        _apply_factor(right, m, n, lam[m, n], lam[n, m])
        frames[(n, m)] = right.copy()
    return frames


def generator_frame(p, x, y):
    """Single-parameter version of `generator_frames`.

    Using the full unitary as the frame reproduces the derivative only for the leftmost
    factor; the suffix frame is exact for every parameter:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> p = ParamMatrix.random(2, 4, np.pi, seed(9))
    >>> u = build_unitary(p.square())
    >>> def shifted(x, y, h):
    ...     lam = p.lam.copy(); lam[x, y] += h
    ...     return build_unitary(ParamMatrix(2, 4, lam).square())
    >>> ok = True
    >>> for x, y in p.active_indices():
    ...     fd = (shifted(x, y, 1e-6) - shifted(x, y, -1e-6)) / 2e-6
    ...     exact = u @ (1j * tilde_generator(generator_frame(p, x, y), x, y))
    ...     ok &= float(np.max(np.abs(fd - exact))) < 1e-8
    >>> bool(ok)
    True

    ```
    """
    if not p.mask[x, y]:
        raise ValueError(f"Parameter ({x}, {y}) is inactive for d_in={p.d_in}, d_out={p.d_out}")
    return generator_frames(p)[(x, y)]


def isometry_derivative(p, x, y, frames=None):
    """`dV/dlam[x, y]` for an active parameter.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> p = ParamMatrix.random(2, 8, 1.0, seed(6))
    >>> lam = p.lam.copy(); lam[5, 1] += 1e-6
    >>> up = build_isometry(ParamMatrix(2, 8, lam))
    >>> lam[5, 1] -= 2e-6
    >>> down = build_isometry(ParamMatrix(2, 8, lam))
    >>> fd = (up - down) / 2e-6
    >>> float(np.max(np.abs(isometry_derivative(p, 5, 1) - fd))) < 1e-8
    True

    ```
    """
    if not p.mask[x, y]:
        raise ValueError(f"Parameter ({x}, {y}) is inactive for d_in={p.d_in}, d_out={p.d_out}")
    frame = generator_frame(p, x, y) if frames is None else frames[(x, y)]
    u = build_unitary(p.square())
    return (u @ (1j * tilde_generator(frame, x, y)))[:, :p.d_in]


def canonicalize(p):
    """Wrap every angle into `[0, 2 pi)`; the isometry is unchanged.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> p = ParamMatrix.random(2, 4, 10.0, seed(3))
    >>> q = canonicalize(p)
    >>> bool(np.all((q.lam >= 0) & (q.lam < 2 * np.pi)))
    True
    >>> float(np.max(np.abs(build_isometry(p) - build_isometry(q)))) < 1e-12
    True

    ```
    """
    lam = np.mod(p.lam, TWO_PI)
    lam[~p.mask] = 0
    return ParamMatrix(p.d_in, p.d_out, lam)


def is_canonical(p):
    """Whether rotations lie in `[0, pi/2]` and all other angles in `[0, 2 pi]`."""
    upper = np.triu(np.ones_like(p.lam, dtype=bool), k=1)
    lam = p.lam
    rot_ok = np.all((lam[upper] >= 0) & (lam[upper] <= math.pi / 2))
    rest_ok = np.all((lam[~upper] >= 0) & (lam[~upper] <= TWO_PI))
    return bool(rot_ok and rest_ok)
