"""Dense complex linear algebra used by every other module.

Matrices are plain 2-D `numpy.ndarray`s of dtype complex128. Subsystem
dimensions are given as an ordered list, leftmost entry = first tensor factor.

A few properties which should always hold:
```python
>>> import numpy as np
>>> from dqnn.rng import seed, ginibre
>>> rng = seed(7)
>>> ok = True
>>> for _ in range(100):
...     a = ginibre(12, 12, rng)
...     ok &= abs(np.trace(partial_trace(a, [2, 3, 2], [])[0, 0] - np.trace(a))) < 1e-12
...     ok &= trace_norm(a) >= abs(np.trace(a))
>>> bool(ok)
True
>>> a, b, c = ginibre(2, 3, rng), ginibre(3, 2, rng), ginibre(2, 2, rng)
>>> bool(np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c))))
True

```
"""
import math
from functools import reduce

import numpy as np

__all__ = [
    'CLAMP_TOL', 'HERMITIAN_TOL', 'PINV_RTOL',
    'dagger', 'kron', 'kron_all', 'partial_trace', 'herm_fn', 'pinv', 'trace_norm',
    'is_hermitian', 'is_density', 'check_density', 'ket', 'projector', 'max_entangled',
    'permute_factors', 'eye',
]

CLAMP_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PINV_RTOL = 1e-10


def dagger(a):
    """Conjugate transpose."""
    return np.conj(np.transpose(a))


def eye(d):
    return np.eye(d, dtype=complex)


def kron(a, b):
    """Tensor product of two matrices.

    The entry `(i * rows_b + k, j * cols_b + l)` of the result equals `a[i, j] * b[k, l]`.

    Example:
    ```python
    >>> import numpy as np
    >>> bool(np.array_equal(kron(eye(2), eye(2)), eye(4)))
    True
    >>> sx = np.array([[0, 1], [1, 0]]); sz = np.array([[1, 0], [0, -1]])
    >>> r = kron(sx, sz)
    >>> complex(r[0, 3]), complex(r[0, 2])
    (0j, (1+0j))
    >>> a = np.array([[1, 2], [3, 4]])
    >>> bool(np.array_equal(kron(a, np.array([[1]])), a))
    True

    ```

    Arguments:
        a {ndarray} -- Left factor
        b {ndarray} -- Right factor

    Returns:
        ndarray -- The complex matrix `a (x) b`
    """
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(*factors):
    return reduce(kron, factors, np.ones((1, 1), dtype=complex))


def _check_dims(a, dims):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {a.shape}")
    if any(d < 1 for d in dims):
        raise ValueError(f"Subsystem dimensions must be positive, got {list(dims)}")
    if math.prod(dims) != a.shape[0]:
        raise ValueError(f"Dimensions {list(dims)} do not match matrix of size {a.shape[0]}")


def partial_trace(a, dims, keep):
    """Trace out every subsystem not listed in `keep`.

    The kept factors are returned in their original relative order, regardless of the order
    in `keep`. An empty `keep` traces over everything and returns the 1x1 matrix `[[tr a]]`.

    Example:
    ```python
    >>> import numpy as np
    >>> rho = np.diag([0.25, 0.75]); sigma = np.diag([0.5, 0.5])
    >>> bool(np.allclose(partial_trace(kron(rho, sigma), [2, 2], [0]), rho))
    True
    >>> omega = max_entangled(2)
    >>> bool(np.allclose(partial_trace(omega, [2, 2], [1]), np.eye(2) / 2))
    True

    ```

    Compared against an explicit index summation:
    ```python
    >>> from dqnn.rng import seed, ginibre
    >>> a = ginibre(12, 12, seed(3))
    >>> t = a.reshape(2, 3, 2, 2, 3, 2)
    >>> ref = np.zeros((4, 4), dtype=complex)
    >>> for i in range(2):
    ...     for k in range(2):
    ...         for j in range(2):
    ...             for l in range(2):
    ...                 ref[2 * i + k, 2 * j + l] = sum(t[i, m, k, j, m, l] for m in range(3))
    >>> float(np.max(np.abs(partial_trace(a, [2, 3, 2], [2, 0]) - ref))) < 1e-12
    True

    ```

    Arguments:
        a {ndarray} -- Square matrix on the composite space
        dims {list} -- Subsystem dimensions, product must equal the size of `a`
        keep {iterable} -- Indices of the subsystems to keep

    Raises:
        ValueError: On dimension mismatches or invalid subsystem indices

    Returns:
        ndarray -- The reduced matrix on the kept factors
    """
    dims = [int(d) for d in dims]
    _check_dims(a, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"Subsystem indices {keep} out of range for {n} factors")

    t = np.asarray(a, dtype=complex).reshape(dims + dims)
    rows = list(range(n))
    cols = [k if k not in keep else n + k for k in range(n)]
    out = [k for k in keep] + [n + k for k in keep]
    r = np.einsum(t, rows + cols, out)
    d = math.prod(dims[k] for k in keep)
    return np.asarray(r).reshape(d, d)


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and float(np.max(np.abs(a - dagger(a)), initial=0.0)) <= tol


def _eigh(a, tol=HERMITIAN_TOL):
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, tol):
        raise ValueError("Matrix function requires a Hermitian input")
    return np.linalg.eigh((a + dagger(a)) / 2)


def herm_fn(a, f, clamp_tol=CLAMP_TOL):
    """Apply a scalar function to a Hermitian matrix through its eigendecomposition.

    `f` is either a callable acting on the eigenvalue vector or one of the names

    - `'sqrt'`: eigenvalues with `|x| < clamp_tol` are set to zero first,
      remaining negative noise is clipped to zero
    - `'log'`: natural logarithm on the support; eigenvalues with `|x| < clamp_tol` map to zero
    - `'inv_sqrt'`: inverse square root on the support, zero elsewhere

    Example:
    ```python
    >>> import numpy as np
    >>> bool(np.allclose(herm_fn(np.eye(3), 'sqrt'), np.eye(3)))
    True
    >>> bool(np.allclose(herm_fn(np.diag([4, 9]), 'sqrt'), np.diag([2, 3])))
    True
    >>> bool(np.allclose(herm_fn(np.diag([np.e, 1]), 'log'), np.diag([1, 0])))
    True
    >>> herm_fn(np.diag([1, -0.5]), 'log')
    Traceback (most recent call last):
    ...
    ValueError: Matrix logarithm undefined for eigenvalue -0.5

    ```

    Square roots of random positive matrices square back to their input:
    ```python
    >>> from dqnn.rng import seed, ginibre
    >>> rng = seed(11)
    >>> ok = True
    >>> for d in (1, 2, 5, 16):
    ...     g = ginibre(d, d, rng)
    ...     rho = g @ dagger(g)
    ...     s = herm_fn(rho, 'sqrt')
    ...     ok &= float(np.max(np.abs(s @ s - rho))) < 1e-10
    ...     ok &= bool(np.min(np.linalg.eigvalsh(s)) > -1e-12)
    >>> bool(ok)
    True

    ```

    Arguments:
        a {ndarray} -- Hermitian matrix (within `1e-10`)
        f {callable or str} -- The scalar function

    Keyword Arguments:
        clamp_tol {float} -- Eigenvalues below this magnitude are treated as zero (default: {1e-12})

    Raises:
        ValueError: If `a` is not Hermitian or `log` meets a negative eigenvalue

    Returns:
        ndarray -- `Q f(L) Q^dagger`
    """
    w, q = _eigh(a)
    if f == 'sqrt':
        w = np.where(np.abs(w) < clamp_tol, 0.0, w)
        fw = np.sqrt(np.clip(w, 0.0, None))
    elif f == 'log':
        bad = w[w < -clamp_tol]
        if bad.size:
            raise ValueError(f"Matrix logarithm undefined for eigenvalue {bad[0]:.3g}")
        support = w >= clamp_tol
        fw = np.zeros_like(w)
        fw[support] = np.log(w[support])
    elif f == 'inv_sqrt':
        support = w >= clamp_tol
        fw = np.zeros_like(w)
        fw[support] = 1 / np.sqrt(w[support])
    elif callable(f):
        fw = np.asarray(f(w))
    else:
        raise ValueError(f"Unknown matrix function {f!r}")

    return (q * fw) @ dagger(q)


def pinv(a, tol=None):
    """Moore-Penrose inverse of a Hermitian positive semidefinite matrix.

    Eigenvalues above `tol` are inverted, the others are zeroed. The default `tol` is
    `1e-10` times the largest eigenvalue.

    Example:
    ```python
    >>> import numpy as np
    >>> bool(np.allclose(pinv(np.eye(2)), np.eye(2)))
    True
    >>> bool(np.allclose(pinv(np.diag([2, 0])), np.diag([0.5, 0])))
    True
    >>> from dqnn.rng import seed, ginibre
    >>> g = ginibre(6, 3, seed(5))
    >>> a = g @ dagger(g)
    >>> float(np.max(np.abs(a @ pinv(a) @ a - a))) <= 1e-9
    True

    ```

    Arguments:
        a {ndarray} -- Hermitian PSD matrix

    Keyword Arguments:
        tol {float} -- Absolute inversion cutoff (default: {None})

    Returns:
        ndarray -- The pseudoinverse
    """
    w, q = _eigh(a)
    if tol is None:
        tol = PINV_RTOL * max(float(np.max(np.abs(w), initial=0.0)), 0.0)
    fw = np.zeros_like(w)
    inv = w > tol
    fw[inv] = 1 / w[inv]
    return (q * fw) @ dagger(q)


def trace_norm(a):
    """Sum of singular values.

    Example:
    ```python
    >>> import numpy as np
    >>> round(trace_norm(np.diag([0.3, 0.7])), 12)
    1.0
    >>> round(trace_norm(np.diag([1, -1])), 12)
    2.0
    >>> plus = np.full((2, 2), 0.5)
    >>> round(trace_norm(np.diag([1, 0]) - plus), 12) == round(2 ** 0.5, 12)
    True

    ```
    """
    return float(np.sum(np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)))


def is_density(rho, tol=HERMITIAN_TOL):
    rho = np.asarray(rho)
    if not is_hermitian(rho, tol):
        return False
    w = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    return bool(w.min() >= -tol and abs(np.trace(rho).real - 1) <= tol)


def check_density(rho, dim=None, tol=HERMITIAN_TOL):
    """Return `rho` as a complex array, rejecting anything that is not a density matrix.

    Example:
    ```python
    >>> check_density([[1, 0], [0, 0]], dim=3)
    Traceback (most recent call last):
    ...
    ValueError: Expected a 3x3 density matrix, got shape (2, 2)

    ```
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"Expected a {dim}x{dim} density matrix, got shape {rho.shape}")
    if not is_density(rho, tol):
        raise ValueError("Input is not a density matrix (Hermitian, PSD, unit trace)")
    return rho


def ket(index, d):
    v = np.zeros((d, 1), dtype=complex)
    v[index, 0] = 1
    return v


def projector(index, d):
    p = np.zeros((d, d), dtype=complex)
    p[index, index] = 1
    return p


def max_entangled(d):
    """The maximally entangled state `|Omega><Omega|` with `|Omega> = d^-1/2 sum_i |i>|i>`."""
    v = np.eye(d, dtype=complex).reshape(d * d, 1) / math.sqrt(d)
    return v @ dagger(v)


def permute_factors(m, dims, perm):
    """Reorder the tensor factors of the row index of `m`.

    Factor `perm[k]` of the input becomes factor `k` of the output.

    Example:
    ```python
    >>> import numpy as np
    >>> a, b = np.array([[1], [2]]), np.array([[1], [0], [0]])
    >>> bool(np.array_equal(permute_factors(kron(a, b), [2, 3], [1, 0]), kron(b, a)))
    True

    ```
    """
    m = np.asarray(m)
    dims = list(dims)
    cols = m.shape[1]
    t = m.reshape(dims + [cols])
    t = np.transpose(t, list(perm) + [len(dims)])
    return t.reshape(math.prod(dims), cols)
