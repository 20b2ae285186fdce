"""Quantum channels and random sampling.

A `Channel` keeps the representation it was built from (Kraus list, Choi matrix or Stinespring
isometry) and converts on demand. The Choi convention is `J = 1/d_in sum_ij E(|i><j|) (x) |i><j|`
with the output factor first, so `J` is a density matrix.

Sampled channels are CPTP:
```python
>>> import numpy as np
>>> from dqnn.rng import seed
>>> rng = seed(3)
>>> all(random_channel(di, do, rng).is_cptp() for di, do in [(1, 2), (2, 2), (2, 3), (3, 2)] for _ in range(50))
True
>>> all(werner_channel(a, 2).is_cptp() and werner_channel(a, 3).is_cptp() for a in np.linspace(-1, 1, 9))
True
>>> ok = True
>>> for a in np.linspace(-1, 1, 9):
...     ok &= float(np.max(np.abs(werner_channel(a, 3)(np.eye(3) / 3) - np.eye(3) / 3))) <= 1e-12
>>> bool(ok)
True

```
"""
import logging
import math
import warnings

import numpy as np

from dqnn.linalg import CLAMP_TOL, dagger, eye, herm_fn, kron, partial_trace
from dqnn.rng import ginibre

__all__ = [
    'Channel', 'werner_channel', 'random_channel', 'random_density_hs', 'random_pure',
    'apply_channel', 'identity_channel', 'unitary_channel', 'depolarizing_channel', 'CPTP_TOL',
]

logger = logging.getLogger(__name__)

CPTP_TOL = 1e-9

REPRESENTATIONS = ('kraus', 'choi', 'stinespring')


class Channel(object):
    """A completely positive trace preserving map from `d_in` to `d_out` dimensions.

    Conversions between representations keep the channel action:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> rng = seed(17)
    >>> ch = random_channel(2, 3, rng)
    >>> rho = random_density_hs(2, rng)
    >>> via_kraus = Channel.from_kraus(ch.kraus())
    >>> via_iso = Channel.from_stinespring(via_kraus.stinespring(), 2, 3)
    >>> back = Channel.from_choi(via_kraus.choi(), 2, 3)
    >>> max(float(np.max(np.abs(c(rho) - ch(rho)))) for c in (via_kraus, via_iso, back)) <= 1e-10
    True
    >>> ch
    <Channel 2 -> 3 (choi)>

    ```

    Arguments:
        rep {str} -- One of `'kraus'`, `'choi'` or `'stinespring'`
        data {object} -- The representation data
        d_in {int} -- Input dimension
        d_out {int} -- Output dimension
    """

    def __init__(self, rep, data, d_in, d_out):
        if rep not in REPRESENTATIONS:
            raise ValueError(f"Unknown channel representation {rep!r}")
        self.rep = rep
        self.data = data
        self.d_in = d_in
        self.d_out = d_out
        self._choi = None

    @classmethod
    def from_kraus(cls, kraus):
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        if not kraus:
            raise ValueError("A Kraus representation needs at least one operator")
        shapes = {k.shape for k in kraus}
        if len(shapes) != 1:
            raise ValueError(f"Kraus operators must share one shape, got {sorted(shapes)}")
        d_out, d_in = kraus[0].shape
        return cls('kraus', kraus, d_in, d_out)

    @classmethod
    def from_choi(cls, choi, d_in, d_out):
        choi = np.asarray(choi, dtype=complex)
        if choi.shape != (d_in * d_out, d_in * d_out):
            raise ValueError(f"Choi matrix of a {d_in} -> {d_out} channel must be "
                             f"{d_in * d_out}x{d_in * d_out}, got {choi.shape}")
        return cls('choi', choi, d_in, d_out)

    @classmethod
    def from_stinespring(cls, iso, d_in, d_out):
        """Isometry onto output (x) environment, output factor first."""
        iso = np.asarray(iso, dtype=complex)
        if iso.shape[1] != d_in or iso.shape[0] % d_out:
            raise ValueError(f"Isometry of shape {iso.shape} does not map {d_in} onto {d_out} (x) env")
        return cls('stinespring', iso, d_in, d_out)

    def kraus(self):
        """Kraus operators; from a Choi matrix via its eigendecomposition."""
        if self.rep == 'kraus':
            return list(self.data)
        if self.rep == 'stinespring':
            v3 = self.data.reshape(self.d_out, -1, self.d_in)
            return [v3[:, k, :] for k in range(v3.shape[1])]
        w, q = np.linalg.eigh(self.d_in * (self.data + dagger(self.data)) / 2)
        return [math.sqrt(x) * q[:, i].reshape(self.d_out, self.d_in)
                for i, x in reversed(list(enumerate(w))) if x > CLAMP_TOL]

    def stinespring(self):
        kraus = self.kraus()
        return np.stack(kraus, axis=1).reshape(self.d_out * len(kraus), self.d_in)

    def choi(self):
        if self._choi is None:
            if self.rep == 'choi':
                self._choi = self.data
            else:
                vecs = np.stack([k.reshape(-1) for k in self.kraus()], axis=1)
                self._choi = vecs @ dagger(vecs) / self.d_in
        return self._choi

    def apply(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.d_in, self.d_in):
            raise ValueError(f"Channel expects a {self.d_in}x{self.d_in} input, got shape {rho.shape}")
        if self.rep == 'kraus':
            return sum(k @ rho @ dagger(k) for k in self.data)
        if self.rep == 'stinespring':
            big = self.data @ rho @ dagger(self.data)
            return partial_trace(big, [self.d_out, big.shape[0] // self.d_out], [0])
        j4 = self.data.reshape(self.d_out, self.d_in, self.d_out, self.d_in)
        return self.d_in * np.einsum('aibj,ij->ab', j4, rho)

    __call__ = apply

    def is_cptp(self, tol=CPTP_TOL):
        """Choi matrix positive and `d_in tr_out J = I`, both within `tol`."""
        j = self.choi()
        if float(np.max(np.abs(j - dagger(j)))) > tol:
            return False
        if np.linalg.eigvalsh((j + dagger(j)) / 2).min() < -tol:
            return False
        marginal = self.d_in * partial_trace(j, [self.d_out, self.d_in], [1])
        return float(np.max(np.abs(marginal - np.eye(self.d_in)))) <= tol

    def __repr__(self):
        return f"<Channel {self.d_in} -> {self.d_out} ({self.rep})>"


def apply_channel(ch, rho):
    """Channel action through the stored representation.

    Example:
    ```python
    >>> import numpy as np
    >>> rho = np.array([[0.6, 0.1j], [-0.1j, 0.4]])
    >>> bool(np.allclose(apply_channel(identity_channel(2), rho), rho))
    True
    >>> bool(np.allclose(apply_channel(werner_channel(0, 2), rho), np.eye(2) / 2))
    True
    >>> apply_channel(identity_channel(2), np.eye(3) / 3)
    Traceback (most recent call last):
    ...
    ValueError: Channel expects a 2x2 input, got shape (3, 3)

    ```
    """
    return ch.apply(rho)


def identity_channel(d):
    return Channel.from_kraus([eye(d)])


def unitary_channel(u):
    return Channel.from_kraus([np.asarray(u, dtype=complex)])


def werner_channel(alpha, d):
    """The channel `rho -> (tr(rho) I + alpha rho^T) / (alpha + d)`.

    Its Choi matrix is the Werner state `(I + alpha F) / (d (d + alpha))` with `F` the swap, whose
    eigenvalues split into the symmetric and antisymmetric subspace.

    Example:
    ```python
    >>> import numpy as np
    >>> rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    >>> bool(np.allclose(werner_channel(1, 2)(rho), (np.eye(2) + rho.T) / 3))
    True
    >>> w = np.linalg.eigvalsh(werner_channel(0.5, 3).choi())
    >>> [float(x) for x in sorted(set(np.round(w * 3 * 3.5, 10)))]
    [0.5, 1.5]
    >>> int(np.sum(np.isclose(w * 10.5, 1.5))), int(np.sum(np.isclose(w * 10.5, 0.5)))
    (6, 3)
    >>> werner_channel(1.5, 2)
    Traceback (most recent call last):
    ...
    ValueError: Werner parameter must lie in [-1, 1], got 1.5

    ```

    Arguments:
        alpha {float} -- Werner parameter in `[-1, 1]`
        d {int} -- Dimension, at least 2

    Raises:
        ValueError: If `alpha` or `d` are out of range

    Returns:
        Channel -- The channel in Choi representation
    """
    if not -1 <= alpha <= 1:
        raise ValueError(f"Werner parameter must lie in [-1, 1], got {alpha}")
    if d < 2:
        raise ValueError(f"Werner channel needs d >= 2, got {d}")
    swap = np.eye(d * d, dtype=complex).reshape(d, d, d, d).transpose(0, 1, 3, 2).reshape(d * d, d * d)
    choi = (np.eye(d * d) + alpha * swap) / (d * (d + alpha))
    return Channel.from_choi(choi, d, d)


def depolarizing_channel(d):
    """Completely depolarizing channel, the `alpha = 0` Werner channel."""
    return werner_channel(0, d)


def random_channel(d_in, d_out, rng, max_tries=16):
    """Random channel with full Kraus rank from a Ginibre matrix.

    `W = G G^dagger` on output (x) input, normalized so that its input marginal is the identity.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> a, b = random_channel(2, 2, seed(4)), random_channel(2, 2, seed(4))
    >>> bool(np.array_equal(a.choi(), b.choi()))
    True

    ```

    The mean Choi matrix is maximally mixed:
    ```python
    >>> rng = seed(99)
    >>> samples = np.array([random_channel(2, 2, rng).choi() for _ in range(2000)])
    >>> err = samples.std(axis=0) / np.sqrt(len(samples))
    >>> bool(np.all(np.abs(samples.mean(axis=0) - np.eye(4) / 4) <= 5 * err + 1e-12))
    True

    ```

    Arguments:
        d_in {int} -- Input dimension
        d_out {int} -- Output dimension
        rng {numpy.random.Generator} -- Random stream

    Keyword Arguments:
        max_tries {int} -- Resampling budget for singular marginals (default: {16})

    Returns:
        Channel -- The channel in Choi representation
    """
    n = d_in * d_out
    for _ in range(max_tries):
        g = ginibre(n, n, rng)
        w = g @ dagger(g)
        y = partial_trace(w, [d_out, d_in], [1])
        if np.linalg.eigvalsh(y).min() < CLAMP_TOL:
            warnings.warn("Singular marginal while sampling a channel, resampling", RuntimeWarning, stacklevel=2)
            continue
        s = kron(eye(d_out), herm_fn(y, 'inv_sqrt'))
        choi = s @ w @ s / d_in
        return Channel.from_choi((choi + dagger(choi)) / 2, d_in, d_out)
    raise RuntimeError(f"No regular channel sample after {max_tries} tries")


def random_density_hs(d, rng):
    """Density matrix from the Hilbert-Schmidt ensemble.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> rng = seed(1)
    >>> rho = random_density_hs(4, rng)
    >>> bool(abs(np.trace(rho) - 1) < 1e-12), bool(np.linalg.eigvalsh(rho).min() > -1e-12)
    (True, True)
    >>> bool(np.array_equal(random_density_hs(1, rng), [[1]]))
    True

    ```

    The mean purity at `d = 2` is `3/5`:
    ```python
    >>> p = np.array([np.trace(r @ r).real for r in (random_density_hs(2, rng) for _ in range(5000))])
    >>> bool(abs(p.mean() - 0.6) <= 4 * p.std() / np.sqrt(len(p)))
    True

    ```
    """
    g = ginibre(d, d, rng)
    w = g @ dagger(g)
    return w / np.trace(w).real


def random_pure(d, rng):
    """Projector onto a Haar random pure state.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> rng = seed(2)
    >>> psi = random_pure(3, rng)
    >>> bool(abs(np.trace(psi @ psi) - 1) < 1e-12)
    True
    >>> bool(np.allclose(random_pure(1, rng), [[1]]))
    True
    >>> s = np.array([random_pure(2, rng) for _ in range(4000)])
    >>> err = s.std(axis=0) / np.sqrt(len(s))
    >>> bool(np.all(np.abs(s.mean(axis=0) - np.eye(2) / 2) <= 5 * err + 1e-12))
    True

    ```
    """
    v = ginibre(d, 1, rng)
    v /= np.linalg.norm(v)
    return v @ dagger(v)
