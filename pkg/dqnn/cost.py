"""Cost functions on pairs of density matrices and their gradient contractions.

Every cost is evaluated as `C(rho_tar, rho_out)`. The analytic gradients contract the
derivative `drho` of the network output with a matrix that depends on the two states only;
the quantum Chernoff bound and the relative entropy use central finite differences instead.

Properties over random states and channels:
```python
>>> import numpy as np
>>> from dqnn.rng import seed
>>> from dqnn.channels import random_channel, random_density_hs, random_pure
>>> rng = seed(31)
>>> pairs = [(random_density_hs(3, rng), random_density_hs(3, rng)) for _ in range(20)]
>>> symmetric = [k for k in CostKind if k is not CostKind.QRE]
>>> all(abs(evaluate(k, a, b) - evaluate(k, b, a)) < 1e-8 for k in symmetric for a, b in pairs)
True
>>> max(abs(evaluate(CostKind.QRE, a, b) - evaluate(CostKind.QRE, b, a)) for a, b in pairs) > 1e-6
True
>>> ranges = {CostKind.TRACE: 1, CostKind.F1: 1, CostKind.F2: 1, CostKind.QCB: 1, CostKind.D1: 2 ** 0.5}
>>> all(-1e-10 <= evaluate(k, a, b) <= hi + 1e-10 for k, hi in ranges.items() for a, b in pairs)
True
>>> ok = True
>>> for _ in range(200):
...     ch = random_channel(2, 3, rng)
...     a, b = random_density_hs(2, rng), random_density_hs(2, rng)
...     ea, eb = ch(a), ch(b)
...     ok &= evaluate(CostKind.TRACE, ea, eb) <= evaluate(CostKind.TRACE, a, b) + 1e-9
...     ok &= evaluate(CostKind.F1, ea, eb) >= evaluate(CostKind.F1, a, b) - 1e-9
...     ok &= evaluate(CostKind.QCB, ea, eb) >= evaluate(CostKind.QCB, a, b) - 1e-9
...     ok &= evaluate(CostKind.QRE, ea, eb) <= evaluate(CostKind.QRE, a, b) + 1e-9
>>> bool(ok)
True
>>> rho, psi = random_density_hs(3, rng), random_pure(3, rng)
>>> overlap = float(np.trace(rho @ psi).real)
>>> abs(evaluate(CostKind.F1, rho, psi) - overlap) < 1e-10, abs(evaluate(CostKind.F2, rho, psi) - overlap) < 1e-10
(True, True)

```
"""
import enum
import math
from collections import namedtuple

import numpy as np
from scipy.optimize import minimize_scalar

from dqnn.linalg import CLAMP_TOL, dagger, herm_fn, pinv, trace_norm

__all__ = [
    'CostKind', 'GradRequest', 'ALL_KINDS', 'ANALYTIC_KINDS', 'EQUALITY_TOL', 'FD_EPS', 'QRE_FLOOR',
    'evaluate', 'gradient_term', 'total_cost', 'qcb_exponent', 'matrix_power_psd',
]

EQUALITY_TOL = 1e-12
FD_EPS = 1e-6
QRE_FLOOR = 1e-12
QCB_GRID = 21
QCB_TOL = 1e-8


class CostKind(enum.Enum):
    """Cost function tags; fidelities and the Chernoff bound are maximized.

    Example:
    ```python
    >>> CostKind.from_tag('D1'), CostKind.F2.maximize, CostKind.HS.tag
    (<CostKind.D1: 'd1'>, True, 'hs')
    >>> CostKind.from_tag('l2')
    Traceback (most recent call last):
    ...
    ValueError: Unknown cost 'l2', expected one of hs, trace, f1, d1, f2, d2, qcb, qre

    ```
    """
    HS = 'hs'
    TRACE = 'trace'
    F1 = 'f1'
    D1 = 'd1'
    F2 = 'f2'
    D2 = 'd2'
    QCB = 'qcb'
    QRE = 'qre'

    @property
    def tag(self):
        return self.value

    @property
    def maximize(self):
        return self in (CostKind.F1, CostKind.F2, CostKind.QCB)

    @property
    def analytic(self):
        return self not in (CostKind.QCB, CostKind.QRE)

    @classmethod
    def from_tag(cls, tag):
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).lower())
        except ValueError:
            raise ValueError(f"Unknown cost {tag!r}, expected one of {', '.join(k.value for k in cls)}") from None


ALL_KINDS = tuple(CostKind)
ANALYTIC_KINDS = tuple(k for k in CostKind if k.analytic)


class GradRequest(namedtuple('GradRequest', ['rho_tar', 'rho_out', 'drho', 'mode', 'eps', 'shifted'])):
    """Inputs of one gradient contraction.

    `shifted` holds the outputs at `lam + eps` and `lam - eps`; it is required in
    `'finite_difference'` mode and for costs without an analytic gradient.
    """
    __slots__ = ()

    def __new__(cls, rho_tar, rho_out, drho=None, mode='analytic', eps=FD_EPS, shifted=None):
        if mode not in ('analytic', 'finite_difference'):
            raise ValueError(f"Unknown gradient mode {mode!r}")
        return super().__new__(cls, rho_tar, rho_out, drho, mode, eps, shifted)


def _check_pair(rho_tar, rho_out):
    rho_tar = np.asarray(rho_tar, dtype=complex)
    rho_out = np.asarray(rho_out, dtype=complex)
    if rho_tar.shape != rho_out.shape or rho_tar.ndim != 2 or rho_tar.shape[0] != rho_tar.shape[1]:
        raise ValueError(f"Cost arguments must be square matrices of equal size, got {rho_tar.shape} and {rho_out.shape}")
    return rho_tar, rho_out


def _re_tr(a, b=None):
    return float(np.trace(a if b is None else a @ b).real)


def _support_power(w, s):
    out = np.zeros_like(w)
    support = w >= CLAMP_TOL
    out[support] = w[support] ** s
    return out


def matrix_power_psd(a, s):
    """`a^s` on the support of `a`; `s = 0` yields the support projector.

    Example:
    ```python
    >>> import numpy as np
    >>> bool(np.allclose(matrix_power_psd(np.diag([0.25, 0]), 0.5), np.diag([0.5, 0])))
    True
    >>> bool(np.allclose(matrix_power_psd(np.diag([0.25, 0]), 0), np.diag([1, 0])))
    True

    ```
    """
    return herm_fn(a, lambda w: _support_power(w, s))


def qcb_exponent(rho, sigma):
    """Minimum of `tr(rho^s sigma^(1-s))` over `s` in `[0, 1]` and the minimizing `s`.

    A 21-point grid locates the minimum; an interior grid minimum with a strict bracket is
    refined by golden-section search.

    Example:
    ```python
    >>> import numpy as np
    >>> value, s = qcb_exponent(np.diag([0.9, 0.1]), np.diag([0.1, 0.9]))
    >>> round(value, 10), round(s, 6)
    (0.6, 0.5)

    ```
    """
    rho, sigma = _check_pair(rho, sigma)
    wr, qr = np.linalg.eigh((rho + dagger(rho)) / 2)
    ws, qs = np.linalg.eigh((sigma + dagger(sigma)) / 2)
    overlap = np.abs(dagger(qr) @ qs) ** 2

    def f(s):
        # tr(rho^s sigma^(1-s)) = sum_ij a_i^s b_j^(1-s) |<i|j>|^2
        return float(_support_power(wr, s) @ overlap @ _support_power(ws, 1 - s))

    grid = np.linspace(0, 1, QCB_GRID)
    values = [f(s) for s in grid]
    k = int(np.argmin(values))
    best, best_s = values[k], float(grid[k])
    if 0 < k < QCB_GRID - 1 and values[k] < values[k - 1] and values[k] < values[k + 1]:
        res = minimize_scalar(f, bracket=(grid[k - 1], grid[k], grid[k + 1]), method='golden', tol=QCB_TOL)
        if res.fun < best:
            best, best_s = float(res.fun), float(res.x)
    return best, best_s


def _log_psd(a, floor):
    w, q = np.linalg.eigh((a + dagger(a)) / 2)
    if floor is None:
        log_w = np.where(w >= CLAMP_TOL, np.log(np.clip(w, CLAMP_TOL, None)), 0.0)
    else:
        log_w = np.log(np.clip(w, floor, None))
    return (q * log_w) @ dagger(q), w, q


def _qre(rho_tar, rho_out, floor):
    log_out, w, q = _log_psd(rho_out, floor)
    if floor is None:
        kernel = q[:, w < CLAMP_TOL]
        if kernel.size and _re_tr(dagger(kernel) @ rho_tar @ kernel) > CLAMP_TOL:
            return math.inf
    log_tar = _log_psd(rho_tar, None)[0]
    return _re_tr(rho_tar, log_tar) - _re_tr(rho_tar, log_out)


def _sign(w):
    return np.where(np.abs(w) < CLAMP_TOL, 0.0, np.sign(w))


def _f1(rho_tar, rho_out):
    s = herm_fn(rho_tar, 'sqrt')
    return _re_tr(herm_fn(s @ rho_out @ s, 'sqrt')) ** 2


def _f2(rho_tar, rho_out):
    return _re_tr(rho_tar, rho_out) / max(_re_tr(rho_tar, rho_tar), _re_tr(rho_out, rho_out))


def evaluate(kind, rho_tar, rho_out, qre_floor=None):
    """Cost value `C(rho_tar, rho_out)`.

    The relative entropy is `D(rho_tar || rho_out)`; without a floor it is infinite when the
    support of `rho_tar` is not contained in that of `rho_out`, with a floor the eigenvalues of
    `rho_out` are clamped from below before the logarithm.

    Example:
    ```python
    >>> import numpy as np
    >>> zero, one = np.diag([1, 0]), np.diag([0, 1])
    >>> [round(evaluate(k, zero, one), 10) for k in ALL_KINDS[:7]]
    [1.4142135624, 1.0, 0.0, 1.4142135624, 0.0, 1.4142135624, 0.0]
    >>> rho = np.diag([0.6, 0.4])
    >>> [round(evaluate(k, rho, rho), 10) for k in ALL_KINDS]
    [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
    >>> tar, mixed = np.diag([0.75, 0.25]), np.eye(2) / 2
    >>> round(evaluate('f2', tar, mixed), 12), round(evaluate('f1', tar, mixed), 4)
    (0.8, 0.933)
    >>> expected = 0.75 * np.log(0.75) + 0.25 * np.log(0.25) + np.log(2)
    >>> bool(abs(evaluate("qre", tar, mixed) - expected) < 1e-12)
    True
    >>> round(evaluate("qre", zero, mixed), 12) == round(float(np.log(2)), 12)
    True
    >>> evaluate('qre', mixed, zero), round(evaluate('qre', mixed, zero, qre_floor=1e-12), 4)
    (inf, 13.1224)

    ```

    Arguments:
        kind {CostKind or str} -- The cost function
        rho_tar {ndarray} -- Target state
        rho_out {ndarray} -- Network output state

    Keyword Arguments:
        qre_floor {float} -- Eigenvalue floor for the relative entropy (default: {None})

    Returns:
        float -- The cost
    """
    kind = CostKind.from_tag(kind)
    rho_tar, rho_out = _check_pair(rho_tar, rho_out)
    diff = rho_out - rho_tar
    if kind is CostKind.HS:
        return math.sqrt(max(_re_tr(diff, diff), 0.0))
    if kind is CostKind.TRACE:
        return trace_norm(diff) / 2
    if kind is CostKind.F1:
        return _f1(rho_tar, rho_out)
    if kind is CostKind.D1:
        return math.sqrt(max(2 * (1 - math.sqrt(_f1(rho_tar, rho_out))), 0.0))
    if kind is CostKind.F2:
        return _f2(rho_tar, rho_out)
    if kind is CostKind.D2:
        return math.sqrt(max(2 * (1 - _f2(rho_tar, rho_out)), 0.0))
    if kind is CostKind.QCB:
        return qcb_exponent(rho_tar, rho_out)[0]
    return _qre(rho_tar, rho_out, qre_floor)


def gradient_term(kind, req):
    """Derivative of `C(rho_tar, rho_out)` along `drho`.

    Returns `None` when the two states coincide (trace distance below `1e-12`); such pairs are
    left out of the gradient average.

    Against finite differences along a unitary path `rho(t) = e^{-iHt} rho e^{iHt}`:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed, ginibre
    >>> from dqnn.channels import random_density_hs
    >>> rng = seed(41)
    >>> def along(rho, h, t):
    ...     w, q = np.linalg.eigh(h)
    ...     u = (q * np.exp(-1j * w * t)) @ q.conj().T
    ...     return u @ rho @ u.conj().T
    >>> worst = 0.0
    >>> for _ in range(10):
    ...     tar, out = random_density_hs(2, rng), random_density_hs(2, rng)
    ...     g = ginibre(2, 2, rng); h = g + g.conj().T
    ...     drho = -1j * (h @ out - out @ h)
    ...     for k in ANALYTIC_KINDS:
    ...         fd = (evaluate(k, tar, along(out, h, 1e-6)) - evaluate(k, tar, along(out, h, -1e-6))) / 2e-6
    ...         exact = gradient_term(k, GradRequest(tar, out, drho))
    ...         worst = max(worst, abs(exact - fd) / max(abs(fd), 1e-3))
    >>> worst < 1e-5
    True
    >>> gradient_term('hs', GradRequest(tar, tar, drho)) is None
    True
    >>> [gradient_term(k, GradRequest(tar, out, np.zeros((2, 2)))) == 0 for k in ANALYTIC_KINDS]
    [True, True, True, True, True, True]

    ```

    At equal purities the sign term of `F2` is taken as zero:
    ```python
    >>> tar, out = np.diag([0.7, 0.3]), np.diag([0.3, 0.7])
    >>> fd = (evaluate('f2', tar, along(out, h, 1e-6)) - evaluate('f2', tar, out)) / 1e-6
    >>> abs(gradient_term('f2', GradRequest(tar, out, -1j * (h @ out - out @ h))) - fd) < 1e-4
    True

    ```

    The trace-distance sign follows the eigenvalues of the difference down to `1e-12`:
    ```python
    >>> tar, out = np.eye(2) / 2, np.diag([0.5 + 1e-7, 0.5 - 1e-7])
    >>> round(gradient_term('trace', GradRequest(tar, out, np.diag([1, -1]))), 12)
    1.0
    >>> tar = np.diag([0.4, 0.3 + 1e-3, 0.3 - 1e-3])
    >>> out = tar + np.diag([1e-3, -1e-3 + 5e-7, -5e-7])
    >>> drho = np.diag([0, 1, -1])
    >>> fd = (evaluate('trace', tar, out + 1e-9 * drho) - evaluate('trace', tar, out - 1e-9 * drho)) / 2e-9
    >>> exact = gradient_term('trace', GradRequest(tar, out, drho))
    >>> abs(exact) < 1e-12, abs(fd) < 1e-5
    (True, True)

    ```

    Arguments:
        kind {CostKind or str} -- The cost function
        req {GradRequest} -- States, derivative and mode

    Raises:
        ValueError: If a finite-difference term is requested without shifted outputs

    Returns:
        float or None -- The derivative, `None` for coinciding states
    """
    kind = CostKind.from_tag(kind)
    tar, out = _check_pair(req.rho_tar, req.rho_out)
    diff = out - tar
    if trace_norm(diff) < EQUALITY_TOL:
        return None

    if req.mode == 'finite_difference' or not kind.analytic:
        if req.shifted is None:
            raise ValueError(f"Cost {kind.tag} needs the outputs at lam +- eps for a finite difference")
        plus, minus = req.shifted
        floor = QRE_FLOOR if kind is CostKind.QRE else None
        return (evaluate(kind, tar, plus, floor) - evaluate(kind, tar, minus, floor)) / (2 * req.eps)

    drho = np.asarray(req.drho, dtype=complex)
    if kind is CostKind.HS:
        return _re_tr(diff, drho) / math.sqrt(_re_tr(diff, diff))
    if kind is CostKind.TRACE:
        return _re_tr(herm_fn(diff, _sign), drho) / 2
    if kind in (CostKind.F1, CostKind.D1):
        s = herm_fn(tar, 'sqrt')
        root = herm_fn(s @ out @ s, 'sqrt')
        contraction = _re_tr(drho, s @ pinv(root) @ s)
        if kind is CostKind.F1:
            return _re_tr(root) * contraction
        d1 = evaluate(CostKind.D1, tar, out)
        return -contraction / (2 * d1)

    p_tar, p_out = _re_tr(tar, tar), _re_tr(out, out)
    f2 = _re_tr(tar, out) / max(p_tar, p_out)
    sign = 0.0 if abs(p_out - p_tar) <= EQUALITY_TOL else math.copysign(1.0, p_out - p_tar)
    df2 = _re_tr(drho, tar - f2 * (1 + sign) * out) / max(p_tar, p_out)
    if kind is CostKind.F2:
        return df2
    return -df2 / evaluate(CostKind.D2, tar, out)


def total_cost(kind, pairs, qre_floor=None):
    """Mean cost over `(rho_tar, rho_out)` pairs.

    Example:
    ```python
    >>> import numpy as np
    >>> a, b, c = np.diag([1, 0]), np.diag([0, 1]), np.eye(2) / 2
    >>> total_cost('trace', [(a, b)]) == evaluate('trace', a, b)
    True
    >>> round(total_cost('trace', [(a, b), (a, c), (c, c)]), 12)
    0.5
    >>> total_cost('hs', [])
    Traceback (most recent call last):
    ...
    ValueError: Total cost needs at least one pair

    ```
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("Total cost needs at least one pair")
    return sum(evaluate(kind, t, o, qre_floor) for t, o in pairs) / len(pairs)
