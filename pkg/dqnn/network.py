"""Dissipative quantum neural networks in the isometry formulation.

Neurons are labelled `(layer, neuron)` with 1-based layer and neuron numbers. In the extended
style the main layers sit at odd layer numbers and every perceptron also adds an ancilla neuron
in the even layer in between. The total space is ordered `H_L (x) ... (x) H_1`, neurons of one
layer left to right, and each perceptron tensors its new neurons from the left.

States are propagated as density matrices over the currently live neurons: ancillas are traced
out right after their perceptron, a source layer right after the last perceptron reading it.

Channel properties over random networks:
```python
>>> import numpy as np
>>> from dqnn.rng import seed
>>> from dqnn.channels import random_density_hs
>>> rng = seed(12)
>>> arch = Architecture.qubits('extended', [1, 2, 1])
>>> ok = True
>>> for _ in range(200):
...     net = Network.random(arch, np.pi, rng)
...     out = apply(net, random_density_hs(2, rng))
...     ok &= is_density(out, 1e-9)
...     j = choi_state(net)
...     ok &= float(np.linalg.eigvalsh(j).min()) >= -1e-9
...     ok &= float(np.max(np.abs(partial_trace(j, [2, 2], [1]) - np.eye(2) / 2))) <= 1e-10
...     v = assemble_isometry(net)
...     ok &= float(np.max(np.abs(v.conj().T @ v - np.eye(2)))) <= 1e-10
>>> bool(ok)
True

```
"""
import logging
import math
from collections import namedtuple

import numpy as np

from dqnn.isometry import (ParamMatrix, active_param_count, build_isometry, build_unitary,
                           generator_frames, tilde_generator, unitary_param_count)
from dqnn.linalg import check_density, dagger, is_density, max_entangled, partial_trace, permute_factors

__all__ = [
    'Architecture', 'Network', 'Perceptron', 'REF',
    'assemble_isometry', 'apply', 'choi_state', 'kraus_operators', 'output_gradient',
    'output_jacobian', 'choi_jacobian', 'assemble_unitary', 'apply_unitary', 'param_report',
    'format_report',
]

logger = logging.getLogger(__name__)

STYLES = ('conventional', 'extended')

# reference factor of the Choi construction, right of every neuron
REF = (0, 1)

Perceptron = namedtuple('Perceptron', ['layer', 'neuron', 'source', 'new', 'd_in', 'd_out'])


def _key(label):
    return (-label[0], label[1])


def _sorted(labels):
    return sorted(labels, key=_key)


class Architecture(object):
    """Layer dimensions and perceptron wiring.

    Example:
    ```python
    >>> arch = Architecture('extended', [[2], [2]])
    >>> arch
    <Architecture extended [[2], [2]]>
    >>> [role for role, _ in arch.layers]
    ['input', 'ancilla', 'output']
    >>> arch.perceptrons[0]
    Perceptron(layer=3, neuron=1, source=((1, 1),), new=((3, 1), (2, 1)), d_in=2, d_out=8)
    >>> Architecture.conventional([[2], [2, 2]]).perceptrons[1].d_out, Architecture.extended([[2], [2]], [[3]]).perceptrons[0].d_out
    (4, 12)
    >>> fig = Architecture.qubits('extended', [2, 3, 2, 2])
    >>> len(fig.perceptrons), len(fig.layers), len(fig.labels)
    (7, 7, 16)
    >>> Architecture('conventional', [[2]])
    Traceback (most recent call last):
    ...
    ValueError: An architecture needs at least an input and an output layer, got 1 layer(s)

    ```

    Arguments:
        style {str} -- `'conventional'` or `'extended'`
        layers {list} -- Neuron dimensions per main layer, input first

    Keyword Arguments:
        ancillas {list} -- Ancilla dimensions per perceptron, grouped like `layers[1:]`; defaults
            to the dimension of the neuron the perceptron adds (default: {None})
    """

    def __init__(self, style, layers, ancillas=None):
        if style not in STYLES:
            raise ValueError(f"Unknown architecture style {style!r}, expected one of {STYLES}")
        layers = tuple(tuple(int(d) for d in layer) for layer in layers)
        if len(layers) < 2:
            raise ValueError(f"An architecture needs at least an input and an output layer, got {len(layers)} layer(s)")
        if any(len(layer) == 0 or min(layer) < 1 for layer in layers):
            raise ValueError(f"Every layer needs at least one neuron of dimension >= 1, got {layers}")
        if style == 'conventional' and ancillas is not None:
            raise ValueError("Conventional architectures have no ancilla neurons")
        if style == 'extended':
            if ancillas is None:
                ancillas = layers[1:]
            ancillas = tuple(tuple(int(d) for d in anc) for anc in ancillas)
            if [len(a) for a in ancillas] != [len(l) for l in layers[1:]] or min(min(a) for a in ancillas) < 1:
                raise ValueError(f"Ancilla dimensions {ancillas} do not match layers {layers[1:]}")

        self.style = style
        self.main = layers
        self.ancillas = ancillas
        self.dims = {}
        self._build()

    @classmethod
    def qubits(cls, style, counts):
        """Architecture of qubit neurons with `counts[j]` neurons in main layer `j`."""
        return cls(style, [[2] * n for n in counts])

    @classmethod
    def conventional(cls, layers):
        return cls('conventional', layers)

    @classmethod
    def extended(cls, layers, ancillas=None):
        """Extended architecture; `Architecture.extended([[2], [2]], [[3]])` uses a qutrit ancilla."""
        return cls('extended', layers, ancillas)

    def _layer_no(self, j):
        return 2 * j + 1 if self.style == 'extended' else j + 1

    def _build(self):
        self.layers = []
        self.perceptrons = []
        self.steps = []
        for j, layer in enumerate(self.main):
            if j > 0 and self.style == 'extended':
                anc_no = self._layer_no(j) - 1
                for k, d in enumerate(self.ancillas[j - 1], 1):
                    self.dims[(anc_no, k)] = d
                self.layers.append(('ancilla', self.ancillas[j - 1]))
            for k, d in enumerate(layer, 1):
                self.dims[(self._layer_no(j), k)] = d
            role = 'input' if j == 0 else 'output' if j == len(self.main) - 1 else 'hidden'
            self.layers.append((role, layer))

        for j in range(1, len(self.main)):
            src_no, dst_no = self._layer_no(j - 1), self._layer_no(j)
            source = tuple((src_no, k) for k in range(1, len(self.main[j - 1]) + 1))
            d_in = math.prod(self.dims[l] for l in source)
            for k in range(1, len(self.main[j]) + 1):
                new = ((dst_no, k),)
                if self.style == 'extended':
                    new = new + ((dst_no - 1, k),)
                d_out = d_in * math.prod(self.dims[l] for l in new)
                self.steps.append(('perceptron', len(self.perceptrons)))
                self.perceptrons.append(Perceptron(dst_no, k, source, new, d_in, d_out))
                if self.style == 'extended':
                    self.steps.append(('trace', new[1:]))
            self.steps.append(('trace', source))

    @property
    def labels(self):
        return _sorted(self.dims)

    @property
    def input_labels(self):
        return [(1, k) for k in range(1, len(self.main[0]) + 1)]

    @property
    def output_labels(self):
        last = self._layer_no(len(self.main) - 1)
        return [(last, k) for k in range(1, len(self.main[-1]) + 1)]

    @property
    def d_input(self):
        return math.prod(self.main[0])

    @property
    def d_output(self):
        return math.prod(self.main[-1])

    def to_dict(self):
        rv = {'style': self.style, 'layers': [list(l) for l in self.main]}
        if self.style == 'extended':
            rv['ancillas'] = [list(a) for a in self.ancillas]
        return rv

    @classmethod
    def from_dict(cls, data):
        """Inverse of `to_dict`; unknown keys are rejected.

        Example:
        ```python
        >>> Architecture.from_dict({'style': 'extended', 'layers': [[2], [2]], 'width': 3})
        Traceback (most recent call last):
        ...
        ValueError: Unknown architecture keys: width

        ```
        """
        unknown = sorted(set(data) - {'style', 'layers', 'ancillas'})
        if unknown:
            raise ValueError(f"Unknown architecture keys: {', '.join(unknown)}")
        if 'layers' not in data:
            raise ValueError("Architecture description needs 'layers'")
        return cls(data.get('style', 'extended'), data['layers'], data.get('ancillas'))

    def __eq__(self, other):
        return isinstance(other, Architecture) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"<Architecture {self.style} {[list(l) for l in self.main]}>"


class Network(object):
    """An architecture together with one parameter matrix per perceptron.

    Example:
    ```python
    >>> net = Network.zeros(Architecture('extended', [[2], [2]]))
    >>> net.param_count, net.flat().shape
    (28, (28,))
    >>> Network(net.arch, [ParamMatrix.zeros(2, 4)])
    Traceback (most recent call last):
    ...
    ValueError: Perceptron 0 expects a (2, 8) parameter matrix, got (2, 4)

    ```
    """

    def __init__(self, arch, params=None):
        if params is None:
            params = [ParamMatrix.zeros(p.d_in, p.d_out) for p in arch.perceptrons]
        params = list(params)
        if len(params) != len(arch.perceptrons):
            raise ValueError(f"Expected {len(arch.perceptrons)} parameter matrices, got {len(params)}")
        for i, (p, param) in enumerate(zip(arch.perceptrons, params)):
            if (param.d_in, param.d_out) != (p.d_in, p.d_out):
                raise ValueError(f"Perceptron {i} expects a {(p.d_in, p.d_out)} parameter matrix, "
                                 f"got {(param.d_in, param.d_out)}")
        self.arch = arch
        self.params = tuple(params)
        self._isometries = None

    @classmethod
    def zeros(cls, arch):
        return cls(arch)

    @classmethod
    def random(cls, arch, scale, rng):
        return cls(arch, [ParamMatrix.random(p.d_in, p.d_out, scale, rng) for p in arch.perceptrons])

    @property
    def param_count(self):
        return sum(p.count for p in self.params)

    def flat(self):
        """Active parameters of all perceptrons, concatenated in perceptron order."""
        return np.concatenate([p.active() for p in self.params])

    def with_flat(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (self.param_count,):
            raise ValueError(f"Expected {self.param_count} parameters, got shape {values.shape}")
        params, at = [], 0
        for p in self.params:
            params.append(p.with_active(values[at:at + p.count]))
            at += p.count
        return Network(self.arch, params)

    def isometries(self):
        if self._isometries is None:
            self._isometries = [build_isometry(p) for p in self.params]
        return self._isometries

    def channel(self):
        from dqnn.channels import Channel
        return Channel.from_choi(choi_state(self), self.arch.d_input, self.arch.d_output)

    def __repr__(self):
        return f"<Network {self.arch.style} {[list(l) for l in self.arch.main]} params={self.param_count}>"


def _act(mat, labels, dims, op, in_labels, new_labels=()):
    # op maps the in_labels factors to new_labels (x) in_labels; acts on the row index of mat
    labels = list(labels)
    cols = mat.shape[1]
    front = [labels.index(l) for l in in_labels]
    rest = [i for i in range(len(labels)) if i not in front]
    t = permute_factors(mat, [dims[l] for l in labels], front + rest)
    d_in = math.prod(dims[l] for l in in_labels)
    t = (op @ t.reshape(d_in, -1)).reshape(-1, cols)

    out = list(new_labels) + list(in_labels) + [labels[i] for i in rest]
    target = _sorted(out)
    return permute_factors(t, [dims[l] for l in out], [out.index(l) for l in target]), target


def _sandwich(left, right, mat, labels, dims, in_labels, new_labels=()):
    # left . mat . right^dagger
    a, out = _act(mat, labels, dims, left, in_labels, new_labels)
    b, _ = _act(dagger(a), labels, dims, right, in_labels, new_labels)
    return dagger(b), out


def _trace(mat, labels, dims, gone):
    keep = [i for i, l in enumerate(labels) if l not in gone]
    reduced = partial_trace(mat, [dims[l] for l in labels], keep)
    return reduced, [labels[i] for i in keep]


def _run(net, mat, labels, dims, steps):
    for kind, arg in steps:
        if kind == 'perceptron':
            p = net.arch.perceptrons[arg]
            v = net.isometries()[arg]
            mat, labels = _sandwich(v, v, mat, labels, dims, p.source, p.new)
        else:
            mat, labels = _trace(mat, labels, dims, arg)
    return mat, labels


def _dims(net, ref_dim):
    dims = dict(net.arch.dims)
    if ref_dim > 1:
        dims[REF] = ref_dim
    return dims


def _input(net, rho_in, ref_dim):
    labels = net.arch.input_labels + ([REF] if ref_dim > 1 else [])
    rho_in = check_density(rho_in, net.arch.d_input * ref_dim)
    return rho_in, labels


def assemble_isometry(net):
    """The Stinespring isometry of the whole network onto every layer.

    Rows are ordered `H_L (x) ... (x) H_1`.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.linalg import ket, kron_all
    >>> v = assemble_isometry(Network.zeros(Architecture('extended', [[2], [2]])))
    >>> bool(np.array_equal(v[:, [1]], kron_all(ket(0, 2), ket(0, 2), ket(1, 2))))
    True

    ```
    """
    mat = np.eye(net.arch.d_input, dtype=complex)
    labels = net.arch.input_labels
    for p, v in zip(net.arch.perceptrons, net.isometries()):
        mat, labels = _act(mat, labels, net.arch.dims, v, p.source, p.new)
    return mat


def apply(net, rho_in):
    """Output state of the network channel.

    Example:
    ```python
    >>> import numpy as np
    >>> net = Network.zeros(Architecture('extended', [[2], [2]]))
    >>> out = apply(net, np.full((2, 2), 0.5))
    >>> bool(np.allclose(out, np.diag([1, 0])))
    True
    >>> apply(net, np.eye(3) / 3)
    Traceback (most recent call last):
    ...
    ValueError: Expected a 2x2 density matrix, got shape (3, 3)

    ```

    With `lam[1, 4] = pi/2` the first column of the isometry moves to `|1>_out |0>_anc |0>_in`,
    which realizes the identity channel:
    ```python
    >>> lam = np.zeros((8, 8)); lam[1, 4] = np.pi / 2; lam[4, 1] = np.pi
    >>> ident = Network(net.arch, [ParamMatrix(2, 8, lam)])
    >>> rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    >>> float(np.max(np.abs(apply(ident, rho) - rho))) < 1e-12
    True

    ```

    Arguments:
        net {Network} -- The network
        rho_in {ndarray} -- Density matrix on the input layer

    Raises:
        ValueError: If `rho_in` is not a density matrix of the input dimension

    Returns:
        ndarray -- Density matrix on the output layer
    """
    rho_in, labels = _input(net, rho_in, 1)
    out, _ = _run(net, rho_in, labels, net.arch.dims, net.arch.steps)
    return out


def choi_state(net):
    """`J = 1/d_in sum_ij E(|i><j|) (x) |i><j|`, output factor first.

    Example:
    ```python
    >>> import numpy as np
    >>> net = Network.zeros(Architecture('extended', [[2], [2]]))
    >>> bool(np.allclose(choi_state(net), np.kron(np.diag([1, 0]), np.eye(2) / 2)))
    True
    >>> lam = np.zeros((8, 8)); lam[1, 4] = np.pi / 2; lam[4, 1] = np.pi
    >>> ident = Network(net.arch, [ParamMatrix(2, 8, lam)])
    >>> float(np.max(np.abs(choi_state(ident) - max_entangled(2)))) < 1e-12
    True

    ```
    """
    d = net.arch.d_input
    dims = _dims(net, d)
    labels = net.arch.input_labels + [REF]
    out, _ = _run(net, max_entangled(d), labels, dims, net.arch.steps)
    return out


def kraus_operators(net):
    """Kraus operators `(<k|_env (x) 1) V` over every traced-out basis label.

    Environment labels are enumerated row-major over the traced factors, left to right.

    Example:
    ```python
    >>> import numpy as np
    >>> net = Network.zeros(Architecture('extended', [[2], [2]]))
    >>> ks = kraus_operators(net)
    >>> len(ks), [int(round(np.abs(k).sum())) for k in ks]
    (4, [1, 1, 0, 0])
    >>> bool(np.allclose(ks[1], [[0, 1], [0, 0]]))
    True

    ```

    Completeness and agreement with `apply` on random networks:
    ```python
    >>> from dqnn.rng import seed
    >>> from dqnn.channels import random_density_hs
    >>> rng = seed(14)
    >>> archs = [Architecture.qubits('extended', [1, 2, 1]), Architecture.qubits('conventional', [1, 2, 1]),
    ...          Architecture.extended([[2], [2]], [[3]])]
    >>> worst = 0.0
    >>> for arch in archs:
    ...     for _ in range(3):
    ...         net = Network.random(arch, np.pi, rng)
    ...         ks = kraus_operators(net)
    ...         worst = max(worst, float(np.max(np.abs(sum(k.conj().T @ k for k in ks) - np.eye(2)))))
    ...         rho = random_density_hs(2, rng)
    ...         via_kraus = sum(k @ rho @ k.conj().T for k in ks)
    ...         worst = max(worst, float(np.max(np.abs(via_kraus - apply(net, rho)))))
    >>> worst < 1e-10
    True

    ```
    """
    v = assemble_isometry(net)
    d_out, d_in = net.arch.d_output, net.arch.d_input
    v3 = v.reshape(d_out, -1, d_in)
    return [v3[:, k, :] for k in range(v3.shape[1])]


def _tangents(net, rho, labels, dims, wanted=None):
    # derivatives of the final state, one per active parameter of each perceptron
    steps = net.arch.steps
    tangents = []
    for s, (kind, arg) in enumerate(steps):
        if kind != 'perceptron':
            rho, labels = _trace(rho, labels, dims, arg)
            continue
        p = net.arch.perceptrons[arg]
        param = net.params[arg]
        indices = [ij for ij in param.active_indices() if wanted is None or (arg, ij) in wanted]
        if indices:
            embed = np.eye(p.d_out, p.d_in, dtype=complex)
            rho_t, lab_t = _sandwich(embed, embed, rho, labels, dims, p.source, p.new)
            u = build_unitary(param.square())
            frames = generator_frames(param)
            block = list(p.new) + list(p.source)
            for x, y in indices:
                y_t = tilde_generator(frames[(x, y)], x, y)
                a, _ = _act(rho_t, lab_t, dims, y_t, block)
                comm = 1j * (a - dagger(a))
                t, lab = _sandwich(u, u, comm, lab_t, dims, block)
                t, _ = _run(net, t, lab, dims, steps[s + 1:])
                tangents.append(t)
        v = net.isometries()[arg]
        rho, labels = _sandwich(v, v, rho, labels, dims, p.source, p.new)
    return rho, tangents


def output_gradient(net, rho_in, perceptron, x, y):
    """Derivative of the output state with respect to `lam[x, y]` of one perceptron.

    The perceptron's contribution is the commutator `U i [Y~, s] U^dagger` with `s` the
    incoming state embedded with `|0>` on the new neurons, pushed through the rest of the
    network.

    Example:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> from dqnn.channels import random_density_hs
    >>> rng = seed(21)
    >>> net = Network.random(Architecture('extended', [[2], [2]]), np.pi, rng)
    >>> rho = random_density_hs(2, rng)
    >>> def shifted(h):
    ...     lam = net.params[0].lam.copy(); lam[6, 1] += h
    ...     return apply(Network(net.arch, [ParamMatrix(2, 8, lam)]), rho)
    >>> g = output_gradient(net, rho, 0, 6, 1)
    >>> float(np.max(np.abs(g - (shifted(1e-6) - shifted(-1e-6)) / 2e-6))) < 1e-6
    True
    >>> abs(complex(np.trace(g))) < 1e-10
    True
    >>> output_gradient(net, rho, 0, 6, 7)
    Traceback (most recent call last):
    ...
    ValueError: Parameter (6, 7) of perceptron 0 is inactive

    ```

    With all angles zero the diagonal parameters only rotate coherences that the trace removes:
    ```python
    >>> zero = Network.zeros(net.arch)
    >>> float(np.max(np.abs(output_gradient(zero, rho, 0, 0, 0)))) < 1e-15
    True

    ```

    Arguments:
        net {Network} -- The network
        rho_in {ndarray} -- Input density matrix
        perceptron {int} -- Index of the perceptron
        x {int} -- Row of the parameter
        y {int} -- Column of the parameter

    Raises:
        ValueError: If the parameter is inactive

    Returns:
        ndarray -- Hermitian traceless matrix on the output layer
    """
    if not net.params[perceptron].mask[x, y]:
        raise ValueError(f"Parameter ({x}, {y}) of perceptron {perceptron} is inactive")
    rho_in, labels = _input(net, rho_in, 1)
    _, tangents = _tangents(net, rho_in, labels, net.arch.dims, {(perceptron, (x, y))})
    return tangents[0]


def output_jacobian(net, rho_in, ref_dim=1):
    """Output state and its derivative for every active parameter, in `Network.flat` order.

    With `ref_dim > 1`, `rho_in` lives on input (x) reference and the reference factor is
    passed through untouched.

    The derivatives are linear in the input state:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> from dqnn.channels import random_density_hs
    >>> rng = seed(8)
    >>> net = Network.random(Architecture.qubits('extended', [1, 1, 1]), 1.0, rng)
    >>> a, b = random_density_hs(2, rng), random_density_hs(2, rng)
    >>> _, ta = output_jacobian(net, a)
    >>> _, tb = output_jacobian(net, b)
    >>> _, tm = output_jacobian(net, 0.3 * a + 0.7 * b)
    >>> len(tm) == net.param_count
    True
    >>> max(float(np.max(np.abs(m - 0.3 * x - 0.7 * y))) for m, x, y in zip(tm, ta, tb)) < 1e-12
    True

    ```
    """
    dims = _dims(net, ref_dim)
    rho_in, labels = _input(net, rho_in, ref_dim)
    return _tangents(net, rho_in, labels, dims)


def choi_jacobian(net):
    """Choi state and its derivative for every active parameter."""
    d = net.arch.d_input
    return output_jacobian(net, max_entangled(d), ref_dim=d)


def assemble_unitary(net, full_params=None):
    """The product of perceptron unitaries on the whole network, unitary formulation.

    Each perceptron unitary is the composite parametrization of the full
    `d_out x d_out` parameter matrix; by default the network's own (masked) parameters.

    Example:
    ```python
    >>> import numpy as np
    >>> net = Network.zeros(Architecture.qubits('conventional', [1, 2]))
    >>> bool(np.array_equal(assemble_unitary(net), np.eye(8)))
    True

    ```
    """
    if full_params is None:
        full_params = [p.square() for p in net.params]
    dims = net.arch.dims
    labels = net.arch.labels
    mat = np.eye(math.prod(dims.values()), dtype=complex)
    for p, param in zip(net.arch.perceptrons, full_params):
        if (param.d_in, param.d_out) != (p.d_out, p.d_out):
            raise ValueError(f"Unitary parameters must be {p.d_out}x{p.d_out}, got ({param.d_in}, {param.d_out})")
        mat, labels = _act(mat, labels, dims, build_unitary(param), list(p.new) + list(p.source))
    return mat


def apply_unitary(net, rho_in, full_params=None):
    """Output state computed in the unitary formulation with `|0>` fiducial states.

    Agrees with the isometry formulation, and entries outside the active mask of the full
    unitary parameters have no influence:
    ```python
    >>> import numpy as np
    >>> from dqnn.rng import seed
    >>> from dqnn.channels import random_density_hs
    >>> rng = seed(5)
    >>> arch = Architecture.qubits('conventional', [1, 2])
    >>> full = [ParamMatrix.random(4, 4, np.pi, rng) for _ in arch.perceptrons]
    >>> masked = [ParamMatrix(2, 4, f.lam * ParamMatrix.zeros(2, 4).mask) for f in full]
    >>> net = Network(arch, masked)
    >>> rho = random_density_hs(2, rng)
    >>> float(np.max(np.abs(apply_unitary(net, rho, full) - apply(net, rho)))) < 1e-10
    True
    >>> float(np.max(np.abs(assemble_unitary(net, full)[:, :2] - assemble_isometry(net)))) < 1e-12
    True

    ```
    """
    dims = net.arch.dims
    labels = net.arch.input_labels
    rho_in = check_density(rho_in, net.arch.d_input)
    others = [l for l in net.arch.labels if l not in labels]
    d_rest = math.prod(dims[l] for l in others)
    fiducial = np.eye(d_rest * net.arch.d_input, net.arch.d_input, dtype=complex)
    state, labels = _sandwich(fiducial, fiducial, rho_in, labels, dims, labels, others)
    u = assemble_unitary(net, full_params)
    state, labels = _sandwich(u, u, state, labels, dims, labels)
    return _trace(state, labels, dims, [l for l in labels if l not in net.arch.output_labels])[0]


ReportRow = namedtuple('ReportRow', ['layer', 'neuron', 'source', 'd_in', 'd_out', 'active', 'unitary'])


def param_report(arch):
    """Per-perceptron parameter counts in the isometry and unitary formulations.

    Example:
    ```python
    >>> rows = param_report(Architecture.qubits('extended', [2, 3, 2, 2]))
    >>> [r.active for r in rows]
    [112, 112, 112, 448, 448, 112, 112]
    >>> sum(r.active for r in rows), sum(r.unitary for r in rows)
    (1456, 3328)

    ```
    """
    rows = []
    for p in arch.perceptrons:
        rows.append(ReportRow(p.layer, p.neuron, p.source[0][0], p.d_in, p.d_out,
                              active_param_count(p.d_in, p.d_out), unitary_param_count(p.d_out)))
    return rows


def format_report(rows):
    lines = ["layer neuron source  d_in d_out  active unitary"]
    for r in rows:
        lines.append(f"{r.layer:5d} {r.neuron:6d} {r.source:6d} {r.d_in:5d} {r.d_out:5d} {r.active:7d} {r.unitary:7d}")
    lines.append(f"{'total':31s} {sum(r.active for r in rows):7d} {sum(r.unitary for r in rows):7d}")
    return "\n".join(lines)
