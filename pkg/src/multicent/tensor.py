"""Sparse fourth-order adjacency tensors and their contractions.

A multilayer network on ``N`` nodes and ``L`` layers is stored as a square
fourth-order tensor ``T[i, l, j, k]`` holding the weight of the edge from
node ``i`` in layer ``l`` to node ``j`` in layer ``k``.  The tensor is kept
only in flattened form: the bijection ``(i, l) -> i + (l - 1) * N`` (node
index varying fastest) turns it into an ``NL x NL`` sparse matrix, the
supra-adjacency matrix, and every contraction used by the library reduces
to ordinary matrix arithmetic on that flattening.  The tensor view is an
index-translation facade on top.

Block vectors (the ``N x L`` dense factors contracted against the tensor)
are plain numpy arrays of shape ``(N, L)``; :func:`vec_block` and
:func:`unvec_block` move between them and their length-``NL`` flattenings.

All tensors are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import DomainError

__all__ = [
    "TensorIndex",
    "AdjacencyTensor",
    "flatten_index",
    "unflatten_index",
    "identity_tensor",
    "einstein_tt",
    "einstein_tv",
    "bilinear_form",
    "inner_product",
    "frobenius_norm",
    "trace",
    "tensor_power",
    "transpose",
    "vec_block",
    "unvec_block",
    "ones_block",
    "selector_block",
    "all_indices",
]


class TensorIndex(NamedTuple):
    """A node-layer pair, 1-based in both components."""

    node: int
    layer: int

    def __str__(self):
        return f"({self.node},{self.layer})"


def flatten_index(index, n_nodes, n_layers):
    """Map a 1-based (node, layer) pair to its 1-based flattened index.

    The node index varies fastest: ``(node, layer) -> node + (layer - 1) * N``.
    """
    node, layer = index
    if not (1 <= node <= n_nodes and 1 <= layer <= n_layers):
        raise DomainError(
            f"index ({node},{layer}) out of bounds for {n_nodes} nodes, {n_layers} layers"
        )
    return node + (layer - 1) * n_nodes


def unflatten_index(k, n_nodes, n_layers):
    """Inverse of :func:`flatten_index`; ``k`` is 1-based in ``[1, N*L]``."""
    if not (1 <= k <= n_nodes * n_layers):
        raise DomainError(
            f"flattened index {k} out of bounds for {n_nodes} nodes, {n_layers} layers"
        )
    node = (k - 1) % n_nodes + 1
    layer = (k - 1) // n_nodes + 1
    return TensorIndex(node, layer)


def all_indices(n_nodes, n_layers):
    """All node-layer pairs in flattened order (node varying fastest)."""
    return [
        TensorIndex(node, layer)
        for layer in range(1, n_layers + 1)
        for node in range(1, n_nodes + 1)
    ]


def _freeze(matrix):
    """Make a CSR matrix canonical and mark its buffers read-only."""
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    for buf in (matrix.data, matrix.indices, matrix.indptr):
        buf.flags.writeable = False
    return matrix


class AdjacencyTensor:
    """Square fourth-order tensor of a multilayer network, stored flattened.

    Instances are immutable: all mutating-style operations return new
    tensors.  External indices are always 1-based (node, layer) pairs;
    internally the flattened 0-based CSR representation is used.

    Parameters
    ----------
    matrix : scipy sparse or dense array, shape (N*L, N*L)
        Flattened tensor entries in the node-fastest ordering.
    n_nodes, n_layers : int
        Network dimensions; must satisfy ``matrix.shape == (N*L, N*L)``.
    """

    __slots__ = ("_mat", "_n_nodes", "_n_layers", "_symmetric", "_lambda_cache")

    def __init__(self, matrix, n_nodes, n_layers):
        if n_nodes < 1 or n_layers < 1:
            raise DomainError("n_nodes and n_layers must be positive")
        dim = n_nodes * n_layers
        mat = sp.csr_matrix(matrix, dtype=float, copy=True)
        if mat.shape != (dim, dim):
            raise DomainError(
                f"flattened matrix shape {mat.shape} does not match "
                f"{n_nodes} nodes x {n_layers} layers"
            )
        if mat.nnz and not np.all(np.isfinite(mat.data)):
            raise DomainError("tensor entries must be finite")
        self._mat = _freeze(mat)
        self._n_nodes = n_nodes
        self._n_layers = n_layers
        self._symmetric = None
        self._lambda_cache = {}

    @classmethod
    def from_edges(cls, n_nodes, n_layers, edges, strict=False):
        """Assemble a tensor from ``(from_index, to_index, weight)`` records.

        Indices are 1-based :class:`TensorIndex`-like pairs.  Duplicate
        ordered pairs are summed; with ``strict=True`` they raise instead.
        Zero weights are dropped.
        """
        dim = n_nodes * n_layers
        rows, cols, vals = [], [], []
        seen = set() if strict else None
        for src, dst, weight in edges:
            r = flatten_index(src, n_nodes, n_layers) - 1
            c = flatten_index(dst, n_nodes, n_layers) - 1
            if not np.isfinite(weight):
                raise DomainError(f"non-finite weight for edge {tuple(src)} -> {tuple(dst)}")
            if strict:
                if (r, c) in seen:
                    raise DomainError(
                        f"duplicate edge {tuple(src)} -> {tuple(dst)} in strict mode"
                    )
                seen.add((r, c))
            if weight == 0.0:
                continue
            rows.append(r)
            cols.append(c)
            vals.append(float(weight))
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
        return cls(mat, n_nodes, n_layers)

    @classmethod
    def from_supra(cls, matrix, n_nodes, n_layers):
        """Wrap an existing flattened (supra-adjacency) matrix."""
        return cls(matrix, n_nodes, n_layers)

    @classmethod
    def from_dense_tensor(cls, tensor):
        """Build from a dense 4-D array of shape ``(N, L, N, L)``."""
        arr = np.asarray(tensor, dtype=float)
        if arr.ndim != 4 or arr.shape[0] != arr.shape[2] or arr.shape[1] != arr.shape[3]:
            raise DomainError(f"expected a square (N, L, N, L) array, got shape {arr.shape}")
        n_nodes, n_layers = arr.shape[0], arr.shape[1]
        dim = n_nodes * n_layers
        # node-fastest flattening on both index pairs
        mat = arr.reshape((dim, dim), order="F")
        return cls(mat, n_nodes, n_layers)

    @classmethod
    def zeros(cls, n_nodes, n_layers):
        """The all-zero tensor."""
        dim = n_nodes * n_layers
        return cls(sp.csr_matrix((dim, dim)), n_nodes, n_layers)

    # -- basic views ---------------------------------------------------

    @property
    def n_nodes(self):
        return self._n_nodes

    @property
    def n_layers(self):
        return self._n_layers

    @property
    def dim(self):
        """Flattened dimension ``N * L``."""
        return self._n_nodes * self._n_layers

    @property
    def nnz(self):
        """Number of stored (nonzero) entries."""
        return self._mat.nnz

    @property
    def mat(self):
        """The sparse CSR flattening (supra-adjacency matrix).  Do not mutate."""
        return self._mat

    @property
    def is_symmetric(self):
        if self._symmetric is None:
            self._symmetric = (self._mat != self._mat.T).nnz == 0
        return self._symmetric

    def entry(self, src, dst):
        """Tensor entry for 1-based (node, layer) pairs ``src -> dst``."""
        r = flatten_index(src, self._n_nodes, self._n_layers) - 1
        c = flatten_index(dst, self._n_nodes, self._n_layers) - 1
        return float(self._mat[r, c])

    def entries(self) -> Iterator[tuple[TensorIndex, TensorIndex, float]]:
        """Iterate stored entries as ``(from, to, weight)`` in CSR order."""
        coo = self._mat.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            yield (
                unflatten_index(int(r) + 1, self._n_nodes, self._n_layers),
                unflatten_index(int(c) + 1, self._n_nodes, self._n_layers),
                float(v),
            )

    def indices(self):
        """All node-layer pairs of this network in flattened order."""
        return all_indices(self._n_nodes, self._n_layers)

    def toarray(self):
        """Dense copy of the flattening."""
        return self._mat.toarray()

    # -- algebra -------------------------------------------------------

    def frobenius_norm(self):
        return float(np.sqrt(np.sum(self._mat.data**2))) if self.nnz else 0.0

    def trace(self):
        return float(self._mat.diagonal().sum())

    def transpose(self):
        """Swap the two index pairs; the flattening is transposed."""
        return AdjacencyTensor(self._mat.T.tocsr(), self._n_nodes, self._n_layers)

    def power(self, p):
        return tensor_power(self, p)

    def same_structure(self, other):
        return (
            isinstance(other, AdjacencyTensor)
            and self._n_nodes == other._n_nodes
            and self._n_layers == other._n_layers
        )

    def __eq__(self, other):
        if not self.same_structure(other):
            return NotImplemented
        return (self._mat != other._mat).nnz == 0

    __hash__ = None

    def __repr__(self):
        sym = "symmetric" if self.is_symmetric else "nonsymmetric"
        return (
            f"AdjacencyTensor(n_nodes={self._n_nodes}, n_layers={self._n_layers}, "
            f"nnz={self.nnz}, {sym})"
        )


def identity_tensor(n_nodes, n_layers):
    """The identity tensor: ones exactly where both index pairs coincide."""
    return AdjacencyTensor(sp.identity(n_nodes * n_layers, format="csr"), n_nodes, n_layers)


def _check_same_shape(a, b, what):
    if not a.same_structure(b):
        raise DomainError(f"{what}: operands have mismatched network dimensions")


def einstein_tt(a: AdjacencyTensor, b: AdjacencyTensor) -> AdjacencyTensor:
    """Contraction of two square tensors over the trailing/leading index pair.

    The flattening of the result is the matrix product of the operand
    flattenings.
    """
    _check_same_shape(a, b, "tensor-tensor product")
    return AdjacencyTensor(a.mat @ b.mat, a.n_nodes, a.n_layers)


def einstein_tv(a: AdjacencyTensor, block: np.ndarray) -> np.ndarray:
    """Contract a square tensor with an ``(N, L)`` block vector.

    Equivalent to a supra-adjacency matrix-vector product in the flattened
    ordering.  The reduction order is fixed by the sparse kernel, so results
    are deterministic.
    """
    block = np.asarray(block, dtype=float)
    if block.shape != (a.n_nodes, a.n_layers):
        raise DomainError(
            f"block shape {block.shape} does not match ({a.n_nodes}, {a.n_layers})"
        )
    return unvec_block(a.mat @ vec_block(block), a.n_nodes, a.n_layers)


def bilinear_form(x: np.ndarray, y: np.ndarray) -> float:
    """Entrywise inner product of two same-shaped block vectors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError(f"shape mismatch in bilinear form: {x.shape} vs {y.shape}")
    return float(np.sum(x * y))


def inner_product(x, y) -> float:
    """Entrywise inner product of two tensors or two block vectors."""
    if isinstance(x, AdjacencyTensor) or isinstance(y, AdjacencyTensor):
        _check_same_shape(x, y, "inner product")
        return float(x.mat.multiply(y.mat).sum())
    return bilinear_form(x, y)


def frobenius_norm(x) -> float:
    """Frobenius norm of a tensor or block vector (root of self inner product)."""
    if isinstance(x, AdjacencyTensor):
        return x.frobenius_norm()
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def trace(a: AdjacencyTensor) -> float:
    """Sum of diagonal entries (both index pairs equal)."""
    return a.trace()


def tensor_power(a: AdjacencyTensor, p: int) -> AdjacencyTensor:
    """Repeated self-contraction; ``p = 0`` yields the identity tensor."""
    if p < 0 or int(p) != p:
        raise DomainError(f"tensor power requires a nonnegative integer, got {p}")
    result = identity_tensor(a.n_nodes, a.n_layers)
    for _ in range(int(p)):
        result = einstein_tt(a, result)
    return result


def transpose(a: AdjacencyTensor) -> AdjacencyTensor:
    return a.transpose()


# -- block-vector helpers ---------------------------------------------


def vec_block(block: np.ndarray) -> np.ndarray:
    """Flatten an ``(N, L)`` block to a length-``NL`` vector, node fastest."""
    return np.asarray(block, dtype=float).ravel(order="F")


def unvec_block(v: np.ndarray, n_nodes, n_layers) -> np.ndarray:
    """Inverse of :func:`vec_block`."""
    return np.asarray(v, dtype=float).reshape((n_nodes, n_layers), order="F")


def ones_block(n_nodes, n_layers) -> np.ndarray:
    """The all-ones block vector."""
    return np.ones((n_nodes, n_layers))


def selector_block(index, n_nodes, n_layers) -> np.ndarray:
    """Block vector with a single one at the given 1-based (node, layer)."""
    node, layer = index
    flatten_index((node, layer), n_nodes, n_layers)  # bounds check
    block = np.zeros((n_nodes, n_layers))
    block[node - 1, layer - 1] = 1.0
    return block
