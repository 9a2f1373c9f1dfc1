"""Estimator-style wrappers around the centrality measures.

These classes follow the scikit-learn conventions (constructor parameters
mirrored by ``get_params``/``set_params``, ``fit`` returning ``self``,
fitted attributes with trailing underscores) so centrality computations
compose with the wider ecosystem: cloning, parameter sweeps, pipelines
that carry a network as ``X``.

``fit`` accepts the network in any of these forms:

* an :class:`~multicent.tensor.AdjacencyTensor`;
* a square scipy sparse or dense matrix (the flattened supra-adjacency),
  together with ``n_nodes``/``n_layers`` constructor parameters -- a plain
  single-layer adjacency matrix works out of the box (``n_layers=1``);
* a dense 4-D array of shape ``(N, L, N, L)``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator

from .centrality import (
    katz_centrality,
    relative_alpha,
    subgraph_centralities,
    total_communicability_per_node,
)
from .errors import DomainError
from .matfun import FunctionSpec
from .tensor import AdjacencyTensor, TensorIndex

__all__ = [
    "as_adjacency_tensor",
    "TotalCommunicability",
    "KatzCentrality",
    "SubgraphCentrality",
]


def as_adjacency_tensor(x, n_nodes=None, n_layers=None) -> AdjacencyTensor:
    """Validate and coerce supported network inputs to an AdjacencyTensor."""
    if isinstance(x, AdjacencyTensor):
        if n_nodes not in (None, x.n_nodes) or n_layers not in (None, x.n_layers):
            raise DomainError(
                "explicit n_nodes/n_layers contradict the AdjacencyTensor input"
            )
        return x
    if sp.issparse(x):
        return _from_matrix(sp.csr_matrix(x), n_nodes, n_layers)
    arr = np.asarray(x)
    if arr.ndim == 4:
        return AdjacencyTensor.from_dense_tensor(arr)
    if arr.ndim == 2:
        return _from_matrix(arr, n_nodes, n_layers)
    raise DomainError(
        "expected an AdjacencyTensor, a square 2-D (supra-adjacency) array, "
        f"or a 4-D (N, L, N, L) array; got ndim={arr.ndim}"
    )


def _from_matrix(mat, n_nodes, n_layers):
    dim = mat.shape[0]
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DomainError(f"supra-adjacency matrix must be square, got {mat.shape}")
    if n_nodes is None and n_layers is None:
        n_layers = 1
    if n_nodes is None:
        if dim % n_layers:
            raise DomainError(f"matrix dimension {dim} is not divisible by n_layers={n_layers}")
        n_nodes = dim // n_layers
    if n_layers is None:
        if dim % n_nodes:
            raise DomainError(f"matrix dimension {dim} is not divisible by n_nodes={n_nodes}")
        n_layers = dim // n_nodes
    return AdjacencyTensor.from_supra(mat, n_nodes, n_layers)


class _CentralityEstimator(BaseEstimator):
    """Shared fit plumbing; subclasses implement ``_compute``."""

    def fit(self, X, y=None):
        """Compute the measure on network ``X``; ``y`` is ignored."""
        tensor = as_adjacency_tensor(X, self.n_nodes, self.n_layers)
        report = self._compute(tensor)
        self.report_ = report
        self.n_nodes_ = tensor.n_nodes
        self.n_layers_ = tensor.n_layers
        scores = np.full((tensor.n_nodes, tensor.n_layers), np.nan)
        for idx, value in report.scores.items():
            scores[idx.node - 1, idx.layer - 1] = value
        self.scores_ = scores
        self.ranking_ = list(report.ranking)
        return self

    def _check_fitted(self):
        if not hasattr(self, "report_"):
            raise DomainError("estimator is not fitted; call fit(X) first")

    def top(self, k=10):
        """The ``k`` best-ranked node-layer pairs with their scores."""
        self._check_fitted()
        return self.report_.top(k)

    def score_of(self, node, layer):
        self._check_fitted()
        return self.report_.scores[TensorIndex(node, layer)]


class TotalCommunicability(_CentralityEstimator):
    """Per-node total communicability (exponential walk weighting).

    Parameters
    ----------
    beta : float, default=1.0
        Inverse-temperature scaling of the exponential.
    mode : {"exact", "krylov"}, default="exact"
    m : int, default=10
        Krylov steps when ``mode="krylov"``.
    shift : {"plain", "modified"}, default="plain"
        Whether to keep or subtract the identity term of the series.
    n_nodes, n_layers : int, optional
        Required when fitting a flattened matrix of a multilayer network.
    size_cap : int, default=5000
        Largest flattened dimension accepted in exact mode.

    Attributes
    ----------
    scores_ : ndarray of shape (n_nodes, n_layers)
    ranking_ : list of TensorIndex
    report_ : CentralityReport
    """

    def __init__(self, beta=1.0, mode="exact", m=10, shift="plain",
                 n_nodes=None, n_layers=None, size_cap=5000):
        self.beta = beta
        self.mode = mode
        self.m = m
        self.shift = shift
        self.n_nodes = n_nodes
        self.n_layers = n_layers
        self.size_cap = size_cap

    def _compute(self, tensor):
        return total_communicability_per_node(
            tensor, beta=self.beta, mode=self.mode, m=self.m,
            shift=self.shift, size_cap=self.size_cap,
        )


class KatzCentrality(_CentralityEstimator):
    """Resolvent-based (Katz-style) centrality.

    Parameters
    ----------
    alpha : float, default=0.5
        Damping parameter.  With ``alpha_scale="spectral"`` (the default)
        the effective damping is ``alpha / |lambda_max|``, mirroring how
        such parameters are usually stated; ``"absolute"`` uses ``alpha``
        as given.  Either way the convergence condition
        ``alpha_eff * |lambda_max| < 1`` is enforced.
    mode, m, shift, n_nodes, n_layers, size_cap : see TotalCommunicability.

    Attributes
    ----------
    scores_, ranking_, report_ : as in TotalCommunicability
    alpha_ : float
        The effective (absolute) damping used.
    lambda_max_ : float
        Dominant-eigenvalue estimate of the fitted network.
    """

    def __init__(self, alpha=0.5, alpha_scale="spectral", mode="exact", m=10,
                 shift="plain", n_nodes=None, n_layers=None, size_cap=5000):
        self.alpha = alpha
        self.alpha_scale = alpha_scale
        self.mode = mode
        self.m = m
        self.shift = shift
        self.n_nodes = n_nodes
        self.n_layers = n_layers
        self.size_cap = size_cap

    def _compute(self, tensor):
        if self.alpha_scale == "spectral":
            alpha = relative_alpha(tensor, self.alpha)
        elif self.alpha_scale == "absolute":
            alpha = self.alpha
        else:
            raise DomainError(
                f"unknown alpha_scale {self.alpha_scale!r}; use 'spectral' or 'absolute'"
            )
        report = katz_centrality(
            tensor, alpha=alpha, mode=self.mode, m=self.m,
            shift=self.shift, size_cap=self.size_cap,
        )
        self.alpha_ = alpha
        self.lambda_max_ = report.diagnostics.get("lambda_max")
        return report


class SubgraphCentrality(_CentralityEstimator):
    """Subgraph centrality with pairwise communicabilities as a by-product.

    Parameters
    ----------
    family : {"exp", "resolvent"}, default="exp"
        Walk-weighting function family.
    beta : float, default=1.0
        Exponential scaling (family="exp").
    alpha : float, default=0.5
        Resolvent damping (family="resolvent"), scaled per ``alpha_scale``.
    alpha_scale : {"spectral", "absolute"}, default="spectral"
    nodes : sequence of (node, layer) pairs, optional
        Pairs to score; all pairs when omitted.
    mode : {"exact", "krylov"}, default="exact"
    block_size : int, default=10
        Batch width of the block Krylov process.
    m : int, default=10
    augment : bool, default=True
        Append a dense fixed-seed slice to each Krylov batch, protecting
        sparse selector starts from early breakdown.
    shift : {"plain", "modified"}, default="plain"

    Attributes
    ----------
    scores_, ranking_, report_ : as in TotalCommunicability (unscored pairs
        are NaN in ``scores_`` when ``nodes`` restricts the computation)
    pairwise_ : ndarray of shape (len(nodes), len(nodes))
        Communicabilities between all requested pairs, in ``nodes_`` order.
    nodes_ : list of TensorIndex
    """

    def __init__(self, family="exp", beta=1.0, alpha=0.5, alpha_scale="spectral",
                 nodes=None, mode="exact", block_size=10, m=10, augment=True,
                 shift="plain", n_nodes=None, n_layers=None, size_cap=5000):
        self.family = family
        self.beta = beta
        self.alpha = alpha
        self.alpha_scale = alpha_scale
        self.nodes = nodes
        self.mode = mode
        self.block_size = block_size
        self.m = m
        self.augment = augment
        self.shift = shift
        self.n_nodes = n_nodes
        self.n_layers = n_layers
        self.size_cap = size_cap

    def _spec(self, tensor):
        plain = self.shift == "plain"
        if self.shift not in ("plain", "modified"):
            raise DomainError(f"unknown shift {self.shift!r}; use 'plain' or 'modified'")
        if self.family == "exp":
            return FunctionSpec.exp(self.beta) if plain else FunctionSpec.exp0(self.beta)
        if self.family == "resolvent":
            if self.alpha_scale == "spectral":
                alpha = relative_alpha(tensor, self.alpha)
            elif self.alpha_scale == "absolute":
                alpha = self.alpha
            else:
                raise DomainError(
                    f"unknown alpha_scale {self.alpha_scale!r}; use 'spectral' or 'absolute'"
                )
            return FunctionSpec.resolvent(alpha) if plain else FunctionSpec.resolvent0(alpha)
        raise DomainError(f"unknown family {self.family!r}; use 'exp' or 'resolvent'")

    def _compute(self, tensor):
        report = subgraph_centralities(
            tensor,
            nodes=self.nodes,
            spec=self._spec(tensor),
            mode=self.mode,
            block_size=self.block_size,
            m=self.m,
            augment=self.augment,
            size_cap=self.size_cap,
        )
        nodes = list(report.scores)
        self.nodes_ = nodes
        matrix = np.empty((len(nodes), len(nodes)))
        for i, a in enumerate(nodes):
            for j, b in enumerate(nodes):
                matrix[i, j] = report.pairwise[(a, b)]
        self.pairwise_ = matrix
        return report
