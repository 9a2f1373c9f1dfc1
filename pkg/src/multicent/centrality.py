"""Walk-based centrality measures for multilayer networks.

Every measure is a bilinear read-out of a matrix function of the adjacency
tensor:

* per-node total communicability: row sums of ``f(T)`` against the
  all-ones block (exponential family);
* Katz centrality: the same read-out with the resolvent family;
* subgraph centrality: diagonal entries ``f(T)[(i,l), (i,l)]``;
* pair communicability: a single off-diagonal entry;
* total network communicability: the all-ones bilinear form.

Each measure can be evaluated exactly, by flattening the tensor and
applying the dense matrix function (feasible up to a size cap), or
approximately through the Krylov processes of :mod:`multicent.krylov`.

Shift convention: the textbook definitions subtract the identity from the
exponential and the resolvent ("modified" variants, dropping the constant
walk-length-zero term).  The reference values this library is validated
against are reproduced by the *unshifted* read-outs, so ``shift="plain"``
is the default everywhere and ``shift="modified"`` selects the
identity-subtracted variants (which differ by exactly 1 on every
diagonal/row read-out).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SizeCapError
from .krylov import (
    approx_function_times_block,
    block_approx_function,
    global_arnoldi,
)
from .matfun import (
    FunctionKind,
    FunctionSpec,
    apply_spec,
    dense_expm,
    estimate_lambda_max,
    resolvent_apply,
)
from .tensor import (
    AdjacencyTensor,
    TensorIndex,
    flatten_index,
    ones_block,
    selector_block,
    vec_block,
)

__all__ = [
    "MeasureKind",
    "CentralityReport",
    "DEFAULT_SIZE_CAP",
    "exact_tensor_function",
    "total_communicability_per_node",
    "total_network_communicability",
    "katz_centrality",
    "subgraph_centralities",
    "pair_communicability",
    "rank",
    "relative_alpha",
    "check_resolvent_parameter",
    "convergence_curve",
    "stabilized_steps",
]

DEFAULT_SIZE_CAP = 5000


class MeasureKind(str, enum.Enum):
    TOTAL_COMMUNICABILITY = "mtc"
    NETWORK_COMMUNICABILITY = "tnc"
    KATZ = "mkc"
    SUBGRAPH_EXP = "msc-exp"
    SUBGRAPH_RESOLVENT = "msc-res"
    PAIR = "pair"


@dataclass
class CentralityReport:
    """Scores and ranking for one measure on one network.

    ``scores`` maps each node-layer pair to its value; ``ranking`` lists the
    pairs by descending score with ties broken by ascending (layer, node).
    ``parameters`` echoes the resolved run configuration and
    ``diagnostics`` carries auxiliary results (spectral estimates,
    breakdown records).  ``pairwise`` is filled by the subgraph batch path
    with the communicabilities between all requested pairs.
    """

    kind: MeasureKind
    parameters: dict
    scores: dict[TensorIndex, float]
    ranking: list[TensorIndex]
    diagnostics: dict = field(default_factory=dict)
    pairwise: dict[tuple[TensorIndex, TensorIndex], float] | None = None

    def top(self, k=10):
        """The ``k`` best-ranked pairs with their scores."""
        return [(idx, self.scores[idx]) for idx in self.ranking[:k]]

    def score(self, node, layer):
        return self.scores[TensorIndex(node, layer)]

    def to_dict(self, precision=4):
        """Plain-data form with scores rounded to ``precision`` decimals."""
        out = {
            "kind": self.kind.value,
            "parameters": dict(self.parameters),
            "scores": [
                {"node": idx.node, "layer": idx.layer, "score": round(self.scores[idx], precision)}
                for idx in sorted(self.scores, key=lambda t: (t.layer, t.node))
            ],
            "ranking": [[idx.node, idx.layer] for idx in self.ranking],
        }
        if self.diagnostics:
            out["diagnostics"] = _plain_data(self.diagnostics)
        if self.pairwise is not None:
            out["pairwise"] = [
                {
                    "from": [a.node, a.layer],
                    "to": [b.node, b.layer],
                    "score": round(v, precision),
                }
                for (a, b), v in self.pairwise.items()
            ]
        return out

    @classmethod
    def from_dict(cls, data):
        scores = {
            TensorIndex(item["node"], item["layer"]): float(item["score"])
            for item in data["scores"]
        }
        pairwise = None
        if "pairwise" in data:
            pairwise = {
                (TensorIndex(*item["from"]), TensorIndex(*item["to"])): float(item["score"])
                for item in data["pairwise"]
            }
        return cls(
            kind=MeasureKind(data["kind"]),
            parameters=dict(data["parameters"]),
            scores=scores,
            ranking=[TensorIndex(*pair) for pair in data["ranking"]],
            diagnostics=dict(data.get("diagnostics", {})),
            pairwise=pairwise,
        )


def _plain_data(obj):
    """Recursively convert diagnostics to JSON-safe plain data."""
    if isinstance(obj, dict):
        return {str(k): _plain_data(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain_data(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def rank(scores):
    """Node-layer pairs by descending score, ties by ascending (layer, node)."""
    return sorted(scores, key=lambda idx: (-scores[idx], idx.layer, idx.node))


def relative_alpha(a: AdjacencyTensor, factor, lambda_max=None):
    """Resolve a damping factor stated relative to the dominant eigenvalue."""
    if lambda_max is None:
        lambda_max = estimate_lambda_max(a).lambda_max
    if lambda_max == 0:
        raise DomainError("dominant eigenvalue is zero; relative alpha undefined")
    return factor / abs(lambda_max)


def check_resolvent_parameter(a: AdjacencyTensor, alpha, lambda_max=None):
    """Verify the resolvent series converges: ``alpha * |lambda_max| < 1``.

    Returns the spectral estimate used, or ``None`` for the zero tensor
    (whose resolvent converges for every alpha).
    """
    if not (alpha > 0 and np.isfinite(alpha)):
        raise DomainError("alpha must be a positive finite real")
    if a.nnz == 0:
        return None
    estimate = None
    if lambda_max is None:
        estimate = estimate_lambda_max(a)
        lambda_max = estimate.lambda_max
    if alpha * abs(lambda_max) >= 1.0:
        raise DomainError(
            f"alpha={alpha:g} is outside the convergence range: need "
            f"alpha < 1/|lambda_max| = {1.0 / abs(lambda_max):g} "
            f"(lambda_max estimate {lambda_max:g})"
        )
    return estimate


def _check_size_cap(a: AdjacencyTensor, size_cap):
    if a.dim > size_cap:
        raise SizeCapError(
            f"flattened dimension {a.dim} exceeds the dense size cap {size_cap}; "
            "use the Krylov mode instead"
        )


def exact_tensor_function(a: AdjacencyTensor, spec: FunctionSpec, size_cap=DEFAULT_SIZE_CAP):
    """The full flattened ``f(T)`` as a dense ``NL x NL`` array.

    Exact for every convergent series because the flattening is an algebra
    homomorphism; the tensor view of the result is recovered by index
    translation.  Refuses tensors above ``size_cap``.
    """
    _check_size_cap(a, size_cap)
    if spec.is_resolvent_family:
        check_resolvent_parameter(a, spec.alpha)
    return apply_spec(a.toarray(), spec)


def _exact_action(a, spec, rhs, size_cap):
    """``f(mat(T)) @ rhs`` without forming the resolvent inverse explicitly."""
    _check_size_cap(a, size_cap)
    dense = a.toarray()
    kind = spec.kind
    if kind in (FunctionKind.EXP, FunctionKind.EXP0):
        out = dense_expm(dense, spec.beta) @ rhs
        if kind is FunctionKind.EXP0:
            out = out - rhs
        return out
    if spec.is_resolvent_family:
        check_resolvent_parameter(a, spec.alpha)
        out = resolvent_apply(dense, spec.alpha, rhs)
        if kind is FunctionKind.RESOLVENT0:
            out = out - rhs
        return out
    return apply_spec(dense, spec) @ rhs


def _shifted_spec(family, shift, beta, alpha):
    if shift not in ("plain", "modified"):
        raise DomainError(f"unknown shift convention {shift!r}; use 'plain' or 'modified'")
    if family == "exp":
        return FunctionSpec.exp(beta) if shift == "plain" else FunctionSpec.exp0(beta)
    if family == "resolvent":
        return FunctionSpec.resolvent(alpha) if shift == "plain" else FunctionSpec.resolvent0(alpha)
    raise DomainError(f"unknown function family {family!r}")


def _scores_report(kind, a, score_block, parameters, diagnostics=None):
    scores = {
        idx: float(score_block[idx.node - 1, idx.layer - 1]) for idx in a.indices()
    }
    if not all(np.isfinite(v) for v in scores.values()):
        raise DomainError("non-finite centrality scores; check the parameters")
    return CentralityReport(
        kind=kind,
        parameters=parameters,
        scores=scores,
        ranking=rank(scores),
        diagnostics=diagnostics or {},
    )


def _clamp_steps(a, m):
    """Clamp a requested Krylov dimension to the flattened dimension.

    Asking for more steps than the space has is harmless (the process
    breaks down at an invariant subspace first), so measure entry points
    accept it; the strict bound lives in the Arnoldi routines.
    """
    if m < 1:
        raise DomainError("the Krylov step count m must be positive")
    return min(int(m), a.dim)


def _ones_readout_block(a, spec, mode, m, size_cap):
    """``f(T)`` contracted with the all-ones block, exact or via Krylov."""
    diagnostics = {}
    if mode == "exact":
        flat = _exact_action(a, spec, np.ones(a.dim), size_cap)
        block = flat.reshape((a.n_nodes, a.n_layers), order="F")
    elif mode == "krylov":
        if spec.is_resolvent_family:
            check_resolvent_parameter(a, spec.alpha)
        approx = approx_function_times_block(
            a, ones_block(a.n_nodes, a.n_layers), _clamp_steps(a, m), spec
        )
        block = approx.block
        diagnostics["m"] = approx.decomposition.n_steps
        if approx.broke_down:
            diagnostics["breakdown_at"] = approx.breakdown_at
    else:
        raise DomainError(f"unknown mode {mode!r}; use 'exact' or 'krylov'")
    return block, diagnostics


def total_communicability_per_node(a: AdjacencyTensor, beta=1.0, mode="exact",
                                   m=10, shift="plain", size_cap=DEFAULT_SIZE_CAP):
    """Exponential total communicability of every node-layer pair.

    Score of pair ``(i, l)`` is the ``(i, l)`` entry of ``f(T)`` applied to
    the all-ones block, i.e. the corresponding row sum of ``f(mat(T))``.
    In Krylov mode a single decomposition from the all-ones start yields
    all ``N*L`` scores at once.
    """
    spec = _shifted_spec("exp", shift, beta, None)
    block, diagnostics = _ones_readout_block(a, spec, mode, m, size_cap)
    params = {"beta": beta, "mode": mode, "shift": shift}
    if mode == "krylov":
        params["m"] = m
    return _scores_report(MeasureKind.TOTAL_COMMUNICABILITY, a, block, params, diagnostics)


def total_network_communicability(a: AdjacencyTensor, beta=1.0, mode="exact",
                                  m=10, shift="plain", size_cap=DEFAULT_SIZE_CAP):
    """All-ones bilinear form of ``f(T)``: the sum of all per-node scores."""
    spec = _shifted_spec("exp", shift, beta, None)
    block, _ = _ones_readout_block(a, spec, mode, m, size_cap)
    return float(np.sum(block))


def katz_centrality(a: AdjacencyTensor, alpha=None, mode="exact", m=10,
                    shift="plain", lambda_max=None, size_cap=DEFAULT_SIZE_CAP):
    """Resolvent (Katz-style) centrality of every node-layer pair.

    ``alpha`` must satisfy ``alpha * |lambda_max| < 1``; when omitted it
    defaults to half the convergence bound, ``0.5 / |lambda_max|``.  The
    spectral estimate used for the check is reported in the diagnostics.
    """
    estimate = None
    if alpha is None:
        estimate = estimate_lambda_max(a)
        lambda_max = estimate.lambda_max
        alpha = 0.5 / abs(lambda_max)
    spec = _shifted_spec("resolvent", shift, None, alpha)
    check = check_resolvent_parameter(a, alpha, lambda_max=lambda_max)
    estimate = estimate or check
    block, diagnostics = _ones_readout_block(a, spec, mode, m, size_cap)
    if estimate is not None:
        diagnostics["lambda_max"] = estimate.lambda_max
        diagnostics["lambda_max_residual"] = estimate.residual
    elif lambda_max is not None:
        diagnostics["lambda_max"] = float(lambda_max)
    params = {"alpha": alpha, "mode": mode, "shift": shift}
    if mode == "krylov":
        params["m"] = m
    return _scores_report(MeasureKind.KATZ, a, block, params, diagnostics)


def _resolve_nodes(a, nodes):
    if nodes is None:
        return a.indices()
    resolved = []
    for item in nodes:
        idx = TensorIndex(*item)
        flatten_index(idx, a.n_nodes, a.n_layers)  # bounds check
        resolved.append(idx)
    if not resolved:
        raise DomainError("node list must be nonempty")
    return resolved


def subgraph_centralities(a: AdjacencyTensor, nodes=None, spec=None, mode="exact",
                          block_size=10, m=10, augment=True,
                          size_cap=DEFAULT_SIZE_CAP):
    """Subgraph centralities of selected pairs, plus their communicabilities.

    The score of pair ``(i, l)`` is the diagonal entry of ``f(T)`` at that
    pair; the report's ``pairwise`` field carries the full matrix of
    communicabilities between all requested pairs, which the computation
    yields at no extra contraction cost.  ``spec`` defaults to the
    exponential with ``beta = 1``.

    In Krylov mode the pairs are processed in batches of ``block_size``
    through the block Arnoldi process, each batch starting from the
    corresponding selector blocks; ``augment=True`` appends a dense
    fixed-seed slice to every batch, which protects the sparse starts from
    early breakdown.
    """
    if spec is None:
        spec = FunctionSpec.exp(1.0)
    if spec.is_resolvent_family:
        check_resolvent_parameter(a, spec.alpha)
    targets = _resolve_nodes(a, nodes)
    flat_targets = np.array(
        [flatten_index(idx, a.n_nodes, a.n_layers) - 1 for idx in targets]
    )
    n_targets = len(targets)
    readout = np.empty((n_targets, n_targets))
    diagnostics = {}

    if mode == "exact":
        rhs = np.zeros((a.dim, n_targets))
        rhs[flat_targets, np.arange(n_targets)] = 1.0
        columns = _exact_action(a, spec, rhs, size_cap)
        readout = columns[flat_targets, :]
    elif mode == "krylov":
        if block_size < 1:
            raise DomainError("block_size must be positive")
        m = _clamp_steps(a, m)
        breakdowns = []
        for start in range(0, n_targets, block_size):
            batch = targets[start : start + block_size]
            slices = np.stack(
                [selector_block(idx, a.n_nodes, a.n_layers) for idx in batch], axis=2
            )
            approx = block_approx_function(
                a, slices, m, spec, augment="random" if augment else None
            )
            flat = approx.tensor.reshape((a.dim, len(batch)), order="F")
            readout[:, start : start + len(batch)] = flat[flat_targets, :]
            if approx.broke_down:
                breakdowns.append(
                    {"batch_start": start, "breakdown_at": approx.breakdown_at}
                )
        if breakdowns:
            diagnostics["breakdown"] = breakdowns
            if not augment:
                diagnostics["suggestion"] = (
                    "block process broke down on a sparse start; "
                    "enable augmentation for a dense auxiliary slice"
                )
                warnings.warn(
                    "block Krylov breakdown without augmentation; "
                    "results may be inaccurate (pass augment=True)",
                    RuntimeWarning,
                    stacklevel=2,
                )
    else:
        raise DomainError(f"unknown mode {mode!r}; use 'exact' or 'krylov'")

    if not np.all(np.isfinite(readout)):
        raise DomainError("non-finite centrality scores; check the parameters")
    scores = {idx: float(readout[k, k]) for k, idx in enumerate(targets)}
    pairwise = {
        (ia, ib): float(readout[ka, kb])
        for ka, ia in enumerate(targets)
        for kb, ib in enumerate(targets)
    }
    kind = (
        MeasureKind.SUBGRAPH_RESOLVENT
        if spec.is_resolvent_family
        else MeasureKind.SUBGRAPH_EXP
    )
    params = {"function": spec.describe(), "mode": mode}
    if mode == "krylov":
        params.update({"m": m, "block_size": block_size, "augment": bool(augment)})
    return CentralityReport(
        kind=kind,
        parameters=params,
        scores=scores,
        ranking=rank(scores),
        diagnostics=diagnostics,
        pairwise=pairwise,
    )


def pair_communicability(a: AdjacencyTensor, source, target, spec=None,
                         mode="exact", m=10, size_cap=DEFAULT_SIZE_CAP):
    """Communicability from ``source`` to ``target``: entry of ``f(T)``.

    With ``source == target`` this reduces to the subgraph centrality of
    the pair.  The Krylov path builds the decomposition from the selector
    block of ``target`` (a sparse start: expect early breakdown on large
    sparse networks; the block batch path is the robust alternative).
    """
    if spec is None:
        spec = FunctionSpec.exp(1.0)
    src = TensorIndex(*source)
    dst = TensorIndex(*target)
    src_flat = flatten_index(src, a.n_nodes, a.n_layers) - 1
    dst_flat = flatten_index(dst, a.n_nodes, a.n_layers) - 1
    if spec.is_resolvent_family:
        check_resolvent_parameter(a, spec.alpha)
    if mode == "exact":
        rhs = np.zeros(a.dim)
        rhs[dst_flat] = 1.0
        column = _exact_action(a, spec, rhs, size_cap)
        return float(column[src_flat])
    if mode == "krylov":
        approx = approx_function_times_block(
            a, selector_block(dst, a.n_nodes, a.n_layers), _clamp_steps(a, m), spec
        )
        return float(vec_block(approx.block)[src_flat])
    raise DomainError(f"unknown mode {mode!r}; use 'exact' or 'krylov'")


# -- convergence diagnostics -------------------------------------------


def _measure_spec(measure, beta, alpha, shift):
    measure = MeasureKind(measure)
    if measure is MeasureKind.TOTAL_COMMUNICABILITY:
        return _shifted_spec("exp", shift, beta, None)
    if measure is MeasureKind.KATZ:
        return _shifted_spec("resolvent", shift, None, alpha)
    raise DomainError(
        f"convergence diagnostics support mtc and mkc, not {measure.value!r}"
    )


def convergence_curve(a: AdjacencyTensor, measure="mtc", beta=1.0, alpha=None,
                      m_max=10, shift="plain", size_cap=DEFAULT_SIZE_CAP):
    """Infinity-norm error of the Krylov scores against the exact ones.

    Builds one decomposition from the all-ones start at ``m_max`` steps and
    reads the approximation at every intermediate dimension, so the whole
    curve costs a single Arnoldi run plus small dense evaluations.  Returns
    a list of ``(m, error)`` rows; the curve stops early at breakdown
    (where the approximation is already exact on the invariant subspace).
    """
    if alpha is None and MeasureKind(measure) is MeasureKind.KATZ:
        alpha = relative_alpha(a, 0.5)
    spec = _measure_spec(measure, beta, alpha, shift)
    if spec.is_resolvent_family:
        check_resolvent_parameter(a, spec.alpha)
    if m_max < 1:
        raise DomainError("m_max must be positive")
    exact = _exact_action(a, spec, np.ones(a.dim), size_cap)
    dec = global_arnoldi(a, ones_block(a.n_nodes, a.n_layers), min(m_max, a.dim))
    rows = []
    for m in range(1, m_max + 1):
        # past a breakdown the smaller invariant decomposition is the answer
        m_eff = min(m, dec.n_steps)
        h_m = dec.hessenberg[:m_eff, :m_eff]
        weights = dec.v_norm * apply_spec(h_m, spec)[:, 0]
        approx = dec.basis[:, :m_eff] @ weights
        rows.append((m, float(np.max(np.abs(exact - approx)))))
    return rows


def stabilized_steps(a: AdjacencyTensor, measure="mtc", beta=1.0, alpha=None,
                     top_k=10, m_max=30, shift="plain"):
    """Smallest Krylov dimension whose top-``k`` ranking stops changing.

    Convenience heuristic (not part of the approximation theory): returns
    the smallest ``m`` such that the top-``k`` ranking at ``m`` equals the
    one at ``m - 1``, together with that ranking.  Falls back to the last
    dimension reached when the ranking never stabilizes within ``m_max``.
    """
    if alpha is None and MeasureKind(measure) is MeasureKind.KATZ:
        alpha = relative_alpha(a, 0.5)
    spec = _measure_spec(measure, beta, alpha, shift)
    if spec.is_resolvent_family:
        check_resolvent_parameter(a, spec.alpha)
    if m_max < 1:
        raise DomainError("m_max must be positive")
    dec = global_arnoldi(a, ones_block(a.n_nodes, a.n_layers), min(m_max, a.dim))
    indices = a.indices()
    previous = None
    for m in range(1, m_max + 1):
        m_eff = min(m, dec.n_steps)
        h_m = dec.hessenberg[:m_eff, :m_eff]
        weights = dec.v_norm * apply_spec(h_m, spec)[:, 0]
        approx = dec.basis[:, :m_eff] @ weights
        scores = {idx: float(approx[k]) for k, idx in enumerate(indices)}
        current = tuple(rank(scores)[:top_k])
        if previous is not None and current == previous:
            return m, list(current)
        previous = current
    return m_max, list(previous) if previous else []
