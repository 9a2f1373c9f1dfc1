"""multicent: walk-based centrality for multilayer networks.

The network lives as a sparse fourth-order adjacency tensor; centrality
measures are bilinear read-outs of matrix functions of its flattening,
computed exactly on small networks or through global/block Krylov
processes on large ones.
"""

from .centrality import (
    CentralityReport,
    MeasureKind,
    convergence_curve,
    exact_tensor_function,
    katz_centrality,
    pair_communicability,
    rank,
    relative_alpha,
    stabilized_steps,
    subgraph_centralities,
    total_communicability_per_node,
    total_network_communicability,
)
from .errors import (
    ConditioningError,
    ConvergenceError,
    DomainError,
    MulticentError,
    NumericError,
    ParseError,
    SizeCapError,
)
from .estimators import (
    KatzCentrality,
    SubgraphCentrality,
    TotalCommunicability,
    as_adjacency_tensor,
)
from .ingest import (
    add_interlayer_coupling,
    builtin_example1,
    format_edge_list,
    get_builtin,
    parse_edge_list,
    random_network,
    write_edge_list,
)
from .krylov import (
    BlockKrylovDecomposition,
    GlobalKrylovDecomposition,
    approx_function_times_block,
    block_approx_function,
    block_arnoldi,
    block_qr,
    global_arnoldi,
)
from .matfun import (
    FunctionKind,
    FunctionSpec,
    SpectralEstimate,
    apply_spec,
    dense_expm,
    dense_resolvent,
    effective_diameter,
    estimate_lambda_max,
)
from .tensor import (
    AdjacencyTensor,
    TensorIndex,
    bilinear_form,
    einstein_tt,
    einstein_tv,
    flatten_index,
    frobenius_norm,
    identity_tensor,
    inner_product,
    ones_block,
    selector_block,
    tensor_power,
    trace,
    transpose,
    unflatten_index,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # tensors
    "AdjacencyTensor",
    "TensorIndex",
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
    "ones_block",
    "selector_block",
    # matrix functions
    "FunctionKind",
    "FunctionSpec",
    "SpectralEstimate",
    "dense_expm",
    "dense_resolvent",
    "apply_spec",
    "effective_diameter",
    "estimate_lambda_max",
    # krylov
    "GlobalKrylovDecomposition",
    "BlockKrylovDecomposition",
    "global_arnoldi",
    "block_arnoldi",
    "block_qr",
    "approx_function_times_block",
    "block_approx_function",
    # centrality
    "MeasureKind",
    "CentralityReport",
    "exact_tensor_function",
    "total_communicability_per_node",
    "total_network_communicability",
    "katz_centrality",
    "subgraph_centralities",
    "pair_communicability",
    "rank",
    "relative_alpha",
    "convergence_curve",
    "stabilized_steps",
    # estimators
    "TotalCommunicability",
    "KatzCentrality",
    "SubgraphCentrality",
    "as_adjacency_tensor",
    # ingest
    "parse_edge_list",
    "format_edge_list",
    "write_edge_list",
    "add_interlayer_coupling",
    "builtin_example1",
    "get_builtin",
    "random_network",
    # errors
    "MulticentError",
    "ParseError",
    "DomainError",
    "NumericError",
    "ConditioningError",
    "ConvergenceError",
    "SizeCapError",
]
