"""Reading and writing multilayer networks as edge-list files.

File format (UTF-8 text, one record per line):

* comment lines start with ``#`` and blank lines are ignored;
* the first record must be the header
  ``mlnet <N> <L> <directed|undirected> <weighted|unweighted>``;
* edge lines are ``<node_i> <layer_i> <node_j> <layer_j> [<weight>]`` with
  1-based indices, whitespace separated; the weight defaults to 1 and is
  forbidden on unweighted files in strict mode;
* an optional directive ``couple <weight>`` adds interlayer couplings
  between every node and its copies in all other layers.

Undirected edges are stored in both orientations.  Duplicate contributions
to the same ordered entry are summed; in strict mode they raise instead.
Third-party multiplex datasets come in assorted bespoke formats, so they
are expected to be converted to this format first (a converter belongs in
``scripts/``; it is intentionally not part of the library).
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ParseError
from .tensor import AdjacencyTensor

__all__ = [
    "parse_edge_list",
    "format_edge_list",
    "write_edge_list",
    "add_interlayer_coupling",
    "builtin_example1",
    "get_builtin",
    "BUILTIN_NETWORKS",
    "random_network",
]


def _tokenize(stream):
    """Yield (line_no, tokens) for every meaningful line."""
    for line_no, raw in enumerate(stream, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_no, stripped.split()


def parse_edge_list(source, strict=False):
    """Parse an edge-list file, path, or string into an :class:`AdjacencyTensor`.

    ``source`` may be a path, an open text stream, or the file contents as
    a string containing the header line.  ``strict`` rejects duplicate
    edges, repeated directives, and weight columns in unweighted files.
    """
    if isinstance(source, (str, Path)):
        text = str(source)
        if "\n" in text or text.lstrip().startswith("mlnet"):
            stream = io.StringIO(text)
        else:
            path = Path(source)
            if not path.exists():
                raise ParseError(f"no such file: {path}")
            stream = path.open("r", encoding="utf-8")
    else:
        stream = source
    try:
        return _parse_stream(stream, strict=strict)
    finally:
        if stream is not source and not isinstance(stream, io.StringIO):
            stream.close()


def _parse_stream(stream, strict):
    lines = _tokenize(stream)
    try:
        line_no, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty file: missing mlnet header") from None
    if tokens[0] != "mlnet" or len(tokens) != 5:
        raise ParseError(
            "expected header 'mlnet <N> <L> <directed|undirected> <weighted|unweighted>'",
            line_no,
        )
    try:
        n_nodes, n_layers = int(tokens[1]), int(tokens[2])
    except ValueError:
        raise ParseError("header dimensions must be integers", line_no) from None
    if n_nodes < 1 or n_layers < 1:
        raise ParseError("header dimensions must be positive", line_no)
    if tokens[3] not in ("directed", "undirected"):
        raise ParseError(f"unknown directedness {tokens[3]!r}", line_no)
    if tokens[4] not in ("weighted", "unweighted"):
        raise ParseError(f"unknown weight flag {tokens[4]!r}", line_no)
    directed = tokens[3] == "directed"
    weighted = tokens[4] == "weighted"

    entries = []
    seen = set()
    couple_weight = None
    for line_no, tokens in lines:
        if tokens[0] == "couple":
            if len(tokens) != 2:
                raise ParseError("couple directive takes exactly one weight", line_no)
            try:
                weight = float(tokens[1])
            except ValueError:
                raise ParseError(f"bad couple weight {tokens[1]!r}", line_no) from None
            if not (weight > 0 and np.isfinite(weight)):
                raise DomainError(f"line {line_no}: couple weight must be positive")
            if couple_weight is not None:
                if strict:
                    raise ParseError("repeated couple directive", line_no)
                couple_weight += weight
            else:
                couple_weight = weight
            continue
        if len(tokens) not in (4, 5):
            raise ParseError(
                f"expected '<node> <layer> <node> <layer> [<weight>]', got {len(tokens)} fields",
                line_no,
            )
        try:
            ni, li, nj, lj = (int(t) for t in tokens[:4])
        except ValueError:
            raise ParseError("edge indices must be integers", line_no) from None
        weight = 1.0
        if len(tokens) == 5:
            if not weighted:
                if strict:
                    raise ParseError("weight column forbidden in unweighted file", line_no)
                # tolerated but meaningless: unweighted edges have weight 1
            else:
                try:
                    weight = float(tokens[4])
                except ValueError:
                    raise ParseError(f"bad weight {tokens[4]!r}", line_no) from None
        if not np.isfinite(weight):
            raise ParseError(f"non-finite weight {tokens[4]!r}", line_no)
        if weight < 0:
            raise DomainError(f"line {line_no}: edge weights must be positive")
        for node, layer in ((ni, li), (nj, lj)):
            if not (1 <= node <= n_nodes and 1 <= layer <= n_layers):
                raise DomainError(
                    f"line {line_no}: index ({node},{layer}) outside declared "
                    f"{n_nodes} nodes x {n_layers} layers"
                )
        if weight == 0.0:
            continue  # zero entries are dropped at construction
        pairs = [((ni, li), (nj, lj))]
        if not directed and (ni, li) != (nj, lj):
            pairs.append(((nj, lj), (ni, li)))
        for src, dst in pairs:
            if strict:
                key = (src, dst)
                if key in seen:
                    raise ParseError(f"duplicate edge {src} -> {dst}", line_no)
                seen.add(key)
            entries.append((src, dst, weight))

    tensor = AdjacencyTensor.from_edges(n_nodes, n_layers, entries)
    if couple_weight is not None:
        tensor = add_interlayer_coupling(tensor, couple_weight)
    return tensor


def format_edge_list(tensor: AdjacencyTensor) -> str:
    """Serialize a tensor to the edge-list format; inverse of parsing.

    Symmetric tensors are written as undirected files with each edge listed
    once; weights are emitted with full precision so a parse round trip
    reproduces the tensor exactly.
    """
    symmetric = tensor.is_symmetric
    records = []
    weights = set()
    for src, dst, weight in tensor.entries():
        if symmetric and (dst.layer, dst.node) < (src.layer, src.node):
            continue  # mirrored orientation written once
        records.append((src, dst, weight))
        weights.add(weight)
    weighted = weights != {1.0} and bool(weights)
    lines = [
        f"mlnet {tensor.n_nodes} {tensor.n_layers} "
        f"{'undirected' if symmetric else 'directed'} "
        f"{'weighted' if weighted else 'unweighted'}"
    ]
    for src, dst, weight in records:
        line = f"{src.node} {src.layer} {dst.node} {dst.layer}"
        if weighted:
            line += f" {weight!r}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def write_edge_list(tensor: AdjacencyTensor, path):
    Path(path).write_text(format_edge_list(tensor), encoding="utf-8")


def add_interlayer_coupling(tensor: AdjacencyTensor, weight) -> AdjacencyTensor:
    """Couple every node to its copies in all other layers.

    Adds ``weight`` to the entry from each node in layer ``l`` to the same
    node in every layer ``k != l`` (both directions are among the ordered
    pairs).  A single-layer network is returned unchanged.
    """
    if not (weight > 0 and np.isfinite(weight)):
        raise DomainError("coupling weight must be a positive finite real")
    n, L = tensor.n_nodes, tensor.n_layers
    if L == 1:
        return tensor
    rows, cols = [], []
    for l_from in range(L):
        for l_to in range(L):
            if l_from == l_to:
                continue
            base_from = l_from * n
            base_to = l_to * n
            rows.extend(range(base_from, base_from + n))
            cols.extend(range(base_to, base_to + n))
    coupling = sp.coo_matrix(
        (np.full(len(rows), float(weight)), (rows, cols)), shape=(tensor.dim, tensor.dim)
    )
    return AdjacencyTensor(tensor.mat + coupling.tocsr(), n, L)


_EXAMPLE1_EDGES = [
    # intralayer, layer 1
    ((1, 1), (2, 1)),
    ((2, 1), (4, 1)),
    ((3, 1), (5, 1)),
    # intralayer, layer 2
    ((1, 2), (4, 2)),
    ((2, 2), (3, 2)),
    ((2, 2), (5, 2)),
    # interlayer
    ((1, 1), (1, 2)),
    ((1, 1), (3, 2)),
    ((3, 1), (5, 2)),
    ((4, 1), (2, 2)),
    ((5, 1), (2, 2)),
]


def builtin_example1() -> AdjacencyTensor:
    """The small two-layer reference network (5 nodes, 11 undirected edges).

    This is the network whose centrality values the acceptance suite checks
    against published reference numbers.
    """
    edges = []
    for src, dst in _EXAMPLE1_EDGES:
        edges.append((src, dst, 1.0))
        edges.append((dst, src, 1.0))
    return AdjacencyTensor.from_edges(5, 2, edges)


BUILTIN_NETWORKS = {"example1": builtin_example1}


def get_builtin(name) -> AdjacencyTensor:
    try:
        factory = BUILTIN_NETWORKS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTIN_NETWORKS))
        raise DomainError(f"unknown builtin network {name!r} (known: {known})") from None
    return factory()


def random_network(n_nodes, n_layers, n_edges, weighted=False, seed=0) -> AdjacencyTensor:
    """A reproducible random undirected network for demos and tests.

    Samples ``n_edges`` distinct undirected node-layer pairs uniformly;
    weighted networks draw weights uniformly from (0, 1].  Intended for
    moderate sizes (the pair pool is materialized).
    """
    dim = n_nodes * n_layers
    if dim > 4000:
        raise DomainError("random_network is meant for moderate sizes (N*L <= 4000)")
    max_edges = dim * (dim - 1) // 2
    if not (1 <= n_edges <= max_edges):
        raise DomainError(f"n_edges must lie in [1, {max_edges}]")
    rng = np.random.default_rng(seed)
    rows, cols = np.triu_indices(dim, k=1)
    chosen = rng.choice(rows.size, size=n_edges, replace=False)
    weights = rng.uniform(0.0, 1.0, size=n_edges) if weighted else np.ones(n_edges)
    weights = np.where(weights == 0.0, 1.0, weights)
    r = rows[chosen]
    c = cols[chosen]
    mat = sp.coo_matrix(
        (np.concatenate([weights, weights]), (np.concatenate([r, c]), np.concatenate([c, r]))),
        shape=(dim, dim),
    )
    return AdjacencyTensor(mat.tocsr(), n_nodes, n_layers)
