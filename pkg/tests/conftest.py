"""Shared fixtures: independent oracles for the reference network."""

import numpy as np
import pytest

from multicent import AdjacencyTensor

# The two-layer reference network, enumerated by hand from its drawing and
# kept independent of the library's builtin.  Flattened 1-based indices with
# node varying fastest: (node, layer) -> node + (layer - 1) * 5.
EXAMPLE1_FLAT_EDGES = [
    (1, 2),   # (1,1)-(2,1)
    (2, 4),   # (2,1)-(4,1)
    (3, 5),   # (3,1)-(5,1)
    (6, 9),   # (1,2)-(4,2)
    (7, 8),   # (2,2)-(3,2)
    (7, 10),  # (2,2)-(5,2)
    (1, 6),   # (1,1)-(1,2)
    (1, 8),   # (1,1)-(3,2)
    (3, 10),  # (3,1)-(5,2)
    (4, 7),   # (4,1)-(2,2)
    (5, 7),   # (5,1)-(2,2)
]


def example1_supra_matrix():
    mat = np.zeros((10, 10))
    for r, c in EXAMPLE1_FLAT_EDGES:
        mat[r - 1, c - 1] = 1.0
        mat[c - 1, r - 1] = 1.0
    return mat


@pytest.fixture(scope="session")
def example1_matrix():
    return example1_supra_matrix()


def random_tensor(rng, n_nodes, n_layers, density=0.3, symmetric=False):
    """Random sparse tensor built directly from a dense matrix (test oracle path)."""
    dim = n_nodes * n_layers
    mask = rng.random((dim, dim)) < density
    mat = np.where(mask, rng.uniform(0.1, 2.0, size=(dim, dim)), 0.0)
    if symmetric:
        mat = np.triu(mat)
        mat = mat + np.triu(mat, 1).T
    return AdjacencyTensor.from_supra(mat, n_nodes, n_layers)
