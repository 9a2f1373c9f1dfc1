"""Estimator API: sklearn conventions, input coercion, agreement with functions."""

import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.base import clone

from multicent import (
    DomainError,
    KatzCentrality,
    SubgraphCentrality,
    TensorIndex,
    TotalCommunicability,
    as_adjacency_tensor,
    builtin_example1,
    katz_centrality,
    relative_alpha,
    total_communicability_per_node,
)


class TestInputCoercion:
    def test_tensor_passthrough(self):
        a = builtin_example1()
        assert as_adjacency_tensor(a) is a

    def test_sparse_supra_with_dims(self):
        a = builtin_example1()
        b = as_adjacency_tensor(a.mat, n_nodes=5, n_layers=2)
        assert b == a

    def test_single_layer_default(self):
        mat = np.array([[0.0, 1.0], [1.0, 0.0]])
        b = as_adjacency_tensor(mat)
        assert (b.n_nodes, b.n_layers) == (2, 1)

    def test_infer_missing_dimension(self):
        a = builtin_example1()
        assert as_adjacency_tensor(a.toarray(), n_layers=2).n_nodes == 5
        assert as_adjacency_tensor(a.toarray(), n_nodes=5).n_layers == 2

    def test_dense_4d(self):
        a = builtin_example1()
        dense = a.toarray().reshape(5, 2, 5, 2, order="F")
        assert as_adjacency_tensor(dense) == a

    def test_contradictory_dims(self):
        a = builtin_example1()
        with pytest.raises(DomainError):
            as_adjacency_tensor(a, n_nodes=4)
        with pytest.raises(DomainError):
            as_adjacency_tensor(a.toarray(), n_layers=3)

    def test_bad_ndim(self):
        with pytest.raises(DomainError):
            as_adjacency_tensor(np.zeros(4))


class TestSklearnConventions:
    @pytest.mark.parametrize(
        "estimator",
        [TotalCommunicability(), KatzCentrality(), SubgraphCentrality()],
        ids=["mtc", "katz", "subgraph"],
    )
    def test_get_set_params_and_clone(self, estimator):
        params = estimator.get_params()
        assert params  # every constructor argument is exposed
        twin = clone(estimator)
        assert twin.get_params() == params
        estimator.set_params(**params)

    def test_unfitted_access_raises(self):
        with pytest.raises(DomainError, match="not fitted"):
            TotalCommunicability().top()

    def test_fit_returns_self(self):
        est = TotalCommunicability()
        assert est.fit(builtin_example1()) is est


class TestTotalCommunicabilityEstimator:
    def test_matches_function(self):
        a = builtin_example1()
        est = TotalCommunicability(beta=1.0).fit(a)
        report = total_communicability_per_node(a, beta=1.0)
        for idx, value in report.scores.items():
            assert est.scores_[idx.node - 1, idx.layer - 1] == pytest.approx(value)
        assert est.ranking_ == report.ranking
        assert est.top(1)[0][0] == TensorIndex(2, 2)

    def test_fit_from_sparse_supra(self):
        a = builtin_example1()
        est = TotalCommunicability(n_nodes=5, n_layers=2).fit(sp.csr_matrix(a.mat))
        assert est.ranking_[0] == TensorIndex(2, 2)

    def test_krylov_mode(self):
        est = TotalCommunicability(mode="krylov", m=10).fit(builtin_example1())
        exact = TotalCommunicability().fit(builtin_example1())
        np.testing.assert_allclose(est.scores_, exact.scores_, atol=1e-8)


class TestKatzEstimator:
    def test_spectral_alpha(self):
        a = builtin_example1()
        est = KatzCentrality(alpha=0.5).fit(a)
        assert est.alpha_ == pytest.approx(relative_alpha(a, 0.5), rel=1e-6)
        assert est.lambda_max_ == pytest.approx(2.4559, abs=1e-3)
        report = katz_centrality(a)
        for idx, value in report.scores.items():
            assert est.scores_[idx.node - 1, idx.layer - 1] == pytest.approx(value, rel=1e-9)

    def test_absolute_alpha(self):
        a = builtin_example1()
        est = KatzCentrality(alpha=0.1, alpha_scale="absolute").fit(a)
        assert est.alpha_ == 0.1

    def test_invalid_scale(self):
        with pytest.raises(DomainError):
            KatzCentrality(alpha_scale="other").fit(builtin_example1())


class TestSubgraphEstimator:
    def test_pairwise_matrix(self):
        a = builtin_example1()
        nodes = [(1, 1), (2, 2)]
        est = SubgraphCentrality(nodes=nodes).fit(a)
        assert est.pairwise_.shape == (2, 2)
        assert est.nodes_ == [TensorIndex(1, 1), TensorIndex(2, 2)]
        # diagonal of the pairwise matrix is the score vector
        for k, idx in enumerate(est.nodes_):
            assert est.pairwise_[k, k] == pytest.approx(est.report_.scores[idx])
        # symmetric network: symmetric pairwise matrix
        assert est.pairwise_[0, 1] == pytest.approx(est.pairwise_[1, 0], abs=1e-12)

    def test_restricted_nodes_leave_nan(self):
        a = builtin_example1()
        est = SubgraphCentrality(nodes=[(1, 1)]).fit(a)
        assert np.isfinite(est.scores_[0, 0])
        assert np.isnan(est.scores_[1, 0])

    def test_resolvent_family(self):
        a = builtin_example1()
        est = SubgraphCentrality(family="resolvent", alpha=0.5).fit(a)
        assert est.report_.kind.value == "msc-res"
        assert est.score_of(2, 2) == pytest.approx(1.2165, abs=5e-4)

    def test_krylov_block_path(self):
        a = builtin_example1()
        exact = SubgraphCentrality().fit(a)
        kry = SubgraphCentrality(mode="krylov", m=10, block_size=4).fit(a)
        np.testing.assert_allclose(kry.scores_, exact.scores_, atol=1e-8)
        np.testing.assert_allclose(kry.pairwise_, exact.pairwise_, atol=1e-8)
