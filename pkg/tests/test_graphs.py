"""Graph family, Laplacian, and connectivity primitives."""

import math

import numpy as np
import pytest

from swsim import (
    GraphFamily,
    WeightedGraph,
    centering_matrix,
    connected_subsets,
    generalized_laplacian,
    is_connected,
    laplacian,
    min_positive_eigenvalue,
    offdiag_norm,
    union_graph,
    union_laplacian,
)
from swsim.selftest import laplacian_identity_suite, random_graph


def test_path3_laplacian_spectrum():
    # path on 3 nodes has Laplacian eigenvalues 0, 1, 3
    g = WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    eigs = np.linalg.eigvalsh(laplacian(g))
    assert np.allclose(eigs, [0.0, 1.0, 3.0], atol=1e-12)


def test_path4_smallest_positive_eigenvalue():
    # 2 - sqrt(2), the value behind the benchmark connectivity margin
    g = WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    val = min_positive_eigenvalue(laplacian(g))
    assert abs(val - (2.0 - math.sqrt(2.0))) < 1e-12


def test_laplacian_rows_sum_to_zero():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(2, 8)))
        lap = laplacian(g)
        assert np.abs(lap.sum(axis=1)).max() < 1e-12
        assert np.abs(lap - lap.T).max() == 0.0


def test_generalized_laplacian_hand_case():
    g = WeightedGraph(np.array([[0.0, 1.0], [1.0, 0.0]]))
    b = np.array([[5.0, 2.0], [3.0, 7.0]])
    out = generalized_laplacian(g, b)
    assert np.array_equal(out, np.array([[2.0, -2.0], [-3.0, 3.0]]))


def test_generalized_laplacian_with_ones_is_laplacian():
    rng = np.random.default_rng(11)
    g = random_graph(rng, 5)
    assert np.allclose(
        generalized_laplacian(g, np.ones((5, 5))), laplacian(g), atol=1e-14
    )


def test_generalized_laplacian_shape_mismatch():
    g = WeightedGraph(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        generalized_laplacian(g, np.ones((2, 2)))


def test_centering_matrix_small():
    assert np.array_equal(centering_matrix(1), np.array([[0.0]]))
    c2 = centering_matrix(2)
    assert np.allclose(c2, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_offdiag_norm_ignores_diagonal():
    b = np.array([[9.0, 1.0], [2.0, -4.0]])
    assert abs(offdiag_norm(b) - math.sqrt(5.0)) < 1e-15


def test_weighted_graph_validation():
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[0.0, -1.0], [-1.0, 0.0]]))  # negative weight
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[1.0, 0.0], [0.0, 0.0]]))  # diagonal entry
    with pytest.raises(ValueError):
        WeightedGraph(np.zeros((2, 3)))


def test_from_edges_validation():
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 0, 1.0)])  # self loop
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 3, 1.0)])  # out of range
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)])  # duplicate
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 1, 0.0)])  # nonpositive weight


def test_from_edges_default_weight():
    g = WeightedGraph.from_edges(3, [(0, 1), (1, 2)])
    assert g.weights[0, 1] == 1.0
    assert g.edge_count() == 2


def test_weights_are_read_only():
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0)])
    with pytest.raises(ValueError):
        g.weights[0, 1] = 5.0


def test_is_connected_cases():
    assert is_connected(WeightedGraph(np.zeros((1, 1))))
    assert not is_connected(WeightedGraph(np.zeros((2, 2))))
    path = WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
    assert is_connected(path)
    gap = WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert not is_connected(gap)


def test_union_graph_sums_weights():
    fam = GraphFamily(
        {
            1: WeightedGraph.from_edges(3, [(0, 1, 1.0)]),
            2: WeightedGraph.from_edges(3, [(0, 1, 0.5), (1, 2, 2.0)]),
        }
    )
    u = union_graph(fam, [1, 2])
    assert u.weights[0, 1] == 1.5
    assert u.weights[1, 2] == 2.0
    assert np.allclose(union_laplacian(fam, [1, 2]), laplacian(u), atol=1e-15)


def test_connected_subsets_chain(chain_family):
    subsets = list(connected_subsets(chain_family))
    assert subsets == [(1, 2, 3)]


def test_min_positive_eigenvalue_errors():
    with pytest.raises(ValueError):
        min_positive_eigenvalue(np.zeros((2, 2)))  # no positive eigenvalue
    with pytest.raises(ValueError):
        min_positive_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))  # asymmetric


def test_identity_suite_passes():
    lines = laplacian_identity_suite(np.random.default_rng(3), 50)
    for line in lines:
        assert line.ok, line.render()
