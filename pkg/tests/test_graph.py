"""Topology machinery: frozen matrices, reachability, singular-value bounds."""

import numpy as np
import pytest

from septrack.graph import (
    GraphTopology,
    build_laplacian,
    conservative_lambda_min_bound,
    has_leader_rooted_spanning_tree,
    min_singular_value,
    singular_values,
)

# benchmark ring: 1 listens to 3, 2 to 1, 3 to 2; leader feeds 1
RING = GraphTopology(
    adjacency=((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    leader_links=(1, 0, 0),
)
RING_H = np.array([[2.0, 0.0, -1.0], [-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
# smallest singular value of RING_H, frozen from an independent SVD before
# the in-repo path existed
RING_H_MIN_SV = 0.23912327825655455


def random_assumption2_topology(rng, n_max=8):
    """Rejection-sample a reachable topology (arbitrary density)."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        adj = (rng.random((n, n)) < rng.uniform(0.1, 0.9)).astype(int)
        np.fill_diagonal(adj, 0)
        mu = (rng.random(n) < 0.4).astype(int)
        if not mu.any():
            mu[int(rng.integers(0, n))] = 1
        top = GraphTopology(
            adjacency=tuple(tuple(int(v) for v in row) for row in adj),
            leader_links=tuple(int(v) for v in mu),
        )
        if has_leader_rooted_spanning_tree(top):
            return top


def random_sparse_tree_topology(rng, n_max=8):
    """Random leader-rooted spanning tree plus a few extra edges."""
    n = int(rng.integers(2, n_max + 1))
    adj = np.zeros((n, n), dtype=int)
    mu = np.zeros(n, dtype=int)
    order = rng.permutation(n)
    for idx, node in enumerate(order):
        if idx == 0:
            mu[node] = 1
        else:
            parent = order[int(rng.integers(0, idx))]
            adj[node][parent] = 1
    for _ in range(int(rng.integers(0, n))):
        i, j = int(rng.integers(0, n)), int(rng.integers(0, n))
        if i != j:
            adj[i][j] = 1
    return GraphTopology(
        adjacency=tuple(tuple(int(v) for v in row) for row in adj),
        leader_links=tuple(int(v) for v in mu),
    )


class TestTopologyType:
    def test_rejects_self_edge(self):
        with pytest.raises(ValueError, match="self edge"):
            GraphTopology(adjacency=((1, 0), (0, 0)), leader_links=(1, 0))

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            GraphTopology(adjacency=((0, 2), (0, 0)), leader_links=(1, 0))

    def test_rejects_ragged(self):
        with pytest.raises(ValueError):
            GraphTopology(adjacency=((0, 0), (0,)), leader_links=(1, 0))

    def test_neighbors_and_degree(self):
        assert RING.neighbors(0) == (2,)
        assert RING.in_degree(0) == 1
        assert RING.follower_count == 3


class TestBuildLaplacian:
    def test_benchmark_ring(self):
        dec = build_laplacian(RING)
        assert np.array_equal(dec.H, RING_H)
        assert np.array_equal(dec.D_bar, np.eye(3))
        assert np.array_equal(dec.B, np.diag([1.0, 0.0, 0.0]))

    def test_determinant_is_one(self):
        dec = build_laplacian(RING)
        assert round(float(np.linalg.det(dec.H))) == 1

    def test_no_edges_two_leaders(self):
        top = GraphTopology(adjacency=((0, 0), (0, 0)), leader_links=(1, 1))
        dec = build_laplacian(top)
        assert np.array_equal(dec.H, np.eye(2))

    def test_no_leader_gives_zero_row_sums(self):
        top = GraphTopology(
            adjacency=((0, 1, 1), (1, 0, 1), (1, 1, 0)),
            leader_links=(0, 0, 0),
        )
        dec = build_laplacian(top)
        assert np.allclose(dec.H.sum(axis=1), 0.0)
        assert min_singular_value(dec.H) < 1e-10

    def test_row_sums_of_l_bar_exactly_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            top = random_assumption2_topology(rng)
            dec = build_laplacian(top)
            assert np.array_equal(dec.L_bar.sum(axis=1), np.zeros(top.follower_count))

    def test_matrices_read_only(self):
        dec = build_laplacian(RING)
        with pytest.raises(ValueError):
            dec.H[0, 0] = 5.0


class TestSpanningTree:
    def test_benchmark_ring_reachable(self):
        assert has_leader_rooted_spanning_tree(RING)

    def test_no_leader_links(self):
        top = GraphTopology(
            adjacency=((0, 1, 1), (1, 0, 1), (1, 1, 0)),
            leader_links=(0, 0, 0),
        )
        assert not has_leader_rooted_spanning_tree(top)

    def test_star(self):
        top = GraphTopology(
            adjacency=((0, 0, 0), (0, 0, 0), (0, 0, 0)),
            leader_links=(1, 1, 1),
        )
        assert has_leader_rooted_spanning_tree(top)

    def test_matches_bfs_oracle(self):
        # independent breadth-first search over the lifted (leader + N) digraph
        rng = np.random.default_rng(17)
        for _ in range(300):
            n = int(rng.integers(2, 8))
            adj = (rng.random((n, n)) < 0.3).astype(int)
            np.fill_diagonal(adj, 0)
            mu = (rng.random(n) < 0.35).astype(int)
            top = GraphTopology(
                adjacency=tuple(tuple(int(v) for v in row) for row in adj),
                leader_links=tuple(int(v) for v in mu),
            )
            seen = {-1}
            frontier = [-1]
            while frontier:
                node = frontier.pop()
                for nxt in range(n):
                    if nxt in seen:
                        continue
                    reachable = (mu[nxt] == 1) if node == -1 else (adj[nxt][node] == 1)
                    if reachable:
                        seen.add(nxt)
                        frontier.append(nxt)
            assert has_leader_rooted_spanning_tree(top) == (len(seen) == n + 1)


class TestSingularValues:
    def test_identity(self):
        assert min_singular_value(np.eye(3)) == pytest.approx(1.0, abs=1e-14)

    def test_zero_matrix(self):
        assert min_singular_value(np.zeros((3, 3))) == 0.0

    def test_benchmark_h_matches_frozen_oracle(self):
        assert min_singular_value(RING_H) == pytest.approx(RING_H_MIN_SV, abs=1e-10)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            min_singular_value(np.ones((2, 3)))

    def test_against_numpy_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            a = rng.normal(size=(n, n)) * rng.uniform(0.1, 10)
            mine = singular_values(a)
            ref = np.linalg.svd(a, compute_uv=False)
            assert np.allclose(mine, ref, rtol=1e-10, atol=1e-10)


class TestConservativeBound:
    def test_value_n3(self):
        assert conservative_lambda_min_bound(3) == pytest.approx(
            0.0606060606060606, abs=1e-12
        )

    def test_value_n2(self):
        assert conservative_lambda_min_bound(2) == pytest.approx(
            0.1414213562373095, abs=1e-12
        )

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            conservative_lambda_min_bound(1)

    def test_below_benchmark_min_singular_value(self):
        assert conservative_lambda_min_bound(3) <= min_singular_value(RING_H)

    def test_nonsingular_for_reachable_topologies(self):
        # reachability makes the grounded Laplacian nonsingular
        rng = np.random.default_rng(29)
        for _ in range(1000):
            top = random_assumption2_topology(rng)
            h = build_laplacian(top).H
            assert min_singular_value(h) > 1e-8

    def test_bound_holds_on_sparse_tree_family(self):
        # the agent-count-only bound stays below the true minimum singular
        # value across sparse leader-rooted topologies
        rng = np.random.default_rng(31)
        for _ in range(1000):
            top = random_sparse_tree_topology(rng)
            h = build_laplacian(top).H
            n = top.follower_count
            assert conservative_lambda_min_bound(n) <= min_singular_value(h)

    def test_bound_is_not_universal(self):
        # pinned dense counterexample: the agent-count-only formula is NOT a
        # certified lower bound over all reachable topologies
        top = GraphTopology(
            adjacency=((0, 0, 1, 0), (1, 0, 1, 1), (1, 1, 0, 0), (1, 1, 1, 0)),
            leader_links=(0, 0, 0, 1),
        )
        assert has_leader_rooted_spanning_tree(top)
        h = build_laplacian(top).H
        assert min_singular_value(h) < conservative_lambda_min_bound(4)
