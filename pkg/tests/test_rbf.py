"""Gaussian basis networks: values, bounds, placement, Lipschitz probing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from septrack.rbf import ApproximatorSpec, RbfNetwork, grid_network, random_network


class TestBasis:
    def test_at_center(self):
        net = RbfNetwork(input_dim=1, centers=((0.5,),), widths=(2.0,))
        assert net.basis([0.5])[0] == 1.0
        assert net.theta([0.5]) == 1.0

    def test_far_field_decays(self):
        net = RbfNetwork(input_dim=1, centers=((0.0,),), widths=(1.0,))
        assert net.basis([8.0])[0] < 1e-27

    def test_two_node_reference(self):
        # exp(-0.25) per node, frozen from direct evaluation
        net = RbfNetwork(input_dim=1, centers=((0.0,), (1.0,)), widths=(1.0, 1.0))
        b = net.basis([0.5])
        assert b == pytest.approx([0.7788007830714049, 0.7788007830714049], rel=1e-15)
        assert net.theta([0.5]) == pytest.approx(1.1013906298063676, rel=1e-14)

    def test_dimension_mismatch_rejected(self):
        net = grid_network(2, 3, -1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            net.basis([0.0, 0.0, 0.0])

    def test_values_in_unit_interval(self):
        rng = np.random.default_rng(7)
        net = grid_network(3, 4, -2.0, 2.0, 1.5)
        for _ in range(200):
            b = net.basis(rng.uniform(-5, 5, 3))
            assert np.all(b > 0.0) and np.all(b <= 1.0)


class TestTheta:
    def test_upper_bound_sqrt_m(self):
        rng = np.random.default_rng(13)
        net = grid_network(2, 5, -6.0, 6.0, 3.0)
        cap = net.theta_upper_bound
        assert cap == math.sqrt(25)
        for _ in range(500):
            assert net.theta(rng.uniform(-12, 12, 2)) <= cap

    def test_bound_survives_box_shrink(self):
        for box in ((-6.0, 6.0), (-2.0, 2.0), (-0.5, 0.5)):
            net = grid_network(2, 3, *box, 1.0)
            rng = np.random.default_rng(17)
            for _ in range(100):
                z = rng.uniform(box[0], box[1], 2)
                assert net.theta(z) <= net.theta_upper_bound

    @given(st.permutations(list(range(6))))
    @settings(max_examples=60, deadline=None)
    def test_invariant_under_node_permutation(self, perm):
        rng = np.random.default_rng(19)
        centers = tuple(tuple(c) for c in rng.uniform(-3, 3, (6, 2)))
        widths = tuple(rng.uniform(0.5, 3.0, 6))
        net = RbfNetwork(input_dim=2, centers=centers, widths=widths)
        permuted = RbfNetwork(
            input_dim=2,
            centers=tuple(centers[i] for i in perm),
            widths=tuple(widths[i] for i in perm),
        )
        z = rng.uniform(-4, 4, 2)
        assert net.theta(z) == pytest.approx(permuted.theta(z), rel=1e-14)

    def test_lipschitz_estimate_holds_empirically(self):
        net = grid_network(2, 4, -3.0, 3.0, 1.2)
        cap = net.lipschitz_estimate() * 1.1  # guard factor on the analytic rate
        rng = np.random.default_rng(23)
        for _ in range(2000):
            z1 = rng.uniform(-4, 4, 2)
            z2 = z1 + rng.normal(scale=0.05, size=2)
            dist = float(np.linalg.norm(z1 - z2))
            if dist == 0.0:
                continue
            assert abs(net.theta(z1) - net.theta(z2)) <= cap * dist


class TestConstruction:
    def test_grid_1d_endpoints(self):
        net = grid_network(1, 3, -1.0, 1.0, 1.0)
        assert net.centers == ((-1.0,), (0.0,), (1.0,))

    def test_grid_2d_corners(self):
        net = grid_network(2, 2, 0.0, 1.0, 1.0)
        assert set(net.centers) == {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}

    def test_grid_3d_count(self):
        assert grid_network(3, 3, -1.0, 1.0, 1.0).node_count == 27

    def test_grid_rejects_bad_box(self):
        with pytest.raises(ValueError):
            grid_network(2, 3, 1.0, -1.0, 1.0)

    def test_random_network_seeded(self):
        a = random_network(5, 40, -6.0, 6.0, 3.0, seed=99)
        b = random_network(5, 40, -6.0, 6.0, 3.0, seed=99)
        assert a == b
        c = random_network(5, 40, -6.0, 6.0, 3.0, seed=100)
        assert a != c

    def test_widths_must_be_positive(self):
        with pytest.raises(ValueError):
            RbfNetwork(input_dim=1, centers=((0.0,),), widths=(0.0,))

    def test_spec_builds_lattice(self):
        spec = ApproximatorSpec(kind="lattice", box=(-2.0, 2.0), width=1.0, per_axis=3)
        net = spec.build(2)
        assert net.node_count == 9

    def test_spec_random_requires_seed(self):
        with pytest.raises(ValueError):
            ApproximatorSpec(kind="random", box=(-2.0, 2.0), width=1.0, count=10)
