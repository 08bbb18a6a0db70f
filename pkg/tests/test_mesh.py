"""Mesh construction, pair enumeration, quadrature rule."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixneu import InvalidGeometryError, Mesh1D, build_mesh, element_pairs, gauss_rule


def brute_pairs(mesh):
    """Exhaustive enumeration oracle: ordered element pairs meeting Q."""
    lo, hi = mesh.n_col, mesh.n_col + mesh.n_in
    out = []
    for e in range(mesh.n_elements):
        for f in range(mesh.n_elements):
            if lo <= e < hi or lo <= f < hi:
                out.append((e, f))
    return out


class TestBuildMesh:
    def test_example_nodes(self):
        mesh = build_mesh(0.0, 1.0, 4, 1.0, 2)
        expected = [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0]
        np.testing.assert_array_equal(mesh.nodes, expected)

    def test_interior_mask_example(self):
        mesh = build_mesh(0.0, 1.0, 2, 0.5, 1)
        assert mesh.nodes.size == 5
        np.testing.assert_array_equal(mesh.nodes, [-0.5, 0.0, 0.5, 1.0, 1.5])
        np.testing.assert_array_equal(mesh.interior_mask,
                                      [False, True, True, True, False])

    def test_classical_run_mesh(self):
        mesh = build_mesh(0.0, math.pi, 512, 4.0, 64)
        assert mesh.nodes.size == 512 + 2 * 64 + 1
        assert mesh.h == pytest.approx(math.pi / 512, rel=1e-15)
        assert mesh.nodes[0] == pytest.approx(-4.0)
        assert mesh.nodes[-1] == pytest.approx(math.pi + 4.0)

    def test_endpoints_are_nodes(self):
        mesh = build_mesh(-2.0, 3.0, 7, 0.8, 3)
        assert np.any(mesh.nodes == -2.0)
        assert np.any(mesh.nodes == 3.0)
        assert mesh.nodes[0] == pytest.approx(-2.8)
        assert mesh.nodes[-1] == pytest.approx(3.8)

    @pytest.mark.parametrize("bad", [
        dict(a=1.0, b=0.0),            # reversed interval
        dict(a=0.0, b=0.0),            # empty interval
        dict(n_in=1),                  # n_in below 2
        dict(collar_width=0.0),        # collar must have positive width
        dict(collar_width=-1.0),
        dict(n_col=0),
        dict(a=float("nan")),
        dict(b=float("inf")),
        dict(collar_width=float("nan")),
    ])
    def test_invalid_geometry(self, bad):
        kw = dict(a=0.0, b=1.0, n_in=4, collar_width=1.0, n_col=2)
        kw.update(bad)
        with pytest.raises(InvalidGeometryError):
            build_mesh(**kw)

    @given(
        a=st.floats(-10, 10),
        width=st.floats(0.1, 20),
        n_in=st.integers(2, 64),
        collar=st.floats(0.05, 5),
        n_col=st.integers(1, 16),
    )
    @settings(max_examples=60, deadline=None)
    def test_invariants(self, a, width, n_in, collar, n_col):
        mesh = build_mesh(a, a + width, n_in, collar, n_col)
        nodes = mesh.nodes
        assert np.all(np.diff(nodes) > 0)
        assert nodes[0] == pytest.approx(a - collar)
        assert nodes[-1] == pytest.approx(a + width + collar)
        assert np.any(nodes == a) and np.any(nodes == a + width)
        # no element straddles the boundary: a and b split the node list
        ia = int(np.flatnonzero(nodes == a)[0])
        ib = int(np.flatnonzero(nodes == a + width)[0])
        assert ia == n_col and ib == n_col + n_in
        assert np.array_equal(mesh.interior_mask,
                              (nodes >= a) & (nodes <= a + width))


class TestElementPairs:
    def test_collar_collar_excluded(self):
        mesh = build_mesh(0.0, 1.0, 2, 0.5, 1)
        # elements: 0 collar-left, 1..2 interior, 3 collar-right
        pairs = {(e, f) for e, f, _ in element_pairs(mesh)}
        assert (0, 3) not in pairs and (3, 0) not in pairs
        assert (0, 0) not in pairs

    def test_identical_class(self):
        mesh = build_mesh(0.0, 1.0, 2, 0.5, 1)
        prox = {(e, f): p for e, f, p in element_pairs(mesh)}
        assert prox[(1, 1)] == "identical"
        assert prox[(1, 2)] == "adjacent"
        assert prox[(0, 2)] == "separated"

    def test_count_matches_brute_force(self):
        mesh = build_mesh(0.0, 1.0, 4, 1.0, 2)
        emitted = [(e, f) for e, f, _ in element_pairs(mesh)]
        assert sorted(emitted) == sorted(brute_pairs(mesh))
        assert len(emitted) == 48  # 8^2 ordered pairs minus 4^2 collar-collar

    def test_symmetry_and_membership(self):
        mesh = build_mesh(-1.0, 2.0, 5, 0.7, 3)
        lo, hi = mesh.n_col, mesh.n_col + mesh.n_in
        pairs = {(e, f) for e, f, _ in element_pairs(mesh)}
        for e, f in pairs:
            assert (f, e) in pairs
            assert lo <= e < hi or lo <= f < hi

    def test_interior_count_quadruples(self):
        def interior_pairs(n_in):
            mesh = build_mesh(0.0, 1.0, n_in, 1.0, 2)
            lo, hi = mesh.n_col, mesh.n_col + mesh.n_in
            return sum(1 for e, f, _ in element_pairs(mesh)
                       if lo <= e < hi and lo <= f < hi)

        assert interior_pairs(8) == 4 * interior_pairs(4)
        assert interior_pairs(16) == 4 * interior_pairs(8)

    def test_class_partition(self):
        mesh = build_mesh(0.0, 1.0, 4, 1.0, 2)
        for e, f, p in element_pairs(mesh):
            if e == f:
                assert p == "identical"
            elif abs(e - f) == 1:
                assert p == "adjacent"
            else:
                assert p == "separated"


class TestQuadratureRule:
    def test_default_rule(self):
        quad = gauss_rule()
        assert quad.order >= 2
        assert quad.split_depth >= 0
        assert np.all(quad.weights > 0)
        assert quad.weights.sum() == pytest.approx(1.0, rel=1e-14)
        assert np.all((quad.points > 0) & (quad.points < 1))

    @pytest.mark.parametrize("order", [2, 5, 12])
    def test_polynomial_exactness(self, order):
        # Gauss with `order` points integrates degree 2*order-1 exactly
        quad = gauss_rule(order=order)
        for deg in range(2 * order):
            val = float(np.sum(quad.weights * quad.points ** deg))
            assert val == pytest.approx(1.0 / (deg + 1), rel=1e-12)

    def test_invalid_rule(self):
        with pytest.raises(InvalidGeometryError):
            gauss_rule(order=1)
        with pytest.raises(InvalidGeometryError):
            gauss_rule(split_depth=-1)
