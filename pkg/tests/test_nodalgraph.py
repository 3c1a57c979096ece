import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_atlas.errors import GraphInconsistency, NodalAtlasError
from nodal_atlas.nodalgraph import (
    EmbeddedGraph,
    NodalGraphReport,
    RotationSystem,
    build_nodal_graph,
    euler_defect,
    random_embedded_graph,
    singular_budget,
)
from nodal_atlas.nodalgraph import _check_report
from nodal_atlas.spectra import make_torus_eigenfunction, square_product, torus_plane_wave, torus_product

from oracles import lattice_points


class TestEulerDefect:
    def test_examples(self):
        assert euler_defect(EmbeddedGraph(4, 6, 4, 1, 0)) == (1, True)
        assert euler_defect(EmbeddedGraph(1, 1, 1, 1, 1)) == (0, True)
        assert euler_defect(EmbeddedGraph(0, 0, 1, 0, 2)) == (1, True)
        assert euler_defect(EmbeddedGraph(1, 2, 1, 1, 1)) == (-1, True)
        assert euler_defect(EmbeddedGraph(1, 3, 1, 1, 1)) == (-2, False)

    def test_validation(self):
        with pytest.raises(NodalAtlasError):
            EmbeddedGraph(0, 0, 2, 0, 1)
        with pytest.raises(NodalAtlasError):
            EmbeddedGraph(2, 1, 1, 1, 0, degrees=(1, 2))
        with pytest.raises(NodalAtlasError):
            EmbeddedGraph(1, 0, 0, 1, 0)


class TestRotationSystems:
    @pytest.mark.parametrize("genus", [1, 2, 3])
    def test_bouquet_has_one_face(self, genus):
        rs = RotationSystem.bouquet(genus)
        _, nf = rs.faces()
        assert nf == 1 and rs.nverts - rs.edges + nf == 2 - 2 * genus

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 3), st.integers(0, 2**31))
    def test_random_graphs_in_range(self, genus, seed):
        g = random_embedded_graph(genus, np.random.default_rng(seed))
        d, ok = euler_defect(g)
        assert ok, (g, d)

    def test_extremes_are_reached(self):
        rng = np.random.default_rng(0)
        seen = {g: set() for g in range(4)}
        for _ in range(2000):
            genus = int(rng.integers(0, 4))
            seen[genus].add(euler_defect(random_embedded_graph(genus, rng))[0])
        for genus in range(1, 4):
            assert 1 in seen[genus] and 1 - 2 * genus in seen[genus]


class TestNodalGraph:
    def test_torus_product(self):
        r = build_nodal_graph(torus_product(1, 1))
        g = r.graph
        assert (g.v, g.e, g.f, g.c) == (4, 8, 4, 1)
        assert r.order_sum == 4 and r.defect == -1
        assert r.N - r.C - r.order_sum == -1
        assert singular_budget(r) == (4, 5)

    def test_plane_wave(self):
        r = build_nodal_graph(torus_plane_wave(1, 2))
        assert (r.graph.v, r.graph.e, r.graph.f, r.graph.c) == (0, 0, 2, 2)
        assert r.order_sum == 0 and r.defect == 0
        assert singular_budget(r)[0] == 0

    @pytest.mark.parametrize("a,b", [(1, 2), (2, 3), (3, 1)])
    def test_products(self, a, b):
        r = build_nodal_graph(torus_product(a, b))
        assert r.N == 4 * a * b and r.defect == -1
        assert r.graph.e - r.graph.v == r.order_sum

    @settings(max_examples=15, deadline=None)
    @given(st.sampled_from([1, 2, 5, 13, 25]), st.integers(0, 2**31))
    def test_random_eigenfunctions(self, n, seed):
        rng = np.random.default_rng(seed)
        coef = {}
        for a, b in lattice_points(n):
            if (a, b) not in coef:
                z = complex(rng.normal(), rng.normal())
                coef[(a, b)] = z
                coef[(-a, -b)] = z.conjugate()
        r = build_nodal_graph(make_torus_eigenfunction([(a, b, c) for (a, b), c in coef.items()]))
        assert r.N - r.C - r.order_sum == r.defect
        assert -1 <= r.defect <= 1

    def test_rejects_square(self):
        with pytest.raises(NodalAtlasError):
            build_nodal_graph(square_product(2, 2))

    def test_inconsistent_reports(self):
        g = EmbeddedGraph(4, 8, 4, 1, 1, (4, 4, 4, 4))
        with pytest.raises(GraphInconsistency):
            _check_report(NodalGraphReport(g, 4, 1, 3, -1))
        with pytest.raises(GraphInconsistency):
            _check_report(NodalGraphReport(EmbeddedGraph(1, 4, 1, 1, 1), 1, 1, 3, -3))
        bad = NodalGraphReport(EmbeddedGraph(1, 8, 1, 1, 1), 1, 1, 7, -7)
        with pytest.raises(GraphInconsistency):
            singular_budget(bad)
