import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_atlas.errors import (
    EmptySpectrum,
    InvalidPair,
    MixedEigenvalue,
    NodalAtlasError,
    NotAnEigenvalue,
    NotRealValued,
)
from nodal_atlas.spectra import (
    PLEIJEL_CONSTANT,
    POLTEROVICH_CONSTANT,
    SQUARE,
    TORUS,
    deformation_family,
    evaluate,
    evaluate_grid,
    from_json,
    gradient,
    gradient_grid,
    hessian,
    laplacian,
    make_square_eigenfunction,
    make_torus_eigenfunction,
    spectral_index,
    square_product,
    to_json,
    torus_plane_wave,
    torus_product,
)

from oracles import lattice_points, square_index, torus_index

PI = math.pi


def random_square(rng, m):
    pts = [(a, b) for a, b in lattice_points(m) if a > 0 and b > 0]
    return make_square_eigenfunction([(a, b, rng.normal()) for a, b in pts])


def random_torus(rng, n):
    coef = {}
    for a, b in lattice_points(n):
        if (a, b) not in coef:
            z = complex(rng.normal(), rng.normal()) if (a, b) != (-a, -b) else complex(rng.normal())
            coef[(a, b)] = z
            coef[(-a, -b)] = z.conjugate()
    return make_torus_eigenfunction([(a, b, c) for (a, b), c in coef.items()])


class TestConstruction:
    def test_single_term(self):
        f = make_square_eigenfunction([(3, 3, 1.0)])
        assert f.m == 18
        assert f.lam == pytest.approx(18 * PI**2)
        assert f.lam == pytest.approx(177.653, abs=1e-3)

    def test_two_terms(self):
        f = make_square_eigenfunction([(1, 2, 1.0), (2, 1, 0.5)])
        assert f.m == 5 and f.lam == pytest.approx(5 * PI**2)

    def test_mixed(self):
        with pytest.raises(MixedEigenvalue):
            make_square_eigenfunction([(1, 2, 1.0), (1, 3, 1.0)])

    def test_duplicates_and_zero(self):
        with pytest.raises(NodalAtlasError):
            make_square_eigenfunction([(1, 2, 1.0), (1, 2, 2.0)])
        with pytest.raises(EmptySpectrum):
            make_square_eigenfunction([(1, 2, 0.0)])
        with pytest.raises(NodalAtlasError):
            make_square_eigenfunction([(0, 2, 1.0)])

    def test_torus_conjugate_symmetry(self):
        with pytest.raises(NotRealValued):
            make_torus_eigenfunction([(1, 2, 1.0), (-1, -2, 2.0)])
        f = make_torus_eigenfunction([(1, 2, 1 + 1j), (-1, -2, 1 - 1j)])
        assert f.n == 5

    def test_deformation(self):
        f0 = deformation_family(1, 3, 0.0)
        assert f0.m == 10 and len(f0.terms) == 1
        f1 = deformation_family(1, 3, 1.0)
        assert len(f1.terms) == 2 and f1.terms[0][2] == f1.terms[1][2]
        with pytest.raises(InvalidPair):
            deformation_family(2, 2, 0.5)
        with pytest.raises(InvalidPair):
            deformation_family(2, 4, 0.5)


class TestEvaluation:
    def test_values(self):
        f = square_product(3, 3)
        assert evaluate(f, 1 / 6, 1 / 6) == pytest.approx(1.0)
        for y in np.linspace(0, 1, 7):
            assert evaluate(f, 1 / 3, y) == pytest.approx(0.0, abs=1e-14)
        assert evaluate(torus_plane_wave(1, 2), 0.0, 0.0) == pytest.approx(1.0)

    def test_gradients(self):
        gx, gy = gradient(square_product(1, 1), 0.5, 0.5)
        assert gx == pytest.approx(0, abs=1e-14) and gy == pytest.approx(0, abs=1e-14)
        f = torus_product(1, 1)
        assert np.allclose(gradient(f, 0.0, 0.0), 0.0, atol=1e-14)
        assert evaluate(f, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
        gx, gy = gradient(torus_plane_wave(1, 0), 0.25, 0.3)
        assert gx == pytest.approx(-2 * PI) and gy == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from([5, 10, 25, 50, 65]), st.integers(0, 2**31),
           st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_eigen_equation(self, m, seed, x, y):
        rng = np.random.default_rng(seed)
        for f in (random_square(rng, m), random_torus(rng, m)):
            lap = laplacian(f, x, y)
            assert lap == pytest.approx(-f.lam * evaluate(f, x, y), abs=1e-8 * f.lam * f.amplitude)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from([2, 5, 13, 25]), st.integers(0, 2**31))
    def test_derivatives_match_finite_differences(self, n, seed):
        rng = np.random.default_rng(seed)
        f = random_torus(rng, n)
        x, y, h = rng.uniform(), rng.uniform(), 1e-6
        gx, gy = gradient(f, x, y)
        assert gx == pytest.approx((evaluate(f, x + h, y) - evaluate(f, x - h, y)) / (2 * h), abs=1e-5 * f.lam)
        assert gy == pytest.approx((evaluate(f, x, y + h) - evaluate(f, x, y - h)) / (2 * h), abs=1e-5 * f.lam)
        fxx, fxy, fyy = hessian(f, x, y)
        gxp, gyp = gradient(f, x + h, y)
        gxm, gym = gradient(f, x - h, y)
        scale = 1e-5 * f.lam ** 1.5
        assert fxx == pytest.approx((gxp - gxm) / (2 * h), abs=scale)
        assert fxy == pytest.approx((gyp - gym) / (2 * h), abs=scale)

    def test_grids_match_pointwise(self):
        rng = np.random.default_rng(3)
        xs, ys = np.linspace(0, 1, 9), np.linspace(0, 1, 7)
        for f in (random_square(rng, 25), random_torus(rng, 25)):
            V = evaluate_grid(f, xs, ys)
            GX, GY = gradient_grid(f, xs, ys)
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            assert np.allclose(V, evaluate(f, X, Y), atol=1e-12)
            gx, gy = gradient(f, X, Y)
            assert np.allclose(GX, gx, atol=1e-10) and np.allclose(GY, gy, atol=1e-10)


class TestSpectralIndex:
    def test_examples(self):
        s = spectral_index(2 * PI**2, SQUARE)
        assert (s.j_min, s.j_max) == (1, 1)
        s = spectral_index(5 * PI**2, SQUARE)
        assert (s.j_min, s.j_max) == (2, 3)
        assert spectral_index(18 * PI**2, SQUARE).weyl_estimate == pytest.approx(18 * PI / 4)
        assert spectral_index(18 * PI**2, SQUARE).weyl_estimate == pytest.approx(14.137, abs=1e-3)

    def test_errors(self):
        with pytest.raises(NotAnEigenvalue):
            spectral_index(3 * PI**2, SQUARE)
        with pytest.raises(NotAnEigenvalue):
            spectral_index(1.234, SQUARE)
        with pytest.raises(NodalAtlasError):
            spectral_index(2 * PI**2, "disk")

    @pytest.mark.parametrize("m", [2, 5, 8, 10, 25, 50, 65, 200, 325])
    def test_square_against_enumeration(self, m):
        s = spectral_index(m * PI**2, SQUARE)
        assert (s.j_min, s.j_max) == square_index(m)

    @pytest.mark.parametrize("n", [0, 1, 2, 4, 5, 25, 65])
    def test_torus_against_enumeration(self, n):
        s = spectral_index(4 * PI**2 * n, TORUS)
        assert (s.j_min, s.j_max) == torus_index(n)
        assert s.multiplicity == len(lattice_points(n))

    def test_constants(self):
        from scipy.special import jn_zeros

        assert POLTEROVICH_CONSTANT == pytest.approx(2 / PI, abs=5e-11)
        assert PLEIJEL_CONSTANT == pytest.approx((2 / jn_zeros(0, 1)[0]) ** 2, abs=5e-11)


class TestJson:
    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from([5, 25, 65, 85]), st.integers(0, 2**31))
    def test_roundtrip(self, m, seed):
        rng = np.random.default_rng(seed)
        for f in (random_square(rng, m), random_torus(rng, m)):
            g = from_json(to_json(f))
            assert g.domain == f.domain and g.lam == f.lam
            assert g.terms == f.terms

    def test_rejects(self):
        with pytest.raises(NodalAtlasError):
            from_json({"terms": []})
        with pytest.raises(MixedEigenvalue):
            from_json({"domain": "square", "n_or_m": 10, "terms": [[1, 2, 1.0, 0.0]]})
        with pytest.raises(NodalAtlasError):
            from_json({"domain": "square", "terms": [[1, 2, 1.0, 0.5]]})
        with pytest.raises(NodalAtlasError):
            from_json({"domain": "square", "terms": [[1.5, 2, 1.0]]})
