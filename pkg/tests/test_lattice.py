"""Lattice calculus: coboundary, star, spectra, cup products, symbols.

The Laplacian spectra are checked against an independent Fourier oracle
(written before the operator code): on the unit-spacing periodic lattice
every mode m contributes sum_j (2 - 2 cos(2 pi m_j / N)) with multiplicity
binom(n, k).  Two spectra are additionally frozen as literals.
"""
from fractions import Fraction
from itertools import product
from math import comb, cos, pi
import random

import numpy as np
import pytest

from bvhiggs.graded import (
    CochainComplex, ConfigError, GradedLinearMap, GradedVectorSpace,
    StructureError, cohomology_dims,
)
from bvhiggs.lattice import (
    LatticeTorusModel, build_lattice, lattice_momentum, laplacian_spectrum,
    plane_wave_symbol,
)
from bvhiggs.linalg import SparseMatrix

F = Fraction


def fourier_laplacian_spectrum(n, N, k):
    """Oracle: unit-spacing Hodge Laplacian eigenvalues by plane waves."""
    vals = []
    for m in product(range(N), repeat=n):
        lam = sum(2.0 - 2.0 * cos(2.0 * pi * mj / N) for mj in m)
        vals.extend([lam] * comb(n, k))
    return sorted(vals)


def rand_cochain(model, k, rng):
    return [F(rng.randint(-3, 3)) for _ in range(model.form_dim(k))]


def de_rham(model):
    sp = GradedVectorSpace({k: model.form_dim(k) for k in range(model.n + 1)})
    d = GradedLinearMap(sp, sp, 1, {k: model.coboundary(k)
                                    for k in range(model.n)})
    return CochainComplex(sp, d)


class TestCoboundary:
    @pytest.mark.parametrize("n,N,a", [(1, 4, 1), (2, 3, 1), (3, 2, F(1, 2))])
    def test_d_squared(self, n, N, a):
        m = build_lattice(n, N, a)
        for k in range(n - 1):
            assert (m.coboundary(k + 1) @ m.coboundary(k)).is_zero()

    def test_site_delta_frozen(self):
        # with a = 1/2 the outgoing edge at the site carries +2, the
        # incoming edge at the previous site carries -2
        m = build_lattice(1, 4, F(1, 2))
        delta = [F(0)] * 4
        delta[2] = F(1)
        d = m.coboundary(0).apply(delta)
        assert d == [F(0), F(-2), F(2), F(0)]

    def test_integral_of_exact_top_form_vanishes(self):
        for n, N in [(1, 3), (2, 2), (2, 3)]:
            m = build_lattice(n, N)
            d_top = m.coboundary(n - 1)
            col_sums = {}
            for (i, j), v in d_top.data.items():
                col_sums[j] = col_sums.get(j, 0) + v
            assert all(s == 0 for s in col_sums.values())


class TestStar:
    def test_weights_frozen(self):
        m = build_lattice(2, 2, F(1, 2))
        s0 = m.hodge(0)
        assert all(v == F(1, 4) for v in s0.data.values())
        s1 = m.hodge(1)
        assert all(v in (F(1), F(-1)) for v in s1.data.values())

    @pytest.mark.parametrize("n,a", [(2, 1), (3, F(1, 3))])
    def test_star_square_sign(self, n, a):
        m = build_lattice(n, 2, a)
        for k in range(n + 1):
            prod = m.hodge(n - k) @ m.hodge(k)
            sign = F(-1) ** (k * (n - k))
            assert prod == SparseMatrix.identity(m.form_dim(k)).scale(sign)

    @pytest.mark.parametrize("n,N", [(1, 4), (2, 3), (2, 4), (3, 2)])
    def test_cup_star_pairing_is_translated_gram(self, n, N):
        # integrate(u cup star u) is the inner product with the second
        # argument translated along the cell directions: positive cell
        # weights, one nonzero per row, shifted by one site per direction
        # in S.  The translation is the price of a one-sided cup product.
        m = build_lattice(n, N, F(1, 2))
        for k in range(n + 1):
            gram = m.pairing_matrix(k) @ m.hodge(k)
            want = SparseMatrix(m.form_dim(k), m.form_dim(k))
            w = m.a ** (n - 2 * k)
            for S in m.subsets[k]:
                for x in m._sites:
                    want.data[(m.cell_index(k, x, S),
                               m.cell_index(k, m.shift_site(x, S), S))] = w
            assert gram == want


class TestSpectra:
    def test_oracle_frozen_literals(self):
        assert fourier_laplacian_spectrum(1, 4, 0) == pytest.approx(
            [0.0, 2.0, 2.0, 4.0])
        assert fourier_laplacian_spectrum(2, 2, 0) == pytest.approx(
            [0.0, 4.0, 4.0, 8.0])

    @pytest.mark.parametrize("n,N,k", [
        (1, 4, 0), (1, 4, 1), (2, 2, 0), (2, 3, 1), (3, 2, 1),
    ])
    def test_spectrum_matches_oracle(self, n, N, k):
        m = build_lattice(n, N)
        got = laplacian_spectrum(m, k)
        want = fourier_laplacian_spectrum(n, N, k)
        assert len(got) == len(want)
        assert max(abs(g - w) for g, w in zip(got, want)) < 1e-9

    def test_zero_modes_count_cohomology(self):
        m = build_lattice(2, 3)
        rep = cohomology_dims(de_rham(m))
        assert rep.dims == {0: 1, 1: 2, 2: 1}
        for k in range(3):
            zeros = sum(1 for lam in laplacian_spectrum(m, k) if abs(lam) < 1e-9)
            assert zeros == rep.dims[k] == comb(2, k)


class TestInnerProductAdjoint:
    def test_codifferential_is_adjoint(self):
        m = build_lattice(2, 3, F(1, 3))
        rng = random.Random(5)
        for k in range(2):
            u = rand_cochain(m, k, rng)
            v = rand_cochain(m, k + 1, rng)
            du = m.coboundary(k).apply(u)
            dsv = m.codifferential(k + 1).apply(v)
            assert m.inner_product(k + 1, du, v) == m.inner_product(k, u, dsv)


class TestCup:
    def test_leibniz_exact(self):
        m = build_lattice(2, 3)
        rng = random.Random(6)
        for k, l in [(0, 0), (0, 1), (1, 0)]:
            u = rand_cochain(m, k, rng)
            v = rand_cochain(m, l, rng)
            lhs = m.coboundary(k + l).apply(m.cup(u, k, v, l))
            du_v = m.cup(m.coboundary(k).apply(u), k + 1, v, l)
            u_dv = m.cup(u, k, m.coboundary(l).apply(v), l + 1)
            sign = F(-1) ** k
            rhs = [x + sign * y for x, y in zip(du_v, u_dv)]
            assert lhs == rhs

    def test_associative(self):
        m = build_lattice(2, 2)
        rng = random.Random(7)
        for degs in [(0, 0, 1), (0, 1, 1), (1, 0, 1)]:
            k1, k2, k3 = degs
            u, v, w = (rand_cochain(m, k, rng) for k in degs)
            left = m.cup(m.cup(u, k1, v, k2), k1 + k2, w, k3)
            right = m.cup(u, k1, m.cup(v, k2, w, k3), k2 + k3)
            assert left == right

    def test_pairing_is_signed_permutation(self):
        m = build_lattice(2, 2)
        for k in range(3):
            p = m.pairing_matrix(k)
            per_row = {}
            for (i, j), v in p.data.items():
                per_row.setdefault(i, []).append(v)
                assert v in (F(1), F(-1))
            assert all(len(vs) == 1 for vs in per_row.values())
            assert len(per_row) == m.form_dim(k)

    def test_pairing_matches_integrated_cup(self):
        m = build_lattice(2, 3)
        rng = random.Random(8)
        for k in range(3):
            u = rand_cochain(m, k, rng)
            v = rand_cochain(m, 2 - k, rng)
            via_cup = m.integrate(m.cup(u, k, v, 2 - k))
            pu = m.pairing_matrix(k).apply(v)
            assert sum(a * b for a, b in zip(u, pu)) == via_cup

    def test_constant_cup_matrix(self):
        m = build_lattice(2, 3)
        rng = random.Random(9)
        coeffs = [F(2), F(-1)]
        cvec = [F(0)] * m.form_dim(1)
        for ic in range(2):
            base = ic * m.n_sites
            for s in range(m.n_sites):
                cvec[base + s] = coeffs[ic]
        for k in range(2):
            u = rand_cochain(m, k, rng)
            mat_result = m.cup_const_matrix(coeffs, 1, k).apply(u)
            assert mat_result == m.cup(cvec, 1, u, k)

    def test_twisted_coboundary_squares_to_zero(self):
        # scalar constant one-form: cup is graded-commutative enough for
        # the square to cancel, and Leibniz kills the cross terms
        m = build_lattice(2, 3)
        coeffs = [F(1), F(3)]
        d0 = m.coboundary(0) + m.cup_const_matrix(coeffs, 1, 0)
        d1 = m.coboundary(1) + m.cup_const_matrix(coeffs, 1, 1)
        assert (d1 @ d0).is_zero()


class TestSymbols:
    def test_scalar_laplacian_symbol_frozen(self):
        m = build_lattice(1, 4)
        lap = m.laplacian(0)
        b1 = plane_wave_symbol(m, lap, 0, 0, (1,))
        assert b1.shape == (1, 1)
        assert abs(b1[0, 0] - 2.0) < 1e-12
        b2 = plane_wave_symbol(m, lap, 0, 0, (2,))
        assert abs(b2[0, 0] - 4.0) < 1e-12

    def test_spacing_scales_symbol(self):
        # the 1/a in d and the a^-2 in the codifferential compound: the
        # whole Laplacian scales as a^-4 relative to unit spacing
        m = build_lattice(1, 4, F(1, 2))
        lap = m.laplacian(0)
        b2 = plane_wave_symbol(m, lap, 0, 0, (2,))
        assert abs(b2[0, 0] - 64.0) < 1e-12

    def test_momentum_magnitude(self):
        m = build_lattice(1, 4)
        assert abs(lattice_momentum(m, 1) - 2 * np.sin(np.pi / 4)) < 1e-15
        assert abs(lattice_momentum(build_lattice(1, 4, F(1, 2)), 1)
                   - 4 * np.sin(np.pi / 4)) < 1e-15

    def test_internal_tensor_factor(self):
        m = build_lattice(1, 4)
        a = SparseMatrix.from_dense([[F(1), F(2)], [F(0), F(3)]])
        op = m.laplacian(0).kron(a)
        b = plane_wave_symbol(m, op, 0, 0, (1,), int_in=2, int_out=2)
        assert b.shape == (2, 2)
        assert np.allclose(b, 2.0 * np.array([[1, 2], [0, 3]], dtype=float))

    def test_non_invariant_operator_rejected(self):
        m = build_lattice(1, 4)
        op = SparseMatrix.from_diag([F(site) for site in range(4)])
        with pytest.raises(StructureError):
            plane_wave_symbol(m, op, 0, 0, (1,))

    def test_coboundary_symbol_reassembles(self):
        # validation inside the call exercises the FFT round trip
        m = build_lattice(2, 4)
        b = plane_wave_symbol(m, m.coboundary(0), 0, 1, (1, 2))
        assert b.shape == (2, 1)

    def test_bad_momentum_length(self):
        m = build_lattice(2, 2)
        with pytest.raises(ConfigError):
            plane_wave_symbol(m, m.laplacian(0), 0, 0, (1,))


class TestValidation:
    def test_build_bounds(self):
        with pytest.raises(ConfigError):
            build_lattice(0, 4)
        with pytest.raises(ConfigError):
            build_lattice(2, 1)
        with pytest.raises(ConfigError):
            build_lattice(2, 4, 0)

    def test_translation_commutes_with_d(self):
        m = build_lattice(2, 3)
        t0 = m.translation(0, (1, 2))
        t1 = m.translation(1, (1, 2))
        assert (m.coboundary(0) @ t0 - t1 @ m.coboundary(0)).is_zero()
