"""Symmetric-sector basis and operator construction tests."""

import math

import numpy as np
import pytest

from kickedspin import ModelParams
from kickedspin.fock import (build_free_hamiltonian, build_hopping,
                             build_parity, build_sz, enumerate_basis,
                             even_sector_basis, fully_up_state,
                             hop_amplitudes, parity_permutation, sz_diagonal)
from kickedspin.linalg import checked_eigh


def params_for(two_l, N, **kw):
    base = dict(h=0.1, K=0.3, tau=0.6, phi=np.pi, J=1.0)
    base.update(kw)
    return ModelParams(two_l=two_l, N=N, **base)


class TestEnumerateBasis:
    def test_one_boson_three_modes(self):
        assert enumerate_basis(1, 2).dim == 3

    def test_two_bosons_two_modes(self):
        assert enumerate_basis(2, 1).dim == 3

    def test_stars_and_bars_n50_l1(self):
        assert enumerate_basis(50, 2).dim == 1326  # binomial(52, 2)

    @pytest.mark.parametrize("n_sites,two_l", [(3, 2), (5, 3), (7, 1)])
    def test_dimension_formula(self, n_sites, two_l):
        basis = enumerate_basis(n_sites, two_l)
        assert basis.dim == math.comb(n_sites + two_l, two_l)

    def test_occupations_sum_to_n(self):
        basis = enumerate_basis(4, 3)
        assert (basis.occupations.sum(axis=1) == 4).all()

    def test_deterministic_ordering(self):
        a = enumerate_basis(5, 2)
        b = enumerate_basis(5, 2)
        assert np.array_equal(a.occupations, b.occupations)
        # lexicographic: first vector has everything in the first mode slot
        first = a.occupations[0]
        assert first.max() == 5

    def test_rejects_oversized_basis(self):
        with pytest.raises(ValueError):
            enumerate_basis(100, 4, max_dim=1000)


class TestHopping:
    def test_single_spin_half(self):
        # l=1/2: sqrt(3/4 + 1/4) = 1, a single 2x2 off-diagonal pair
        sigma = build_hopping(enumerate_basis(1, 1)).matrix
        np.testing.assert_allclose(sigma, [[0.0, 1.0], [1.0, 0.0]],
                                   atol=1e-15)

    def test_single_spin_one_amplitudes(self):
        # both hops of l=1 carry sqrt(2)
        sigma = build_hopping(enumerate_basis(1, 2)).matrix
        off = sigma[sigma != 0.0]
        np.testing.assert_allclose(off, np.sqrt(2.0))

    def test_bosonic_enhancement(self):
        # <(1,1)|Sigma|(2,0)> = sqrt(l(l+1)-m(m+1)) * sqrt(2*1) = sqrt(2)
        basis = enumerate_basis(2, 1)
        sigma = build_hopping(basis).matrix
        i = basis.index[(1, 1)]
        j = basis.index[(2, 0)]
        assert sigma[i, j] == pytest.approx(np.sqrt(2.0))

    def test_connects_single_hops_only(self):
        basis = enumerate_basis(3, 2)
        sigma = build_hopping(basis).matrix
        occ = basis.occupations
        for i in range(basis.dim):
            for j in range(basis.dim):
                if sigma[i, j] != 0.0:
                    diff = occ[i] - occ[j]
                    assert np.abs(diff).sum() == 2

    def test_hermitian(self):
        sigma = build_hopping(enumerate_basis(4, 2)).matrix
        assert np.abs(sigma - sigma.T).max() < 1e-12

    @pytest.mark.parametrize("n_sites,two_l", [(4, 3), (3, 2), (5, 1)])
    def test_row_sum_bound(self, n_sites, two_l):
        # sqrt(n(n'+1)) + sqrt(n'(n+1)) <= n + n' + 1 (AM-GM), and the
        # bond occupations sum to at most 2N + 2l across a row
        sigma = build_hopping(enumerate_basis(n_sites, two_l)).matrix
        l = two_l / 2.0
        bound = 2.0 * np.sqrt(l * (l + 1.0)) * (n_sites + l)
        assert np.abs(sigma).sum(axis=1).max() <= bound + 1e-12

    def test_hop_amplitudes_values(self):
        # l=1: c_m = sqrt(2 - m(m+1)) for m = -1, 0
        np.testing.assert_allclose(hop_amplitudes(2),
                                   [np.sqrt(2.0), np.sqrt(2.0)])


class TestFreeHamiltonian:
    def test_diagonal_at_zero_field(self):
        basis = enumerate_basis(1, 2)
        h = build_free_hamiltonian(basis, params_for(2, 1, h=0.0)).matrix
        # modes (-1, 0, 1): -(J/l) m^2 = (-J, 0, -J)
        np.testing.assert_allclose(np.diag(h), [-1.0, 0.0, -1.0],
                                   atol=1e-15)
        assert np.abs(h - np.diag(np.diag(h))).max() == 0.0

    def test_pure_hopping_at_zero_j(self):
        basis = enumerate_basis(2, 2)
        p = params_for(2, 2, h=0.7, J=0.0)
        h_free = build_free_hamiltonian(basis, p).matrix
        sigma = build_hopping(basis).matrix
        np.testing.assert_allclose(h_free, -0.7 * sigma, atol=1e-15)

    def test_two_bosons_top_mode_energy(self):
        basis = enumerate_basis(2, 2)
        p = params_for(2, 2, h=0.0)
        h_free = build_free_hamiltonian(basis, p).matrix
        i = basis.index[(0, 0, 2)]
        assert h_free[i, i] == pytest.approx(-2.0)  # -(J/l) * 2 * 1


class TestSz:
    def test_diagonal_values(self):
        basis = enumerate_basis(2, 2)
        sz = sz_diagonal(basis)
        i = basis.index[(0, 0, 2)]
        j = basis.index[(1, 0, 1)]
        assert sz[i] == pytest.approx(2.0)
        assert sz[j] == pytest.approx(0.0)

    def test_matches_operator(self):
        basis = enumerate_basis(3, 1)
        np.testing.assert_allclose(np.diag(build_sz(basis).matrix),
                                   sz_diagonal(basis))


class TestParity:
    def test_single_boson_swap(self):
        basis = enumerate_basis(1, 2)
        p = build_parity(basis).matrix
        up = np.zeros(3)
        up[basis.index[(0, 0, 1)]] = 1.0
        down = p @ up
        assert down[basis.index[(1, 0, 0)]] == pytest.approx(1.0)

    def test_involution(self):
        basis = enumerate_basis(3, 2)
        p = build_parity(basis).matrix
        np.testing.assert_allclose(p @ p, np.eye(basis.dim), atol=1e-15)

    def test_even_subspace_dimension_single_boson(self):
        basis = enumerate_basis(1, 2)
        assert even_sector_basis(basis).shape[1] == 2

    def test_commutes_with_hopping(self):
        basis = enumerate_basis(3, 2)
        p = build_parity(basis).matrix
        sigma = build_hopping(basis).matrix
        assert np.abs(sigma @ p - p @ sigma).max() < 1e-12

    def test_conjugation_flips_sz(self):
        basis = enumerate_basis(3, 2)
        p = build_parity(basis).matrix
        sz = build_sz(basis).matrix
        np.testing.assert_allclose(p @ sz @ p, -sz, atol=1e-12)

    def test_permutation_is_involution(self):
        basis = enumerate_basis(4, 3)
        perm = parity_permutation(basis)
        assert np.array_equal(perm[perm], np.arange(basis.dim))


class TestFullyUpState:
    def test_points_at_top_mode(self):
        basis = enumerate_basis(3, 2)
        psi = fully_up_state(basis)
        assert psi[basis.index[(0, 0, 3)]] == pytest.approx(1.0)
        assert np.linalg.norm(psi) == pytest.approx(1.0)


class TestEighContract:
    @pytest.mark.parametrize("builder", [build_hopping,
                                         build_sz, build_parity])
    def test_reconstruction(self, builder):
        basis = enumerate_basis(4, 2)
        a = builder(basis).matrix
        w, v = checked_eigh(a)
        recon = (v * w) @ v.conj().T
        scale = max(np.abs(a).max(), 1.0)
        assert np.abs(a - recon).max() < 1e-9 * scale
