"""Full product-space oracle tests and sector cross-validation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kickedspin import ModelParams
from kickedspin.bruteforce import (MAX_FULL_DIM, full_floquet_evolve,
                                   local_spin_matrices, symmetric_projector)
from kickedspin.floquet import build_floquet, evolve_stroboscopic
from kickedspin.fock import enumerate_basis


def params_for(two_l, N, **kw):
    base = dict(h=0.1, K=0.3, tau=0.6, phi=np.pi, J=1.0)
    base.update(kw)
    return ModelParams(two_l=two_l, N=N, **base)


def sector_curve(params, n_max):
    op = build_floquet(enumerate_basis(params.N, params.two_l), params)
    return evolve_stroboscopic(op, None, n_max).values


class TestLocalSpinMatrices:
    def test_spin_half_is_pauli_over_two(self):
        sx, sz = local_spin_matrices(1)
        np.testing.assert_allclose(sx, [[0.0, 0.5], [0.5, 0.0]])
        np.testing.assert_allclose(sz, [[0.5, 0.0], [0.0, -0.5]])

    @pytest.mark.parametrize("two_l", [1, 2, 3, 4])
    def test_casimir(self, two_l):
        sx, sz = local_spin_matrices(two_l)
        sy = -1j * (sz @ sx - sx @ sz)
        casimir = sx @ sx + sy @ sy + sz @ sz
        l = two_l / 2.0
        np.testing.assert_allclose(casimir, l * (l + 1.0) * np.eye(two_l + 1),
                                   atol=1e-12)

    def test_fully_up_is_index_zero(self):
        _, sz = local_spin_matrices(3)
        assert sz[0, 0] == pytest.approx(1.5)


class TestAgainstSector:
    # the sector engine and the oracle share no operator-construction code,
    # so agreement here certifies the bosonic mapping end to end
    def test_model1_matches_sector_spin_one(self):
        p = params_for(2, 2)
        dev = np.abs(full_floquet_evolve(p, 100).values - sector_curve(p, 100))
        assert dev.max() < 1e-10

    def test_model1_matches_sector_spin_half(self):
        p = params_for(1, 3, h=0.25, K=0.4)
        dev = np.abs(full_floquet_evolve(p, 100).values - sector_curve(p, 100))
        assert dev.max() < 1e-10

    @settings(max_examples=15, deadline=None)
    @given(h=st.floats(0.0, 0.5), K=st.floats(0.0, 0.5),
           tau=st.floats(0.3, 1.0))
    def test_model1_matches_sector_random_params(self, h, K, tau):
        p = ModelParams(two_l=2, N=2, h=h, K=K, tau=tau, phi=np.pi, J=1.0)
        dev = np.abs(full_floquet_evolve(p, 40).values - sector_curve(p, 40))
        assert dev.max() < 1e-10


class TestModelTwo:
    def test_spin_half_grouping_matches_model1_at_doubled_k(self):
        # with one spin-1/2 per site the (sigma^x)^2 self term is constant,
        # so model 2 at 2K reproduces model 1 at K identically
        p1 = params_for(1, 2, K=0.3)
        p2 = params_for(1, 2, K=0.6)
        v1 = full_floquet_evolve(p1, 60, model=1).values
        v2 = full_floquet_evolve(p2, 60, model=2).values
        np.testing.assert_allclose(v2, v1, atol=1e-12)

    def test_trivial_flip(self):
        p = params_for(2, 2, h=0.0, K=0.0)
        rec = full_floquet_evolve(p, 50, model=2)
        np.testing.assert_allclose(rec.values, 1.0, atol=1e-10)

    def test_order_parameter_starts_at_l(self):
        p = params_for(3, 1, K=0.2)
        rec = full_floquet_evolve(p, 1, model=2)
        assert rec.values[0] == pytest.approx(1.5)


class TestGuards:
    def test_model1_dimension_cap(self):
        with pytest.raises(ValueError):
            full_floquet_evolve(params_for(4, 8), 1)  # 5^8 > 4096

    def test_model2_dimension_cap(self):
        with pytest.raises(ValueError):
            full_floquet_evolve(params_for(4, 4), 1, model=2)  # 2^16 > 4096

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            full_floquet_evolve(params_for(1, 2), 1, model=3)


class TestSymmetricProjector:
    def test_is_orthogonal_projector(self):
        proj = symmetric_projector(3, 3)
        np.testing.assert_allclose(proj, proj.T, atol=1e-14)
        np.testing.assert_allclose(proj @ proj, proj, atol=1e-13)

    def test_rank_is_sector_dimension(self):
        # trace of a projector = dimension of its range = C(N + d - 1, d - 1)
        proj = symmetric_projector(3, 4)
        assert np.trace(proj) == pytest.approx(math.comb(6, 3))

    def test_evolution_preserves_symmetric_subspace(self):
        # the fully-up state is symmetric and both Hamiltonian pieces are
        # permutation invariant, so the evolved state must stay in range(P)
        p = params_for(2, 3, K=0.4)
        proj = symmetric_projector(3, 3)
        from kickedspin.bruteforce import _model1_operators

        h_free, g, _ = _model1_operators(p)
        wf, vf = np.linalg.eigh(h_free)
        wg, vg = np.linalg.eigh(g)
        u = (vf * np.exp(-1j * wf * p.tau)) @ vf.T @ (vg * np.exp(-1j * wg)) @ vg.T
        psi = np.zeros(27, dtype=complex)
        psi[0] = 1.0
        for _ in range(10):
            psi = u @ psi
        np.testing.assert_allclose(proj @ psi, psi, atol=1e-10)
