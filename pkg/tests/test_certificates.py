import numpy as np
import pytest

from bineg.binegativity import binegativity, negative_decomposition
from bineg.certificates import (
    c_matrix,
    certify,
    hyperplane_overlap,
    lambda_bound,
    nonpositivity_witness,
    psi_minus_resolvent,
    x_operator,
    x_prime_target,
    x_prime_terms,
)
from bineg.errors import NotEntangled, P0TooLarge
from bineg.linalg import partial_transpose, projector, tilde_local
from bineg.normal_form import NormalForm, filter_normal_form, kernel_state
from bineg.states import BELL_BASIS, bell_diagonal, werner
from conftest import random_density, random_sl2
from oracles import BELL, proj

SINGLET = proj(BELL["psi-"])


def rank3_normal_form(rng, p0_max=0.5):
    while True:
        p = np.sort(rng.dirichlet(np.ones(3)))[::-1]
        if p[0] < p0_max:
            break
    p = np.append(p, 0.0)
    return NormalForm(A=random_sl2(rng), B=random_sl2(rng), p=p, N=rng.uniform(0.5, 2),
                      kind="bell", residual=0.0, iterations=0)


def identity_form(p):
    return NormalForm(A=np.eye(2, dtype=complex), B=np.eye(2, dtype=complex), p=np.asarray(p),
                      N=1.0, kind="bell", residual=0.0, iterations=0)


class TestBuildingBlocks:
    def test_tilde_identity(self, rng):
        for _ in range(10):
            A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            np.testing.assert_allclose(tilde_local(A).conj().T @ A, np.linalg.det(A) * np.eye(2),
                                       atol=1e-12)

    def test_witness_identity_filters(self):
        phi, L = nonpositivity_witness(identity_form([0.4, 0.3, 0.3, 0.0]))
        assert L == pytest.approx(1)
        assert abs(np.vdot(phi, BELL["phi+"])) == pytest.approx(1)

    def test_c_matrix_identity_filters(self):
        C, H1, H2, trcc = c_matrix(identity_form([0.4, 0.3, 0.3, 0.0]))
        np.testing.assert_allclose(C, np.eye(2), atol=1e-15)
        assert trcc == pytest.approx(2)

    def test_trccstar_at_least_two(self, rng):
        for _ in range(200):
            _, _, _, trcc = c_matrix(rank3_normal_form(rng))
            assert trcc >= 2 - 1e-10

    def test_witness_overlap_formula(self, rng):
        for _ in range(50):
            nf = rank3_normal_form(rng)
            psi, M = kernel_state(nf)
            phi, L = nonpositivity_witness(nf)
            _, _, _, trcc = c_matrix(nf)
            assert hyperplane_overlap(psi, phi) == pytest.approx(trcc / (4 * M * L), rel=1e-10)

    def test_kernel_of_reconstruction(self, rng):
        for _ in range(20):
            nf = rank3_normal_form(rng)
            psi, _ = kernel_state(nf)
            assert np.max(np.abs(nf.reconstruct() @ psi)) < 1e-12


class TestLambdaBound:
    def test_identity_filters(self):
        nf = identity_form([0.4, 0.3, 0.3, 0.0])
        assert lambda_bound(nf, 1.0) == pytest.approx(0.2)

    def test_p0_too_large(self):
        with pytest.raises(P0TooLarge):
            lambda_bound(identity_form([0.5, 0.3, 0.2, 0.0]), 1.0)
        with pytest.raises(P0TooLarge):
            lambda_bound(identity_form([0.7, 0.2, 0.1, 0.0]), 1.0)


class TestXOperator:
    def test_terms_sum_to_target(self, rng):
        for _ in range(50):
            nf = rank3_normal_form(rng)
            psi, M = kernel_state(nf)
            lam0 = lambda_bound(nf, M)
            P = nf.reconstruct()
            X = partial_transpose(P) + lam0 * partial_transpose(projector(psi))
            t1, t2 = x_prime_terms(nf)
            np.testing.assert_allclose(t1 + t2, x_prime_target(nf, X), atol=1e-9)
            assert np.linalg.eigvalsh(t1)[0] >= -1e-12
            assert np.linalg.eigvalsh(t2)[0] >= -1e-9
            assert np.linalg.eigvalsh(X)[0] >= -1e-9

    def test_resolvent_half(self, rng):
        for _ in range(100):
            assert psi_minus_resolvent(rank3_normal_form(rng)) == pytest.approx(0.5, abs=1e-12)

    def test_inner_operator_psd(self, rng):
        from bineg.linalg import flip_operator

        for _ in range(50):
            C, *_ = c_matrix(rank3_normal_form(rng))
            Ct = tilde_local(C)
            inner = np.kron(Ct.conj().T @ Ct, np.eye(2)) + flip_operator(2)
            assert np.linalg.eigvalsh(inner)[0] >= -1e-9 * np.abs(inner).max()

    def test_x_operator_needs_single_negative(self):
        with pytest.raises(ValueError):
            x_operator(negative_decomposition(werner(0.1)), 0.1)


class TestHyperplaneOverlap:
    def test_anchors(self):
        assert hyperplane_overlap(BELL["phi+"], BELL["phi+"]) == pytest.approx(0.5)
        assert hyperplane_overlap(BELL["phi+"], BELL["psi-"]) == pytest.approx(-0.5)


class TestCertify:
    def test_singlet(self):
        cert = certify(SINGLET)
        assert cert.lam == pytest.approx(0.5, abs=1e-12)
        assert cert.lambda0 == pytest.approx(0.5, abs=1e-10)
        np.testing.assert_allclose(cert.X, np.eye(4) / 2, atol=1e-10)
        assert cert.weights[1] == pytest.approx(1, abs=1e-10)
        assert not cert.regularized

    @pytest.mark.parametrize("p", [0.4, 0.6, 0.9])
    def test_werner(self, p):
        cert = certify(werner(p))
        lam = (3 * p - 1) / 4
        assert cert.lam == pytest.approx(lam, abs=1e-10)
        assert cert.lambda0 == pytest.approx((1 + p) / 4, abs=1e-10)
        B = binegativity(werner(p))
        np.testing.assert_allclose(cert.weights[0] * partial_transpose(negative_decomposition(werner(p)).P)
                                   + cert.weights[1] * cert.X, B, atol=1e-9)

    def test_werner_half(self):
        cert = certify(werner(0.5))
        assert cert.lam == pytest.approx(1 / 8, abs=1e-12)
        assert cert.lambda0 == pytest.approx(3 / 8, abs=1e-10)
        np.testing.assert_allclose(cert.weights, (2 / 3, 1 / 3), atol=1e-10)

    def test_random_states(self, rng):
        done = 0
        while done < 50:
            rho = random_density(rng)
            try:
                cert = certify(rho)
            except NotEntangled:
                continue
            done += 1
            m = cert.margins
            assert m["trCCstar_minus_2"] >= -1e-10
            assert m["lambda0_minus_lambda"] >= -1e-10
            assert m["x_min_eig"] >= -1e-9
            assert m["recombination_error"] <= 1e-9
            assert m["hyperplane_overlap"] > 0

    def test_pure_state_positive_part_rank_three(self):
        # an NPT two-qubit partial transpose is full rank, so P has rank 3
        rho = projector(np.array([0.8, 0, 0, 0.6], dtype=complex))
        d = negative_decomposition(rho)
        assert np.sum(np.linalg.eigvalsh(d.P) > 1e-12) == 3
        cert = certify(rho)
        assert not cert.regularized
        assert cert.lam == pytest.approx(0.48, abs=1e-12)

    def test_ppt_rejected(self):
        with pytest.raises(NotEntangled):
            certify(bell_diagonal(0.4, 0.3, 0.2, 0.1))

    def test_to_dict(self):
        d = certify(SINGLET).to_dict()
        assert set(d) >= {"lambda", "lambda0", "weights", "margins", "regularized"}


def test_bell_basis_columns_orthonormal():
    np.testing.assert_allclose(BELL_BASIS.conj().T @ BELL_BASIS, np.eye(4), atol=1e-15)


def test_filter_round_trip_of_positive_part(rng):
    rho = random_density(rng)
    d = negative_decomposition(rho)
    nf = filter_normal_form(d.P)
    np.testing.assert_allclose(nf.reconstruct(), d.P, atol=1e-9)
