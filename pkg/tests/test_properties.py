import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bineg.binegativity import binegativity, negative_decomposition
from bineg.linalg import (
    hermitian_eig,
    operator_abs,
    partial_transpose,
    tilde_local,
    tilde_state,
)
from oracles import pt_loops

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.builds(lambda a, b: a + 1j * b, arrays(float, shape, elements=finite),
                     arrays(float, shape, elements=finite))


def hermitian(n):
    return complex_arrays((n, n)).map(lambda M: (M + M.conj().T) / 2)


def density(n):
    return complex_arrays((n, n)).filter(lambda G: np.linalg.norm(G) > 1e-3).map(
        lambda G: (G @ G.conj().T) / np.trace(G @ G.conj().T).real
    )


dims_st = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)])


@given(dims_st.flatmap(lambda d: st.tuples(st.just(d), complex_arrays((d[0] * d[1],) * 2),
                                           complex_arrays((d[0] * d[1],) * 2), finite)))
def test_partial_transpose_linear(args):
    dims, X, Y, a = args
    np.testing.assert_allclose(partial_transpose(a * X + Y, dims),
                               a * partial_transpose(X, dims) + partial_transpose(Y, dims),
                               atol=1e-9)


@given(dims_st.flatmap(lambda d: st.tuples(st.just(d), complex_arrays((d[0] * d[1],) * 2))))
def test_partial_transpose_involution_trace_oracle(args):
    dims, X = args
    T = partial_transpose(X, dims)
    assert np.array_equal(partial_transpose(T, dims), X)
    assert np.trace(T) == np.trace(X)
    assert np.array_equal(T, pt_loops(X, *dims))
    np.testing.assert_array_equal(partial_transpose(partial_transpose(X, dims, "A"), dims),
                                  X.T)


@given(hermitian(4))
def test_abs_squared(H):
    A = operator_abs(H)
    np.testing.assert_allclose(A @ A, H @ H, atol=1e-9 * max(1.0, np.abs(H).max() ** 2))
    assert np.linalg.eigvalsh(A)[0] >= -1e-9 * max(1.0, np.abs(H).max())


@given(hermitian(4))
def test_eig_methods_agree(H):
    w1, v1 = hermitian_eig(H)
    w2, _ = hermitian_eig(H, method="jacobi")
    scale = max(1.0, np.abs(H).max())
    np.testing.assert_allclose(w1, w2, atol=1e-10 * scale)
    np.testing.assert_allclose(v1.conj().T @ v1, np.eye(4), atol=1e-10)


@given(complex_arrays((2, 2)))
def test_tilde_identity(A):
    np.testing.assert_allclose(tilde_local(A).conj().T @ A, np.linalg.det(A) * np.eye(2),
                               atol=1e-9 * max(1.0, np.abs(A).max() ** 2))
    np.testing.assert_allclose(tilde_local(tilde_local(A)), A, atol=1e-12)


@given(complex_arrays((4,)), complex_arrays((2, 2)), complex_arrays((2, 2)))
def test_tilde_state_covariance(psi, A, B):
    # (A x B)|psi>~ = (A~ x B~)|psi~>
    lhs = tilde_state(np.kron(A, B) @ psi)
    rhs = np.kron(tilde_local(A), tilde_local(B)) @ tilde_state(psi)
    scale = max(1.0, np.abs(A).max() * np.abs(B).max() * np.abs(psi).max())
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * scale)


@settings(max_examples=50)
@given(density(4))
def test_two_qubit_binegativity_positive(rho):
    assert np.linalg.eigvalsh(binegativity(rho))[0] >= -1e-10


@settings(max_examples=50)
@given(density(4))
def test_positive_part_is_ppt(rho):
    d = negative_decomposition(rho)
    assert np.linalg.eigvalsh(partial_transpose(d.P))[0] >= -1e-10
