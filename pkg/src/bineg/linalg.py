"""Dense complex linear algebra for small bipartite operators.

Matrices are plain ``numpy`` arrays. Bipartite operators carry their
subsystem dimensions separately as ``dims=(dA, dB)``, with the Alice-major
basis ordering ``index = a * dB + b``. Functions that act on operators
accept stacked inputs of shape ``(..., n, n)`` where that is cheap.
"""

import numpy as np

from .config import DEFAULT
from .errors import NonHermitianInput

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (np.eye(2, dtype=complex), SIGMA_X, SIGMA_Y, SIGMA_Z)
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)


def max_norm(H):
    return float(np.max(np.abs(H))) if np.size(H) else 0.0


def check_hermitian(H, tol=DEFAULT.herm):
    """Raise :class:`NonHermitianInput` unless ``H`` is Hermitian.

    The asymmetry is measured in max-norm relative to ``max|H|``.
    Returns ``H`` as a complex array.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim < 2 or H.shape[-1] != H.shape[-2]:
        raise NonHermitianInput(f"expected square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise NonHermitianInput("matrix has non-finite entries")
    scale = max(max_norm(H), 1.0)
    asym = max_norm(H - np.swapaxes(H, -1, -2).conj())
    if asym > tol * scale:
        raise NonHermitianInput(f"asymmetry {asym:.3e} exceeds {tol:.1e}")
    return H


def _fix_phases(vecs):
    # largest-magnitude component real nonnegative; near-ties go to lowest index
    mag = np.abs(vecs)
    top = mag.max(axis=-2, keepdims=True)
    idx = np.argmax(mag >= top - 1e-12, axis=-2)
    pivot = np.take_along_axis(vecs, idx[..., None, :], axis=-2)
    phase = np.where(np.abs(pivot) > 0, pivot / np.where(pivot == 0, 1, np.abs(pivot)), 1)
    return vecs * phase.conj()


def jacobi_eigh(H, max_sweeps=50, rel_tol=1e-26):
    """Cyclic complex Jacobi diagonalization of a single Hermitian matrix.

    Sweeps until the squared off-diagonal Frobenius mass drops below
    ``rel_tol`` times the squared Frobenius norm. Returns unsorted
    ``(eigenvalues, eigenvectors)``.
    """
    A = np.array(H, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    total = float(np.sum(np.abs(A) ** 2)) or 1.0
    for _ in range(max_sweeps):
        off = float(np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2))
        if off <= rel_tol * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                # negligible entries would overflow theta; their mass is far
                # below the convergence threshold
                if r < 1e-290 or r < 1e-18 * (abs(A[p, p]) + abs(A[q, q])):
                    continue
                phase = apq / r
                theta = (A[q, q].real - A[p, p].real) / (2.0 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # J = diag-phase * real rotation, A <- J^H A J
                J = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = A[:, [p, q]] @ J
                A[:, [p, q]] = cols
                A[[p, q], :] = J.conj().T @ A[[p, q], :]
                A[p, q] = A[q, p] = 0.0
                V[:, [p, q]] = V[:, [p, q]] @ J
    return np.real(np.diag(A)).copy(), V


def hermitian_eig(H, method="lapack", tol=DEFAULT.herm):
    """Eigendecomposition of a Hermitian matrix (or a stack of them).

    Parameters
    ----------
    H : array_like, shape (..., n, n)
    method : {"lapack", "jacobi"}
        ``"jacobi"`` runs the cyclic Jacobi solver and only handles a
        single matrix.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    v : ndarray
        Orthonormal eigenvectors as columns, each with its largest
        component made real and nonnegative.
    """
    H = check_hermitian(H, tol)
    if method == "lapack":
        w, v = np.linalg.eigh(H)
    elif method == "jacobi":
        if H.ndim != 2:
            raise ValueError("jacobi method handles one matrix at a time")
        w, v = jacobi_eigh(H)
        order = np.argsort(w, kind="stable")
        w, v = w[order], v[:, order]
    else:
        raise ValueError(f"unknown method {method!r}")
    return w, _fix_phases(v)


def eigvalsh(H):
    return np.linalg.eigvalsh(np.asarray(H, dtype=complex))


def partial_transpose(M, dims=(2, 2), side="B"):
    """Transpose the indices of one subsystem of a bipartite operator."""
    M = np.asarray(M)
    dA, dB = dims
    n = dA * dB
    if M.shape[-2:] != (n, n):
        raise ValueError(f"shape {M.shape} does not match dims {dims}")
    lead = M.shape[:-2]
    T = M.reshape(lead + (dA, dB, dA, dB))
    k = len(lead)
    axes = list(range(k))
    if side == "B":
        axes += [k, k + 3, k + 2, k + 1]
    elif side == "A":
        axes += [k + 2, k + 1, k, k + 3]
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return T.transpose(axes).reshape(M.shape)


def operator_abs(H):
    """``|H| = sum |w_i| v_i v_i^dagger``."""
    w, v = np.linalg.eigh(check_hermitian(H))
    return (v * np.abs(w)[..., None, :]) @ np.swapaxes(v, -1, -2).conj()


def trace_norm(H):
    return float(np.sum(np.abs(np.linalg.eigvalsh(check_hermitian(H)))))


def kron(X, Y):
    return np.kron(X, Y)


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def flip_operator(d=2):
    """Swap operator on ``d x d``."""
    V = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            V[b * d + a, a * d + b] = 1.0
    return V


def tilde_local(A):
    """Spin flip of a 2x2 operator, ``sigma_y A* sigma_y``."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ValueError(f"expected 2x2 matrix, got {A.shape}")
    return SIGMA_Y @ A.conj() @ SIGMA_Y


def tilde_state(psi):
    """Spin flip of a two-qubit vector, ``(sigma_y x sigma_y) psi*``."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise ValueError(f"expected 4-vector, got {psi.shape}")
    return SIGMA_YY @ psi.conj()


def reduced_states(rho, dims=(2, 2)):
    """Partial traces ``(Tr_B rho, Tr_A rho)``."""
    dA, dB = dims
    T = np.asarray(rho).reshape(dA, dB, dA, dB)
    return np.einsum("abcb->ac", T), np.einsum("abad->bd", T)


def schmidt_coefficients(psi, dims=(2, 2)):
    return np.linalg.svd(np.asarray(psi).reshape(dims), compute_uv=False)


def numerical_rank(H, rel=DEFAULT.rank_rel):
    w = np.linalg.eigvalsh(H)
    top = max(float(np.max(np.abs(w))), 0.0)
    if top == 0.0:
        return 0
    return int(np.sum(w > rel * top))
