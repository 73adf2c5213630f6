"""Certificates that the binegativity of an entangled two-qubit state is positive.

For an entangled state the positive part ``P`` of its partial transpose
is put in normal form. From the normal form we build a nonpositivity
witness ``|phi>``, the bound ``lambda0 >= lambda`` and an operator ``X``
such that the binegativity is the convex combination

    (1 - lambda/lambda0) P^{T_B} + (lambda/lambda0) X

of two positive operators. Every inequality is checked numerically and
reported with its margin.
"""

from dataclasses import dataclass

import numpy as np

from .binegativity import binegativity, negative_decomposition
from .config import DEFAULT
from .errors import CertificateFailure, NotEntangled, P0TooLarge, RankAlready3
from .linalg import flip_operator, numerical_rank, partial_transpose, projector, tilde_local
from .normal_form import filter_normal_form, kernel_state, pt_in_normal_form, rank3_regularize
from .states import BELL_BASIS, PHI_PLUS, PSI_MINUS

FLIP = flip_operator(2)


@dataclass
class BinegativityCertificate:
    phi: np.ndarray
    psi: np.ndarray
    L: float
    M: float
    N: float
    C: np.ndarray
    trCCstar: float
    lam: float
    lambda0: float
    X: np.ndarray
    weights: tuple
    margins: dict
    hyperplane_overlap: float
    normal_form: object
    regularized: bool

    def to_dict(self):
        return {
            "lambda": self.lam,
            "lambda0": self.lambda0,
            "trCCstar": self.trCCstar,
            "L": self.L,
            "M": self.M,
            "N": self.N,
            "C": self.C,
            "weights": list(self.weights),
            "margins": dict(self.margins),
            "hyperplane_overlap": self.hyperplane_overlap,
            "regularized": self.regularized,
            "phi": self.phi,
            "psi": self.psi,
        }


def nonpositivity_witness(nf):
    """``|phi> = (A~ x B~*)|phi+> / sqrt(L)``; returns ``(phi, L)``."""
    v = np.kron(tilde_local(nf.A), tilde_local(nf.B).conj()) @ PHI_PLUS
    L = float(np.vdot(v, v).real)
    return v / np.sqrt(L), L


def c_matrix(nf):
    """``C = H1 H2`` with ``H1 = A~^dag A~`` and ``H2 = B~^T B~*``.

    Returns ``(C, H1, H2, Tr C C*)``.
    """
    At, Bt = tilde_local(nf.A), tilde_local(nf.B)
    H1 = At.conj().T @ At
    H2 = Bt.T @ Bt.conj()
    C = H1 @ H2
    return C, H1, H2, float(np.trace(C @ C.conj()).real)


def lambda_bound(nf, M, tol=DEFAULT):
    """Upper bound ``(1 - 2 p0) M / N`` on the negative eigenvalue weight."""
    p0 = nf.p[0]
    if p0 >= 0.5 - tol.p0_margin:
        raise P0TooLarge(f"p0 = {p0!r} is not below 1/2")
    return float((1 - 2 * p0) * M / nf.N)


def x_operator(decomp, lambda0):
    """``X = P^{T_B} + lambda0 (|psi><psi|)^{T_B}`` for a single negative term."""
    if len(decomp.negatives) != 1:
        raise ValueError("X needs exactly one negative eigenvalue")
    return partial_transpose(decomp.P) + lambda0 * partial_transpose(projector(decomp.psi))


def x_prime_terms(nf, lambda0=None):
    """The two positive pieces of the filtered operator ``X'``.

    ``term1 = 2 sum_{i<3} (p0 - p_{3-i}) |e_i><e_i|`` and
    ``term2 = (1 - 2 p0) (C x I)[C~^dag C~ x I + V](C^dag x I)``.
    ``lambda0`` is accepted for symmetry with the certificate pipeline;
    it only enters through ``p0``, ``M`` and ``N``.
    """
    p = nf.p
    coeff = np.array([2 * (p[0] - p[3 - i]) for i in range(3)] + [0.0])
    term1 = (BELL_BASIS * coeff) @ BELL_BASIS.conj().T
    C, *_ = c_matrix(nf)
    Ct = tilde_local(C)
    inner = np.kron(Ct.conj().T @ Ct, np.eye(2)) + FLIP
    K = np.kron(C, np.eye(2))
    term2 = (1 - 2 * p[0]) * (K @ inner @ K.conj().T)
    return term1, term2


def x_prime_target(nf, X):
    """``2N (A~^dag x B~^T) X (A~ x B~*)``, which must equal term1 + term2."""
    K = np.kron(tilde_local(nf.A), tilde_local(nf.B).conj())
    return 2 * nf.N * (K.conj().T @ X @ K)


def psi_minus_resolvent(nf):
    """``<psi-|[(C~^dag C~ + I) x I]^{-1}|psi->``, identically 1/2."""
    C, *_ = c_matrix(nf)
    Ct = tilde_local(C)
    R = np.kron(Ct.conj().T @ Ct + np.eye(2), np.eye(2))
    return float(np.vdot(PSI_MINUS, np.linalg.solve(R, PSI_MINUS)).real)


def hyperplane_overlap(psi, phi):
    """``Tr[(|psi><psi|)^{T_B} |phi><phi|]``."""
    W = partial_transpose(projector(psi))
    phi = np.asarray(phi, dtype=complex)
    return float(np.vdot(phi, W @ phi).real)


def certify(rho, tol=DEFAULT):
    """Build and check the certificate for an entangled two-qubit state.

    Raises
    ------
    NotEntangled
        If the state has a positive partial transpose.
    CertificateFailure
        If any certificate inequality fails; carries all margins so far.
    """
    decomp = negative_decomposition(rho, (2, 2), tol)
    if decomp.is_ppt or decomp.lam <= tol.psd:
        raise NotEntangled("state has a positive partial transpose")
    lam, psi = decomp.lam, decomp.psi
    margins = {}

    P = decomp.P
    regularized = False
    if numerical_rank(P, tol.rank_rel) < 3:
        try:
            P = rank3_regularize(P, psi, tol)
            regularized = True
        except RankAlready3:
            pass

    nf = filter_normal_form(P, tol)
    margins["normal_form_residual"] = nf.residual
    if nf.kind != "bell":
        raise CertificateFailure("normal_form_class", margins)
    margins["p3"] = float(nf.p[3])
    if nf.p[3] > tol.kernel_p3:
        raise CertificateFailure("rank3_normal_form", margins)

    psi_k, M = kernel_state(nf, tol)
    margins["kernel_overlap"] = float(abs(np.vdot(psi_k, psi)))
    if margins["kernel_overlap"] < 1 - 1e-9:
        raise CertificateFailure("kernel_state", margins)

    phi, L = nonpositivity_witness(nf)
    C, _, _, trcc = c_matrix(nf)
    margins["trCCstar_minus_2"] = trcc - 2
    if trcc < 2 - tol.trccstar:
        raise CertificateFailure("trCCstar", margins)

    margins["p0_below_half"] = 0.5 - float(nf.p[0])
    try:
        lambda0 = lambda_bound(nf, M, tol)
    except P0TooLarge:
        raise CertificateFailure("p0", margins) from None
    margins["lambda0_minus_lambda"] = float(lambda0 - lam)
    if not (0 < lam <= lambda0 + tol.lambda_bound):
        raise CertificateFailure("lambda_bound", margins)

    PTB = partial_transpose(decomp.P)
    X = x_operator(decomp, lambda0)
    margins["ptb_min_eig"] = float(np.linalg.eigvalsh(PTB)[0])
    margins["x_min_eig"] = float(np.linalg.eigvalsh(X)[0])
    if margins["ptb_min_eig"] <= 0:
        raise CertificateFailure("ptb_positive", margins)
    if margins["x_min_eig"] < -tol.x_psd:
        raise CertificateFailure("x_positive", margins)

    w = min(lam / lambda0, 1.0)
    weights = (1.0 - w, w)
    target = binegativity(rho)
    margins["recombination_error"] = float(np.max(np.abs(weights[0] * PTB + weights[1] * X - target)))
    if margins["recombination_error"] > tol.recombination:
        raise CertificateFailure("recombination", margins)

    overlap = hyperplane_overlap(psi, phi)
    margins["hyperplane_overlap"] = overlap
    if not overlap > 0:
        raise CertificateFailure("hyperplane_overlap", margins)

    if not regularized:
        expect = (1 - 2 * nf.p[0]) / (2 * nf.N * L) - lam * trcc / (4 * M * L)
        margins["expectation_error"] = float(abs(np.vdot(phi, rho @ phi).real - expect))
        if margins["expectation_error"] > tol.normal_form:
            raise CertificateFailure("witness_expectation", margins)

    return BinegativityCertificate(
        phi=phi, psi=psi, L=L, M=M, N=nf.N, C=C, trCCstar=trcc, lam=lam,
        lambda0=lambda0, X=X, weights=weights, margins=margins,
        hyperplane_overlap=overlap, normal_form=nf, regularized=regularized,
    )


__all__ = [
    "BinegativityCertificate",
    "c_matrix",
    "certify",
    "hyperplane_overlap",
    "lambda_bound",
    "nonpositivity_witness",
    "pt_in_normal_form",
    "psi_minus_resolvent",
    "x_operator",
    "x_prime_target",
    "x_prime_terms",
]
