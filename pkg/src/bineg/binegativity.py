"""Negative-part decomposition of the partial transpose and derived quantities."""

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT
from .errors import DegenerateNegativeSpectrum, NotEntangled
from .linalg import (
    hermitian_eig,
    numerical_rank,
    operator_abs,
    partial_transpose,
    projector,
    schmidt_coefficients,
)


@dataclass
class NegativeDecomposition:
    """``rho^{T_B} = P - sum_i lam_i |psi_i><psi_i|``.

    ``negatives`` holds ``(lam_i, psi_i)`` pairs with ``lam_i > 0`` sorted
    by decreasing ``lam_i``. ``spectrum`` is the raw ascending spectrum of
    the partial transpose.
    """

    P: np.ndarray
    negatives: list
    dims: tuple
    spectrum: np.ndarray

    @property
    def is_ppt(self):
        return not self.negatives

    @property
    def lam(self):
        return self.negatives[0][0] if self.negatives else 0.0

    @property
    def psi(self):
        return self.negatives[0][1] if self.negatives else None

    def negative_part(self):
        n = self.P.shape[0]
        out = np.zeros((n, n), dtype=complex)
        for lam, psi in self.negatives:
            out += lam * projector(psi)
        return out

    def reconstruct(self):
        return self.P - self.negative_part()


@dataclass
class EntanglementSummary:
    negativity: float
    log_negativity: float
    is_ppt: bool
    lam: float
    bineg_min_eig: float

    def to_dict(self):
        return {
            "negativity": self.negativity,
            "log_negativity": self.log_negativity,
            "is_ppt": self.is_ppt,
            "lambda": self.lam,
            "bineg_min_eig": self.bineg_min_eig,
        }


@dataclass
class PositivityFlags:
    """Per-state margins for the two-qubit positivity statements.

    ``ppt_margin`` is the minimum eigenvalue of ``P^{T_B}``; for entangled
    input it must be strictly positive. ``p_rank`` is ``None`` for PPT
    input, where the rank statement does not apply.
    """

    entangled: bool
    ppt_margin: float
    ppt_pass: bool
    p_rank: int | None
    rank_pass: bool | None
    bineg_margin: float
    bineg_pass: bool
    p_spectrum: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "entangled": self.entangled,
            "ppt_margin": self.ppt_margin,
            "ppt_pass": self.ppt_pass,
            "p_rank": self.p_rank,
            "rank_pass": self.rank_pass,
            "bineg_margin": self.bineg_margin,
            "bineg_pass": self.bineg_pass,
            "p_spectrum": self.p_spectrum.tolist(),
        }


def negative_decomposition(rho, dims=(2, 2), tol=DEFAULT):
    """Split ``rho^{T_B}`` at zero into its positive part and negative terms.

    Eigenvalues within ``tol.zero_band`` of zero are assigned to ``P`` as
    exact zeros.
    """
    w, v = hermitian_eig(partial_transpose(rho, dims), tol=tol.herm)
    keep = w > tol.zero_band
    P = (v[:, keep] * w[keep]) @ v[:, keep].conj().T
    neg = np.flatnonzero(w < -tol.zero_band)
    if tuple(dims) == (2, 2) and np.sum(w < -tol.psd) >= 2:
        raise DegenerateNegativeSpectrum(
            f"two-qubit partial transpose has negative eigenvalues {w[w < -tol.psd].tolist()}"
        )
    negatives = [(float(-w[i]), v[:, i].copy()) for i in neg]
    return NegativeDecomposition(P=P, negatives=negatives, dims=tuple(dims), spectrum=w)


def binegativity(rho, dims=(2, 2)):
    """``|rho^{T_B}|^{T_B}``."""
    return partial_transpose(operator_abs(partial_transpose(rho, dims)), dims)


def negativity(rho, dims=(2, 2)):
    w = np.linalg.eigvalsh(partial_transpose(rho, dims))
    return float(-np.sum(w[w < 0]))


def summary(rho, dims=(2, 2), tol=DEFAULT):
    w = np.linalg.eigvalsh(partial_transpose(rho, dims))
    neg = float(-np.sum(w[w < 0]))
    lam = float(-w[0]) if w[0] < 0 else 0.0
    bmin = float(np.linalg.eigvalsh(binegativity(rho, dims))[0])
    return EntanglementSummary(
        negativity=neg,
        log_negativity=float(np.log2(np.sum(np.abs(w)))),
        is_ppt=neg <= tol.psd,
        lam=lam if neg > tol.psd else 0.0,
        bineg_min_eig=bmin,
    )


def separable_approximation(rho, tol=DEFAULT):
    """Split an entangled two-qubit state as ``(1+lam) S - lam W``.

    Returns ``(S, W, lam)`` with ``S = P^{T_B}/(1+lam)`` the separable
    approximation and ``W = (|psi><psi|)^{T_B}`` the entanglement witness
    (not scaled by ``lam``).
    """
    d = negative_decomposition(rho, (2, 2), tol)
    if d.is_ppt or d.lam <= tol.psd:
        raise NotEntangled("state has a positive partial transpose")
    lam, psi = d.lam, d.psi
    approx = partial_transpose(d.P) / (1 + lam)
    witness = partial_transpose(projector(psi))
    low = np.linalg.eigvalsh(d.P / (1 + lam))[0]
    if low < -tol.psd:
        raise ArithmeticError(f"positive part has eigenvalue {low:.3e}")
    return approx, witness, lam


def check_positivity(rho, tol=DEFAULT):
    """Measure the two-qubit margins for a single state (never raises on failure)."""
    d = negative_decomposition(rho, (2, 2), tol)
    entangled = not d.is_ppt and d.lam > tol.psd
    PTB = partial_transpose(d.P)
    ppt_min = float(np.linalg.eigvalsh(PTB)[0])
    p_spec = np.linalg.eigvalsh(d.P)
    if entangled:
        ppt_pass = ppt_min > 0
        rank = numerical_rank(d.P, tol.rank_rel)
        rank_pass = rank == 3
        psi_ok = schmidt_coefficients(d.psi).min() > 1e-8
        ppt_pass = ppt_pass and psi_ok
    else:
        ppt_pass = ppt_min >= -tol.psd
        rank, rank_pass = None, None
    bineg_min = float(np.linalg.eigvalsh(binegativity(rho))[0])
    return PositivityFlags(
        entangled=entangled,
        ppt_margin=ppt_min,
        ppt_pass=bool(ppt_pass),
        p_rank=rank,
        rank_pass=rank_pass,
        bineg_margin=bineg_min,
        bineg_pass=bineg_min >= -tol.psd,
        p_spectrum=p_spec,
    )
