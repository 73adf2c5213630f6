"""Density matrices: validation, named families and random ensembles."""

import warnings
import zlib
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT
from .errors import InvalidProbabilityVector, NotNormalizable, NotPSD
from .linalg import check_hermitian, projector

_S = 1 / np.sqrt(2)

PSI_MINUS = np.array([0, _S, -_S, 0], dtype=complex)
PSI_PLUS = np.array([0, _S, _S, 0], dtype=complex)
PHI_MINUS = np.array([_S, 0, 0, -_S], dtype=complex)
PHI_PLUS = np.array([_S, 0, 0, _S], dtype=complex)

#: Bell basis in the fixed order psi-, psi+, phi-, phi+ (columns).
BELL_BASIS = np.column_stack([PSI_MINUS, PSI_PLUS, PHI_MINUS, PHI_PLUS])
BELL_NAMES = ("psi-", "psi+", "phi-", "phi+")


class RenormalizedWarning(UserWarning):
    """Input trace was off by more than the tolerance and got rescaled."""


def validate(M, dims=None, tol=DEFAULT):
    """Check that ``M`` is a density matrix and return it with unit trace.

    Raises
    ------
    NonHermitianInput, NotNormalizable, NotPSD
    """
    M = check_hermitian(M, tol.herm)
    n = M.shape[0]
    if dims is not None and dims[0] * dims[1] != n:
        raise ValueError(f"dims {dims} do not match matrix size {n}")
    M = (M + M.conj().T) / 2
    tr = float(np.trace(M).real)
    if not tr > 0:
        raise NotNormalizable(f"trace {tr!r} is not positive")
    if abs(tr - 1.0) > tol.trace:
        warnings.warn(f"trace {tr!r} rescaled to 1", RenormalizedWarning, stacklevel=2)
        M = M / tr
    low = float(np.linalg.eigvalsh(M)[0])
    if low < -tol.psd:
        raise NotPSD(f"minimum eigenvalue {low:.3e} below -{tol.psd:.0e}")
    return M


def bell_state(i):
    """Projector on the ``i``-th Bell vector of :data:`BELL_BASIS`."""
    return projector(BELL_BASIS[:, i])


def bell_diagonal(p0, p1, p2, p3, tol=DEFAULT):
    p = np.array([p0, p1, p2, p3], dtype=float)
    if np.any(p < -tol.trace) or abs(p.sum() - 1.0) > tol.trace:
        raise InvalidProbabilityVector(f"not a probability vector: {p.tolist()}")
    return (BELL_BASIS * p) @ BELL_BASIS.conj().T


def werner(p):
    """``p |psi-><psi-| + (1 - p) I/4`` for ``-1/3 <= p <= 1``."""
    if not -1 / 3 - 1e-15 <= p <= 1 + 1e-15:
        raise InvalidProbabilityVector(f"Werner parameter {p} outside [-1/3, 1]")
    return p * bell_state(0) + (1 - p) * np.eye(4) / 4


def sigma_c(a, b, c, d):
    """Unnormalized member of the degenerate normal-form family.

    Not guaranteed to be positive; run it through :func:`validate`.
    """
    return 0.5 * np.array(
        [
            [a + c, 0, 0, d],
            [0, 0, 0, 0],
            [0, 0, b - c, 0],
            [d, 0, 0, a - b],
        ],
        dtype=complex,
    )


# -- random ensembles -------------------------------------------------------

KINDS = ("hs", "haar", "rank")


@dataclass(frozen=True)
class EnsembleSpec:
    """Seeded random-state ensemble.

    ``kind`` is ``"hs"`` (Hilbert-Schmidt), ``"haar"`` (Haar pure states)
    or ``"rank"`` (rank-``k`` Ginibre factors).
    """

    dims: tuple = (2, 2)
    kind: str = "hs"
    seed: int = 42
    count: int = 1
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.dims) != 2 or min(self.dims) < 1:
            raise ValueError(f"bad dims {self.dims}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        n = self.dims[0] * self.dims[1]
        if self.kind == "rank" and not (self.k and 1 <= self.k <= n):
            raise ValueError(f"rank ensemble needs 1 <= k <= {n}, got {self.k}")

    @property
    def n(self):
        return self.dims[0] * self.dims[1]

    @property
    def columns(self):
        return {"hs": self.n, "haar": 1, "rank": self.k}[self.kind]

    @property
    def stream_tag(self):
        label = f"{self.kind}:{self.dims[0]}x{self.dims[1]}:{self.columns}"
        return zlib.crc32(label.encode())

    def to_dict(self):
        return {"dims": list(self.dims), "kind": self.kind, "seed": self.seed,
                "count": self.count, "k": self.k}


def gaussian_stream(seed, stream_tag, index, size):
    """``size`` standard normals for sample ``index``.

    Philox-4x64 keyed by ``(seed, stream_tag)`` with the sample index in
    the second counter word, so samples never share counter blocks.
    Uniforms take the top 53 bits of each raw word; normals come from
    Box-Muller.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream_tag], dtype=np.uint64)
    counter = np.array([0, index, 0, 0], dtype=np.uint64)
    bits = np.random.Philox(key=key, counter=counter)
    m = (size + 1) // 2
    raw = bits.random_raw(2 * m).astype(np.uint64)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53  # (0, 1]
    u1, u2 = u[:m], u[m:]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
    return z[:size]


def ginibre(spec, index):
    """Complex Gaussian factor ``G`` of shape ``(n, columns)``."""
    n, k = spec.n, spec.columns
    z = gaussian_stream(spec.seed, spec.stream_tag, index, 2 * n * k)
    return (z[: n * k] + 1j * z[n * k:]).reshape(n, k)


def random_state(spec, index):
    """Sample ``index`` of the ensemble, ``G G^dagger / Tr(G G^dagger)``.

    Depends only on ``(spec.seed, spec.kind, spec.dims, spec.k, index)``.
    """
    if not 0 <= index < spec.count:
        raise IndexError(f"index {index} outside ensemble of size {spec.count}")
    G = ginibre(spec, index)
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real
