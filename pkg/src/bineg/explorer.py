"""Monte Carlo verification suites, the binegative-state search and plane sections.

Samples are keyed by ``(seed, index)`` and processed in fixed-size chunks;
chunk results are merged in index order, so reports do not depend on the
number of worker threads.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .binegativity import binegativity, check_positivity, negative_decomposition, summary
from .certificates import certify, nonpositivity_witness
from .config import DEFAULT
from .errors import CertificateFailure, DegeneratePlane, NotEntangled
from .io import parse_state, state_payload
from .linalg import partial_transpose, projector
from .normal_form import filter_normal_form
from .states import random_state

CHUNK = 256
MAX_EXEMPLARS = 10

CERT_MIN_KEYS = (
    "trCCstar_minus_2",
    "lambda0_minus_lambda",
    "x_min_eig",
    "ptb_min_eig",
    "hyperplane_overlap",
    "p0_below_half",
)
CERT_MAX_KEYS = ("recombination_error", "normal_form_residual", "expectation_error")


def worker_count(threads=None):
    """Worker count from the argument or ``BINEG_THREADS`` (default 1)."""
    if threads is None:
        env = os.environ.get("BINEG_THREADS")
        if env is None:
            return 1
        try:
            threads = int(env)
        except ValueError:
            raise ValueError(f"BINEG_THREADS must be a positive integer, got {env!r}") from None
    if threads < 1:
        raise ValueError(f"thread count must be positive, got {threads}")
    return threads


def _map_chunks(fn, count, threads):
    chunks = [range(s, min(s + CHUNK, count)) for s in range(0, count, CHUNK)]
    if threads == 1 or len(chunks) <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


class _Extremes:
    """Running minima/maxima with the index where they occurred (earliest wins ties)."""

    def __init__(self):
        self.data = {}

    def low(self, key, value, index):
        cur = self.data.get(key)
        if cur is None or value < cur["value"]:
            self.data[key] = {"value": float(value), "index": int(index), "kind": "min"}

    def high(self, key, value, index):
        cur = self.data.get(key)
        if cur is None or value > cur["value"]:
            self.data[key] = {"value": float(value), "index": int(index), "kind": "max"}

    def merge(self, other):
        for key, rec in other.data.items():
            (self.low if rec["kind"] == "min" else self.high)(key, rec["value"], rec["index"])

    def as_dict(self):
        return {k: dict(v) for k, v in sorted(self.data.items())}


@dataclass
class VerificationReport:
    spec: object
    tolerances: object
    counts: dict
    worst: dict
    exemplars: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def violations(self):
        return self.counts["violations"]

    @property
    def ok(self):
        return self.violations == 0

    def to_dict(self):
        return {
            "schema": "bineg-verification/1",
            "spec": self.spec.to_dict(),
            "tolerances": self.tolerances.as_dict(),
            "counts": dict(self.counts),
            "worst_margins": self.worst,
            "exemplars": self.exemplars,
            "wall_time": self.wall_time,
        }


def verify_ensemble(spec, tol=DEFAULT, threads=None, certify_limit=None):
    """Check the two-qubit positivity statements on every sample of ``spec``.

    Parameters
    ----------
    spec : EnsembleSpec
        Must have ``dims == (2, 2)``.
    certify_limit : int, optional
        Build certificates only for the first ``certify_limit`` entangled
        samples in index order. ``None`` certifies all of them.
    """
    if spec.dims != (2, 2):
        raise ValueError("verification suites are two-qubit only")
    threads = worker_count(threads)
    start = time.perf_counter()

    def positivity(indices):
        ext = _Extremes()
        c = dict(total=0, entangled=0, ppt=0, ppt_pass=0, rank_pass=0, bineg_pass=0,
                 ppt_fixed_point=0, summary_mismatch=0)
        entangled, bad = [], []
        for i in indices:
            rho = random_state(spec, i)
            flags = check_positivity(rho, tol)
            summ = summary(rho, spec.dims, tol)
            c["total"] += 1
            c["bineg_pass"] += flags.bineg_pass
            ext.low("bineg_min_eig", flags.bineg_margin, i)
            if summ.is_ppt == flags.entangled:
                c["summary_mismatch"] += 1
            ok = flags.bineg_pass
            if flags.entangled:
                c["entangled"] += 1
                c["ppt_pass"] += flags.ppt_pass
                c["rank_pass"] += bool(flags.rank_pass)
                ext.low("ppt_min_eig", flags.ppt_margin, i)
                spec_p = flags.p_spectrum
                ext.low("rank_third_eig_ratio", spec_p[-3] / spec_p[-1], i)
                entangled.append(i)
                ok = ok and flags.ppt_pass and flags.rank_pass
            else:
                c["ppt"] += 1
                dev = float(np.max(np.abs(binegativity(rho) - rho)))
                ext.high("ppt_binegativity_deviation", dev, i)
                if dev <= tol.psd:
                    c["ppt_fixed_point"] += 1
                else:
                    ok = False
            if not ok:
                bad.append((i, "positivity"))
        return c, ext, entangled, bad

    parts = _map_chunks(positivity, spec.count, threads)
    counts = dict(total=0, entangled=0, ppt=0, ppt_pass=0, rank_pass=0, bineg_pass=0,
                  ppt_fixed_point=0, summary_mismatch=0)
    ext = _Extremes()
    entangled, bad = [], []
    for c, e, ent, b in parts:
        for k in counts:
            counts[k] += c[k]
        ext.merge(e)
        entangled += ent
        bad += b

    targets = entangled if certify_limit is None else entangled[:certify_limit]

    def certificates(positions):
        e = _Extremes()
        passed, failed = 0, []
        for pos in positions:
            i = targets[pos]
            try:
                cert = certify(random_state(spec, i), tol)
            except CertificateFailure as exc:
                failed.append((i, exc.invariant))
                continue
            except NotEntangled:
                failed.append((i, "not_entangled"))
                continue
            passed += 1
            for key in CERT_MIN_KEYS:
                e.low("cert_" + key, cert.margins[key], i)
            for key in CERT_MAX_KEYS:
                if key in cert.margins:
                    e.high("cert_" + key, cert.margins[key], i)
        return passed, e, failed

    counts["certified"] = len(targets)
    counts["certificate_pass"] = 0
    for passed, e, failed in _map_chunks(certificates, len(targets), threads):
        counts["certificate_pass"] += passed
        ext.merge(e)
        bad += [(i, "certificate:" + why) for i, why in failed]

    bad.sort()
    counts["violations"] = len(bad)
    exemplars = []
    for i, why in bad[:MAX_EXEMPLARS]:
        exemplars.append({"index": i, "reason": why,
                          "state": state_payload(random_state(spec, i), spec.dims)})
    return VerificationReport(
        spec=spec, tolerances=tol, counts=counts, worst=ext.as_dict(),
        exemplars=exemplars, wall_time=time.perf_counter() - start,
    )


# -- higher-dimensional search --------------------------------------------

@dataclass
class SearchRecord:
    spec: object
    tolerances: object
    samples: int
    binegative_count: int
    midpoint_nonpositive_count: int
    ppt_count: int
    exemplars: list
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "schema": "bineg-search/1",
            "spec": self.spec.to_dict(),
            "tolerances": self.tolerances.as_dict(),
            "dims": list(self.spec.dims),
            "samples": self.samples,
            "binegative_count": self.binegative_count,
            "midpoint_nonpositive_count": self.midpoint_nonpositive_count,
            "ppt_count": self.ppt_count,
            "exemplars": self.exemplars,
            "wall_time": self.wall_time,
        }


def binegativity_margins(rho, dims):
    """``(min eig of binegativity, min eig of the midpoint rho/2 + binegativity/2)``."""
    B = binegativity(rho, dims)
    return float(np.linalg.eigvalsh(B)[0]), float(np.linalg.eigvalsh((rho + B) / 2)[0])


def search_binegative(spec, tol=DEFAULT, threads=None, max_exemplars=MAX_EXEMPLARS):
    """Count binegative states in an ensemble and keep the most violating ones.

    Half of the exemplar slots go to the smallest binegativity eigenvalues,
    the other half to the smallest midpoint eigenvalues among binegative
    states; leftover slots are filled by binegativity order.
    """
    threads = worker_count(threads)
    start = time.perf_counter()
    thr = tol.binegative

    def scan(indices):
        found, ppt = [], 0
        for i in indices:
            rho = random_state(spec, i)
            if np.linalg.eigvalsh(partial_transpose(rho, spec.dims))[0] >= -tol.psd:
                ppt += 1
                continue
            bmin, mmin = binegativity_margins(rho, spec.dims)
            if bmin < -thr:
                found.append((bmin, mmin, i))
        return found, ppt

    found, ppt = [], 0
    for f, p in _map_chunks(scan, spec.count, threads):
        found += f
        ppt += p
    mid_bad = sum(1 for _, m, _ in found if m < -thr)

    by_bineg = sorted(found, key=lambda r: (r[0], r[2]))
    by_mid = sorted((r for r in found if r[1] < -thr), key=lambda r: (r[1], r[2]))
    half = max_exemplars // 2
    chosen = []
    for rec in by_bineg[:half] + by_mid[: max_exemplars - half] + by_bineg:
        if len(chosen) >= max_exemplars:
            break
        if rec not in chosen:
            chosen.append(rec)
    exemplars = [
        {
            "index": i,
            "bineg_min_eig": b,
            "midpoint_min_eig": m,
            "state": state_payload(random_state(spec, i), spec.dims),
        }
        for b, m, i in sorted(chosen, key=lambda r: r[2])
    ]
    return SearchRecord(
        spec=spec, tolerances=tol, samples=spec.count, binegative_count=len(found),
        midpoint_nonpositive_count=mid_bad, ppt_count=ppt, exemplars=exemplars,
        wall_time=time.perf_counter() - start,
    )


def reverify_exemplar(exemplar, tol=DEFAULT):
    """Recompute the margins of a stored exemplar from its state payload."""
    rho, dims = parse_state(exemplar["state"], tol)
    bmin, mmin = binegativity_margins(rho, dims)
    return bmin < -tol.binegative, bmin, mmin


# -- plane sections ---------------------------------------------------------

def hs_inner(X, Y):
    return float(np.vdot(X, Y).real)


@dataclass
class SectionGrid:
    """Classification of ``center + x dir1 + y dir2`` on a square grid.

    ``positive`` and ``ppt`` are boolean arrays indexed ``[iy, ix]``.
    """

    center: np.ndarray
    dir1: np.ndarray
    dir2: np.ndarray
    dims: tuple
    radius: float
    resolution: int
    xs: np.ndarray
    ys: np.ndarray
    positive: np.ndarray
    ppt: np.ndarray

    def coordinates(self, op):
        """Hilbert-Schmidt coordinates of ``op - center`` in the plane."""
        delta = np.asarray(op) - self.center
        return hs_inner(self.dir1, delta), hs_inner(self.dir2, delta)

    def operator(self, x, y):
        return self.center + x * self.dir1 + y * self.dir2

    def rows(self):
        for iy, y in enumerate(self.ys):
            for ix, x in enumerate(self.xs):
                yield x, y, int(self.positive[iy, ix]), int(self.ppt[iy, ix])

    def to_csv(self):
        lines = ["x,y,positive,ppt"]
        lines += [f"{x:.17g},{y:.17g},{p},{q}" for x, y, p, q in self.rows()]
        return "\n".join(lines) + "\n"

    def to_svg(self, cell=4):
        colors = {
            (1, 1): "#2b8cbe",
            (1, 0): "#fdae61",
            (0, 1): "#a6d96a",
            (0, 0): "#eeeeee",
        }
        labels = {(1, 1): "positive and PPT", (1, 0): "positive only",
                  (0, 1): "PPT only", (0, 0): "neither"}
        n = self.resolution
        size = n * cell
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 160}" height="{max(size, 90)}">']
        for iy in range(n):
            for ix in range(n):
                key = (int(self.positive[iy, ix]), int(self.ppt[iy, ix]))
                # y grows upward
                out.append(
                    f'<rect x="{ix * cell}" y="{(n - 1 - iy) * cell}" width="{cell}" '
                    f'height="{cell}" fill="{colors[key]}"/>'
                )
        for k, key in enumerate(colors):
            y = 10 + 20 * k
            out.append(f'<rect x="{size + 10}" y="{y}" width="12" height="12" fill="{colors[key]}"/>')
            out.append(f'<text x="{size + 28}" y="{y + 11}" font-size="11">{labels[key]}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _orthonormalize(d1, d2, tol):
    d1 = np.asarray(d1, dtype=complex)
    d2 = np.asarray(d2, dtype=complex)
    d1 = (d1 + d1.conj().T) / 2
    d2 = (d2 + d2.conj().T) / 2
    n1 = np.sqrt(hs_inner(d1, d1))
    if n1 <= tol.plane:
        raise DegeneratePlane("first direction vanishes")
    e1 = d1 / n1
    r = d2 - hs_inner(e1, d2) * e1
    n2 = np.sqrt(hs_inner(r, r))
    if n2 <= tol.plane * max(1.0, np.sqrt(hs_inner(d2, d2))):
        raise DegeneratePlane("directions are linearly dependent")
    return e1, r / n2


def classify(ops, dims, tol=DEFAULT):
    """``(positive, ppt)`` flags for a stack of Hermitian operators."""
    ops = np.asarray(ops)
    positive = np.linalg.eigvalsh(ops)[..., 0] >= -tol.psd
    ppt = np.linalg.eigvalsh(partial_transpose(ops, dims))[..., 0] >= -tol.psd
    return positive, ppt


def cross_section(center, dir1, dir2, radius=1.0, resolution=101, dims=(2, 2), tol=DEFAULT):
    """Classify a square grid of operators in the plane through ``center``."""
    center = np.asarray(center, dtype=complex)
    e1, e2 = _orthonormalize(dir1, dir2, tol)
    xs = np.linspace(-radius, radius, resolution)
    ys = np.linspace(-radius, radius, resolution)
    X, Y = np.meshgrid(xs, ys)
    ops = center + X[..., None, None] * e1 + Y[..., None, None] * e2
    positive, ppt = classify(ops, dims, tol)
    return SectionGrid(center=center, dir1=e1, dir2=e2, dims=tuple(dims), radius=radius,
                       resolution=resolution, xs=xs, ys=ys, positive=positive, ppt=ppt)


def default_plane(rho, tol=DEFAULT):
    """Center and directions of the natural section through an entangled two-qubit state.

    The center is ``P^{T_B}``; ``dir1`` points from it to ``rho`` (so the
    state, its binegativity and ``X`` all lie on the first axis) and
    ``dir2`` is the traceless part of the nonpositivity witness
    ``|phi><phi|`` made orthogonal to ``dir1``.
    """
    d = negative_decomposition(rho, (2, 2), tol)
    if d.is_ppt:
        raise DegeneratePlane("no default plane for a PPT state")
    center = partial_transpose(d.P)
    nf = filter_normal_form(d.P, tol)
    phi, _ = nonpositivity_witness(nf)
    witness = projector(phi) - np.eye(4) / 4
    return center, rho - center, witness
