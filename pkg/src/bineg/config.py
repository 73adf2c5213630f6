"""Numerical tolerances used across the package."""

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """All comparison thresholds in one record.

    Hermiticity and reconstruction checks are relative to the max-norm of
    the input. PSD slack (``psd``) is absolute and assumes unit trace.
    """

    herm: float = 1e-12
    psd: float = 1e-10
    zero_band: float = 1e-12
    rank_rel: float = 1e-10
    trace: float = 1e-12
    decomposition: float = 1e-10
    normal_form: float = 1e-9
    kernel_p3: float = 1e-9
    det: float = 1e-10
    trccstar: float = 1e-10
    lambda_bound: float = 1e-10
    x_psd: float = 1e-9
    recombination: float = 1e-9
    p0_margin: float = 1e-12
    binegative: float = 1e-10
    filter_converge: float = 1e-13
    filter_max_iter: int = 100_000
    stall_window: int = 50
    stall_improvement: float = 1e-14
    regularize_eps: float = 1e-8
    plane: float = 1e-12

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        tol = replace(cls(), **data)
        tol.check()
        return tol

    def check(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"tolerance {f.name} must be positive, got {value!r}")
        return self


DEFAULT = Tolerances()
