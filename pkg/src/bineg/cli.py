"""Command-line front end.

Exit codes: 0 success, 1 property violation found, 2 input or flag error,
3 numerical failure. Errors print one ``error: <kind>: <message>`` line on
stderr.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .binegativity import check_positivity, negative_decomposition, summary
from .certificates import certify
from .config import DEFAULT, Tolerances
from .errors import BinegError, NonConvergent, NotEntangled, StateFileError
from .explorer import cross_section, default_plane, search_binegative, verify_ensemble
from .io import dumps, load_state
from .linalg import numerical_rank
from .normal_form import filter_normal_form
from .states import EnsembleSpec, validate

SCHEMA = "bineg-analysis/1"


class UsageError(Exception):
    pass


def _dims(text):
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 2x2, got {text!r}") from None
    if a < 1 or b < 1:
        raise argparse.ArgumentTypeError("dims must be positive")
    return a, b


def _ensemble(text):
    kind, _, k = text.lower().partition(":")
    if kind in ("hs", "hilbert-schmidt"):
        return "hs", None
    if kind == "haar":
        return "haar", None
    if kind == "rank" and k.isdigit():
        return "rank", int(k)
    raise argparse.ArgumentTypeError(f"ensemble must be hs, haar or rank:K, got {text!r}")


def _tolerances(args):
    tol = DEFAULT
    if getattr(args, "tolerances", None):
        with open(args.tolerances) as fh:
            data = json.load(fh)
        tol = Tolerances.from_dict(data.get("tolerances", data))
    if getattr(args, "tol", None) is not None:
        if not args.tol > 0:
            raise UsageError(f"--tol must be positive, got {args.tol}")
        tol = Tolerances.from_dict({**tol.as_dict(), "psd": args.tol, "binegative": args.tol})
    return tol


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def analysis_report(rho, dims, tol=DEFAULT):
    """Full analysis of one state as a JSON-ready dict."""
    w = np.linalg.eigvalsh(rho)
    report = {
        "schema": SCHEMA,
        "version": __version__,
        "input": {"dims": list(dims), "trace": float(np.trace(rho).real), "min_eig": float(w[0])},
        "summary": summary(rho, dims, tol).to_dict(),
    }
    decomp = negative_decomposition(rho, dims, tol)
    report["decomposition"] = {
        "pt_spectrum": decomp.spectrum,
        "p_spectrum": np.linalg.eigvalsh(decomp.P),
        "p_rank": numerical_rank(decomp.P, tol.rank_rel),
        "negatives": [lam for lam, _ in decomp.negatives],
    }
    if tuple(dims) == (2, 2):
        report["positivity"] = check_positivity(rho, tol).to_dict()
        nf = filter_normal_form(decomp.P, tol)
        report["normal_form"] = nf.to_dict()
        try:
            cert = certify(rho, tol)
        except NotEntangled:
            report["certificate"] = {"applicable": False}
        else:
            report["certificate"] = {"applicable": True, **cert.to_dict()}
    report["tolerances"] = tol.as_dict()
    return report


def cmd_analyze(args):
    tol = _tolerances(args)
    M, dims = load_state(args.state, tol)
    rho = validate(M, dims, tol)
    _write(dumps(analysis_report(rho, dims, tol)) + "\n", args.out)
    return 0


def _spec(args):
    kind, k = args.ensemble
    if args.n < 0:
        raise UsageError("--n must be nonnegative")
    return EnsembleSpec(dims=args.dims, kind=kind, k=k, seed=args.seed, count=args.n)


def cmd_verify(args):
    tol = _tolerances(args)
    if args.dims != (2, 2):
        raise UsageError("verify supports --dims 2x2 only")
    spec = _spec(args)
    report = verify_ensemble(spec, tol, args.threads, certify_limit=args.certify_limit)
    out = report.to_dict()
    out["version"] = __version__
    _write(dumps(out) + "\n", args.out)
    return 0 if report.ok else 1


def cmd_search(args):
    tol = _tolerances(args)
    record = search_binegative(_spec(args), tol, args.threads)
    out = record.to_dict()
    out["version"] = __version__
    _write(dumps(out) + "\n", args.out)
    return 0


def cmd_section(args):
    tol = _tolerances(args)
    M, dims = load_state(args.state, tol)
    rho = validate(M, dims, tol)
    if dims != (2, 2):
        raise UsageError("section needs a two-qubit state")
    if args.grid < 2 or not args.radius > 0:
        raise UsageError("--grid must be >= 2 and --radius positive")
    try:
        center, d1, d2 = default_plane(rho, tol)
    except BinegError:
        # PPT input: plane through the state along two fixed traceless directions
        center = rho
        d1 = np.diag([1, -1, -1, 1]).astype(complex)
        d2 = np.kron(np.array([[0, 1], [1, 0]]), np.array([[0, 1], [1, 0]])).astype(complex)
    grid = cross_section(center, d1, d2, args.radius, args.grid, dims, tol)
    _write(grid.to_csv(), args.out)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(grid.to_svg())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="bineg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, help="PSD / binegativity threshold override")
        p.add_argument("--tolerances", help="JSON file with a full tolerance block")
        p.add_argument("--out", "-o", default="-", help="output path (default stdout)")

    p = sub.add_parser("analyze", help="analyze one state file")
    p.add_argument("state")
    common(p)
    p.set_defaults(func=cmd_analyze)

    for name, func, dims in (("verify", cmd_verify, (2, 2)), ("search", cmd_search, (3, 3))):
        p = sub.add_parser(name)
        p.add_argument("--dims", type=_dims, default=dims)
        p.add_argument("--ensemble", type=_ensemble, default=("hs", None))
        p.add_argument("--n", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--threads", type=int, default=None)
        common(p)
        p.set_defaults(func=func)
    sub.choices["verify"].add_argument("--certify-limit", type=int, default=None)

    p = sub.add_parser("section", help="export a plane section as CSV")
    p.add_argument("--state", required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--svg")
    common(p)
    p.set_defaults(func=cmd_section)
    return parser


def _fail(kind, exc, code):
    msg = " ".join(str(exc).split())
    print(f"error: {kind}: {msg}", file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, StateFileError, OSError, json.JSONDecodeError) as exc:
        return _fail("input", exc, 2)
    except (NonConvergent, ArithmeticError) as exc:
        return _fail("numerical", exc, 3)
    except (BinegError, ValueError) as exc:
        return _fail("input", exc, 2)


if __name__ == "__main__":
    sys.exit(main())
