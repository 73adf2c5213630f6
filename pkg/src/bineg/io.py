"""State files and report serialization.

State file layout::

    {"dims": [dA, dB], "re": [[...], ...], "im": [[...], ...]}

Rows are Alice-major. Reports are JSON with every float written to 17
significant digits and complex matrices split into ``re``/``im`` arrays.
"""

import json
import math

import numpy as np

from .config import DEFAULT
from .errors import StateFileError


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def decode_matrix(payload):
    re = np.asarray(payload["re"], dtype=float)
    im = np.asarray(payload.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape:
        raise StateFileError(f"re/im shapes differ: {re.shape} vs {im.shape}")
    return re + 1j * im


def state_payload(rho, dims):
    return {"dims": [int(dims[0]), int(dims[1])], **encode_matrix(rho)}


def parse_state(payload, tol=DEFAULT):
    """Decode a state-file mapping into ``(matrix, dims)``.

    Only the format is checked here (shape, finiteness, Hermiticity); use
    :func:`bineg.states.validate` for positivity and normalization.
    """
    if not isinstance(payload, dict):
        raise StateFileError("state file must hold a JSON object")
    try:
        dims = tuple(int(d) for d in payload["dims"])
        M = decode_matrix(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateFileError(f"malformed state file: {exc}") from None
    if len(dims) != 2 or min(dims) < 1:
        raise StateFileError(f"bad dims {payload['dims']!r}")
    n = dims[0] * dims[1]
    if M.shape != (n, n):
        raise StateFileError(f"matrix shape {M.shape} does not match dims {dims}")
    if n > 16:
        raise StateFileError("dimensions beyond 4x4 are not supported")
    if not np.all(np.isfinite(M)):
        raise StateFileError("non-finite matrix entry")
    diff = np.abs(M - M.conj().T)
    scale = max(float(np.max(np.abs(M))), 1.0)
    i, j = np.unravel_index(np.argmax(diff), diff.shape)
    if diff[i, j] > tol.herm * scale:
        raise StateFileError(
            f"not Hermitian: entries ({i},{j}) and ({j},{i}) differ by {diff[i, j]:.3e}"
        )
    return M, dims


def load_state(path, tol=DEFAULT):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"invalid JSON: {exc}") from None
    return parse_state(payload, tol)


def save_state(path, rho, dims):
    with open(path, "w") as fh:
        fh.write(dumps(state_payload(rho, dims)))
        fh.write("\n")


def _plain(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _plain(encode_matrix(obj))
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _emit(obj, indent, level, out):
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    if isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite number {obj!r} in report")
        text = format(obj, ".17g")
        if not any(ch in text for ch in ".en"):
            text += ".0"
        out.append(text)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + nl)
        for k, (key, val) in enumerate(obj.items()):
            out.append(pad + json.dumps(key) + ": ")
            _emit(val, indent, level + 1, out)
            out.append(("," if k < len(obj) - 1 else "") + nl)
        out.append(end + "}")
    elif isinstance(obj, list):
        # numeric rows stay on one line
        if not obj or all(not isinstance(v, (dict, list)) for v in obj):
            parts = []
            for v in obj:
                _emit(v, 0, 0, parts)
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[" + nl)
        for k, val in enumerate(obj):
            out.append(pad)
            _emit(val, indent, level + 1, out)
            out.append(("," if k < len(obj) - 1 else "") + nl)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with floats at 17 significant digits; numpy values allowed."""
    out = []
    _emit(_plain(obj), indent, 0, out)
    return "".join(out)
