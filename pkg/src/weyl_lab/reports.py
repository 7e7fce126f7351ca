"""Deterministic report serialization (CSV and JSON).

Identical inputs must produce byte-identical files, so everything is pinned:
floats print with 17 significant digits (enough to round-trip IEEE-754
doubles), JSON objects sort their keys, newlines are always ``\\n``, and
non-finite floats map to JSON null / CSV text deterministically.
"""

import math
import os

import numpy as np

from .errors import FormatError, ResourceError

ESTIMATE_COLUMNS = ("n", "variant", "p", "best_value", "ratio_sqrt",
                    "ratio_log", "witness_ref")


def format_float(x: float) -> str:
    """17-significant-digit decimal form; round-trips every double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _json_escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def dump_json(obj, indent: int = 0) -> str:
    """Canonical JSON: sorted keys, pinned float formatting, no whitespace
    variance.  Non-finite floats serialize as null (JSON has no nan/inf)."""
    pad = " " * indent
    inner = " " * (indent + 2)
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return format_float(x)
    if isinstance(obj, str):
        return '"' + _json_escape(obj) + '"'
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dump_json(v, indent + 2) for v in obj]
        return "[\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        keys = sorted(obj)
        for k in keys:
            if not isinstance(k, str):
                raise FormatError(f"JSON object keys must be strings, got {k!r}")
        items = [inner + '"' + _json_escape(k) + '": '
                 + dump_json(obj[k], indent + 2) for k in keys]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise FormatError(f"cannot serialize {type(obj).__name__} to JSON")


def write_json(path, obj) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(dump_json(obj))
            fh.write("\n")
    except OSError as exc:
        raise ResourceError(f"cannot write report {path}: {exc}") from exc


def write_csv(path, header, rows) -> None:
    """Plain CSV with pinned float formatting.  Fields must not contain
    commas or newlines (all report fields are numbers or short tokens)."""
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return format_float(v)
        s = str(v)
        if "," in s or "\n" in s:
            raise FormatError(f"CSV field may not contain separators: {s!r}")
        return s

    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(cell(v) for v in row) + "\n")
    except OSError as exc:
        raise ResourceError(f"cannot write report {path}: {exc}") from exc


def witness_sidecar_path(report_path: str) -> str:
    stem, _ = os.path.splitext(report_path)
    return stem + ".witnesses.json"


def write_estimates_csv(path, records) -> str:
    """Estimate table plus a JSON sidecar holding the full witnesses.

    The ``witness_ref`` column points into the sidecar (``<file>#<key>``);
    an empty record list still produces the header row and an empty sidecar.
    Returns the sidecar path.
    """
    sidecar = witness_sidecar_path(path)
    rows = []
    witnesses = {}
    for i, rec in enumerate(records, 1):
        key = "w%04d" % i
        witnesses[key] = rec.witness
        rows.append((rec.n, rec.variant, rec.p, rec.best_value,
                     rec.ratio_sqrt, rec.ratio_log,
                     os.path.basename(sidecar) + "#" + key))
    write_csv(path, ESTIMATE_COLUMNS, rows)
    write_json(sidecar, witnesses)
    return sidecar


def read_estimates_csv(path):
    """Rows of an estimate table as dicts; raises FormatError on malformed
    input (missing columns, non-numeric fields)."""
    try:
        with open(path, "r", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read estimates {path}: {exc}") from exc
    if not lines:
        raise FormatError(f"{path}: empty file (missing header)")
    header = lines[0].split(",")
    if tuple(header) != ESTIMATE_COLUMNS:
        raise FormatError(
            f"{path}: expected header {','.join(ESTIMATE_COLUMNS)!r}, "
            f"got {lines[0]!r}")
    out = []
    for ln, line in enumerate(lines[1:], 2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(ESTIMATE_COLUMNS):
            raise FormatError(f"{path}:{ln}: expected "
                              f"{len(ESTIMATE_COLUMNS)} fields, got {len(parts)}")
        try:
            out.append({
                "n": int(parts[0]),
                "variant": parts[1],
                "p": float(parts[2]),
                "best_value": float(parts[3]),
                "ratio_sqrt": float(parts[4]),
                "ratio_log": float(parts[5]),
                "witness_ref": parts[6],
            })
        except ValueError as exc:
            raise FormatError(f"{path}:{ln}: {exc}") from exc
        if out[-1]["variant"] not in ("sng", "mon", "full"):
            raise FormatError(f"{path}:{ln}: unknown variant "
                              f"{out[-1]['variant']!r}")
    return out
