"""JSON matrix/sequence files and report writers.

Matrix file: ``{"n": 3, "rows": [[...], [...], [...]]}``.
Sequence file: ``{"n": 3, "matrices": [rows, rows, ...]}`` or a generator
spec ``{"generator": {...GeneratorSpec fields...}}``.
"""
import csv
import json
import sys

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .sources import ArraySequence
from .stochastic import EPS_ROW, validate


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(obj):
    # float repr is the shortest string that round-trips exactly
    return json.dumps(obj, indent=2, default=_default, allow_nan=True)


def load_json(path):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def write_json(path, obj):
    text = dumps(obj)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def write_csv(path, header, rows):
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _check_n(obj, arr):
    if "n" in obj and int(obj["n"]) != arr.shape[-1]:
        raise DimensionMismatch(f"declared n={obj['n']} but matrices have size {arr.shape[-1]}")


def matrix_from_json(obj, eps_row=EPS_ROW, renormalize=False):
    if "rows" not in obj:
        raise ValidationError("matrix file needs a 'rows' field")
    arr = np.asarray(obj["rows"], dtype=np.float64)
    _check_n(obj, arr)
    return validate(arr, eps_row=eps_row, renormalize=renormalize)


def sequence_from_json(obj, eps_row=EPS_ROW, renormalize=False):
    """Build a sequence from a parsed sequence file or generator spec."""
    if "generator" in obj:
        from .growth import GeneratedSequence, GeneratorSpec

        return GeneratedSequence(GeneratorSpec.from_dict(obj["generator"]))
    if "matrices" in obj:
        arr = np.asarray(obj["matrices"], dtype=np.float64)
        if arr.ndim != 3:
            raise ValidationError("'matrices' must be a list of square row arrays")
    elif "rows" in obj:
        arr = np.asarray([obj["rows"]], dtype=np.float64)
    else:
        raise ValidationError("sequence file needs 'matrices', 'rows' or 'generator'")
    _check_n(obj, arr)
    if renormalize:
        arr = np.stack([validate(m, renormalize=True).entries for m in arr])
    return ArraySequence(arr, eps_row=eps_row)


def sequence_to_json(seq):
    return {"n": seq.n, "matrices": seq.stack(0, len(seq)).tolist()}
