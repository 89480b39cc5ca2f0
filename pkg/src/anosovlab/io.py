"""Representation files, run reports and CSV tables.

Representation files are JSON. Floats are written with Python's shortest
round-trip repr, so load(save(rep)) reproduces every matrix entry bit for
bit. Complex entries are [re, im] pairs; real files hold plain numbers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .exterior import SymplecticStructure
from .representations import Representation, make_representation
from .words import presentation_from_dict, presentation_to_dict

SCHEMA = "anosovlab.representation/1"


def atomic_write(path, data) -> None:
    """Write bytes or text to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def file_digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _encode_matrix(M: np.ndarray, field: str) -> list:
    if field == "complex":
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]
    M = np.asarray(M)
    if np.iscomplexobj(M):
        if np.any(M.imag != 0):
            raise ValueError("complex entries in a real representation")
        M = M.real
    if np.issubdtype(M.dtype, np.integer):
        return [[int(x) for x in row] for row in M]
    return [[float(x) for x in row] for row in M]


def _decode_matrix(rows, field: str) -> np.ndarray:
    if field == "complex":
        return np.array([[complex(e[0], e[1]) if isinstance(e, list) else complex(e) for e in row]
                         for row in rows])
    if any(isinstance(e, list) for row in rows for e in row):
        raise ValueError("[re, im] entries in a real representation file")
    if all(isinstance(e, int) for row in rows for e in row):
        return np.array(rows, dtype=np.int64)
    return np.array(rows, dtype=float)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def representation_to_dict(rep: Representation) -> dict:
    return {
        "schema": SCHEMA,
        "presentation": presentation_to_dict(rep.presentation),
        "field": rep.field,
        "dimension": rep.dim,
        "generators": [_encode_matrix(A, rep.field) for A in rep.images],
        "inverses": [_encode_matrix(B, rep.field) for B in rep.inverses],
        "form": None if rep.structure is None else _encode_matrix(rep.structure.form, "real"
                                                                   if not np.iscomplexobj(rep.structure.form)
                                                                   else "complex"),
        "provenance": _jsonable(rep.provenance),
    }


def representation_from_dict(data: dict, validate: bool = True) -> Representation:
    if data.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {data.get('schema')!r}")
    P = presentation_from_dict(data["presentation"])
    field = data["field"]
    images = [_decode_matrix(m, field) for m in data["generators"]]
    d = int(data["dimension"])
    if any(A.shape != (d, d) for A in images):
        raise ValueError("generator matrices do not match the declared dimension")
    inverses = [_decode_matrix(m, field) for m in data["inverses"]] if data.get("inverses") else None
    form = data.get("form")
    structure = None
    if form is not None:
        structure = SymplecticStructure(_decode_matrix(form, "complex" if any(
            isinstance(e, list) for row in form for e in row) else "real"))
    return make_representation(P, images, structure=structure, provenance=data.get("provenance") or {},
                               field=field, inverses=inverses, validate=validate)


def dumps_representation(rep: Representation) -> str:
    return json.dumps(representation_to_dict(rep), indent=1) + "\n"


def save_representation(rep: Representation, path) -> None:
    atomic_write(path, dumps_representation(rep))


def load_representation(path, validate: bool = True) -> Representation:
    return representation_from_dict(json.loads(Path(path).read_text()), validate=validate)


def dumps_report(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=1, sort_keys=True) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()
