"""Module file format: JSON with p, m, N, h, F, and an optional basis.

Entries are WittElement serializations (per-coefficient little-endian
base-p digit lists; fraction-field entries wrap them with a shift).  The
round trip load(save(M)) == M is bit-exact.  See docs/formats.md.
"""

import json

from .errors import InputError
from .isocrystal import DieudonneModule, IsocrystalAmbient
from .linalg import PadicMatrix
from .wittring import WittElement, make_witt_ring

SCHEMA_VERSION = 1


def module_to_json(M):
    amb = M.ambient
    doc = {
        "schema_version": SCHEMA_VERSION,
        "p": amb.ring.p,
        "m": amb.ring.m,
        "N": amb.ring.N,
        "h": amb.h,
        "F": [[a.to_json() for a in row] for row in amb.F.rows],
    }
    ident = PadicMatrix.identity(amb.ring, amb.h)
    if M.basis != ident:
        doc["basis"] = [[a.to_json() for a in row] for row in M.basis.rows]
    return doc


def module_from_json(doc, *, check=True):
    try:
        p, m, N, h = (int(doc[k]) for k in ("p", "m", "N", "h"))
        F_rows = doc["F"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed module document: {exc}")
    ring = make_witt_ring(p, m, N)
    if len(F_rows) != h or any(len(r) != h for r in F_rows):
        raise InputError("F must be an h x h array")
    F = PadicMatrix(ring, [[WittElement.from_json(ring, e) for e in row]
                           for row in F_rows])
    ambient = IsocrystalAmbient(ring, F)
    basis = None
    if "basis" in doc:
        rows = doc["basis"]
        if len(rows) != h or any(len(r) != h for r in rows):
            raise InputError("basis must be an h x h array")
        basis = PadicMatrix(ring, [[WittElement.from_json(ring, e)
                                    for e in row] for row in rows])
    return DieudonneModule(ambient, basis, check=check)


def save_module(M, path):
    with open(path, "w") as fh:
        json.dump(module_to_json(M), fh, sort_keys=True)
        fh.write("\n")


def load_module(path, *, check=True):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read module file {path!r}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path!r}: {exc}")
    return module_from_json(doc, check=check)
