"""Canonical defining polynomials for the F_{p^m} tower.

The shipped table covers p <= 13, m <= 12.  Because Conway polynomials are
norm-compatible down the subfield tower, the residue embedding
F_{p^n} -> F_{p^L} for n | L is pinned by t_n |-> t_L^((p^L-1)/(p^n-1));
subfield membership tests are therefore well defined across the package.

The table can be overridden with the DIEUDONNE_CONWAY_TABLE environment
variable pointing at a JSON file {"p,m": [c0, c1, ...]}.
"""

import json
import os

from ._conway_table import CONWAY_TABLE
from .errors import InputError

ENV_TABLE = "DIEUDONNE_CONWAY_TABLE"


def _load_override():
    path = os.environ.get(ENV_TABLE)
    if not path:
        return None
    try:
        with open(path) as fh:
            stored = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read Conway table override {path!r}: {exc}")
    return {tuple(map(int, k.split(","))): tuple(int(c) for c in v)
            for k, v in stored.items()}


def conway_polynomial(p, m):
    """Little-endian coefficient tuple of the Conway polynomial of F_{p^m}."""
    override = _load_override()
    table = override if override is not None else CONWAY_TABLE
    try:
        return table[(p, m)]
    except KeyError:
        raise InputError(
            f"no Conway polynomial for (p={p}, m={m}); "
            f"shipped table covers p <= 13, m <= 12")


def supported_pairs():
    return sorted(CONWAY_TABLE)
