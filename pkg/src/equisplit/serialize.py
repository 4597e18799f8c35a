"""Canonical structured-text (JSON) forms for the core objects.

All serializers are bit-exact round-trips: scalars are written as decimal
strings ("p/q" for non-integer rationals), orderings are fixed, and
hashes are SHA-256 of the canonical JSON encoding, so identical objects
always produce identical bytes.
"""

import hashlib
import json

from .complexes import Complex, Subcomplex
from .errors import ConfigError
from .fields import Field
from .groups import FiniteGroup, parse_cycles
from .idempotents import IdempotentSystem
from .linalg import Matrix


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:16]


# -- matrices ----------------------------------------------------------


def matrix_to_dict(m: Matrix) -> dict:
    return {
        "kind": "matrix",
        "field": m.field.tag,
        "rows": m.rows,
        "cols": m.cols,
        "entries": [m.field.to_str(a) for row in m.entries for a in row],
    }


def matrix_from_dict(data: dict) -> Matrix:
    if data.get("kind") != "matrix":
        raise ValueError("not a matrix record")
    field = Field.from_tag(data["field"])
    rows, cols = data["rows"], data["cols"]
    flat = [field.parse(s) for s in data["entries"]]
    if len(flat) != rows * cols:
        raise ValueError("entry count does not match dimensions")
    return Matrix(field, (flat[r * cols : (r + 1) * cols] for r in range(rows)), cols=cols)


# -- complexes ---------------------------------------------------------


def complex_to_dict(cx: Complex) -> dict:
    return {
        "kind": "complex",
        "cells": [
            {"dim": cx.dims[i], "vertices": sorted(cx.vertex_sets[i])}
            for i in range(cx.size)
        ],
        "facets": [list(pair) for pair in cx.facet_pairs()],
        "root": cx.root,
    }


def complex_from_dict(data: dict) -> Complex:
    if data.get("kind") != "complex":
        raise ValueError("not a complex record")
    dims = [c["dim"] for c in data["cells"]]
    vertex_sets = [frozenset(c["vertices"]) for c in data["cells"]]
    cx = Complex(dims, vertex_sets, root=data.get("root"))
    stored = {tuple(p) for p in data["facets"]}
    if stored != set(cx.facet_pairs()):
        raise ValueError("stored facet pairs disagree with the cell data")
    return cx


def complex_hash(cx: Complex) -> str:
    return content_hash(complex_to_dict(cx))


def subcomplex_to_dict(s: Subcomplex) -> dict:
    return {
        "kind": "subcomplex",
        "parent_hash": complex_hash(s.parent),
        "cells": sorted(s.cells),
        "convex_asserted": s.convex_asserted,
    }


def subcomplex_from_dict(data: dict, parent: Complex) -> Subcomplex:
    if data.get("kind") != "subcomplex":
        raise ValueError("not a subcomplex record")
    if data["parent_hash"] != complex_hash(parent):
        raise ValueError("subcomplex belongs to a different complex")
    return Subcomplex(parent, data["cells"], convex_asserted=data.get("convex_asserted", False))


# -- idempotent systems ------------------------------------------------


def system_to_dict(sys: IdempotentSystem) -> dict:
    return {
        "kind": "idempotent_system",
        "complex_hash": complex_hash(sys.complex),
        "field": sys.field.tag,
        "dim": sys.dim,
        "label": sys.label,
        "vertex_idempotents": {
            str(x): matrix_to_dict(e) for x, e in sorted(sys.vertex_idempotents.items())
        },
    }


def system_from_dict(data: dict, complex_: Complex) -> IdempotentSystem:
    if data.get("kind") != "idempotent_system":
        raise ValueError("not an idempotent system record")
    if data["complex_hash"] != complex_hash(complex_):
        raise ValueError("system belongs to a different complex")
    field = Field.from_tag(data["field"])
    idems = {int(x): matrix_from_dict(m) for x, m in data["vertex_idempotents"].items()}
    return IdempotentSystem(complex_, field, data["dim"], idems, label=data.get("label", ""))


# -- group input formats -----------------------------------------------


def group_from_spec(spec: dict, n_points: int, max_order: int = 5000):
    """Build (group, point_perms) from a structured group description.

    Supported kinds: ``{"kind": "cycles", "generators": ["(0 1 2)", ...]}``
    (one-line cycle notation on the point set) and
    ``{"kind": "table", "table": [[...]], "perms": [[...], ...]}``.
    """
    kind = spec.get("kind")
    if kind == "cycles":
        gens = [parse_cycles(text, n_points) for text in spec["generators"]]
        return FiniteGroup.from_permutations(gens, max_order=max_order)
    if kind == "table":
        group = FiniteGroup(spec["table"])
        perms = [tuple(p) for p in spec["perms"]]
        if len(perms) != group.order:
            raise ConfigError("need one point permutation per group element")
        return group, perms
    raise ConfigError(f"unknown group spec kind {spec.get('kind')!r}")
