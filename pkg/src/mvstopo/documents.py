"""JSON documents for the model types.

Readers check the document shape and raise :class:`InputError` on any
schema problem; mathematical validation happens in the model constructors.
Writers produce the same shapes, so ``read(write(x)) == x`` for every
value a reader returns.

Shapes::

    MVS        {"labels": [...], "neutral": "e", "table": [[label, ...], ...]}
    topology   {"points": [...], "opens": [[label, ...], ...]}   (or "subbase")
    space      {"points": [...], "mvs": <MVS document | path>, "d": [[label, ...], ...]}
    base       {"points": [...], "entourages": [{"name": "U1", "pairs": [[x, y], ...]}],
                "implicit_diagonal": false, "u0": {"pairs": [...]}}
    nbhd       {"points": [...], "system": {"x": [[label, ...], ...], ...}}
    map        {"points": [...], "map": {"x": "target label", ...}}
    glue       {"topology": <topology>, "pieces": [{"subset": [...], "space": <space | path>}]}

MVS readers put the neutral element at index 0 and keep the remaining
elements in document order.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

from .errors import InputError
from .mvs import MvsTable
from .qmetric import QmSpace
from .quniform import Entourage
from .topology import FiniteTopology, NbhdSystem, bits, generate_topology, mask, topology_from_opens

__all__ = [
    "load_json",
    "dumps",
    "mvs_raw",
    "mvs_from_doc",
    "mvs_to_doc",
    "topology_from_doc",
    "topology_to_doc",
    "space_raw",
    "space_from_doc",
    "space_to_doc",
    "base_from_doc",
    "base_to_doc",
    "nbhd_from_doc",
    "nbhd_to_doc",
    "map_from_doc",
    "glue_from_doc",
]


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None


def dumps(doc: Any) -> str:
    """Indented JSON with every list of scalars kept on one line."""
    return _dump(doc, 0) + "\n"


def _dump(v: Any, depth: int) -> str:
    pad, inner = "  " * depth, "  " * (depth + 1)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {_dump(x, depth + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(v, (list, tuple)):
        if all(not isinstance(x, (list, tuple, dict)) for x in v):
            return json.dumps(list(v), ensure_ascii=False)
        return "[\n" + ",\n".join(inner + _dump(x, depth + 1) for x in v) + "\n" + pad + "]"
    return json.dumps(v, ensure_ascii=False)


# -- shape helpers -------------------------------------------------------------

def _obj(doc, what: str, required: Sequence[str]) -> dict:
    if not isinstance(doc, dict):
        raise InputError(f"{what}: expected a JSON object")
    missing = [k for k in required if k not in doc]
    if missing:
        raise InputError(f"{what}: missing key(s) {', '.join(missing)}")
    return doc


def _labels(value, what: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, (str, int)) and not isinstance(v, bool) for v in value):
        raise InputError(f"{what}: expected a list of labels")
    out = tuple(str(v) for v in value)
    if len(set(out)) != len(out):
        raise InputError(f"{what}: labels must be distinct")
    return out


def _lookup(index: dict, label, what: str) -> int:
    try:
        return index[str(label)]
    except KeyError:
        raise InputError(f"{what}: unknown label {label!r}") from None


def _matrix(value, index: dict, n: int, what: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list) or len(value) != n or not all(isinstance(r, list) and len(r) == n for r in value):
        raise InputError(f"{what}: expected a {n}x{n} matrix")
    return tuple(tuple(_lookup(index, v, what) for v in row) for row in value)


def _subset(value, index: dict, what: str) -> int:
    if not isinstance(value, list):
        raise InputError(f"{what}: expected a list of point labels")
    return mask(_lookup(index, v, what) for v in value)


def _names(m: int, labels: Sequence[str]) -> list[str]:
    return [labels[p] for p in bits(m)]


def _resolve(value, base_dir: Path | None, what: str):
    """Inline document, or a path relative to the referring file."""
    if isinstance(value, str):
        p = Path(value)
        if not p.is_absolute() and base_dir is not None:
            p = base_dir / p
        return load_json(p), p.parent
    if isinstance(value, dict):
        return value, base_dir
    raise InputError(f"{what}: expected an inline object or a file path")


# -- MVS -------------------------------------------------------------------------

def mvs_raw(doc) -> tuple[tuple[str, ...], int, tuple[tuple[int, ...], ...]]:
    """Labels, neutral index and table, normalised to neutral-first but not validated."""
    _obj(doc, "MVS", ("labels", "neutral", "table"))
    labels = _labels(doc["labels"], "MVS labels")
    if not labels:
        raise InputError("MVS labels: empty")
    index = {l: i for i, l in enumerate(labels)}
    e = _lookup(index, doc["neutral"], "MVS neutral")
    table = _matrix(doc["table"], index, len(labels), "MVS table")
    order = [e] + [i for i in range(len(labels)) if i != e]
    pos = {old: new for new, old in enumerate(order)}
    new_labels = tuple(labels[i] for i in order)
    new_table = tuple(tuple(pos[table[a][b]] for b in order) for a in order)
    return new_labels, 0, new_table


def mvs_from_doc(doc) -> MvsTable:
    labels, e, table = mvs_raw(doc)
    return MvsTable(labels, e, table)


def mvs_to_doc(M: MvsTable) -> dict:
    order = [M.neutral] + list(M.star)
    L = M.labels
    return {
        "labels": [L[i] for i in order],
        "neutral": L[M.neutral],
        "table": [[L[M.table[a][b]] for b in order] for a in order],
    }


# -- topology ----------------------------------------------------------------------

def topology_from_doc(doc) -> FiniteTopology:
    """``opens`` must already be a topology; ``subbase`` is closed up instead."""
    _obj(doc, "topology", ("points",))
    points = _labels(doc["points"], "topology points")
    index = {p: i for i, p in enumerate(points)}
    if "opens" in doc:
        if not isinstance(doc["opens"], list):
            raise InputError("topology opens: expected a list")
        sets = [_subset(v, index, "topology opens") for v in doc["opens"]]
        return topology_from_opens(len(points), sets, points)
    if "subbase" in doc:
        if not isinstance(doc["subbase"], list):
            raise InputError("topology subbase: expected a list")
        sets = [_subset(v, index, "topology subbase") for v in doc["subbase"]]
        return generate_topology(len(points), sets, points)
    raise InputError("topology: needs 'opens' or 'subbase'")


def topology_to_doc(T: FiniteTopology) -> dict:
    return {"points": list(T.labels), "opens": [_names(v, T.labels) for v in T.opens]}


# -- spaces --------------------------------------------------------------------------

def space_raw(doc, base_dir: Path | None = None):
    """Points, validated MVS and index matrix; the quasimetric itself is not validated."""
    _obj(doc, "space", ("points", "mvs", "d"))
    points = _labels(doc["points"], "space points")
    mdoc, _ = _resolve(doc["mvs"], base_dir, "space mvs")
    M = mvs_from_doc(mdoc)
    index = {l: i for i, l in enumerate(M.labels)}
    d = _matrix(doc["d"], index, len(points), "space d")
    return points, M, d


def space_from_doc(doc, base_dir: Path | None = None) -> QmSpace:
    points, M, d = space_raw(doc, base_dir)
    return QmSpace(points, M, d)


def space_to_doc(Q: QmSpace) -> dict:
    L = Q.mvs.labels
    return {
        "points": list(Q.points),
        "mvs": mvs_to_doc(Q.mvs),
        "d": [[L[v] for v in row] for row in Q.d],
    }


# -- entourage bases -----------------------------------------------------------------

def _relation(value, index: dict, n: int, diagonal: bool, what: str) -> Entourage:
    if not isinstance(value, list) or not all(isinstance(p, list) and len(p) == 2 for p in value):
        raise InputError(f"{what}: pairs must be a list of [x, y]")
    pairs = [(_lookup(index, x, what), _lookup(index, y, what)) for x, y in value]
    if diagonal:
        pairs += [(x, x) for x in range(n)]
    return Entourage.from_pairs(n, pairs)


def base_from_doc(doc):
    """``(points, names, members, u0)``; ``u0`` is None when the document has none.

    Nothing beyond the shape is checked here, so UB1-UB3 failures can be
    reported by the caller.
    """
    _obj(doc, "base", ("points", "entourages"))
    points = _labels(doc["points"], "base points")
    index = {p: i for i, p in enumerate(points)}
    implicit = doc.get("implicit_diagonal", False)
    if not isinstance(implicit, bool):
        raise InputError("base implicit_diagonal: expected true or false")
    ents = doc["entourages"]
    if not isinstance(ents, list) or not ents:
        raise InputError("base entourages: expected a non-empty list")
    names, members = [], []
    for i, item in enumerate(ents):
        _obj(item, f"entourage {i}", ("pairs",))
        names.append(str(item.get("name", f"U{i + 1}")))
        members.append(_relation(item["pairs"], index, len(points), implicit, f"entourage {names[-1]}"))
    u0 = None
    if "u0" in doc:
        _obj(doc["u0"], "u0", ("pairs",))
        u0 = _relation(doc["u0"]["pairs"], index, len(points), implicit, "u0")
    return points, tuple(names), tuple(members), u0


def base_to_doc(points: Sequence[str], members: Sequence[Entourage], names: Sequence[str] | None = None,
                u0: Entourage | None = None) -> dict:
    names = list(names) if names is not None else [f"U{i + 1}" for i in range(len(members))]

    def pairs(U):
        return [[points[x], points[y]] for x, y in U.pairs()]

    doc = {
        "points": list(points),
        "entourages": [{"name": nm, "pairs": pairs(U)} for nm, U in zip(names, members)],
        "implicit_diagonal": False,
    }
    if u0 is not None:
        doc["u0"] = {"pairs": pairs(u0)}
    return doc


# -- neighbourhood systems, maps, glue -------------------------------------------------

def nbhd_from_doc(doc):
    _obj(doc, "neighbourhood system", ("points", "system"))
    points = _labels(doc["points"], "system points")
    index = {p: i for i, p in enumerate(points)}
    system = doc["system"]
    if not isinstance(system, dict):
        raise InputError("system: expected an object keyed by point")
    at = []
    for p in points:
        fam = system.get(p)
        if not isinstance(fam, list) or not fam:
            raise InputError(f"system: point {p!r} needs a non-empty list of sets")
        at.append(tuple(_subset(v, index, f"system[{p}]") for v in fam))
    return points, NbhdSystem(len(points), tuple(at))


def nbhd_to_doc(points: Sequence[str], B: NbhdSystem) -> dict:
    return {"points": list(points),
            "system": {p: [_names(v, points) for v in B.at[x]] for x, p in enumerate(points)}}


def map_from_doc(doc, target_points: Sequence[str]):
    """``(points, g)`` with ``g[x]`` the target index of source point ``x``."""
    _obj(doc, "map", ("points", "map"))
    points = _labels(doc["points"], "map points")
    g = doc["map"]
    if not isinstance(g, dict):
        raise InputError("map: expected an object from source to target labels")
    index = {p: i for i, p in enumerate(target_points)}
    out = []
    for p in points:
        if p not in g:
            raise InputError(f"map: no image for {p!r}")
        out.append(_lookup(index, g[p], "map target"))
    return points, tuple(out)


def glue_from_doc(doc, base_dir: Path | None = None):
    """``(T, pieces)``; each piece space is re-indexed to ascending point order."""
    _obj(doc, "glue", ("topology", "pieces"))
    tdoc, tdir = _resolve(doc["topology"], base_dir, "glue topology")
    T = topology_from_doc(tdoc)
    index = {p: i for i, p in enumerate(T.labels)}
    if not isinstance(doc["pieces"], list) or not doc["pieces"]:
        raise InputError("glue pieces: expected a non-empty list")
    pieces = []
    for i, item in enumerate(doc["pieces"]):
        _obj(item, f"piece {i}", ("subset", "space"))
        s = _subset(item["subset"], index, f"piece {i} subset")
        sdoc, sdir = _resolve(item["space"], base_dir, f"piece {i} space")
        Q = space_from_doc(sdoc, sdir)
        want = _names(s, T.labels)
        if sorted(Q.points) != sorted(want):
            raise InputError(f"piece {i}: space points {list(Q.points)} do not match subset {want}")
        order = [Q.index(p) for p in want]
        Q = QmSpace(tuple(want), Q.mvs, tuple(tuple(Q.d[a][b] for b in order) for a in order))
        pieces.append((s, Q))
    return T, pieces
