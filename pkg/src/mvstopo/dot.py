"""Graphviz DOT export: open-set lattices, specialization preorders, entourage chains.

Output is deterministic: nodes are numbered in a fixed order and edges are
sorted, so equal inputs give byte-identical text.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .quniform import Entourage
from .topology import FiniteTopology, bits, specialization_pairs

__all__ = ["hasse_edges", "open_lattice_dot", "preorder_dot", "inclusion_dot"]


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def hasse_edges(items: Sequence, below: Callable[[object, object], bool]) -> list[tuple[int, int]]:
    """Covering pairs ``(i, j)`` of a partial order: ``i < j`` with nothing strictly between."""
    n = len(items)
    lt = [[i != j and below(items[i], items[j]) for j in range(n)] for i in range(n)]
    return sorted((i, j) for i in range(n) for j in range(n)
                  if lt[i][j] and not any(lt[i][k] and lt[k][j] for k in range(n)))


def _render(name: str, labels: Sequence[str], edges, rankdir: str | None = None) -> str:
    lines = [f"digraph {name} {{"]
    if rankdir:
        lines.append(f"  rankdir={rankdir};")
    lines += [f"  n{i} [label={_quote(l)}];" for i, l in enumerate(labels)]
    lines += [f"  n{i} -> n{j};" for i, j in sorted(edges)]
    lines.append("}")
    return "\n".join(lines) + "\n"


def _set_label(m: int, labels: Sequence[str]) -> str:
    return "{" + ",".join(labels[p] for p in bits(m)) + "}"


def open_lattice_dot(T: FiniteTopology) -> str:
    """Open sets under inclusion, edges from smaller to larger."""
    opens = list(T.opens)
    edges = hasse_edges(opens, lambda a, b: a & ~b == 0)
    return _render("opens", [_set_label(v, T.labels) for v in opens], edges, "BT")


def preorder_dot(T: FiniteTopology) -> str:
    """Edge ``x -> y`` when every open set containing ``x`` contains ``y`` (``x != y``)."""
    return _render("specialization", list(T.labels), specialization_pairs(T))


def inclusion_dot(members: Sequence[Entourage], names: Sequence[str] | None = None) -> str:
    """Hasse diagram of relations under inclusion; labels carry the pair count."""
    names = list(names) if names is not None else [f"U{i}" for i in range(len(members))]
    edges = hasse_edges(list(members), lambda a, b: a.issubset(b) and a != b)
    labels = [f"{nm} ({len(U)} pairs)" for nm, U in zip(names, members)]
    return _render("entourages", labels, edges, "BT")
