"""Collapsing linear rows into single nodes of an undirected coupling graph.

Each merged linear row becomes one abstract node, erasing every trace of
addition order inside it. Retained nodes are the quadratic roots and the
variable leaves they or the rows touch. Edges couple:

  * a quadratic root with each of its operands' representatives,
  * a row with each of its interface nodes' representatives,
  * two rows that share a retained node.

A row's root is represented by the row node itself, so "row feeds row" and
"row feeds quadratic" relationships appear as ordinary edges. All coupling
is symmetric: edges carry no direction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

from .dfg import FlowGraph
from .ranking import linear_row_weight, weighting_scale_form
from .tiling import QUADRATIC


@dataclass
class AbstractGraph:
    nodes: list
    neighbors: dict
    weights: dict
    order_key: dict


def _row_content_hash(form, p: int, hashes: dict) -> int:
    scaled, anchor = weighting_scale_form(form, p, hashes)
    signed = scaled.signed(p)
    items = sorted((hashes.get(n, 0), c) for n, c in signed.items())
    payload = repr((items, scaled.signed_const(p), form.root is None)).encode()
    return int.from_bytes(hashlib.sha256(payload).digest(), "big")


def abstract_graph(g: FlowGraph, quad_tiles, rows, hashes) -> AbstractGraph:
    p = g.prime.value
    row_of_root = {form.root: i for i, form in enumerate(rows) if form.root is not None}

    def repr_of(node: int):
        if node in row_of_root:
            return ("row", row_of_root[node])
        return ("n", node)

    edges = set()
    nodes = set()
    rows_touching = {}
    for tile in quad_tiles:
        qr = ("n", tile.root)
        nodes.add(qr)
        for op in tile.interface:
            other = repr_of(op)
            nodes.add(other)
            if other != qr:
                edges.add(frozenset((qr, other)))
    for i, form in enumerate(rows):
        ar = ("row", i)
        nodes.add(ar)
        for n in form.interface():
            other = repr_of(n)
            nodes.add(other)
            if other != ar:
                edges.add(frozenset((ar, other)))
            if other[0] == "n":
                rows_touching.setdefault(other[1], []).append(i)
    for shared_rows in rows_touching.values():
        for a in range(len(shared_rows)):
            for b in range(a + 1, len(shared_rows)):
                edges.add(frozenset((("row", shared_rows[a]), ("row", shared_rows[b]))))

    neighbors = {ref: set() for ref in nodes}
    for edge in edges:
        a, b = tuple(edge)
        neighbors[a].add(b)
        neighbors[b].add(a)

    order_key = {}
    weights = {}
    for ref in nodes:
        if ref[0] == "n":
            order_key[ref] = (0, hashes.get(ref[1], 0), ref[1])
            weights[ref] = Fraction(1)
        else:
            i = ref[1]
            order_key[ref] = (1, _row_content_hash(rows[i], p, hashes), i)
            weights[ref] = linear_row_weight(rows[i], p, hashes)

    ordered_nodes = sorted(nodes, key=order_key.__getitem__)
    neighbors = {
        ref: tuple(sorted(vals, key=order_key.__getitem__)) for ref, vals in neighbors.items()
    }
    return AbstractGraph(ordered_nodes, neighbors, weights, order_key)
