"""Partitioning the flow graph into constraint-shaped tiles.

A tile is a tree-shaped subgraph that will become exactly one emitted
constraint: a Mul of two variable-valued nodes (quadratic), a Mul with a
constant operand (mul-linear), or an Add chain (add-linear). Linear tiles
carry their affine reading as a coefficient map over interface nodes.

Absorption stops at shared nodes (a node consumed twice must keep a name in
the emitted system), at variable-by-variable Mul nodes, and at zero-pinned
nodes (absorbing one would silently drop its "= 0" constraint).
"""

from __future__ import annotations

from dataclasses import dataclass

from .dfg import ADD, CONST, MUL, VAR, FlowGraph, structural_hashes

QUADRATIC = "quadratic"
MUL_LINEAR = "mul_linear"
ADD_LINEAR = "add_linear"


@dataclass
class LinearForm:
    """Reading sum(coeffs[n] * n) + const = 0 over node values.

    A defined root is stored inside coeffs with coefficient -1 (mod p) and
    remembered in `root`; zero-pinned relations have root None. Coefficients
    are residues; zero coefficients are never stored.
    """

    coeffs: dict
    const: int
    root: int | None

    def signed(self, p: int) -> dict:
        return {n: (c if 2 * c <= p else c - p) for n, c in self.coeffs.items()}

    def signed_const(self, p: int) -> int:
        return self.const if 2 * self.const <= p else self.const - p

    def interface(self):
        return tuple(sorted(n for n in self.coeffs if n != self.root))

    def scaled(self, factor: int, p: int) -> "LinearForm":
        coeffs = {}
        for n, c in self.coeffs.items():
            v = c * factor % p
            if v:
                coeffs[n] = v
        return LinearForm(coeffs, self.const * factor % p, self.root)

    def copy(self) -> "LinearForm":
        return LinearForm(dict(self.coeffs), self.const, self.root)


@dataclass
class Tile:
    kind: str
    root: int
    members: frozenset
    interface: tuple
    form: LinearForm | None


def _absorbable(g: FlowGraph, n: int) -> bool:
    return g.consumer_count(n) == 1 and n not in g.zero_roots


def _carve_linear(g: FlowGraph, root: int, standalone_zero: bool):
    """Absorb the maximal chain under `root` and read off its affine form."""
    p = g.prime.value
    members = set()
    coeffs = {}
    const = 0
    stack = [(root, 1)]
    while stack:
        n, mult = stack.pop()
        nd = g.nodes[n]
        if nd.tag == CONST:
            const = (const + mult * nd.payload) % p
            continue
        if nd.tag == ADD and (n == root or _absorbable(g, n)):
            members.add(n)
            for op in nd.operands:
                stack.append((op, mult))
            continue
        if nd.tag == MUL and (n == root or _absorbable(g, n)):
            const_ops = [op for op in nd.operands if g.nodes[op].tag == CONST]
            if const_ops:
                members.add(n)
                c = g.nodes[const_ops[0]].payload
                other = nd.operands[1] if nd.operands[0] == const_ops[0] else nd.operands[0]
                stack.append((other, mult * c % p))
                continue
        coeffs[n] = (coeffs.get(n, 0) + mult) % p
    coeffs = {n: c for n, c in coeffs.items() if c}
    if standalone_zero:
        form = LinearForm(coeffs, const, None)
    else:
        coeffs[root] = p - 1
        form = LinearForm(coeffs, const, root)
    kind = MUL_LINEAR if g.nodes[root].tag == MUL else ADD_LINEAR
    return Tile(kind, root, frozenset(members), form.interface(), form)


def _carve(g: FlowGraph, root: int) -> Tile:
    nd = g.nodes[root]
    if nd.tag == MUL and not any(g.nodes[op].tag == CONST for op in nd.operands):
        return Tile(QUADRATIC, root, frozenset({root}), tuple(sorted(set(nd.operands))), None)
    standalone_zero = (
        root in g.zero_roots and g.consumer_count(root) == 0 and root not in g.defines
    )
    return _carve_linear(g, root, standalone_zero)


def select_tiles(g: FlowGraph):
    """Partition interior nodes into tiles; also emit zero-pin rows.

    Returns (tiles, zero_rows). zero_rows covers zero-pinned nodes that are
    referenced elsewhere (or are bare leaves), whose "value = 0" fact is not
    already expressed by their own tile's form.
    """
    hashes = structural_hashes(g)
    interiors = {n.id for n in g.nodes.values() if n.tag in (ADD, MUL)}
    tiled = set()
    tiles = []
    while len(tiled) < len(interiors):
        avail = [
            n
            for n in interiors - tiled
            if all(c in tiled for c, _ in g.consumers[n])
        ]
        avail.sort(key=lambda n: (hashes[n], n))
        root = avail[0]
        tile = _carve(g, root)
        tiles.append(tile)
        tiled |= tile.members
    zero_rows = []
    for zr in sorted(g.zero_roots):
        nd = g.nodes[zr]
        if nd.tag == VAR or g.consumer_count(zr) > 0 or zr in g.defines:
            zero_rows.append(LinearForm({zr: 1}, 0, None))
    return tiles, zero_rows
