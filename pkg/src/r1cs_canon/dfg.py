"""Data-flow graph construction from a constraint system.

Every constraint becomes an equation over a shared expression DAG whose
interior nodes are binary Add/Mul operations. An interior node doubles as
the intermediate value it computes, so a constraint whose c side is a bare
variable v simply *names* its root node v (recorded in `defines`); later
references to v resolve to that node, which is what shares common
subexpressions across constraints. Constraints that define nothing fold
into a homogeneous relation pinned to zero (`zero_roots`).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field as dc_field

from .field import FieldElement, Prime
from .system import R1cs, lc_has_variable

CONST = "const"
VAR = "var"
ADD = "add"
MUL = "mul"


@dataclass(frozen=True)
class Node:
    id: int
    tag: str
    # const: residue int; var: ("orig", index) | ("intro", serial); add/mul: None
    payload: object = None
    operands: tuple = ()


@dataclass
class FlowGraph:
    prime: Prime
    num_source_vars: int
    nodes: dict = dc_field(default_factory=dict)          # id -> Node
    consumers: dict = dc_field(default_factory=dict)      # id -> [(consumer id, position)]
    defines: dict = dc_field(default_factory=dict)        # interior id -> leaf var node id
    zero_roots: set = dc_field(default_factory=set)       # node ids constrained to equal 0
    degenerate: list = dc_field(default_factory=list)     # (constraint index, message)
    var_leaf: dict = dc_field(default_factory=dict)       # var key -> leaf node id
    defined_node: dict = dc_field(default_factory=dict)   # var key -> defining interior id
    intro_provenance: dict = dc_field(default_factory=dict)  # serial -> description
    _cons_index: dict = dc_field(default_factory=dict)
    _next_id: int = 0
    _next_intro: int = 0

    # -- node constructors (hash-consed) ------------------------------------

    def _new(self, tag, payload=None, operands=()) -> int:
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = Node(nid, tag, payload, tuple(operands))
        self.consumers.setdefault(nid, [])
        for pos, op in enumerate(operands):
            self.consumers[op].append((nid, pos))
        return nid

    def const(self, value: FieldElement) -> int:
        key = (CONST, value.residue)
        if key not in self._cons_index:
            self._cons_index[key] = self._new(CONST, value.residue)
        return self._cons_index[key]

    def var(self, var_key) -> int:
        if var_key not in self.var_leaf:
            self.var_leaf[var_key] = self._new(VAR, var_key)
        return self.var_leaf[var_key]

    def _binary(self, tag, x: int, y: int) -> int:
        nx, ny = self.nodes[x], self.nodes[y]
        if nx.tag == CONST and ny.tag == CONST:
            fe = self.prime.element(
                nx.payload + ny.payload if tag == ADD else nx.payload * ny.payload
            )
            return self.const(fe)
        if tag == MUL:
            for cnode, other in ((nx, y), (ny, x)):
                if cnode.tag == CONST and cnode.payload == 1:
                    return other
        # operand order is irrelevant in the field; cons on the unordered pair
        key = (tag, min(x, y), max(x, y))
        if key not in self._cons_index:
            self._cons_index[key] = self._new(tag, None, (min(x, y), max(x, y)))
        return self._cons_index[key]

    def add(self, x: int, y: int) -> int:
        return self._binary(ADD, x, y)

    def mul(self, x: int, y: int) -> int:
        return self._binary(MUL, x, y)

    # -- naming --------------------------------------------------------------

    def fresh_intro(self, provenance: str):
        serial = self._next_intro
        self._next_intro += 1
        self.intro_provenance[serial] = provenance
        return ("intro", serial)

    def name_node(self, nid: int, var_key) -> None:
        leaf = self.var(var_key)
        self.defines[nid] = leaf
        self.defined_node[var_key] = nid

    def var_of_node(self, nid: int):
        """The variable a node stands for, if any."""
        node = self.nodes[nid]
        if node.tag == VAR:
            return node.payload
        leaf = self.defines.get(nid)
        return self.nodes[leaf].payload if leaf is not None else None

    def node_for_var(self, var_key):
        if var_key in self.defined_node:
            return self.defined_node[var_key]
        return self.var_leaf.get(var_key)

    def is_interior(self, nid: int) -> bool:
        return self.nodes[nid].tag in (ADD, MUL)

    def consumer_count(self, nid: int) -> int:
        return len(self.consumers[nid])

    def structural_nodes(self):
        """Nodes that carry operational structure (dangling name leaves excluded)."""
        named = set(self.defines.values())
        return [n for n in self.nodes.values() if n.id not in named]


# ---------------------------------------------------------------------------
# Builder
# ---------------------------------------------------------------------------


def _is_quadratic(con) -> bool:
    return lc_has_variable(con.a) and lc_has_variable(con.b)


def _effective_linear(prime, con):
    """Multiply the constant side into the variable side.

    Returns (terms, const) with terms = {orig index >= 1: FieldElement}; both
    already reduced, zero coefficients dropped. For a constraint with no
    variables on either side returns ({}, product of the two constants).
    """
    zero = prime.element(0)
    if lc_has_variable(con.a):
        varside, kside = con.a, con.b
    elif lc_has_variable(con.b):
        varside, kside = con.b, con.a
    else:
        ka = con.a.get(0, zero)
        kb = con.b.get(0, zero)
        return {}, ka * kb
    k = kside.get(0, zero)
    if k.is_zero():
        return {}, zero
    terms = {}
    const = zero
    for idx, coeff in varside.items():
        scaled = coeff * k
        if scaled.is_zero():
            continue
        if idx == 0:
            const = const + scaled
        else:
            terms[idx] = scaled
    return terms, const


def _claim_candidate(prime, con) -> int | None:
    """Variable index this constraint can define, or None."""
    if len(con.c) != 1:
        return None
    idx, coeff = next(iter(con.c.items()))
    if idx < 1 or coeff.residue != 1:
        return None
    if _is_quadratic(con):
        return idx
    terms, const = _effective_linear(prime, con)
    if not terms and const.is_zero():
        return None  # lhs is identically zero
    if not terms:
        return None  # constant = v folds to a zero row instead
    if len(terms) == 1 and const.is_zero():
        tcoeff = next(iter(terms.values()))
        if tcoeff.residue == 1:
            return None  # pure copy v := w stays an explicit equality row
    return idx


def _surviving_claims(sys: R1cs) -> dict:
    """First claim per variable, minus claims on definition cycles."""
    claims = {}
    for i, con in enumerate(sys.constraints):
        v = _claim_candidate(sys.prime, con)
        if v is not None and v not in claims:
            claims[v] = i
    # Dependency edges v -> w: v's defining constraint reads w.
    deps = {}
    for v, i in claims.items():
        con = sys.constraints[i]
        used = {idx for side in (con.a, con.b) for idx in side if idx >= 1}
        deps[v] = {w for w in used if w in claims}
    # Demote every claim inside a nontrivial SCC (includes self-loops).
    demoted = set()
    index = {}
    low = {}
    on_stack = {}
    stack = []
    counter = [0]

    def strongconnect(v):
        work = [(v, iter(sorted(deps[v])))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack[v] = True
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(sorted(deps[w]))))
                    advanced = True
                    break
                if on_stack.get(w):
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                if len(comp) > 1 or node in deps[node]:
                    demoted.update(comp)

    for v in sorted(claims):
        if v not in index:
            strongconnect(v)
    return {v: i for v, i in claims.items() if v not in demoted}


def build_flow_graph(sys: R1cs) -> FlowGraph:
    g = FlowGraph(sys.prime, sys.num_vars)
    claims = _surviving_claims(sys)
    claim_of = {i: v for v, i in claims.items()}

    # Kahn order: a defining constraint waits for the definitions it reads.
    order = []
    placed = set()
    pending = [i for i in range(len(sys.constraints)) if i in claim_of]
    defined_vars = set()
    while pending:
        progressed = False
        for i in list(pending):
            con = sys.constraints[i]
            used = {idx for side in (con.a, con.b) for idx in side if idx >= 1}
            if all(w not in claims or w in defined_vars for w in used):
                order.append(i)
                placed.add(i)
                defined_vars.add(claim_of[i])
                pending.remove(i)
                progressed = True
        if not progressed:  # pragma: no cover - cycles were demoted already
            break
    order.extend(i for i in range(len(sys.constraints)) if i not in placed)

    for i in order:
        _build_constraint(g, sys, i, claim_of.get(i))
    return g


def _ref(g: FlowGraph, idx: int) -> int:
    key = ("orig", idx)
    if key in g.defined_node:
        return g.defined_node[key]
    return g.var(key)


def _term_node(g: FlowGraph, idx: int, coeff: FieldElement) -> int:
    node = _ref(g, idx)
    if coeff.residue == 1:
        return node
    return g.mul(g.const(coeff), node)


def _chain(g: FlowGraph, parts) -> int | None:
    """Left-deep addition over already-ordered term nodes."""
    acc = None
    for node in parts:
        acc = node if acc is None else g.add(acc, node)
    return acc


def _side_chain(g: FlowGraph, lc) -> int:
    parts = []
    if 0 in lc:
        parts.append(g.const(lc[0]))
    for idx in sorted(k for k in lc if k >= 1):
        parts.append(_term_node(g, idx, lc[idx]))
    return _chain(g, parts)


def _fold_zero(g: FlowGraph, i: int, parts) -> None:
    """Pin an addition chain to zero, dropping trivially-true relations."""
    root = _chain(g, parts)
    if root is None:
        return
    node = g.nodes[root]
    if node.tag == CONST:
        if node.payload != 0:
            g.degenerate.append((i, f"constraint {i} reduces to {node.payload} = 0"))
        return
    g.zero_roots.add(root)


def _neg_terms(g: FlowGraph, lc):
    """Term nodes for -(lc), constants first then ascending index."""
    parts = []
    if 0 in lc:
        parts.append(g.const(-lc[0]))
    for idx in sorted(k for k in lc if k >= 1):
        parts.append(_term_node(g, idx, -lc[idx]))
    return parts


def _name_side(g: FlowGraph, nid: int, i: int, which: str) -> None:
    if g.is_interior(nid) and nid not in g.defines:
        key = g.fresh_intro(f"{which} factor of constraint {i}")
        g.name_node(nid, key)


def _try_claim(g: FlowGraph, root: int, var_idx: int) -> bool:
    """Let a constraint name its root node after an original variable.

    A placeholder introduced name may be replaced: introduced variables are
    never referenced by source constraints, and allowing the replacement is
    what keeps the graph independent of constraint order when a shared
    subexpression is first seen inside another constraint.
    """
    if not g.is_interior(root):
        return False
    cur_leaf = g.defines.get(root)
    if cur_leaf is not None:
        cur_key = g.nodes[cur_leaf].payload
        if cur_key[0] != "intro":
            return False
        del g.var_leaf[cur_key]
        del g.defined_node[cur_key]
        del g.nodes[cur_leaf]
        del g.consumers[cur_leaf]
        g.intro_provenance.pop(cur_key[1], None)
    g.name_node(root, ("orig", var_idx))
    return True


def _build_constraint(g: FlowGraph, sys: R1cs, i: int, claimed: int | None) -> None:
    con = sys.constraints[i]
    prime = sys.prime
    if _is_quadratic(con):
        aroot = _side_chain(g, con.a)
        broot = _side_chain(g, con.b)
        _name_side(g, aroot, i, "left")
        _name_side(g, broot, i, "right")
        root = g.mul(aroot, broot)
    else:
        terms, const = _effective_linear(prime, con)
        if not terms:
            # Constant left side: fold const - c.x = 0 directly.
            parts = [g.const(const)] if not const.is_zero() else []
            parts.extend(_neg_terms(g, con.c))
            _fold_zero(g, i, parts)
            return
        parts = []
        if not const.is_zero():
            parts.append(g.const(const))
        for idx in sorted(terms):
            parts.append(_term_node(g, idx, terms[idx]))
        root = _chain(g, parts)

    if claimed is not None and _try_claim(g, root, claimed):
        return
    # No definition: fold root - c.x = 0 (root last keeps chains reproducible).
    if _is_quadratic(con) and g.is_interior(root):
        _name_side(g, root, i, "result")
    parts = _neg_terms(g, con.c)
    parts.append(root)
    _fold_zero(g, i, parts)


# ---------------------------------------------------------------------------
# Structural hashing (Weisfeiler-Leman style refinement)
#
# Hashes must never look at original variable indices or introduced serials:
# they are the permutation-invariant tie-breaker of last resort.
# ---------------------------------------------------------------------------


def _h(*parts) -> bytes:
    hasher = hashlib.sha256()
    for p in parts:
        hasher.update(repr(p).encode())
        hasher.update(b"|")
    return hasher.digest()


def structural_hashes(g: FlowGraph) -> dict:
    structural = g.structural_nodes()
    ids = [n.id for n in structural]
    idset = set(ids)
    label = {}
    for n in structural:
        base = (n.tag, n.payload if n.tag == CONST else None, n.id in g.zero_roots)
        label[n.id] = _h("init", base)
    rounds = min(len(ids), 48)
    for _ in range(rounds):
        nxt = {}
        for nid in ids:
            ops = sorted(label[o] for o in g.nodes[nid].operands)
            cons = sorted(label[c] for c, _ in g.consumers[nid] if c in idset)
            nxt[nid] = _h("round", label[nid], ops, cons)
        label = nxt
    out = {nid: int.from_bytes(label[nid], "big") for nid in ids}
    # Dangling name leaves inherit their definer's hash, salted.
    for interior, leaf in g.defines.items():
        if leaf not in out:
            out[leaf] = int.from_bytes(_h("named", label.get(interior, b"")), "big")
    return out


def to_dot(g: FlowGraph) -> str:
    """DOT rendering for debugging dumps."""
    lines = ["digraph flow {"]
    for n in sorted(g.nodes.values(), key=lambda n: n.id):
        if n.tag == CONST:
            shape, text = "box", str(n.payload)
        elif n.tag == VAR:
            kind, ident = n.payload
            shape, text = "ellipse", f"{kind}:{ident}"
        else:
            shape, text = "circle", n.tag
        extra = ' color="red"' if n.id in g.zero_roots else ""
        lines.append(f'  n{n.id} [shape={shape} label="{text}"{extra}];')
    for n in sorted(g.nodes.values(), key=lambda n: n.id):
        for op in n.operands:
            lines.append(f"  n{op} -> n{n.id};")
    for interior, leaf in sorted(g.defines.items()):
        lines.append(f"  n{interior} -> n{leaf} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"
