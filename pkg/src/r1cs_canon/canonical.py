"""The canonical-form pipeline: merge, rank, order, emit.

Pipeline: flow graph -> tiles -> merged linear rows -> abstracted graph ->
score iteration -> variable and row ordering -> emission. The output always
satisfies the canonical shape (pure quadratic rows first, homogenized
merged linear rows after) and is a pure function of the input's semantics
for every supported equivalence (variable/constraint permutation, a/b
swaps, linear splits, shared intermediates, merges).
"""

from __future__ import annotations

from dataclasses import dataclass

from .abstraction import abstract_graph
from .dfg import FlowGraph, build_flow_graph, structural_hashes
from .errors import CyclicLinearDefinition, DegenerateConstraint
from .ranking import RankScores, row_occurrence_weight, weighted_pagerank
from .system import R1cs, Constraint, VariableMap, ELIMINATED
from .tiling import QUADRATIC, LinearForm, select_tiles


# ---------------------------------------------------------------------------
# Linear merging
# ---------------------------------------------------------------------------


def _check_acyclic_definitions(rows):
    deps = {}
    for form in rows:
        if form.root is None:
            continue
        deps[form.root] = {n for n in form.coeffs if n != form.root}
    roots = set(deps)
    state = {}

    def visit(n):
        state[n] = "active"
        for m in deps[n] & roots:
            if state.get(m) == "active":
                raise CyclicLinearDefinition(f"definition cycle through node {m}")
            if m not in state:
                visit(m)
        state[n] = "done"

    for n in sorted(roots):
        if n not in state:
            visit(n)


def merge_linear(forms, quad_used, p: int, hashes=None):
    """Eliminate intermediates that other linear rows reference.

    A row root is eliminable when it is used by no quadratic tile and occurs
    in at least one other linear row; its definition substitutes into every
    occurrence and its own row drops. Eliminability is recomputed after each
    substitution (an occurrence can cancel); among eliminable roots, ones
    that no other eliminable definition mentions go first, ordered by
    structural hash. Returns (rows, eliminated node set, falsity flag).
    """
    hashes = hashes or {}
    rows = [f.copy() for f in forms]
    _check_acyclic_definitions(rows)
    eliminated = set()
    while True:
        by_root = {}
        for i, form in enumerate(rows):
            if form.root is not None:
                by_root[form.root] = i
        candidates = {}
        for root, i in by_root.items():
            if root in quad_used:
                continue
            occ = [j for j, other in enumerate(rows) if j != i and root in other.coeffs]
            if occ:
                candidates[root] = (i, occ)
        if not candidates:
            break
        mentioned = set()
        for root, (i, _) in candidates.items():
            mentioned.update(n for n in rows[i].coeffs if n != root and n in candidates)
        pool = [r for r in candidates if r not in mentioned] or sorted(candidates)
        root = min(pool, key=lambda n: (hashes.get(n, 0), n))
        i, occ = candidates[root]
        defn = {n: a for n, a in rows[i].coeffs.items() if n != root}
        dconst = rows[i].const
        for j in occ:
            target = rows[j]
            k = target.coeffs.pop(root)
            for n, a in defn.items():
                v = (target.coeffs.get(n, 0) + k * a) % p
                if v:
                    target.coeffs[n] = v
                else:
                    target.coeffs.pop(n, None)
            target.const = (target.const + k * dconst) % p
        eliminated.add(root)
        del rows[i]
    kept = []
    falsity = False
    for form in rows:
        if form.coeffs:
            kept.append(form)
        elif form.const:
            falsity = True
    return kept, eliminated, falsity


# ---------------------------------------------------------------------------
# Ordering and emission
# ---------------------------------------------------------------------------


@dataclass
class NormalizeResult:
    system: R1cs
    variable_map: VariableMap
    graph: FlowGraph
    tiles: list
    rows: list
    abstract: object
    scores: RankScores


def _quad_order(quad_tiles, scores, hashes):
    def key(tile):
        return (-scores.pr[("n", tile.root)], -hashes[tile.root], tile.root)

    return sorted(quad_tiles, key=key)


def _rank_quadratic_variables(quad_tiles, scores, hashes):
    """Operands of quadratic tiles, best first.

    Primary: the best score among the tiles a variable multiplies in;
    then its own node score; then structure.
    """
    best_tile = {}
    for tile in quad_tiles:
        tscore = scores.pr[("n", tile.root)]
        for op in tile.interface:
            if op not in best_tile or tscore > best_tile[op]:
                best_tile[op] = tscore

    def key(node):
        return (-best_tile[node], -scores.pr.get(("n", node), 0.0), -hashes.get(node, 0), node)

    return sorted(best_tile, key=key)


def _rank_linear_variables(nodes, rows, row_scores, p, hashes):
    defining = {}
    containing = {}
    for i, form in enumerate(rows):
        if form.root is not None:
            defining[form.root] = i
        for n in form.coeffs:
            if n != form.root:
                containing.setdefault(n, []).append(i)

    def own_coeff(node):
        if node in defining:
            return rows[defining[node]].signed(p)[node]
        spots = containing.get(node)
        if not spots:
            return 0
        best = max(spots, key=lambda i: (row_scores[i], -i))
        return rows[best].signed(p)[node]

    def key(node):
        weight = row_occurrence_weight(node, rows, row_scores, p)
        return (-weight, -own_coeff(node), -hashes.get(node, 0), node)

    return sorted(nodes, key=key)


def _emit_linear_row(form: LinearForm, index_of, p: int):
    """Homogenized row dict {canonical index: residue}, rescaled so the
    lowest-index variable carries coefficient 1."""
    terms = {}
    for n, c in form.coeffs.items():
        idx = index_of[n]
        terms[idx] = (terms.get(idx, 0) + c) % p
    if form.const:
        terms[0] = (terms.get(0, 0) + form.const) % p
    terms = {i: c for i, c in terms.items() if c}
    var_indices = [i for i in terms if i >= 1]
    if var_indices:
        factor = pow(terms[min(var_indices)], -1, p)
    elif terms:
        factor = pow(terms[0], -1, p)
    else:
        return {}
    return {i: c * factor % p for i, c in terms.items()}


def normalize(sys: R1cs) -> NormalizeResult:
    """Run the full pipeline and return the canonical system."""
    p = sys.prime.value
    g = build_flow_graph(sys)
    if g.degenerate:
        raise DegenerateConstraint([i for i, _ in g.degenerate])
    hashes = structural_hashes(g)
    tiles, zero_rows = select_tiles(g)
    quad_tiles = [t for t in tiles if t.kind == QUADRATIC]
    linear_forms = [t.form for t in tiles if t.kind != QUADRATIC] + zero_rows
    quad_used = {op for t in quad_tiles for op in t.interface}
    rows, eliminated_nodes, falsity = merge_linear(linear_forms, quad_used, p, hashes)

    agraph = abstract_graph(g, quad_tiles, rows, hashes)
    scores = weighted_pagerank(agraph)
    row_scores = [scores.pr[("row", i)] for i in range(len(rows))]

    ordered_quads = _quad_order(quad_tiles, scores, hashes)
    index_of = {}
    for node in _rank_quadratic_variables(quad_tiles, scores, hashes):
        index_of[node] = len(index_of) + 1

    late = []
    seen = set(index_of)
    for tile in ordered_quads:
        if tile.root not in seen:
            late.append(tile.root)
            seen.add(tile.root)
    for form in rows:
        for n in sorted(form.coeffs, key=lambda n: (hashes.get(n, 0), n)):
            if n not in seen:
                late.append(n)
                seen.add(n)
    for node in _rank_linear_variables(late, rows, row_scores, p, hashes):
        index_of[node] = len(index_of) + 1

    constraints = []
    one = sys.prime.element(1)
    for tile in ordered_quads:
        ops = tile.interface
        lo = min(index_of[op] for op in ops)
        hi = max(index_of[op] for op in ops)
        constraints.append(
            Constraint({lo: one}, {hi: one}, {index_of[tile.root]: one})
        )

    emitted = []
    for i, form in enumerate(rows):
        terms = _emit_linear_row(form, index_of, p)
        if terms:
            content = tuple(sorted(terms.items()))
            emitted.append((-row_scores[i], content, terms))
    emitted.sort(key=lambda item: (item[0], item[1]))
    for _, _, terms in emitted:
        constraints.append(
            Constraint(
                {i: sys.prime.element(c) for i, c in sorted(terms.items())},
                {0: one},
                {},
            )
        )
    if falsity:
        constraints.append(Constraint({0: one}, {0: one}, {}))

    out = R1cs(sys.prime, 1 + len(index_of), tuple(constraints))
    varmap = _variable_map(g, sys, index_of)
    return NormalizeResult(out, varmap, g, tiles, rows, agraph, scores)


def _variable_map(g: FlowGraph, sys: R1cs, index_of) -> VariableMap:
    vm = VariableMap()
    node_to_canon = dict(index_of)
    for orig in range(1, sys.num_vars):
        node = g.node_for_var(("orig", orig))
        if node is not None and node in node_to_canon:
            vm.entries[orig] = node_to_canon[node]
        else:
            vm.entries[orig] = ELIMINATED
    named = set()
    for node, canon in index_of.items():
        key = g.var_of_node(node)
        if key is None:
            vm.introduced.append((canon, "shared subexpression"))
        elif key[0] == "intro":
            vm.introduced.append((canon, g.intro_provenance.get(key[1], "intermediate")))
        named.add(node)
    return vm
