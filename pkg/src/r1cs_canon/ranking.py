"""Node weighting and score iteration over the abstracted graph.

Linear rows are weighted by the variance-style spread of their normalized
coefficients (exact rationals); retained nodes weigh 1. Scores then come
from a damped fixpoint PR(u) = (1-d) + d * sum over neighbors v of
PR(v) * W(u) * W(v), which exists to break structural symmetry: the more
(and heavier) company a node keeps, the higher its score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import RankDivergence

DAMPING = 0.85
TOLERANCE = 1e-9
MAX_ITERATIONS = 1000

# Upper bound imposed on the iteration matrix's infinity norm. Keeping it
# below 1 makes the fixpoint a contraction: max-normalizing weights alone
# does not (an unweighted triangle would diverge).
NORM_BOUND = 0.9

_OVERFLOW_GUARD = 1e12


def coefficient_spread(coeffs) -> Fraction:
    """Spread of a linear relation's coefficients around their mean.

    `coeffs` are the signed coefficients of the non-root terms (constant
    included when nonzero); the defined side contributes the fixed -1.
    With mu = (sum - 1)/(n + 1): W = [sum (a_i - mu)^2 + (-1 - mu)^2] / mu^2.
    A zero mean is undefined in that formula; the fallback keeps the result
    total and coefficient-sensitive.
    """
    coeffs = [Fraction(c) for c in coeffs]
    n = len(coeffs)
    mu = Fraction(sum(coeffs) - 1, n + 1)
    if mu == 0:
        return (n + 1) * sum(c * c for c in coeffs) + 1
    spread = sum((c - mu) ** 2 for c in coeffs) + (-1 - mu) ** 2
    return spread / (mu * mu)


def weighting_scale_form(form, p: int, hashes: dict):
    """Canonical-scale copy of a row for weighting purposes.

    Rows with a defined root already carry the canonical scale (root
    coefficient -1). Zero-pinned rows have a scale degree of freedom; fix it
    by giving the interface node with the smallest structural hash the -1
    and letting it play the defined side's role.
    """
    if form.root is not None:
        return form, form.root
    anchor = min(form.coeffs, key=lambda n: (hashes.get(n, 0), n))
    factor = (p - 1) * pow(form.coeffs[anchor], -1, p) % p
    return form.scaled(factor, p), anchor


def linear_row_weight(form, p: int, hashes: dict) -> Fraction:
    scaled, anchor = weighting_scale_form(form, p, hashes)
    signed = scaled.signed(p)
    coeffs = [signed[n] for n in sorted(signed, key=lambda n: (hashes.get(n, 0), n)) if n != anchor]
    const = scaled.signed_const(p)
    if const:
        coeffs.append(const)
    return coefficient_spread(coeffs)


@dataclass
class RankScores:
    pr: dict
    damping: float
    tolerance: float
    iterations_used: int
    trace: list | None = None


def weighted_pagerank(
    graph,
    damping: float = DAMPING,
    tolerance: float = TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
    record_trace: bool = False,
) -> RankScores:
    """Iterate scores to a fixpoint on an abstracted graph.

    Weights are first divided by their maximum, then uniformly rescaled so
    the iteration is a contraction; a uniform rescale is identical for
    equivalent inputs, so it never disturbs canonical ordering decisions.
    """
    refs = sorted(graph.nodes, key=graph.order_key.__getitem__)
    if not refs:
        return RankScores({}, damping, tolerance, 0, [] if record_trace else None)
    max_w = max(graph.weights[r] for r in refs)
    if max_w <= 0:
        max_w = Fraction(1)
    w = {r: float(graph.weights[r] / max_w) for r in refs}
    norm = max(
        (w[r] * sum(w[v] for v in graph.neighbors[r]) for r in refs),
        default=0.0,
    )
    if damping * norm > NORM_BOUND:
        gamma = math.sqrt(NORM_BOUND / (damping * norm))
        w = {r: wv * gamma for r, wv in w.items()}
    pr = {r: 1.0 for r in refs}
    trace = [] if record_trace else None
    if record_trace:
        for r in refs:
            trace.append((0, r, 1.0))
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        nxt = {}
        delta = 0.0
        for r in refs:
            acc = 0.0
            for v in graph.neighbors[r]:
                acc += pr[v] * w[v]
            val = (1.0 - damping) + damping * w[r] * acc
            if val > _OVERFLOW_GUARD:
                raise RankDivergence(f"score of {r} exceeded {_OVERFLOW_GUARD}")
            nxt[r] = val
            delta = max(delta, abs(val - pr[r]))
        pr = nxt
        if record_trace:
            for r in refs:
                trace.append((iterations, r, pr[r]))
        if delta < tolerance:
            break
    return RankScores(pr, damping, tolerance, iterations, trace)


def row_occurrence_weight(node: int, rows, row_scores, p: int) -> float:
    """Ordering weight for a variable absent from every quadratic tile.

    Sums |signed coefficient| * row score over every row containing the
    node other than the one that defines it; a variable confined to its own
    row weighs zero and is ordered by its coefficient alone.
    """
    total = 0.0
    for idx, form in enumerate(rows):
        if form.root == node or node not in form.coeffs:
            continue
        total += abs(form.signed(p)[node]) * row_scores[idx]
    return total
