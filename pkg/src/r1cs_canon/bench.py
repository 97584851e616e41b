"""Equivalence-preserving transforms, the brute-force oracle, and the
benchmark harness.

The five transform categories mirror how real compilers produce equivalent
constraint systems: variable reordering, constraint reordering, splitting a
linear constraint through fresh partial sums, sharing fresh intermediates
across linear constraints, and merging/splitting chained constraints. Every
generated variant is checkable against its base by exhaustive solution-set
comparison at small primes.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .canonical import normalize
from .errors import OracleBudgetExceeded, TransformInapplicable
from .system import (
    Constraint,
    R1cs,
    VariableMap,
    ELIMINATED,
    lc_from_ints,
    lc_has_variable,
    parse_r1cs,
    serialize_r1cs,
)

DEFAULT_ORACLE_BUDGET = 10**7
BENCH_ORACLE_BUDGET = 30_000


@dataclass
class TransformSpec:
    category: int
    seed: int
    params: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.category not in (1, 2, 3, 4, 5):
            raise ValueError(f"unknown category {self.category}")


@dataclass
class TransformResult:
    system: R1cs
    # (base index, variant index) pairs for variables shared by both systems
    correspondence: list


def _rng(spec: TransformSpec) -> random.Random:
    return random.Random(f"r1cs-canon:{spec.category}:{spec.seed}")


def _remap_lc(lc, mapping):
    return {mapping.get(idx, idx): coeff for idx, coeff in lc.items()}


def _effective_terms(prime, con):
    """(var terms dict, const FieldElement, c side) for a linear constraint."""
    zero = prime.element(0)
    if lc_has_variable(con.a):
        varside, kside = con.a, con.b
    else:
        varside, kside = con.b, con.a
    k = kside.get(0, zero)
    terms = {}
    const = zero
    for idx, coeff in varside.items():
        v = coeff * k
        if v.is_zero():
            continue
        if idx == 0:
            const = const + v
        else:
            terms[idx] = v
    return terms, const, con.c


def _linear_indices(sys):
    return [
        i
        for i, con in enumerate(sys.constraints)
        if not (lc_has_variable(con.a) and lc_has_variable(con.b))
    ]


def transform_with_correspondence(sys: R1cs, spec: TransformSpec) -> TransformResult:
    rng = _rng(spec)
    if spec.category == 1:
        perm = list(range(1, sys.num_vars))
        rng.shuffle(perm)
        mapping = {old: new for old, new in zip(range(1, sys.num_vars), perm)}
        mapping[0] = 0
        cons = tuple(
            Constraint(_remap_lc(c.a, mapping), _remap_lc(c.b, mapping), _remap_lc(c.c, mapping))
            for c in sys.constraints
        )
        corr = [(old, mapping[old]) for old in range(1, sys.num_vars)]
        return TransformResult(R1cs(sys.prime, sys.num_vars, cons), corr)

    if spec.category == 2:
        order = list(range(len(sys.constraints)))
        rng.shuffle(order)
        cons = tuple(sys.constraints[i] for i in order)
        corr = [(i, i) for i in range(1, sys.num_vars)]
        return TransformResult(R1cs(sys.prime, sys.num_vars, cons), corr)

    if spec.category == 3:
        return _split_linear(sys, rng, min_terms=3, min_parts=2)

    if spec.category == 4:
        return _share_intermediate(sys, rng)

    if spec.category == 5:
        mode = spec.params.get("mode")
        if mode is None:
            mode = "merge" if _merge_candidates(sys) else "split"
        if mode == "merge":
            return _merge_pair(sys, rng)
        return _split_linear(sys, rng, min_terms=2, min_parts=2)

    raise TransformInapplicable(f"category {spec.category}")


def transform(sys: R1cs, spec: TransformSpec) -> R1cs:
    return transform_with_correspondence(sys, spec).system


def _split_linear(sys, rng, min_terms: int, min_parts: int) -> TransformResult:
    candidates = [
        i for i in _linear_indices(sys) if len(_effective_terms(sys.prime, sys.constraints[i])[0]) >= min_terms
    ]
    if not candidates:
        raise TransformInapplicable(f"no linear constraint with >= {min_terms} variable terms")
    target = rng.choice(candidates)
    terms, const, c_side = _effective_terms(sys.prime, sys.constraints[target])
    indices = sorted(terms)
    rng.shuffle(indices)
    parts = rng.randint(min_parts, min(3, len(indices)))
    chunks = [indices[k::parts] for k in range(parts)]
    chunks = [c for c in chunks if c]
    one = sys.prime.element(1)
    fresh = list(range(sys.num_vars, sys.num_vars + len(chunks)))
    new_rows = []
    for chunk, t in zip(chunks, fresh):
        new_rows.append(Constraint({idx: terms[idx] for idx in chunk}, {0: one}, {t: one}))
    final_a = {t: one for t in fresh}
    if not const.is_zero():
        final_a[0] = const
    new_rows.append(Constraint(final_a, {0: one}, dict(c_side)))
    cons = [c for i, c in enumerate(sys.constraints) if i != target] + new_rows
    corr = [(i, i) for i in range(1, sys.num_vars)]
    return TransformResult(R1cs(sys.prime, sys.num_vars + len(chunks), tuple(cons)), corr)


def _share_intermediate(sys, rng) -> TransformResult:
    linear = _linear_indices(sys)
    pairs = []
    for i, j in itertools.combinations(linear, 2):
        ti, _, _ = _effective_terms(sys.prime, sys.constraints[i])
        tj, _, _ = _effective_terms(sys.prime, sys.constraints[j])
        common = [idx for idx in ti if idx in tj and ti[idx] == tj[idx]]
        if len(common) >= 2:
            pairs.append((i, j, common))
    if not pairs:
        raise TransformInapplicable("no two linear constraints share >= 2 identical terms")
    i, j, common = pairs[rng.randrange(len(pairs))]
    rng.shuffle(common)
    take = common[: rng.randint(2, len(common))]
    one = sys.prime.element(1)
    t = sys.num_vars
    ti, consti, ci = _effective_terms(sys.prime, sys.constraints[i])
    tj, constj, cj = _effective_terms(sys.prime, sys.constraints[j])
    defn = Constraint({idx: ti[idx] for idx in take}, {0: one}, {t: one})

    def rebuild(terms, const, c_side):
        a = {idx: v for idx, v in terms.items() if idx not in take}
        a[t] = one
        if not const.is_zero():
            a[0] = const
        return Constraint(a, {0: one}, dict(c_side))

    cons = list(sys.constraints)
    cons[i] = rebuild(ti, consti, ci)
    cons[j] = rebuild(tj, constj, cj)
    cons.append(defn)
    corr = [(k, k) for k in range(1, sys.num_vars)]
    return TransformResult(R1cs(sys.prime, sys.num_vars + 1, tuple(cons)), corr)


def _merge_candidates(sys):
    """Variables defined by one linear row and read only by other linear rows."""
    out = []
    quad_rows = [i for i in range(len(sys.constraints)) if i not in _linear_indices(sys)]
    for i in _linear_indices(sys):
        con = sys.constraints[i]
        if len(con.c) != 1:
            continue
        v, coeff = next(iter(con.c.items()))
        if v < 1 or coeff.residue != 1:
            continue
        terms, _, _ = _effective_terms(sys.prime, con)
        if v in terms:
            continue
        uses = []
        bad = False
        for j, other in enumerate(sys.constraints):
            if j == i:
                continue
            if v in other.c or (j in quad_rows and (v in other.a or v in other.b)):
                bad = True
                break
            if v in other.a or v in other.b:
                # Must survive into the effective reading (constant side != 0).
                if v in _effective_terms(sys.prime, other)[0]:
                    uses.append(j)
                else:
                    bad = True
                    break
        if not bad and uses:
            out.append((i, v, uses))
    return out


def _merge_pair(sys, rng) -> TransformResult:
    candidates = _merge_candidates(sys)
    if not candidates:
        raise TransformInapplicable("no chained linear pair to merge")
    i, v, uses = candidates[rng.randrange(len(candidates))]
    terms, const, _ = _effective_terms(sys.prime, sys.constraints[i])
    cons = []
    for j, con in enumerate(sys.constraints):
        if j == i:
            continue
        if j in uses:
            tj, constj, cj = _effective_terms(sys.prime, con)
            k = tj.pop(v)
            for idx, coeff in terms.items():
                accum = tj.get(idx, sys.prime.element(0)) + k * coeff
                if accum.is_zero():
                    tj.pop(idx, None)
                else:
                    tj[idx] = accum
            constj = constj + k * const
            a = dict(tj)
            if not constj.is_zero():
                a[0] = constj
            cons.append(Constraint(a, {0: sys.prime.element(1)}, dict(cj)))
        else:
            cons.append(con)
    # Drop the merged variable's column and close the index gap.
    mapping = {old: (old if old < v else old - 1) for old in range(sys.num_vars) if old != v}
    cons = [
        Constraint(_remap_lc(c.a, mapping), _remap_lc(c.b, mapping), _remap_lc(c.c, mapping))
        for c in cons
    ]
    corr = [(old, mapping[old]) for old in range(1, sys.num_vars) if old != v]
    return TransformResult(R1cs(sys.prime, sys.num_vars - 1, tuple(cons)), corr)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def enumerate_solutions(sys: R1cs, budget: int = DEFAULT_ORACLE_BUDGET):
    """All satisfying assignments to variables 1..n-1, as residue tuples."""
    p = sys.prime.value
    free = sys.num_vars - 1
    if p**free > budget:
        raise OracleBudgetExceeded(f"{p}^{free} exceeds budget {budget}")
    rows = [
        (
            tuple((idx, fe.residue) for idx, fe in con.a.items()),
            tuple((idx, fe.residue) for idx, fe in con.b.items()),
            tuple((idx, fe.residue) for idx, fe in con.c.items()),
        )
        for con in sys.constraints
    ]
    sols = []
    for assign in itertools.product(range(p), repeat=free):
        vals = (1,) + assign
        ok = True
        for a, b, c in rows:
            av = sum(coeff * vals[idx] for idx, coeff in a) % p
            bv = sum(coeff * vals[idx] for idx, coeff in b) % p
            cv = sum(coeff * vals[idx] for idx, coeff in c) % p
            if av * bv % p != cv:
                ok = False
                break
        if ok:
            sols.append(assign)
    return sols


def solution_set_equivalent(s1: R1cs, s2: R1cs, shared, budget: int = DEFAULT_ORACLE_BUDGET) -> bool:
    """Projection equality of the two solution sets onto shared variables."""
    if s1.prime != s2.prime:
        raise ValueError("oracle requires both systems over the same prime")
    sols1 = enumerate_solutions(s1, budget)
    sols2 = enumerate_solutions(s2, budget)
    proj1 = {tuple(sol[i1 - 1] for i1, _ in shared) for sol in sols1}
    proj2 = {tuple(sol[i2 - 1] for _, i2 in shared) for sol in sols2}
    return proj1 == proj2


def canonical_preserves_semantics(sys: R1cs, budget: int = DEFAULT_ORACLE_BUDGET) -> bool:
    """Input vs canonical output, projected through the variable map."""
    result = normalize(sys)
    shared = [
        (orig, canon)
        for orig, canon in result.variable_map.entries.items()
        if canon != ELIMINATED
    ]
    return solution_set_equivalent(sys, result.system, shared, budget)


# ---------------------------------------------------------------------------
# Shipped corpus and benchmark report
# ---------------------------------------------------------------------------


def _sys(prime_value: int, num_vars: int, rows) -> R1cs:
    from .field import Prime

    prime = Prime(prime_value)
    cons = tuple(
        Constraint(
            lc_from_ints(prime, a), lc_from_ints(prime, b), lc_from_ints(prime, c)
        )
        for a, b, c in rows
    )
    return R1cs(prime, num_vars, cons)


def standard_bases() -> dict:
    """Small satisfiable systems covering every transform category."""
    return {
        # x*x=sym1, sym1*x=y, (x+y)*1=sym2, (5+sym2)*1=out  [vars x,out,sym1,y,sym2]
        "cubic": _sys(
            7,
            6,
            [
                ({1: 1}, {1: 1}, {3: 1}),
                ({3: 1}, {1: 1}, {4: 1}),
                ({1: 1, 4: 1}, {0: 1}, {5: 1}),
                ({0: 5, 5: 1}, {0: 1}, {2: 1}),
            ],
        ),
        # (a+b+c)*1=u, (u+2a)*1=v
        "affine": _sys(
            7,
            6,
            [
                ({1: 1, 2: 1, 3: 1}, {0: 1}, {4: 1}),
                ({4: 1, 1: 2}, {0: 1}, {5: 1}),
            ],
        ),
        # (a+b+c)*1=u, (a+b+d)*1=v  [shared a+b]
        "twin": _sys(
            7,
            7,
            [
                ({1: 1, 2: 1, 3: 1}, {0: 1}, {5: 1}),
                ({1: 1, 2: 1, 4: 1}, {0: 1}, {6: 1}),
            ],
        ),
        # x*y=z, (z+x)*1=w
        "tinymul": _sys(
            7,
            5,
            [
                ({1: 1}, {2: 1}, {3: 1}),
                ({3: 1, 1: 1}, {0: 1}, {4: 1}),
            ],
        ),
        # x*x=y, (y+3x+5)*1=z
        "square": _sys(
            7,
            4,
            [
                ({1: 1}, {1: 1}, {2: 1}),
                ({2: 1, 1: 3, 0: 5}, {0: 1}, {3: 1}),
            ],
        ),
        # x*x=y, x*y=z, (z+y+x+7)*1=w at a bigger prime
        "mixed101": _sys(
            101,
            5,
            [
                ({1: 1}, {1: 1}, {2: 1}),
                ({1: 1}, {2: 1}, {3: 1}),
                ({3: 1, 2: 1, 1: 1, 0: 7}, {0: 1}, {4: 1}),
            ],
        ),
        # x*x=y, (x+y+a)*1=u, (x+y+b)*1=v  [shared x+y next to a quadratic]
        "twinquad": _sys(
            13,
            7,
            [
                ({1: 1}, {1: 1}, {2: 1}),
                ({1: 1, 2: 1, 3: 1}, {0: 1}, {5: 1}),
                ({1: 1, 2: 1, 4: 1}, {0: 1}, {6: 1}),
            ],
        ),
    }


# (category, base name, variant count) rows; totals per category are the
# benchmark's published group counts: 55 / 21 / 15 / 15 / 6.
STANDARD_PLAN = [
    (1, "cubic", 19),
    (1, "affine", 18),
    (1, "twin", 18),
    (2, "cubic", 7),
    (2, "tinymul", 7),
    (2, "mixed101", 7),
    (3, "affine", 5),
    (3, "twin", 5),
    (3, "mixed101", 5),
    (4, "twin", 8),
    (4, "twinquad", 7),
    (5, "cubic", 2),
    (5, "affine", 2),
    (5, "square", 2),
]


def build_corpus(root) -> list:
    """Materialize the shipped corpus; returns the written paths."""
    root = Path(root)
    written = []
    bases = standard_bases()
    plan_by_base = {}
    for category, name, count in STANDARD_PLAN:
        plan_by_base.setdefault(name, []).append((category, count))
    for name, jobs in plan_by_base.items():
        base_dir = root / name
        (base_dir / "variants").mkdir(parents=True, exist_ok=True)
        base_path = base_dir / "base.json"
        base_path.write_bytes(serialize_r1cs(bases[name]))
        written.append(base_path)
        for category, count in jobs:
            for seed in range(1, count + 1):
                spec = TransformSpec(category, seed)
                variant = transform(bases[name], spec)
                path = base_dir / "variants" / f"{category}-{seed}.json"
                path.write_bytes(serialize_r1cs(variant))
                written.append(path)
    return written


CATEGORY_LABELS = {
    1: "Replacement of variable order",
    2: "Reordering of constraint sequences",
    3: "Multiple new variables in a single linear constraint",
    4: "Shared new variables across linear constraints",
    5: "Merging and splitting of constraints",
}


@dataclass
class BenchReport:
    rows: list          # per-category dicts
    failures: list      # human-readable failure descriptions

    @property
    def all_passed(self) -> bool:
        return not self.failures

    def to_json_obj(self):
        return {"categories": self.rows, "failures": self.failures}

    def table(self) -> str:
        lines = []
        header = f"{'Category':<55} {'Groups':>6} {'Passed':>6} {'Rate':>8}"
        lines.append(header)
        lines.append("-" * len(header))
        for row in self.rows:
            label = f"{row['category']}. {CATEGORY_LABELS[row['category']]}"
            rate = "-" if row["groups"] == 0 else f"{100.0 * row['passed'] / row['groups']:.0f}%"
            lines.append(f"{label:<55} {row['groups']:>6} {row['passed']:>6} {rate:>8}")
        return "\n".join(lines)


def run_benchmark(corpus_root, oracle_budget: int = BENCH_ORACLE_BUDGET) -> BenchReport:
    """Canonical byte-collapse plus oracle checks over a corpus directory."""
    corpus_root = Path(corpus_root)
    per_category = {c: {"category": c, "groups": 0, "passed": 0} for c in (1, 2, 3, 4, 5)}
    failures = []
    oracle_cache = {}
    for base_dir in sorted(corpus_root.iterdir() if corpus_root.exists() else []):
        base_path = base_dir / "base.json"
        if not base_path.is_file():
            continue
        base = parse_r1cs(base_path.read_bytes())
        base_canon = serialize_r1cs(normalize(base).system)

        def oracle_ok(tag, system):
            p = system.prime.value
            if p ** (system.num_vars - 1) > oracle_budget:
                return True
            if tag not in oracle_cache:
                oracle_cache[tag] = canonical_preserves_semantics(system, oracle_budget)
            return oracle_cache[tag]

        if not oracle_ok(str(base_path), base):
            failures.append(f"{base_path}: canonical form changes the solution set")
        for variant_path in sorted((base_dir / "variants").glob("*.json")):
            category = int(variant_path.stem.split("-", 1)[0])
            per_category[category]["groups"] += 1
            variant = parse_r1cs(variant_path.read_bytes())
            variant_canon = serialize_r1cs(normalize(variant).system)
            ok = variant_canon == base_canon
            if not ok:
                failures.append(f"{variant_path}: canonical bytes differ from base")
            if not oracle_ok(str(variant_path), variant):
                failures.append(f"{variant_path}: canonical form changes the solution set")
                ok = False
            if ok:
                per_category[category]["passed"] += 1
    rows = [per_category[c] for c in (1, 2, 3, 4, 5)]
    return BenchReport(rows, failures)
