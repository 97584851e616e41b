"""Command-line front end.

Exit codes are a contract for CI: 0 success, 1 semantic mismatch or failed
check, 2 bad input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from pathlib import Path

from .bench import (
    TransformSpec,
    build_corpus,
    run_benchmark,
    standard_bases,
    transform,
)
from .canonical import normalize
from .dfg import to_dot
from .errors import R1csError, TransformInapplicable
from .system import (
    check_witness,
    parse_r1cs,
    parse_witness,
    serialize_r1cs,
    validate_paradigm,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_BAD_INPUT = 2
EXIT_IO = 3


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _IoFailure(f"cannot read {path}: {exc}") from None


def _write(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise _IoFailure(f"cannot write {path}: {exc}") from None


class _IoFailure(Exception):
    pass


def _abstract_dot(result) -> str:
    lines = ["graph abstract {"]
    names = {}
    for ref in result.abstract.nodes:
        names[ref] = f"{ref[0]}{ref[1]}"
        if ref[0] == "n":
            label = f"node {ref[1]}"
            shape = "ellipse"
        else:
            label = f"row {ref[1]}"
            shape = "box"
        score = result.scores.pr.get(ref)
        if score is not None:
            label += f"\\nPR={score:.4f}"
        lines.append(f'  {names[ref]} [shape={shape} label="{label}"];')
    seen = set()
    for ref in result.abstract.nodes:
        for other in result.abstract.neighbors[ref]:
            key = frozenset((ref, other))
            if key not in seen:
                seen.add(key)
                lines.append(f"  {names[ref]} -- {names[other]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _tiles_json(result) -> str:
    p = result.graph.prime.value
    tiles = []
    for tile in result.tiles:
        entry = {
            "kind": tile.kind,
            "root": tile.root,
            "members": sorted(tile.members),
            "interface": list(tile.interface),
        }
        if tile.form is not None:
            entry["form"] = {
                "coeffs": {str(n): c for n, c in sorted(tile.form.signed(p).items())},
                "const": tile.form.signed_const(p),
                "root": tile.form.root,
            }
        tiles.append(entry)
    return json.dumps({"tiles": tiles}, indent=2) + "\n"


def _trace_csv(result) -> str:
    lines = ["iteration,node,score"]
    for iteration, ref, value in result.scores.trace or []:
        lines.append(f"{iteration},{ref[0]}{ref[1]},{value!r}")
    return "\n".join(lines) + "\n"


def cmd_normalize(args) -> int:
    system = parse_r1cs(_read(args.input))
    if args.trace_pagerank:
        # Rerun scoring with the trace recorder on.
        from .ranking import weighted_pagerank

        result = normalize(system)
        result.scores = weighted_pagerank(result.abstract, record_trace=True)
        _write(args.trace_pagerank, _trace_csv(result).encode())
    else:
        result = normalize(system)
    data = serialize_r1cs(result.system)
    if args.output:
        _write(args.output, data)
    else:
        _sys.stdout.write(data.decode())
    if args.map:
        payload = json.dumps(result.variable_map.to_json_obj(), indent=2) + "\n"
        _write(args.map, payload.encode())
    if args.dump_dfg:
        _write(args.dump_dfg, to_dot(result.graph).encode())
    if args.dump_tiles:
        _write(args.dump_tiles, _tiles_json(result).encode())
    if args.dump_abstract:
        _write(args.dump_abstract, _abstract_dot(result).encode())
    return EXIT_OK


def cmd_check_equal(args) -> int:
    sa = parse_r1cs(_read(args.a))
    sb = parse_r1cs(_read(args.b))
    if sa.prime != sb.prime:
        print(f"prime mismatch: {sa.prime.value} vs {sb.prime.value}", file=_sys.stderr)
        return EXIT_BAD_INPUT
    ca = normalize(sa).system
    cb = normalize(sb).system
    if serialize_r1cs(ca) == serialize_r1cs(cb):
        print("equivalent: canonical forms are identical")
        return EXIT_OK
    limit = max(len(ca.constraints), len(cb.constraints))
    for i in range(limit):
        ra = ca.constraints[i] if i < len(ca.constraints) else None
        rb = cb.constraints[i] if i < len(cb.constraints) else None
        if ra != rb:
            print(f"canonical forms differ at row {i}:")
            for tag, row in (("a", ra), ("b", rb)):
                if row is None:
                    print(f"  {tag}: <no row>")
                else:
                    sides = ", ".join(
                        f"{name}={{{', '.join(f'{k}:{v.residue}' for k, v in sorted(s.items()))}}}"
                        for name, s in (("a", row.a), ("b", row.b), ("c", row.c))
                    )
                    print(f"  {tag}: {sides}")
            break
    else:
        print(f"canonical forms differ in variable count: {ca.num_vars} vs {cb.num_vars}")
    return EXIT_MISMATCH


def cmd_validate(args) -> int:
    system = parse_r1cs(_read(args.input))
    status = EXIT_OK
    if args.witness:
        witness = parse_witness(system.prime, _read(args.witness))
        report = check_witness(system, witness)
        if report.satisfied:
            print("witness: satisfied")
        else:
            print(f"witness: unsatisfied at constraints {report.failing}")
            status = EXIT_MISMATCH
    if args.paradigm:
        report = validate_paradigm(system)
        if report.valid:
            print("shape: canonical")
        else:
            for v in report.violations:
                print(f"shape: {v}")
            status = EXIT_MISMATCH
    if not args.witness and not args.paradigm:
        print("nothing to check (pass --witness and/or --paradigm)")
    return status


def cmd_gen_bench(args) -> int:
    if args.standard:
        written = build_corpus(args.out)
        print(f"wrote {len(written)} corpus files under {args.out}")
        return EXIT_OK
    if not args.input:
        print("gen-bench needs an input system (or --standard)", file=_sys.stderr)
        return EXIT_BAD_INPUT
    base = parse_r1cs(_read(args.input))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        spec = TransformSpec(args.category, args.seed + k)
        variant = transform(base, spec)
        path = out / f"{args.category}-{args.seed + k}.json"
        _write(str(path), serialize_r1cs(variant))
    print(f"wrote {args.count} variants under {out}")
    return EXIT_OK


def cmd_run_bench(args) -> int:
    report = run_benchmark(args.corpus)
    print(report.table())
    if args.json:
        _write(args.json, (json.dumps(report.to_json_obj(), indent=2) + "\n").encode())
    if report.all_passed:
        return EXIT_OK
    for f in report.failures:
        print(f"FAIL {f}", file=_sys.stderr)
    return EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="r1cs-canon",
        description="Canonical forms and equivalence checks for rank-1 constraint systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="rewrite a system into its canonical form")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="canonical system path (default stdout)")
    p.add_argument("--map", help="write the original->canonical variable map JSON")
    p.add_argument("--dump-dfg", help="write the flow graph as DOT")
    p.add_argument("--dump-tiles", help="write the tile partition as JSON")
    p.add_argument("--dump-abstract", help="write the abstracted graph as DOT")
    p.add_argument("--trace-pagerank", help="write the score-iteration trace as CSV")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("check-equal", help="compare two systems' canonical forms")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_check_equal)

    p = sub.add_parser("validate", help="check a witness and/or canonical shape")
    p.add_argument("input")
    p.add_argument("--witness", help="witness JSON path")
    p.add_argument("--paradigm", action="store_true", help="check canonical shape")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("gen-bench", help="generate equivalence-benchmark variants")
    p.add_argument("input", nargs="?", help="base system JSON")
    p.add_argument("--category", type=int, choices=(1, 2, 3, 4, 5), default=1)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default="bench-out")
    p.add_argument(
        "--standard", action="store_true", help="materialize the full shipped corpus into --out"
    )
    p.set_defaults(func=cmd_gen_bench)

    p = sub.add_parser("run-bench", help="run the benchmark over a corpus directory")
    p.add_argument("corpus")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(func=cmd_run_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _IoFailure as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_IO
    except TransformInapplicable as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_BAD_INPUT
    except R1csError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
