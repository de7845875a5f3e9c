"""Command-line surface: run constructions and verifications, emit JSON reports.

Reports go to stdout as JSON with sorted keys; diagnostics go to stderr.
Exit codes: 0 verification passed, 1 verification failed, 2 input or usage
error.  Reports are byte-identical for identical inputs and flags except for
the timing_ms field.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

from . import circuit as circuit_mod
from . import finspace, gate, order_core, tower

DEFAULT_BUDGET = 1 << 20


class InputError(Exception):
    pass


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_lattice(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        poset = order_core.parse_poset(raw.decode("utf-8"))
        return order_core.as_lattice(poset), _digest(raw)
    except (order_core.OrderError, ValueError, UnicodeDecodeError) as exc:
        raise InputError(str(exc)) from exc


def _read_meet_semilattice(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        poset = order_core.parse_poset(raw.decode("utf-8"))
        return order_core.as_meet_semilattice(poset), _digest(raw)
    except (order_core.OrderError, ValueError, UnicodeDecodeError) as exc:
        raise InputError(str(exc)) from exc


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad fraction {text!r}") from exc


def _emit(report: dict, started: float) -> None:
    report["timing_ms"] = int((time.time() - started) * 1000)
    print(json.dumps(report, indent=2, sort_keys=True))


def _report(command: str, digest: str, flags: dict) -> dict:
    return {
        "command": command,
        "input_digest": digest,
        "flags": flags,
        "results": {},
        "verdict": "error",
    }


def cmd_verify_lattice(args) -> int:
    started = time.time()
    flags = {"presentation": args.presentation, "oracle": args.oracle}
    lat, digest = _read_lattice(args.file)
    report = _report("verify-lattice", digest, flags)
    if args.presentation == "full":
        circ = circuit_mod.build_full(lat)
    else:
        circ = circuit_mod.build_minimal(lat, "exact")
    assignments = circuit_mod.definable_assignments(circ)
    iso_res = circuit_mod.verify_iso(lat, circ)
    report["results"] = {
        "elements": len(lat.elements),
        "gates": len(circ.gates),
        "definables": len(assignments),
        "iso": "pass" if iso_res.ok else "fail",
    }
    if not iso_res.ok:
        report["results"]["witness"] = iso_res.witness
    ok = iso_res.ok
    if args.oracle:
        dc = circuit_mod.discretize(circ, args.oracle)
        res = gate.oracle(dc, budget=args.max_candidates)
        symbolic = {tuple(a) for a in assignments}
        agree = res.pattern_set == symbolic and len(res.definable) == len(symbolic)
        report["results"]["oracle"] = {
            "n": args.oracle,
            "definables": len(res.definable),
            "agrees": agree,
        }
        ok = ok and agree
    report["verdict"] = "pass" if ok else "fail"
    _emit(report, started)
    return 0 if ok else 1


def cmd_gate_oracle(args) -> int:
    started = time.time()
    if args.n < 2:
        raise InputError(f"subdivision n must be >= 2, got {args.n}")
    flags = {
        "variant": args.variant,
        "n": args.n,
        "r_min": args.r_min,
        "seed": args.seed,
        "probes": args.probes,
    }
    digest = _digest(f"{args.variant}:{args.n}".encode())
    report = _report("gate-oracle", digest, flags)
    dc = gate.discretize(args.n) if args.variant == "plain" else gate.discretize_dagger(args.n)
    r_min = _parse_fraction(args.r_min) if args.r_min else dc.r_min
    res = gate.oracle(dc, r_min, budget=args.max_candidates)
    expected = gate.expected_patterns(args.variant)
    ok = res.pattern_set == expected and len(res.definable) == len(expected)
    report["results"] = {
        "n": args.n,
        "r_min": str(r_min),
        "candidates": gate.saturated_count(dc),
        "definables": len(res.definable),
        "patterns": sorted("".join(map(str, p)) for p in res.patterns),
        "expected": sorted("".join(map(str, p)) for p in expected),
    }
    if args.probes:
        known = set(res.definable)
        bad = []
        for d in finspace.random_closed_sets(dc.space, args.probes, args.seed):
            if finspace.is_definable(dc.space, d, r_min) and d not in known:
                bad.append(sorted(finspace.members(d)))
        report["results"]["probes"] = {
            "count": args.probes,
            "unexpected_definable": bad,
        }
        ok = ok and not bad
    report["verdict"] = "pass" if ok else "fail"
    _emit(report, started)
    return 0 if ok else 1


def cmd_tower(args) -> int:
    started = time.time()
    if args.n < 1:
        raise InputError(f"tower height must be >= 1, got {args.n}")
    kind = {
        "forward": tower.TowerKind.FORWARD_CHAIN,
        "reverse": tower.TowerKind.REVERSE_CHAIN,
        "exact-pair": tower.TowerKind.EXACT_PAIR,
    }[args.kind]
    flags = {"kind": args.kind, "n": args.n, "limit": args.limit}
    report = _report("tower", _digest(f"{args.kind}:{args.n}".encode()), flags)
    circ = tower.truncate(kind, args.n)
    assignments = circuit_mod.definable_assignments(circ)
    expected = args.n + 4 if kind is tower.TowerKind.EXACT_PAIR else args.n + 2
    fam = tower.limit_definables(kind)
    coherent = all(
        tower.restrict(d, args.n) in set(assignments)
        for d in fam.elements(args.n + 2)
    )
    ok = len(assignments) == expected and coherent
    report["results"] = {
        "nodes": len(circ.nodes),
        "gates": len(circ.gates),
        "definables": len(assignments),
        "expected": expected,
        "restriction_coherent": coherent,
    }
    if args.limit:
        limit: dict = {"contains_infinity": {}}
        for beta in (0, 1, 2):
            limit["contains_infinity"][f"D_{beta}"] = fam.d(beta).contains_infinity
        limit["contains_infinity"]["top"] = fam.top().contains_infinity
        if kind is tower.TowerKind.EXACT_PAIR:
            meet, lbs, has_max = tower.limit_definables(kind).meet_analysis(
                fam.side("a"), fam.side("b"), 8
            )
            limit["meet_exists"] = meet is not None
            limit["lower_bounds_sampled"] = len(lbs)
            limit["lower_bounds_have_maximum"] = has_max
            ok = ok and meet is None and not has_max
        report["results"]["limit"] = limit
    report["verdict"] = "pass" if ok else "fail"
    _emit(report, started)
    return 0 if ok else 1


def cmd_filters(args) -> int:
    started = time.time()
    flags = {"include_empty": args.include_empty, "as_lattice": args.as_lattice}
    m, digest = _read_meet_semilattice(args.file)
    report = _report("filters", digest, flags)
    fs = order_core.filters(m, include_empty=args.include_empty)
    report["results"] = {
        "count": len(fs),
        "filters": [sorted(m.elements[i] for i in f) for f in fs],
    }
    if args.as_lattice:
        lat = order_core.filter_lattice(m, include_empty=args.include_empty)
        report["results"]["lattice"] = {
            "elements": list(lat.elements),
            "bottom": lat.elements[lat.bottom],
            "top": lat.elements[lat.top],
            "covers": [
                [lat.elements[i], lat.elements[j]] for i, j in lat.poset.covers()
            ],
        }
    report["verdict"] = "pass"
    _emit(report, started)
    return 0


def cmd_y0(args) -> int:
    started = time.time()
    flags = {"k": args.k}
    m, digest = _read_meet_semilattice(args.file)
    report = _report("y0", digest, flags)
    if args.k > m.n:
        raise InputError(f"k={args.k} exceeds the {m.n} enumerated elements")
    enumeration = tuple(range(m.n))
    if enumeration[0] != m.bottom:
        enumeration = (m.bottom,) + tuple(
            i for i in range(m.n) if i != m.bottom
        )
    circ = circuit_mod.build_Y0(m, enumeration, args.k)
    offs = circuit_mod.y0_assignment_offsets(circ)
    truncated = circuit_mod.truncated_filters(m, enumeration, args.k)
    match = offs == truncated
    report["results"] = {
        "k": args.k,
        "rails": len(circ.nodes),
        "gates": len(circ.gates),
        "assignments": len(offs),
        "truncated_filters": len(truncated),
        "match": match,
    }
    report["verdict"] = "pass" if match else "fail"
    _emit(report, started)
    return 0 if match else 1


def cmd_export_dot(args) -> int:
    started = time.time()
    flags = {"what": args.what, "out": args.out}
    lat, digest = _read_lattice(args.file)
    report = _report("export-dot", digest, flags)
    if args.what == "hasse":
        lines = ["digraph hasse {"]
        for e in lat.elements:
            lines.append(f'  "{e}";')
        for i, j in lat.poset.covers():
            lines.append(f'  "{lat.elements[i]}" -> "{lat.elements[j]}";')
        lines.append("}")
        text = "\n".join(lines) + "\n"
        nodes, edges = len(lat.elements), len(lat.poset.covers())
    else:
        circ = circuit_mod.build_minimal(lat, "exact")
        lines = ["digraph circuit {"]
        for node in circ.nodes:
            lines.append(f'  "{node}" [shape=circle];')
        for gi, (i, j, k) in enumerate(circ.gates):
            lines.append(f'  gate{gi} [shape=box, label="AND"];')
            lines.append(f'  "{circ.nodes[i]}" -> gate{gi};')
            lines.append(f'  "{circ.nodes[j]}" -> gate{gi};')
            lines.append(f'  gate{gi} -> "{circ.nodes[k]}";')
        lines.append("}")
        text = "\n".join(lines) + "\n"
        nodes, edges = len(circ.nodes), len(circ.gates)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    report["results"] = {"written": args.out, "nodes": nodes, "edges": edges}
    report["verdict"] = "pass"
    _emit(report, started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="latcirc",
        description="Lattice gate circuits and their definable-set families.",
    )
    p.add_argument(
        "--max-candidates",
        type=int,
        default=DEFAULT_BUDGET,
        help="bound on exhaustive-search candidates (error when exceeded)",
    )
    sub = p.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify-lattice", help="circuit + filter-lattice check")
    v.add_argument("file")
    v.add_argument("--presentation", choices=["full", "minimal"], default="full")
    v.add_argument("--oracle", type=int, default=0, metavar="N",
                   help="also discretize at pitch 1/N and cross-check")
    v.set_defaults(func=cmd_verify_lattice)

    g = sub.add_parser("gate-oracle", help="definable sets of one gate")
    g.add_argument("--variant", choices=["plain", "dagger"], default="plain")
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--r-min", default=None, help="fraction, default 2/n")
    g.add_argument("--probes", type=int, default=0,
                   help="random closed-set probes against the known family")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gate_oracle)

    t = sub.add_parser("tower", help="chain / exact-pair truncations")
    t.add_argument("--kind", choices=["forward", "reverse", "exact-pair"],
                   default="forward")
    t.add_argument("--n", type=int, default=6)
    t.add_argument("--limit", action="store_true",
                   help="also query the symbolic limit family")
    t.set_defaults(func=cmd_tower)

    f = sub.add_parser("filters", help="filters of a meet-semilattice")
    f.add_argument("file")
    f.add_argument("--include-empty", action="store_true")
    f.add_argument("--as-lattice", action="store_true")
    f.set_defaults(func=cmd_filters)

    y = sub.add_parser("y0", help="truncated rail circuit vs filters")
    y.add_argument("file")
    y.add_argument("--k", type=int, required=True)
    y.set_defaults(func=cmd_y0)

    d = sub.add_parser("export-dot", help="DOT of a Hasse diagram or circuit")
    d.add_argument("what", choices=["hasse", "circuit"])
    d.add_argument("file")
    d.add_argument("-o", "--out", required=True)
    d.set_defaults(func=cmd_export_dot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(str(exc), file=sys.stderr)
        print(
            json.dumps(
                {"command": args.cmd, "error": str(exc), "verdict": "error"},
                indent=2,
                sort_keys=True,
            )
        )
        return 2
    except (order_core.OrderError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        print(
            json.dumps(
                {"command": args.cmd, "error": str(exc), "verdict": "error"},
                indent=2,
                sort_keys=True,
            )
        )
        return 2
    except finspace.BudgetExceeded as exc:
        print(str(exc), file=sys.stderr)
        print(
            json.dumps(
                {"command": args.cmd, "error": str(exc), "verdict": "error"},
                indent=2,
                sort_keys=True,
            )
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
