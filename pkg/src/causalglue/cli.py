"""Command-line front end.

Exit codes: 0 everything held, 1 a property failed or a counterexample was
found, 2 usage error, 3 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .amalgamation import IdentificationMap, PreconditionError, glue, validate_identification
from .harness import BREAKERS, SUITES, run_suite
from .ladder import CheckParams, ladder_report
from .minkowski import (
    RegionError,
    SampleParams,
    chain_intrinsic_tau,
    evaluate_fixture,
    fixture,
    fixture_names,
    parse_region,
    point_index,
    sample_region,
)
from .space import FiniteCausalSpace, validate_space

OK, FAILED, USAGE, INVALID = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=None)
    common.add_argument("--out", type=Path, default=None, help="write output here instead of stdout")

    p = argparse.ArgumentParser(prog="causalglue", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("validate", parents=[common], help="check the axioms of a space file")
    v.add_argument("--space", required=True, type=Path)
    v.add_argument("--max-witnesses", type=int, default=20)

    c = sub.add_parser("check", parents=[common], help="causal ladder report for a space file")
    c.add_argument("--space", required=True, type=Path)
    c.add_argument("--eps", type=float, default=0.0)
    c.add_argument("--max-witnesses", type=int, default=20)

    s = sub.add_parser("sample", parents=[common], help="sample a Minkowski region on a grid")
    s.add_argument("--region", required=True, type=Path)
    s.add_argument("--h", type=float, default=0.25)
    s.add_argument("--no-boundary", action="store_true")
    s.add_argument("--jitter-seed", type=int, default=None)
    s.add_argument("--intrinsic", action="store_true", help="replace tau by its chain-intrinsic version")

    g = sub.add_parser("glue", parents=[common], help="glue two spaces")
    g.add_argument("--instance", type=Path, help="gluing-instance file")
    g.add_argument("--space", type=Path)
    g.add_argument("--space2", type=Path)
    g.add_argument("--identify", type=Path, help="JSON list of [i, j] pairs")
    g.add_argument("--lipschitz", type=float, default=None)
    g.add_argument("--eps", type=float, default=float("inf"))
    g.add_argument("--unsafe-glue", action="store_true")

    f = sub.add_parser("fixture", parents=[common], help="build a named fixture")
    f.add_argument("name")
    f.add_argument("--h", type=float, default=0.25)
    f.add_argument("--glue", action="store_true")
    f.add_argument("--assert", dest="do_assert", action="store_true")

    r = sub.add_parser("suite", parents=[common], help="run a property suite")
    r.add_argument("name")
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--breaker", choices=BREAKERS, default="none")
    r.add_argument("--experimental", action="store_true")
    r.add_argument("--retry-cap", type=int, default=None)

    e = sub.add_parser("export", parents=[common], help="write DOT and CSV files for plotting")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--space", type=Path)
    src.add_argument("--fixture")
    e.add_argument("--h", type=float, default=0.25)
    e.add_argument("--glue", action="store_true")
    return p


def _fmt(args) -> str:
    if args.format:
        return args.format
    return "text" if args.out is None and sys.stdout.isatty() else "json"


def _emit(args, payload: dict, text: str) -> None:
    body = io.dumps(payload) if _fmt(args) == "json" else text
    if args.out is not None and args.verb != "export":
        args.out.write_text(body + "\n")
    else:
        print(body)


def _violations_text(rep) -> str:
    if rep.ok:
        return "ok"
    return "\n".join(f"{v.axiom}: {list(v.witness)} {list(v.values)}" for v in rep.violations)


def _violations_dict(rep) -> dict:
    return {
        "ok": rep.ok,
        "violations": [
            {"axiom": v.axiom, "witness": list(v.witness), "values": [io.encode(x) for x in v.values]}
            for v in rep.violations
        ],
    }


def cmd_validate(args) -> int:
    space = io.load_space(args.space)
    rep = validate_space(space, args.max_witnesses)
    _emit(args, _violations_dict(rep), _violations_text(rep))
    return OK if rep.ok else FAILED


def cmd_check(args) -> int:
    space = io.load_space(args.space)
    val = validate_space(space)
    if not val.ok:
        _emit(args, {"valid": _violations_dict(val)}, "invalid space\n" + _violations_text(val))
        return FAILED
    rep = ladder_report(space, CheckParams(eps=args.eps, max_witnesses=args.max_witnesses))
    text = "\n".join(f"{r.name:26s} {r.status:12s} {r.witness or ''} {r.note}" for r in rep.rungs)
    _emit(args, rep.to_dict(), text)
    return OK if rep.ok else FAILED


def cmd_sample(args) -> int:
    try:
        region = parse_region(args.region.read_text())
    except OSError as exc:
        raise io.InvalidInput(str(exc)) from exc
    space = sample_region(region, SampleParams(args.h, not args.no_boundary, args.jitter_seed))
    if args.intrinsic:
        space = chain_intrinsic_tau(space, region)
    _emit(args, io.space_to_dict(space), f"{space.n} points")
    return OK


def _load_glue_inputs(args):
    if args.instance is not None:
        s1, s2, f = io.load_instance(args.instance)
    else:
        if args.space is None or args.space2 is None or args.identify is None:
            raise SystemExit(_usage("glue needs --instance or all of --space, --space2, --identify"))
        s1, s2 = io.load_space(args.space), io.load_space(args.space2)
        try:
            pairs = json.loads(args.identify.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise io.InvalidInput(f"cannot read identification: {exc}") from exc
        f = IdentificationMap(tuple(tuple(p) for p in pairs))
    if args.lipschitz is not None:
        f = IdentificationMap(f.pairs, args.lipschitz)
    return s1, s2, f


def _usage(msg: str) -> int:
    print(f"causalglue: error: {msg}", file=sys.stderr)
    return USAGE


def cmd_glue(args) -> int:
    s1, s2, f = _load_glue_inputs(args)
    rep = validate_identification(s1, s2, f, eps=args.eps)
    if not rep.ok and not args.unsafe_glue:
        _emit(args, {"identification": _violations_dict(rep)}, "identification invalid\n" + _violations_text(rep))
        return FAILED
    g = glue(s1, s2, f, unsafe=True)
    payload = io.glued_to_dict(g)
    _emit(args, payload, f"{g.n} classes, {len(g.degenerate)} degenerate pairs")
    return OK


def cmd_fixture(args) -> int:
    fx = fixture(args.name, args.h)
    payload: dict = {"fixture": fx.name, "h": fx.h, "spaces": [io.space_to_dict(s) for s in fx.spaces]}
    if fx.identify is not None:
        payload["identify"] = [list(p) for p in fx.identify]
        if args.glue:
            g = glue(*fx.spaces, IdentificationMap(fx.identify), unsafe=True)
            payload["glued"] = io.glued_to_dict(g)
    lines = [f"{fx.name}: {', '.join(str(s.n) for s in fx.spaces)} points, h = {fx.h}"]
    code = OK
    if args.do_assert:
        results = evaluate_fixture(fx, with_glue=args.glue)
        payload = {"fixture": fx.name, "h": fx.h, "assertions": [a.__dict__ for a in results]}
        lines += [f"[{a.status}] {a.name} {a.detail}" for a in results]
        code = OK if all(a.ok for a in results) else FAILED
    _emit(args, payload, "\n".join(lines))
    return code


def cmd_suite(args) -> int:
    if args.name not in SUITES:
        return _usage(f"unknown suite {args.name!r}")
    if SUITES[args.name].experimental and not args.experimental:
        return _usage(f"suite {args.name!r} needs --experimental")
    rep = run_suite(args.name, args.trials, args.seed, args.breaker, args.retry_cap)
    text = (
        f"{rep.suite}: {rep.accepted}/{rep.trials} trials accepted "
        f"(acceptance {rep.acceptance_rate:.3f}), {len(rep.counterexamples)} counterexamples, "
        f"{rep.elapsed:.1f} s"
    )
    _emit(args, rep.to_dict(timing=False), text)
    return OK if rep.ok else FAILED


def _dot(space: FiniteCausalSpace, labels) -> str:
    n = space.n
    strict = space.leq & ~np.eye(n, dtype=bool)
    # Hasse edges: drop pairs implied by a two-step chain
    s = strict.astype(np.float32)
    cover = strict & ~((s @ s) > 0)
    lines = ["digraph causal {", "  rankdir=BT;"]
    lines += [f'  n{i} [label="{labels[i]}"];' for i in range(n)]
    for i, j in np.argwhere(cover):
        style = "solid" if space.ll[i, j] else "dashed"
        lines.append(f"  n{i} -> n{j} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _csv(rows, header) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_export(args) -> int:
    if args.out is None:
        return _usage("export needs --out DIR")
    args.out.mkdir(parents=True, exist_ok=True)
    crossing = None
    if args.space is not None:
        space = io.load_space(args.space)
    else:
        fx = fixture(args.fixture, args.h)
        space = fx.spaces[0]
        if fx.identify is not None and args.glue:
            s1, s2 = fx.spaces
            g = glue(s1, s2, IdentificationMap(fx.identify), unsafe=True)
            space = g.as_space()
            m = fx.marked
            try:
                x, y = point_index(s1, m["x"]), point_index(s2, m["y"])
            except KeyError:
                x = y = None
            if x is not None:
                rows = []
                for a1, a2 in fx.identify:
                    if s1.leq[x, a1] and s2.leq[a2, y]:
                        t1, t2 = s1.tau[x, a1], s2.tau[a2, y]
                        rows.append([*s1.coords[a1], t1, t2, t1 + t2])
                crossing = _csv(rows, ["x", "t", "tau_in", "tau_out", "sum"])
    labels = [f"{x:g},{t:g}" for x, t in space.coords] if space.coords is not None else [str(i) for i in range(space.n)]
    files = {"relations.dot": _dot(space, labels)}
    rows = [[i, j, int(space.leq[i, j]), int(space.ll[i, j]), space.tau[i, j]] for i, j in np.argwhere(space.leq)]
    files["cones.csv"] = _csv(rows, ["i", "j", "leq", "ll", "tau"])
    if crossing is not None:
        files["crossing.csv"] = crossing
    for name, body in files.items():
        (args.out / name).write_text(body)
    _emit(args, {"written": sorted(files)}, "wrote " + ", ".join(sorted(files)))
    return OK


COMMANDS = {
    "validate": cmd_validate,
    "check": cmd_check,
    "sample": cmd_sample,
    "glue": cmd_glue,
    "fixture": cmd_fixture,
    "suite": cmd_suite,
    "export": cmd_export,
}


def parse_command(argv: list[str]) -> argparse.Namespace:
    """Parse ``argv``; raises ``SystemExit(2)`` on usage errors."""
    return build_parser().parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_command(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else USAGE
    try:
        return COMMANDS[args.verb](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else USAGE
    except KeyError as exc:
        if args.verb == "fixture" or getattr(args, "fixture", None):
            return _usage(str(exc.args[0]) if exc.args else "unknown fixture")
        raise
    except (io.InvalidInput, RegionError) as exc:
        print(f"causalglue: invalid input: {exc}", file=sys.stderr)
        return INVALID
    except PreconditionError as exc:
        print(f"causalglue: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
