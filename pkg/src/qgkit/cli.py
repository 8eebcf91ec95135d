"""The ``qg`` command.

Exit codes: 0 success (identity holds, model found, count computed),
1 identity fails or no model (including inconclusive searches),
2 usage or input error.  Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

from .identities import DivisionOnNonQuasigroup, IdentityParseError, holds, resolve
from .gf2 import gf2r_construct
from .search import SearchProblem, parse_problem, search
from .spectrum import DEFAULT_BUDGET, spectrum_report
from .table import CayleyTable, direct_product, properties, read_table, serialize_table, write_table
from .tq import build_tq, identity_map, parse_endomorphism, parse_group, TQSpec

OK, FAIL, USAGE = 0, 1, 2


class InputError(Exception):
    pass


def _emit(text: str) -> None:
    if text:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _diag(text: str) -> None:
    sys.stderr.write(text + "\n")


def _load(path: str) -> CayleyTable:
    try:
        return read_table(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _identities(names):
    try:
        return [resolve(n) for n in names]
    except (IdentityParseError, KeyError) as exc:
        raise InputError(str(exc)) from exc


def _label(ident) -> str:
    return ident.name or ident.source


def _verdict_records(t, idents):
    """(all_hold, [(identity, Verdict)])."""
    out = []
    for ident in idents:
        try:
            out.append((ident, holds(t, ident)))
        except DivisionOnNonQuasigroup as exc:
            raise InputError(str(exc)) from exc
    return all(v.holds for _, v in out), out


def _verdict_text(results, fmt: str) -> str:
    if fmt == "records":
        return "\n".join(
            json.dumps({"identity": _label(i), "holds": v.holds, "counterexample": v.counterexample}, sort_keys=True)
            for i, v in results
        )
    return "\n".join(f"{_label(i)}: {v.describe()}" for i, v in results)


def _props_text(t, fmt: str) -> str:
    rep = properties(t)
    if fmt == "records":
        d = asdict(rep)
        d["witnesses"] = {k: list(v) for k, v in rep.witnesses.items()}
        d["counterexamples"] = {k: list(v) for k, v in rep.counterexamples.items()}
        return json.dumps(d, sort_keys=True)
    return rep.summary()


# --------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    t = _load(args.table)
    idents = _identities(args.identity)
    ok, results = _verdict_records(t, idents)
    _emit(_verdict_text(results, args.format))
    if not args.no_props:
        _emit(_props_text(t, args.format))
    return OK if ok else FAIL


def cmd_props(args) -> int:
    _emit(_props_text(_load(args.table), args.format))
    return OK


def _build(args) -> CayleyTable:
    try:
        if args.kind == "tq":
            group = parse_group(args.group)
            phi = parse_endomorphism(group, args.phi)
            psi = identity_map(group) if args.psi is None else parse_endomorphism(group, args.psi)
            return build_tq(TQSpec(group, phi, psi, args.a))
        if args.kind == "gf2r":
            return gf2r_construct(args.r, args.a)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return _product(args.left, args.right)


def _product(left: str, right: str) -> CayleyTable:
    a, b = _load(left), _load(right)
    try:
        return direct_product(a, b)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _write_and_verify(t: CayleyTable, args) -> int:
    idents = _identities(args.verify or [])
    if args.out:
        write_table(t, args.out)
        report = _emit
    else:
        _emit(serialize_table(t))
        report = _diag  # keep stdout a clean table
    if not idents:
        return OK
    ok, results = _verdict_records(t, idents)
    report(_verdict_text(results, args.format))
    return OK if ok else FAIL


def cmd_construct(args) -> int:
    if args.kind == "tq" and (args.group is None or args.phi is None):
        raise InputError("construct tq needs --group and --phi")
    if args.kind == "gf2r" and (args.r is None or args.a is None):
        raise InputError("construct gf2r needs --r and --a")
    if args.kind == "product" and (args.left is None or args.right is None):
        raise InputError("construct product needs two table files")
    if args.kind == "tq" and args.a is None:
        args.a = 0
    return _write_and_verify(_build(args), args)


def cmd_product(args) -> int:
    return _write_and_verify(_product(args.left, args.right), args)


def _problem(args) -> SearchProblem:
    try:
        if args.problem:
            try:
                with open(args.problem, encoding="utf-8") as fh:
                    p = parse_problem(fh.read())
            except OSError as exc:
                raise InputError(f"cannot read {args.problem}: {exc.strerror or exc}") from exc
            kw = {}
            if args.mode:
                kw["mode"] = args.mode
            if args.limit is not None:
                kw["limit"] = args.limit
            if args.budget is not None:
                kw["node_budget"] = args.budget
            return SearchProblem(
                p.order, p.identities, p.constraints, p.fixed_cells,
                kw.get("mode", p.mode), kw.get("limit", p.limit), kw.get("node_budget", p.node_budget),
            )
        if args.order is None:
            raise InputError("search needs --order or --problem")
        fixed = []
        for f in args.fix or []:
            try:
                r, c, v = (int(s) for s in f.split(","))
            except ValueError as exc:
                raise InputError(f"--fix expects r,c,v, got {f!r}") from exc
            fixed.append((r, c, v))
        return SearchProblem(
            args.order,
            tuple(_identities(args.identity or [])),
            frozenset(args.constraint or []),
            tuple(fixed),
            args.mode or "first",
            args.limit,
            args.budget,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _count_line(out) -> str:
    word = "model" if out.count == 1 else "models"
    if out.budget_exhausted:
        return f"inconclusive: node budget exhausted after {out.nodes_visited} nodes, {out.count} {word} so far"
    if out.stopped_by == "limit" and out.count == 1 and out.models:
        return "model found"
    if out.stopped_by == "limit":
        return f"{out.count} {word} (stopped at limit)"
    return f"{out.count} {word} (exhaustive)"


def cmd_search(args) -> int:
    problem = _problem(args)
    try:
        out = search(problem, jobs=args.jobs)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.format == "records":
        _emit(json.dumps({
            "count": out.count,
            "exhausted": out.exhausted,
            "nodes_visited": out.nodes_visited,
            "stopped_by": out.stopped_by,
            "models": [[list(r) for r in m.rows] for m in out.models],
        }, sort_keys=True))
    else:
        if problem.mode != "count":
            _emit("\n".join(serialize_table(m) for m in out.models))
        _emit(_count_line(out))
    if out.count > 0:
        return OK
    return FAIL


def cmd_spectrum(args) -> int:
    try:
        rep = spectrum_report(args.identity, args.max, budget=args.budget, idempotent=args.idempotent)
    except (ValueError, KeyError) as exc:
        raise InputError(str(exc)) from exc
    _emit(rep.to_records() if args.format == "records" else rep.to_text())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rep.to_records() + "\n")
    return OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qg", description="Finite quasigroup toolkit.")
    ap.add_argument("--format", choices=("plain", "records"), default="plain")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for search")
    ap.add_argument("-v", "--verbose", action="store_true")
    # the global flags are accepted after the subcommand as well
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("plain", "records"), default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="check identities on a table file")
    p.add_argument("table")
    p.add_argument("--identity", "-i", action="append", required=True,
                   help="registry name or inline identity; repeatable")
    p.add_argument("--no-props", action="store_true", help="skip the property summary")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("props", parents=[common], help="structural properties of a table file")
    p.add_argument("table")
    p.set_defaults(func=cmd_props)

    p = sub.add_parser("construct", parents=[common], help="build a table from a construction")
    p.add_argument("kind", choices=("tq", "gf2r", "product"))
    p.add_argument("left", nargs="?", help="first factor (product)")
    p.add_argument("right", nargs="?", help="second factor (product)")
    p.add_argument("--group", help="zn:N or ea:P^K")
    p.add_argument("--phi")
    p.add_argument("--psi", help="defaults to the identity map")
    p.add_argument("--a", type=int, help="constant (tq) or field element (gf2r)")
    p.add_argument("--r", type=int)
    p.add_argument("--out", "-o")
    p.add_argument("--verify", nargs="+", metavar="IDENTITY")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("product", parents=[common], help="direct product of two table files")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--out", "-o")
    p.add_argument("--verify", nargs="+", metavar="IDENTITY")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("search", parents=[common], help="search for models")
    p.add_argument("--order", type=int)
    p.add_argument("--identity", "-i", action="append")
    p.add_argument("--constraint", action="append", choices=("idempotent", "left_identity", "right_identity"))
    p.add_argument("--fix", action="append", metavar="R,C,V")
    p.add_argument("--mode", choices=("first", "count", "enumerate"))
    p.add_argument("--limit", type=int)
    p.add_argument("--budget", type=int, help="node budget")
    p.add_argument("--problem", help="problem file")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("spectrum", parents=[common], help="existence status per order")
    p.add_argument("--identity", "-i", required=True)
    p.add_argument("--max", type=int, required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--idempotent", action="store_true")
    p.add_argument("--out", "-o", help="also write the records to this file")
    p.set_defaults(func=cmd_spectrum)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.jobs < 1:
        _diag("qg: --jobs must be >= 1")
        return USAGE
    try:
        return args.func(args)
    except InputError as exc:
        _diag(f"qg: {exc}")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
