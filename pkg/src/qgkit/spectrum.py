"""Existence spectra: product closures and per-order existence reports."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .corpus import corpus_entry, load_corpus
from .gf2 import IRREDUCIBLE, gf2r_construct
from .identities import Identity, builtin, holds, resolve
from .search import SearchProblem, search
from .table import CayleyTable, direct_product
from .tq import (
    TQSpec,
    aut_order,
    automorphisms,
    build_tq,
    cyclic,
    elementary_abelian,
    linear_holds,
    parse_endomorphism,
    parse_group,
)

# base orders of exhibited models, per identity; new identities register here
BASE_ORDERS: dict[str, tuple[int, ...]] = {
    "belousov_xyyx": (3, 4, 5, 7, 8, 11, 23),
    "stein3": (4, 5, 6, 7, 8, 9, 10, 13, 17, 29),
}

STATUSES = ("exists_by_construction", "exists_by_search", "none_by_search", "none_by_theorem", "unknown")
MAX_SPECTRUM_ORDER = 64
DEFAULT_BUDGET = 200_000
MAX_SCANNED_AUTOMORPHISMS = 200


def closure(bases, max_n: int) -> list[int]:
    """All products of nonempty multisets of ``bases`` that are <= max_n."""
    bases = sorted(set(bases))
    if not bases:
        raise ValueError("bases must be nonempty")
    if any(b < 2 for b in bases):
        raise ValueError("bases must be >= 2")
    found = set()
    frontier = [b for b in bases if b <= max_n]
    while frontier:
        nxt = []
        for a in frontier:
            if a in found:
                continue
            found.add(a)
            nxt.extend(a * b for b in bases if a * b <= max_n)
        frontier = nxt
    return sorted(found)


@dataclass
class OrderStatus:
    order: int
    status: str
    witness: str = ""


@dataclass
class SpectrumReport:
    identity: str
    idempotent: bool
    max_order: int
    entries: list[OrderStatus] = field(default_factory=list)

    def status(self, n: int) -> OrderStatus:
        for e in self.entries:
            if e.order == n:
                return e
        raise KeyError(n)

    def exists(self, n: int) -> bool:
        return self.status(n).status.startswith("exists")

    def to_text(self) -> str:
        name = self.identity + (" + idempotent" if self.idempotent else "")
        lines = [f"spectrum of {name} up to {self.max_order}", f"{'order':>5}  {'status':24s} witness"]
        for e in self.entries:
            w = e.witness if len(e.witness) <= 60 else e.witness[:57] + "..."
            lines.append(f"{e.order:>5}  {e.status:24s} {w}")
        return "\n".join(lines)

    def to_records(self) -> str:
        return "\n".join(json.dumps(asdict(e), sort_keys=True) for e in self.entries)


# --------------------------------------------------------------------------
# witnesses


def materialize(recipe: str, report: SpectrumReport | None = None) -> CayleyTable:
    """Turn a witness recipe back into a table.

    ``tq <group> phi=<e> psi=<e> a=<k>``, ``gf2r r=<r> a=<k>``,
    ``corpus <name>``, ``table <row>;<row>;...`` with comma-separated
    entries, ``product <m> <k>`` (needs the report holding both orders).
    """
    kind, _, rest = recipe.partition(" ")
    parts = rest.split()
    if kind == "tq":
        group = parse_group(parts[0])
        kv = dict(p.split("=", 1) for p in parts[1:])
        spec = TQSpec(
            group,
            parse_endomorphism(group, kv["phi"]),
            parse_endomorphism(group, kv["psi"]),
            int(kv.get("a", "0")),
        )
        return build_tq(spec)
    if kind == "gf2r":
        kv = dict(p.split("=", 1) for p in parts)
        return gf2r_construct(int(kv["r"]), int(kv["a"]))
    if kind == "corpus":
        return corpus_entry(parts[0]).table
    if kind == "table":
        rows = tuple(tuple(int(v) for v in r.split(",")) for r in rest.split(";"))
        return CayleyTable(rows)
    if kind == "product":
        if report is None:
            raise ValueError("product recipes need the report they came from")
        a, b = int(parts[0]), int(parts[1])
        return direct_product(
            materialize(report.status(a).witness, report), materialize(report.status(b).witness, report)
        )
    raise ValueError(f"unknown witness recipe {recipe!r}")


def _table_recipe(t: CayleyTable) -> str:
    return "table " + ";".join(",".join(str(v) for v in r) for r in t.rows)


def _groups_of_order(n: int):
    yield cyclic(n)
    for p in range(2, n + 1):
        if n % p or any(p % d == 0 for d in range(2, p)):
            continue
        k = round(math.log(n, p))
        if k >= 2 and p**k == n:
            g = elementary_abelian(p, k)
            if aut_order(g) <= MAX_SCANNED_AUTOMORPHISMS:
                yield g


def _tq_witness(n: int, idents: list[Identity]) -> str | None:
    for g in _groups_of_order(n):
        auts = automorphisms(g)
        for phi in auts:
            for psi in auts:
                if all(linear_holds(i, phi, psi) for i in idents):
                    return f"tq {g} phi={phi} psi={psi} a=0"
    return None


def _gf2r_witness(n: int, idents: list[Identity]) -> str | None:
    r = n.bit_length() - 1
    if n != 1 << r or r not in IRREDUCIBLE:
        return None
    if any(len(i.variables) > 3 for i in idents):
        return None
    t = gf2r_construct(r, 2)
    if all(holds(t, i) for i in idents):
        return f"gf2r r={r} a=2"
    return None


def _corpus_witness(n: int, idents: list[Identity]) -> str | None:
    for e in load_corpus():
        if e.table.order == n and all(holds(e.table, i) for i in idents):
            return f"corpus {e.name}"
    return None


def spectrum_report(
    which: str,
    max_order: int,
    budget: int = DEFAULT_BUDGET,
    idempotent: bool = False,
    max_allowed: int = MAX_SPECTRUM_ORDER,
) -> SpectrumReport:
    """Existence status for every order 2..max_order.

    Order of attempts: theorem filter (idempotent schroeder2 only),
    T-quasigroups, GF(2^r), reference tables, direct products of smaller
    witnesses, bounded search.  Budget exhaustion yields ``unknown``.
    """
    if max_order > max_allowed:
        raise ValueError(f"max order {max_order} exceeds the limit {max_allowed}")
    ident = resolve(which)
    idents = [ident] + ([builtin("idempotent")] if idempotent else [])
    name = ident.name or ident.source
    report = SpectrumReport(name, idempotent, max_order)
    for n in range(2, max_order + 1):
        report.entries.append(_status_for(n, ident, idents, report, budget))
    return report


def _status_for(n, ident, idents, report, budget) -> OrderStatus:
    if report.idempotent and ident.name == "schroeder2" and n % 4 in (2, 3):
        return OrderStatus(n, "none_by_theorem", "idempotent schroeder2 needs n = 0 or 1 mod 4")
    for finder in (_tq_witness, _gf2r_witness, _corpus_witness):
        w = finder(n, idents)
        if w:
            return OrderStatus(n, "exists_by_construction", w)
    for a in range(2, math.isqrt(n) + 1):
        if n % a == 0 and report.exists(a) and report.exists(n // a):
            return OrderStatus(n, "exists_by_construction", f"product {a} {n // a}")
    out = search(SearchProblem(n, tuple(idents), mode="first", node_budget=budget))
    if out.models:
        return OrderStatus(n, "exists_by_search", _table_recipe(out.models[0]))
    if out.exhausted:
        return OrderStatus(n, "none_by_search", f"exhaustive, {out.nodes_visited} nodes")
    return OrderStatus(n, "unknown", f"budget {budget} nodes exhausted")
