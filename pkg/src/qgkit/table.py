"""Cayley tables of finite binary operations on {0, ..., n-1}.

A :class:`CayleyTable` is immutable; every derived object (divisions,
products) is a new table.  Structural predicates are computed by plain
exhaustive loops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

MAX_PRODUCT_ORDER = 2**16


class TableFormatError(ValueError):
    """Malformed table text.  ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class NotAQuasigroupError(ValueError):
    pass


@dataclass(frozen=True)
class CayleyTable:
    rows: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(v) for v in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0:
            raise ValueError("table order must be positive")
        for i, r in enumerate(rows):
            if len(r) != n:
                raise ValueError(f"row {i} has {len(r)} entries, expected {n}")
            for j, v in enumerate(r):
                if not 0 <= v < n:
                    raise ValueError(f"entry {v} out of range at ({i}, {j})")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != n:
                raise ValueError(f"expected {n} labels, got {len(labels)}")
            if len(set(labels)) != n:
                raise ValueError("duplicate labels")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_function(cls, n: int, op) -> CayleyTable:
        return cls(tuple(tuple(op(x, y) for y in range(n)) for x in range(n)))

    @property
    def order(self) -> int:
        return len(self.rows)

    def __call__(self, x: int, y: int) -> int:
        return self.rows[x][y]

    def __getitem__(self, x: int) -> tuple[int, ...]:
        return self.rows[x]

    def column(self, y: int) -> tuple[int, ...]:
        return tuple(r[y] for r in self.rows)

    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.rows[i][i] for i in range(self.order))

    def flat(self) -> tuple[int, ...]:
        return tuple(v for r in self.rows for v in r)

    def __str__(self) -> str:
        return serialize_table(self)


# --------------------------------------------------------------------------
# text format


def parse_table(text: str) -> CayleyTable:
    """Parse the table file format.

    First non-comment line is the order n, then n rows of n entries.  An
    optional ``# labels: a,b,...`` line names the elements; other lines
    starting with ``#`` are ignored.
    """
    lines = text.splitlines()
    labels: list[str] | None = None
    labels_line = 0
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(lines, start=1):
        s = raw.strip()
        if not s:
            continue
        if s.startswith("#"):
            rest = s[1:].strip()
            if rest.lower().startswith("labels:"):
                labels = [p.strip() for p in rest[len("labels:"):].split(",")]
                labels_line = lineno
            continue
        body.append((lineno, raw))
    if not body:
        raise TableFormatError("missing header line with the table order", 1)

    head_line, head = body[0]
    try:
        n = int(head.strip())
    except ValueError:
        raise TableFormatError(f"malformed header {head.strip()!r}, expected the order", head_line, 1)
    if n < 1:
        raise TableFormatError(f"order must be positive, got {n}", head_line, 1)

    rows = body[1:]
    if len(rows) != n:
        last = rows[-1][0] if rows else head_line
        raise TableFormatError(f"expected {n} rows, found {len(rows)}", last)

    entries: list[tuple[int, ...]] = []
    for lineno, raw in rows:
        row: list[int] = []
        for col, tok in _tokens(raw):
            try:
                v = int(tok)
            except ValueError:
                raise TableFormatError(f"entry {tok!r} is not an integer", lineno, col)
            if not 0 <= v < n:
                raise TableFormatError(f"entry {v} out of range [0, {n})", lineno, col)
            row.append(v)
        if len(row) != n:
            raise TableFormatError(f"ragged row: {len(row)} entries, expected {n}", lineno)
        entries.append(tuple(row))

    if labels is not None:
        if len(labels) != n:
            raise TableFormatError(f"expected {n} labels, got {len(labels)}", labels_line)
        seen = set()
        for lab in labels:
            if lab in seen:
                raise TableFormatError(f"duplicate label {lab!r}", labels_line)
            seen.add(lab)
    return CayleyTable(tuple(entries), tuple(labels) if labels is not None else None)


def _tokens(line: str):
    i = 0
    while i < len(line):
        if line[i].isspace():
            i += 1
            continue
        j = i
        while j < len(line) and not line[j].isspace():
            j += 1
        yield i + 1, line[i:j]
        i = j


def serialize_table(t: CayleyTable) -> str:
    out = [str(t.order)]
    out.extend(" ".join(str(v) for v in r) for r in t.rows)
    if t.labels is not None:
        out.append("# labels: " + ",".join(t.labels))
    return "\n".join(out)


def read_table(path) -> CayleyTable:
    with open(path, encoding="utf-8") as fh:
        return parse_table(fh.read())


def write_table(t: CayleyTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_table(t) + "\n")


# --------------------------------------------------------------------------
# structural predicates


@dataclass
class PropertyReport:
    """Structural flags of a table.

    ``witnesses`` maps a flag name to the element(s) proving it when that
    makes sense (identity elements); ``counterexamples`` maps every false
    flag to a concrete tuple refuting it.
    """

    order: int
    is_left_quasigroup: bool
    is_right_quasigroup: bool
    is_quasigroup: bool
    has_left_identity: bool
    has_right_identity: bool
    is_loop: bool
    is_idempotent: bool
    is_commutative: bool
    is_associative: bool
    is_medial: bool
    diagonal_injective: bool
    is_elementary_abelian_2group: bool
    left_identity: int | None = None
    right_identity: int | None = None
    witnesses: dict[str, tuple] = field(default_factory=dict)
    counterexamples: dict[str, tuple] = field(default_factory=dict)

    FLAGS = (
        "is_left_quasigroup",
        "is_right_quasigroup",
        "is_quasigroup",
        "has_left_identity",
        "has_right_identity",
        "is_loop",
        "is_idempotent",
        "is_commutative",
        "is_associative",
        "is_medial",
        "diagonal_injective",
        "is_elementary_abelian_2group",
    )

    def summary(self) -> str:
        lines = []
        for name in self.FLAGS:
            value = getattr(self, name)
            extra = ""
            if value and name in self.witnesses:
                extra = f"  witness={self.witnesses[name]}"
            elif not value and name in self.counterexamples:
                extra = f"  counterexample={self.counterexamples[name]}"
            lines.append(f"{name:30s} {str(value).lower()}{extra}")
        return "\n".join(lines)


def _missing(values: Sequence[int], n: int) -> int | None:
    seen = set(values)
    for v in range(n):
        if v not in seen:
            return v
    return None


def left_identity_element(t: CayleyTable) -> int | None:
    n = t.order
    for e in range(n):
        if all(t.rows[e][x] == x for x in range(n)):
            return e
    return None


def right_identity_element(t: CayleyTable) -> int | None:
    n = t.order
    for e in range(n):
        if all(t.rows[x][e] == x for x in range(n)):
            return e
    return None


def properties(t: CayleyTable) -> PropertyReport:
    n = t.order
    m = t.rows
    rng = range(n)
    wit: dict[str, tuple] = {}
    cex: dict[str, tuple] = {}

    # a row missing value b means a*x = b has no solution
    left_q = True
    for a in rng:
        b = _missing(m[a], n)
        if b is not None:
            left_q = False
            cex["is_left_quasigroup"] = (a, b)
            break
    right_q = True
    for a in rng:
        b = _missing(t.column(a), n)
        if b is not None:
            right_q = False
            cex["is_right_quasigroup"] = (a, b)
            break
    quasi = left_q and right_q
    if not quasi:
        cex["is_quasigroup"] = cex.get("is_left_quasigroup") or cex["is_right_quasigroup"]

    le = left_identity_element(t)
    re_ = right_identity_element(t)
    if le is not None:
        wit["has_left_identity"] = (le,)
    else:
        # for every candidate e, some x with e*x != x
        cex["has_left_identity"] = tuple(next(x for x in rng if m[e][x] != x) for e in rng)
    if re_ is not None:
        wit["has_right_identity"] = (re_,)
    else:
        cex["has_right_identity"] = tuple(next(x for x in rng if m[x][e] != x) for e in rng)

    two_sided = None
    for e in rng:
        if all(m[e][x] == x and m[x][e] == x for x in rng):
            two_sided = e
            break
    loop = quasi and two_sided is not None
    if loop:
        wit["is_loop"] = (two_sided,)
    elif not quasi:
        cex["is_loop"] = cex["is_quasigroup"]
    else:
        cex["is_loop"] = tuple(
            next(x for x in rng if m[e][x] != x or m[x][e] != x) for e in rng
        )

    idem = True
    for x in rng:
        if m[x][x] != x:
            idem = False
            cex["is_idempotent"] = (x,)
            break

    comm = True
    for x, y in product(rng, repeat=2):
        if m[x][y] != m[y][x]:
            comm = False
            cex["is_commutative"] = (x, y)
            break

    assoc = True
    for x, y, z in product(rng, repeat=3):
        if m[m[x][y]][z] != m[x][m[y][z]]:
            assoc = False
            cex["is_associative"] = (x, y, z)
            break

    medial = True
    for x, y, u, v in product(rng, repeat=4):
        if m[m[x][y]][m[u][v]] != m[m[x][u]][m[y][v]]:
            medial = False
            cex["is_medial"] = (x, y, u, v)
            break

    diag_inj = True
    first_seen: dict[int, int] = {}
    for x in rng:
        d = m[x][x]
        if d in first_seen:
            diag_inj = False
            cex["diagonal_injective"] = (first_seen[d], x)
            break
        first_seen[d] = x

    ea2 = assoc and comm and loop
    if ea2:
        e = two_sided
        for x in rng:
            if m[x][x] != e:
                ea2 = False
                cex["is_elementary_abelian_2group"] = (x,)
                break
        if ea2:
            wit["is_elementary_abelian_2group"] = (e,)
    else:
        for reason in ("is_loop", "is_associative", "is_commutative"):
            if reason in cex:
                cex["is_elementary_abelian_2group"] = cex[reason]
                break

    return PropertyReport(
        order=n,
        is_left_quasigroup=left_q,
        is_right_quasigroup=right_q,
        is_quasigroup=quasi,
        has_left_identity=le is not None,
        has_right_identity=re_ is not None,
        is_loop=loop,
        is_idempotent=idem,
        is_commutative=comm,
        is_associative=assoc,
        is_medial=medial,
        diagonal_injective=diag_inj,
        is_elementary_abelian_2group=ea2,
        left_identity=le,
        right_identity=re_,
        witnesses=wit,
        counterexamples=cex,
    )


def is_latin(t: CayleyTable) -> bool:
    n = t.order
    full = set(range(n))
    return all(set(r) == full for r in t.rows) and all(set(t.column(j)) == full for j in range(n))


# --------------------------------------------------------------------------
# parastrophes


def _require_quasigroup(t: CayleyTable) -> None:
    n = t.order
    for i, r in enumerate(t.rows):
        b = _missing(r, n)
        if b is not None:
            raise NotAQuasigroupError(f"row {i} is not a permutation (value {b} missing)")
    for j in range(n):
        b = _missing(t.column(j), n)
        if b is not None:
            raise NotAQuasigroupError(f"column {j} is not a permutation (value {b} missing)")


def left_division(t: CayleyTable) -> CayleyTable:
    """x \\ y, the unique z with x*z = y."""
    _require_quasigroup(t)
    n = t.order
    out = [[0] * n for _ in range(n)]
    for x in range(n):
        for z, y in enumerate(t.rows[x]):
            out[x][y] = z
    return CayleyTable(tuple(map(tuple, out)), t.labels)


def right_division(t: CayleyTable) -> CayleyTable:
    """y / x, the unique z with z*x = y."""
    _require_quasigroup(t)
    n = t.order
    out = [[0] * n for _ in range(n)]
    for z in range(n):
        for x, y in enumerate(t.rows[z]):
            out[y][x] = z
    return CayleyTable(tuple(map(tuple, out)), t.labels)


BIRKHOFF_IDENTITIES = (
    "x*(x\\y) = y",
    "(y/x)*x = y",
    "x\\(x*y) = y",
    "(y*x)/x = y",
    "x/(y\\x) = y",
    "(x/y)\\x = y",
)


@dataclass(frozen=True)
class BirkhoffVerdict:
    holds: bool
    identity: str | None = None
    assignment: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.holds


def check_birkhoff(mul: CayleyTable, ldiv: CayleyTable, rdiv: CayleyTable) -> BirkhoffVerdict:
    """Check the six equational-quasigroup laws; report the first failure.

    Laws are tried in the order of :data:`BIRKHOFF_IDENTITIES`, each over
    (x, y) in lexicographic order.
    """
    n = mul.order
    if ldiv.order != n or rdiv.order != n:
        raise ValueError(f"order mismatch: {n}, {ldiv.order}, {rdiv.order}")
    m, l, r = mul.rows, ldiv.rows, rdiv.rows
    laws = (
        lambda x, y: m[x][l[x][y]] == y,
        lambda x, y: m[r[y][x]][x] == y,
        lambda x, y: l[x][m[x][y]] == y,
        lambda x, y: r[m[y][x]][x] == y,
        lambda x, y: r[x][l[y][x]] == y,
        lambda x, y: l[r[x][y]][x] == y,
    )
    for text, law in zip(BIRKHOFF_IDENTITIES, laws):
        for x, y in product(range(n), repeat=2):
            if not law(x, y):
                return BirkhoffVerdict(False, text, (x, y))
    return BirkhoffVerdict(True)


# --------------------------------------------------------------------------
# products


def pair_index(i1: int, i2: int, order_b: int) -> int:
    return i1 * order_b + i2


def direct_product(a: CayleyTable, b: CayleyTable, max_order: int = MAX_PRODUCT_ORDER) -> CayleyTable:
    """Componentwise product; the pair (i1, i2) is element i1*|b| + i2."""
    na, nb = a.order, b.order
    n = na * nb
    if n > max_order:
        raise ValueError(f"product order {n} exceeds maximum {max_order}")
    rows = []
    for i1 in range(na):
        ra = a.rows[i1]
        for i2 in range(nb):
            rb = b.rows[i2]
            rows.append(tuple(ra[j1] * nb + rb[j2] for j1 in range(na) for j2 in range(nb)))
    return CayleyTable(tuple(rows))


def cyclic_group_table(n: int) -> CayleyTable:
    return CayleyTable.from_function(n, lambda x, y: (x + y) % n)


def elementary_abelian_2_table(k: int) -> CayleyTable:
    """Addition table of Z_2^k with bit-vector encoding (XOR)."""
    return CayleyTable.from_function(2**k, lambda x, y: x ^ y)
