"""T-quasigroups x*y = phi(x) + psi(y) + a over Z_n and Z_p^k.

Endomorphisms of Z_n are multipliers, endomorphisms of Z_p^k are k x k
matrices over Z_p acting on column vectors of base-p digits (most
significant digit first).  The ring operations needed to state the
characterisation conditions are provided as plain functions.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from .identities import builtin, holds
from .table import CayleyTable


class GroupMismatch(ValueError):
    pass


class NotInvertible(ValueError):
    pass


class ScanBoundExceeded(ValueError):
    pass


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


@dataclass(frozen=True)
class AbelianGroup:
    """``cyclic(n)`` or ``elementary_abelian(p, k)``."""

    kind: str
    n: int = 0
    p: int = 0
    k: int = 0

    def __post_init__(self) -> None:
        if self.kind == "cyclic":
            if self.n < 1:
                raise ValueError(f"cyclic group order must be >= 1, got {self.n}")
        elif self.kind == "elementary":
            if not _is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")
            if self.k < 1:
                raise ValueError(f"rank must be >= 1, got {self.k}")
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @property
    def order(self) -> int:
        return self.n if self.kind == "cyclic" else self.p**self.k

    def __str__(self) -> str:
        return f"zn:{self.n}" if self.kind == "cyclic" else f"ea:{self.p}^{self.k}"

    def to_vector(self, x: int) -> tuple[int, ...]:
        digits = []
        for _ in range(self.k):
            x, d = divmod(x, self.p)
            digits.append(d)
        return tuple(reversed(digits))

    def from_vector(self, v) -> int:
        x = 0
        for d in v:
            x = x * self.p + d % self.p
        return x

    def add(self, x: int, y: int) -> int:
        if self.kind == "cyclic":
            return (x + y) % self.n
        if self.p == 2:
            return x ^ y
        return self.from_vector(a + b for a, b in zip(self.to_vector(x), self.to_vector(y)))

    def neg(self, x: int) -> int:
        if self.kind == "cyclic":
            return -x % self.n
        return self.from_vector(-a for a in self.to_vector(x))

    def addition_table(self) -> CayleyTable:
        return CayleyTable.from_function(self.order, self.add)


def cyclic(n: int) -> AbelianGroup:
    return AbelianGroup("cyclic", n=n)


def elementary_abelian(p: int, k: int) -> AbelianGroup:
    return AbelianGroup("elementary", p=p, k=k)


def parse_group(text: str) -> AbelianGroup:
    """``zn:15`` or ``ea:2^3``."""
    kind, _, rest = text.strip().partition(":")
    try:
        if kind == "zn":
            return cyclic(int(rest))
        if kind == "ea":
            p, _, k = rest.partition("^")
            return elementary_abelian(int(p), int(k))
    except ValueError as exc:
        raise ValueError(f"bad group {text!r}: {exc}") from exc
    raise ValueError(f"bad group {text!r}; expected 'zn:N' or 'ea:P^K'")


# --------------------------------------------------------------------------
# endomorphisms


Matrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Endomorphism:
    group: AbelianGroup
    value: int | Matrix

    def __post_init__(self) -> None:
        g = self.group
        if g.kind == "cyclic":
            object.__setattr__(self, "value", int(self.value) % g.n)
        else:
            m = tuple(tuple(int(c) % g.p for c in row) for row in self.value)
            if len(m) != g.k or any(len(r) != g.k for r in m):
                raise ValueError(f"matrix must be {g.k}x{g.k}")
            object.__setattr__(self, "value", m)

    def __call__(self, x: int) -> int:
        g = self.group
        if g.kind == "cyclic":
            return self.value * x % g.n
        v = g.to_vector(x)
        return g.from_vector(sum(a * b for a, b in zip(row, v)) for row in self.value)

    def images(self) -> tuple[int, ...]:
        return tuple(self(x) for x in range(self.group.order))

    def __str__(self) -> str:
        if self.group.kind == "cyclic":
            return str(self.value)
        return ";".join("".join(str(c) for c in row) for row in self.value)


def parse_endomorphism(group: AbelianGroup, text: str) -> Endomorphism:
    """Multiplier ``8`` for Z_n; matrix rows ``110;101;010`` for Z_p^k."""
    text = text.strip()
    if group.kind == "cyclic":
        return Endomorphism(group, int(text))
    rows = []
    for r in text.split(";"):
        r = r.strip()
        entries = r.split(",") if "," in r else (r.split() if " " in r else list(r))
        rows.append(tuple(int(c) for c in entries))
    return Endomorphism(group, tuple(rows))


def _check_same(e: Endomorphism, f: Endomorphism) -> None:
    if e.group != f.group:
        raise GroupMismatch(f"endomorphisms of different groups: {e.group} vs {f.group}")


def _matmul(a: Matrix, b: Matrix, p: int) -> Matrix:
    k = len(a)
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) % p for j in range(k)) for i in range(k)
    )


def identity_map(g: AbelianGroup) -> Endomorphism:
    if g.kind == "cyclic":
        return Endomorphism(g, 1 % g.n)
    return Endomorphism(g, tuple(tuple(int(i == j) for j in range(g.k)) for i in range(g.k)))


def zero_map(g: AbelianGroup) -> Endomorphism:
    if g.kind == "cyclic":
        return Endomorphism(g, 0)
    return Endomorphism(g, tuple((0,) * g.k for _ in range(g.k)))


def negation_map(g: AbelianGroup) -> Endomorphism:
    return negate(identity_map(g))


def compose(e: Endomorphism, f: Endomorphism) -> Endomorphism:
    """(e o f)(x) = e(f(x))."""
    _check_same(e, f)
    g = e.group
    if g.kind == "cyclic":
        return Endomorphism(g, e.value * f.value)
    return Endomorphism(g, _matmul(e.value, f.value, g.p))


def add(e: Endomorphism, f: Endomorphism) -> Endomorphism:
    _check_same(e, f)
    g = e.group
    if g.kind == "cyclic":
        return Endomorphism(g, e.value + f.value)
    return Endomorphism(g, tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(e.value, f.value)))


def negate(e: Endomorphism) -> Endomorphism:
    g = e.group
    if g.kind == "cyclic":
        return Endomorphism(g, -e.value)
    return Endomorphism(g, tuple(tuple(-a for a in r) for r in e.value))


def scale(e: Endomorphism, c: int) -> Endomorphism:
    """c * e, the c-fold sum of e."""
    g = e.group
    if g.kind == "cyclic":
        return Endomorphism(g, c * e.value)
    return Endomorphism(g, tuple(tuple(c * a for a in r) for r in e.value))


def equals(e: Endomorphism, f: Endomorphism) -> bool:
    _check_same(e, f)
    return e.value == f.value


def _det_mod(m: Matrix, p: int) -> int:
    a = [list(r) for r in m]
    k = len(a)
    det = 1
    for c in range(k):
        piv = next((r for r in range(c, k) if a[r][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c] % p
        inv = pow(a[c][c], -1, p)
        for r in range(c + 1, k):
            f = a[r][c] * inv % p
            if f:
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
    return det % p


def is_invertible(e: Endomorphism) -> bool:
    g = e.group
    if g.kind == "cyclic":
        return math.gcd(e.value, g.n) == 1
    return _det_mod(e.value, g.p) != 0


@lru_cache(maxsize=None)
def inverse(e: Endomorphism) -> Endomorphism:
    g = e.group
    if not is_invertible(e):
        raise NotInvertible(f"endomorphism {e} of {g} is not invertible")
    if g.kind == "cyclic":
        return Endomorphism(g, pow(e.value, -1, g.n) if g.n > 1 else 0)
    p, k = g.p, g.k
    a = [list(r) + [int(i == j) for j in range(k)] for i, r in enumerate(e.value)]
    for c in range(k):
        piv = next(r for r in range(c, k) if a[r][c] % p)
        a[c], a[piv] = a[piv], a[c]
        inv = pow(a[c][c], -1, p)
        a[c] = [x * inv % p for x in a[c]]
        for r in range(k):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
    return Endomorphism(g, tuple(tuple(r[k:]) for r in a))


@lru_cache(maxsize=None)
def power(e: Endomorphism, k: int) -> Endomorphism:
    """e^k; negative k uses the inverse."""
    if k < 0:
        return power(inverse(e), -k)
    result = identity_map(e.group)
    base = e
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


def automorphisms(g: AbelianGroup) -> list[Endomorphism]:
    """All automorphisms, sorted by multiplier or by row-major matrix entries."""
    if g.kind == "cyclic":
        return [Endomorphism(g, m) for m in range(g.n) if math.gcd(m, g.n) == 1] or [Endomorphism(g, 0)]
    k, p = g.k, g.p
    out = []
    for flat in product(range(p), repeat=k * k):
        m = tuple(tuple(flat[i * k:(i + 1) * k]) for i in range(k))
        if _det_mod(m, p):
            out.append(Endomorphism(g, m))
    return out


def aut_order(g: AbelianGroup) -> int:
    if g.kind == "cyclic":
        return max(1, sum(1 for m in range(g.n) if math.gcd(m, g.n) == 1))
    p, k = g.p, g.k
    out = 1
    for i in range(k):
        out *= p**k - p**i
    return out


# --------------------------------------------------------------------------
# T-quasigroups


@dataclass(frozen=True)
class TQSpec:
    group: AbelianGroup
    phi: Endomorphism
    psi: Endomorphism
    a: int = 0

    def __post_init__(self) -> None:
        _check_same(self.phi, self.psi)
        if self.phi.group != self.group:
            raise GroupMismatch("phi/psi belong to a different group")
        if not 0 <= self.a < self.group.order:
            raise ValueError(f"constant a={self.a} is not an element of {self.group}")
        for name, e in (("phi", self.phi), ("psi", self.psi)):
            if not is_invertible(e):
                raise NotInvertible(f"{name}={e} is not an automorphism of {self.group}")

    def __str__(self) -> str:
        return f"tq({self.group}, phi={self.phi}, psi={self.psi}, a={self.a})"


def tq_spec(group: AbelianGroup | str, phi, psi, a: int = 0) -> TQSpec:
    """Convenience constructor accepting text forms."""
    if isinstance(group, str):
        group = parse_group(group)

    def endo(v):
        if isinstance(v, Endomorphism):
            return v
        if isinstance(v, str):
            return parse_endomorphism(group, v)
        return Endomorphism(group, v)

    return TQSpec(group, endo(phi), endo(psi), a)


def build_tq(spec: TQSpec) -> CayleyTable:
    g = spec.group
    n = g.order
    ph = spec.phi.images()
    ps = spec.psi.images()
    a = spec.a
    if g.kind == "cyclic":
        rows = tuple(tuple((ph[x] + ps[y] + a) % n for y in range(n)) for x in range(n))
    elif g.p == 2:
        rows = tuple(tuple(ph[x] ^ ps[y] ^ a for y in range(n)) for x in range(n))
    else:
        rows = tuple(tuple(g.add(g.add(ph[x], ps[y]), a) for y in range(n)) for x in range(n))
    return CayleyTable(rows)


# --------------------------------------------------------------------------
# characterisation conditions


@dataclass(frozen=True)
class Condition:
    label: str
    holds: bool
    lhs: Endomorphism | None = None
    rhs: Endomorphism | None = None

    def describe(self) -> str:
        mark = "ok  " if self.holds else "FAIL"
        if self.lhs is None:
            return f"{mark} {self.label}"
        return f"{mark} {self.label}   [{self.lhs} vs {self.rhs}]"


@dataclass
class ConditionReport:
    identity: str
    conditions: list[Condition]
    notes: dict[str, bool] = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c.holds for c in self.conditions)

    def __bool__(self) -> bool:
        return self.overall

    def describe(self) -> str:
        lines = [f"{self.identity}: {'all conditions hold' if self.overall else 'conditions fail'}"]
        lines += ["  " + c.describe() for c in self.conditions]
        lines += [f"  note {k}: {v}" for k, v in self.notes.items()]
        return "\n".join(lines)


def _cond(label: str, lhs: Endomorphism, rhs: Endomorphism) -> Condition:
    return Condition(label, equals(lhs, rhs), lhs, rhs)


THEOREM_IDENTITIES = ("genassoc_q", "schroeder2", "belousov_xyyx", "stein3")


def _require_linear(spec: TQSpec, which: str) -> None:
    if which not in THEOREM_IDENTITIES:
        raise ValueError(f"no characterisation for {which!r}; supported: {', '.join(THEOREM_IDENTITIES)}")
    if spec.a != 0:
        raise ValueError("characterisations are stated for x*y = phi(x) + psi(y), need a = 0")


def check_conditions(spec: TQSpec, which: str) -> ConditionReport:
    """Evaluate the published if-and-only-if conditions for ``which``.

    For genassoc_q the listed set is phi = psi^-2, phi^7 = eps,
    psi^14 = eps and phi psi + psi phi = 0.  Whether the negation map
    equals psi^-7 is recorded under ``notes`` and does not enter
    ``overall``.
    """
    _require_linear(spec, which)
    g = spec.group
    phi, psi = spec.phi, spec.psi
    eps, zero, neg = identity_map(g), zero_map(g), negation_map(g)
    pp = add(compose(phi, psi), compose(psi, phi))
    sq = add(power(phi, 2), power(psi, 2))
    notes: dict[str, bool] = {}
    if which == "genassoc_q":
        conds = [
            _cond("phi = psi^-2", phi, power(psi, -2)),
            _cond("phi^7 = eps", power(phi, 7), eps),
            _cond("psi^14 = eps", power(psi, 14), eps),
            _cond("phi psi + psi phi = 0", pp, zero),
        ]
        notes["I = psi^-7"] = equals(neg, power(psi, -7))
    elif which == "schroeder2":
        conds = [_cond("phi^2 + psi^2 = eps", sq, eps), _cond("phi psi + psi phi = 0", pp, zero)]
    elif which == "belousov_xyyx":
        conds = [
            _cond("phi = I psi^3", phi, compose(neg, power(psi, 3))),
            _cond("psi^4 + psi^5 = I", add(power(psi, 4), power(psi, 5)), neg),
        ]
    else:
        conds = [_cond("phi^2 + psi^2 = 0", sq, zero), _cond("phi psi + psi phi = eps", pp, eps)]
    return ConditionReport(which, conds, notes)


class NonCommuting(ValueError):
    pass


def corollary_check(spec: TQSpec, which: str) -> ConditionReport:
    """Medial-case (phi psi = psi phi) condition sets."""
    _require_linear(spec, which)
    g = spec.group
    phi, psi = spec.phi, spec.psi
    if not equals(compose(phi, psi), compose(psi, phi)):
        raise NonCommuting(f"phi={phi} and psi={psi} do not commute")
    eps, zero, neg = identity_map(g), zero_map(g), negation_map(g)
    sq = add(power(phi, 2), power(psi, 2))
    exp2 = _cond("eps + eps = 0 (exponent 2)", scale(eps, 2), zero)
    if which == "genassoc_q":
        conds = [
            exp2,
            _cond("phi = psi^-2", phi, power(psi, -2)),
            _cond("phi^7 = eps", power(phi, 7), eps),
            _cond("psi^14 = eps", power(psi, 14), eps),
        ]
    elif which == "schroeder2":
        conds = [_cond("phi^2 + psi^2 = eps", sq, eps), exp2]
    elif which == "belousov_xyyx":
        conds = [
            _cond("phi = I psi^3", phi, compose(neg, power(psi, 3))),
            _cond("psi^4 + psi^5 = I", add(power(psi, 4), power(psi, 5)), neg),
        ]
    else:
        conds = [_cond("phi^2 + psi^2 = 0", sq, zero), _cond("2 phi psi = eps", scale(compose(phi, psi), 2), eps)]
    return ConditionReport(which, conds)


# --------------------------------------------------------------------------
# exhaustive theorem scan


MAX_SCAN_CYCLIC = 24
MAX_SCAN_ELEMENTARY = {2: 3}


@dataclass
class GroupScan:
    group: AbelianGroup
    pairs: int
    satisfying: list[tuple[Endomorphism, Endomorphism]]
    mismatches: list[tuple[Endomorphism, Endomorphism, bool, bool]]
    notes: dict[str, int] = field(default_factory=dict)


@dataclass
class ScanReport:
    identity: str
    groups: list[GroupScan]

    @property
    def mismatches(self) -> int:
        return sum(len(g.mismatches) for g in self.groups)

    @property
    def pairs(self) -> int:
        return sum(g.pairs for g in self.groups)

    def describe(self) -> str:
        lines = [f"{self.identity}: {self.pairs} pairs, {self.mismatches} mismatches"]
        for g in self.groups:
            lines.append(
                f"  {g.group}: pairs={g.pairs} satisfying={len(g.satisfying)} mismatches={len(g.mismatches)}"
                + "".join(f" {k}={v}" for k, v in g.notes.items())
            )
            for phi, psi, by_table, by_cond in g.mismatches[:5]:
                lines.append(f"    phi={phi} psi={psi}: table={by_table} conditions={by_cond}")
        return "\n".join(lines)


def _check_bound(g: AbelianGroup, max_cyclic: int, max_elementary: dict[int, int]) -> None:
    if g.kind == "cyclic":
        if g.n > max_cyclic:
            raise ScanBoundExceeded(f"{g} exceeds the cyclic scan bound {max_cyclic}")
    elif g.k > max_elementary.get(g.p, 0):
        raise ScanBoundExceeded(f"{g} exceeds the elementary abelian scan bound")


def _scan_slice(g: AbelianGroup, which: str, phis: list[Endomorphism], psis: list[Endomorphism]):
    ident = builtin(which)
    sat, bad = [], []
    extra = 0
    for phi in phis:
        for psi in psis:
            spec = TQSpec(g, phi, psi)
            by_table = holds(build_tq(spec), ident).holds
            report = check_conditions(spec, which)
            if by_table:
                sat.append((phi, psi))
                if report.notes.get("I = psi^-7"):
                    extra += 1
            if by_table != report.overall:
                bad.append((phi, psi, by_table, report.overall))
    return sat, bad, extra


def equivalence_scan(
    groups,
    which: str,
    jobs: int = 1,
    max_cyclic: int = MAX_SCAN_CYCLIC,
    max_elementary: dict[int, int] | None = None,
) -> ScanReport:
    """Compare table evaluation with :func:`check_conditions` on every
    ordered pair of automorphisms of every group.
    """
    max_elementary = MAX_SCAN_ELEMENTARY if max_elementary is None else max_elementary
    _require_linear(TQSpec(cyclic(1), Endomorphism(cyclic(1), 0), Endomorphism(cyclic(1), 0)), which)
    results = []
    for g in groups:
        _check_bound(g, max_cyclic, max_elementary)
        auts = automorphisms(g)
        if jobs > 1 and len(auts) > 1:
            chunks = [auts[i::jobs] for i in range(jobs)]
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                parts = list(pool.map(_scan_slice, [g] * jobs, [which] * jobs, chunks, [auts] * jobs))
            key = {e: i for i, e in enumerate(auts)}
            sat = sorted((p for part in parts for p in part[0]), key=lambda t: (key[t[0]], key[t[1]]))
            bad = sorted((p for part in parts for p in part[1]), key=lambda t: (key[t[0]], key[t[1]]))
            extra = sum(part[2] for part in parts)
        else:
            sat, bad, extra = _scan_slice(g, which, auts, auts)
        notes = {"satisfying_with_I_eq_psi^-7": extra} if which == "genassoc_q" else {}
        results.append(GroupScan(g, len(auts) ** 2, sat, bad, notes))
    return ScanReport(which, results)


def default_scan_groups() -> list[AbelianGroup]:
    return [cyclic(n) for n in range(2, MAX_SCAN_CYCLIC + 1)] + [elementary_abelian(2, k) for k in (1, 2, 3)]


# --------------------------------------------------------------------------
# linear evaluation of identities on T-quasigroups (a = 0)


def linear_coefficients(term, phi: Endomorphism, psi: Endomorphism) -> dict[str, Endomorphism]:
    """Write a term over x*y = phi x + psi y (and its divisions) as
    sum_v c_v(v).  Divisions: x\\y = psi^-1(y - phi x), x/y = phi^-1(x - psi y).
    """
    from .identities import Var

    g = phi.group
    if isinstance(term, Var):
        return {term.name: identity_map(g)}
    left = linear_coefficients(term.left, phi, psi)
    right = linear_coefficients(term.right, phi, psi)
    if term.op == "*":
        a, b = phi, psi
    elif term.op == "\\":
        pi = inverse(psi)
        a, b = negate(compose(pi, phi)), pi
    else:
        fi = inverse(phi)
        a, b = fi, negate(compose(fi, psi))
    out: dict[str, Endomorphism] = {}
    for v, c in left.items():
        out[v] = compose(a, c)
    for v, c in right.items():
        out[v] = add(out[v], compose(b, c)) if v in out else compose(b, c)
    return out


def linear_holds(ident, phi: Endomorphism, psi: Endomorphism) -> bool:
    """Decide an identity on the T-quasigroup (phi, psi, 0) by comparing
    coefficients; exact because each variable can be set independently."""
    g = phi.group
    lc = linear_coefficients(ident.lhs, phi, psi)
    rc = linear_coefficients(ident.rhs, phi, psi)
    zero = zero_map(g)
    return all(equals(lc.get(v, zero), rc.get(v, zero)) for v in ident.variables)
