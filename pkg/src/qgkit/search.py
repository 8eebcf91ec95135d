"""Backtracking search for Latin squares satisfying identities.

Cells are filled in row-major order, values in ascending order, so models
come out in lexicographic order of their row-major entries.  Latin
constraints are kept as per-row and per-column bitmasks; a free cell left
with one value in its row and column is forced.  Every ground instance of
a multiplication-only identity watches one empty cell on its evaluation
path.  When that cell is assigned the instance is re-evaluated: it moves
its watch, succeeds, fails, or forces a cell.  Forcing pushes a known side
value down the other side through the Latin inverse (a*B = T with T at
column j of row a gives B = j).  Watch moves are trailed and undone with
the assignments.  Identities using division are checked on complete
tables only.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import permutations, product

from .identities import App, Identity, Term, Var, holds, resolve
from .table import CayleyTable, is_latin

log = logging.getLogger(__name__)

CONSTRAINTS = ("idempotent", "left_identity", "right_identity")
MODES = ("first", "count", "enumerate")
MAX_COUNT_LATIN_ORDER = 5
MAX_CANONICAL_ORDER = 6


class InconsistentProblem(ValueError):
    pass


@dataclass(frozen=True)
class SearchProblem:
    order: int
    identities: tuple[Identity, ...] = ()
    constraints: frozenset[str] = frozenset()
    fixed_cells: tuple[tuple[int, int, int], ...] = ()
    mode: str = "first"
    limit: int | None = None
    node_budget: int | None = None

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        object.__setattr__(self, "identities", tuple(resolve(i) for i in self.identities))
        cons = frozenset(self.constraints)
        unknown = cons - set(CONSTRAINTS)
        if unknown:
            raise ValueError(f"unknown constraints {sorted(unknown)}; known: {', '.join(CONSTRAINTS)}")
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "fixed_cells", tuple(tuple(int(v) for v in c) for c in self.fixed_cells))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        n = self.order
        for r, c, v in self.fixed_cells:
            if not (0 <= r < n and 0 <= c < n and 0 <= v < n):
                raise InconsistentProblem(f"fixed cell ({r}, {c}) = {v} out of range for order {n}")

    def all_fixed_cells(self) -> list[tuple[int, int, int]]:
        """Fixed cells implied by constraints, then the explicit ones."""
        n = self.order
        cells = []
        if "idempotent" in self.constraints:
            cells += [(i, i, i) for i in range(n)]
        if "left_identity" in self.constraints:
            cells += [(0, j, j) for j in range(n)]
        if "right_identity" in self.constraints:
            cells += [(i, 0, i) for i in range(n)]
        cells += list(self.fixed_cells)
        return cells


@dataclass
class SearchOutcome:
    models: list[CayleyTable] = field(default_factory=list)
    count: int = 0
    exhausted: bool = False
    nodes_visited: int = 0
    stopped_by: str = "complete"  # complete | limit | budget

    @property
    def budget_exhausted(self) -> bool:
        return self.stopped_by == "budget"


# --------------------------------------------------------------------------
# instance evaluators


class _Gen:
    """Emit straight-line Python for one identity instance."""

    def __init__(self) -> None:
        self.k = 0
        self.lines: list[str] = []

    def fresh(self) -> int:
        self.k += 1
        return self.k

    def emit(self, depth: int, s: str) -> None:
        self.lines.append("    " * depth + s)

    def try_eval(self, t: Term, depth: int, blk: str, info: dict) -> str:
        """Value of ``t`` or -1; the first determined empty cell goes to ``blk``."""
        if isinstance(t, Var):
            return t.name
        a = self.try_eval(t.left, depth, blk, info)
        b = self.try_eval(t.right, depth, blk, info)
        k = self.fresh()
        v, i = f"t{k}", f"i{k}"
        info[id(t)] = (v, i, a, b)
        guard = " and ".join(
            f"{x} >= 0" for x, sub in ((a, t.left), (b, t.right)) if isinstance(sub, App)
        )
        if guard:
            self.emit(depth, f"if {guard}:")
            inner = depth + 1
        else:
            inner = depth
        self.emit(inner, f"{i} = {a}*n + {b}")
        self.emit(inner, f"{v} = c[{i}]")
        self.emit(inner, f"if {v} < 0 and {blk} < 0: {blk} = {i}")
        if guard:
            self.emit(depth, "else:")
            self.emit(depth + 1, f"{v} = -1")
        return v

    def descend(self, t: Term, target: str, depth: int, info: dict) -> None:
        """``t`` is unknown but must equal ``target``: force what follows."""
        v, i, a, b = info[id(t)]
        ka = f"{a} >= 0" if isinstance(t.left, App) else "True"
        kb = f"{b} >= 0" if isinstance(t.right, App) else "True"
        self.emit(depth, f"if {ka} and {kb}:")
        self.emit(depth + 1, f"return -3 - ({i}*n + {target})")
        if isinstance(t.right, App):
            j = f"j{self.fresh()}"
            self.emit(depth, f"if {ka}:")
            self.emit(depth + 1, f"{j} = rp[{a}*n + {target}]")
            self.emit(depth + 1, f"if {j} >= 0:")
            self.descend(t.right, j, depth + 2, info)
        if isinstance(t.left, App):
            j = f"j{self.fresh()}"
            self.emit(depth, f"if {kb}:")
            self.emit(depth + 1, f"{j} = cp[{b}*n + {target}]")
            self.emit(depth + 1, f"if {j} >= 0:")
            self.descend(t.left, j, depth + 2, info)


def compile_instance(ident: Identity):
    """``f(c, rp, cp, n, *vars)`` on a flat partial table ``c`` (-1 = empty).

    ``rp[a*n + v]`` is the column holding ``v`` in row ``a`` (or -1) and
    ``cp[b*n + v]`` the row holding ``v`` in column ``b``.  Returns -1 when
    the instance holds, -2 when it fails, an empty cell index >= 0 it is
    blocked on, or ``-3 - (cell*n + value)`` when a cell is forced.
    """
    g = _Gen()
    info: dict = {}
    g.emit(1, "bl = -1")
    g.emit(1, "br = -1")
    lv = g.try_eval(ident.lhs, 1, "bl", info)
    rv = g.try_eval(ident.rhs, 1, "br", info)
    lk = f"{lv} >= 0" if isinstance(ident.lhs, App) else "True"
    rk = f"{rv} >= 0" if isinstance(ident.rhs, App) else "True"
    g.emit(1, f"if {lk} and {rk}:")
    g.emit(2, f"return -1 if {lv} == {rv} else -2")
    if isinstance(ident.rhs, App):
        g.emit(1, f"if {lk}:")
        g.descend(ident.rhs, lv, 2, info)
        g.emit(2, "return br")
    if isinstance(ident.lhs, App):
        g.emit(1, f"if {rk}:")
        g.descend(ident.lhs, rv, 2, info)
    g.emit(1, "return bl if bl >= 0 else br")
    params = "".join(f", {v}" for v in ident.variables)
    src = f"def _inst(c, rp, cp, n{params}):\n" + "\n".join(g.lines) + "\n"
    ns: dict = {}
    exec(src, ns)
    fn = ns["_inst"]
    fn.source = src
    return fn


# --------------------------------------------------------------------------
# engine


class _Stop(Exception):
    pass


class _Engine:
    def __init__(self, problem: SearchProblem):
        self.p = problem
        n = self.n = problem.order
        self.nn = n * n
        self.full = (1 << n) - 1
        self.cells = [-1] * (n * n)
        self.rowpos = [-1] * (n * n)
        self.colpos = [-1] * (n * n)
        self.rowmask = [0] * n
        self.colmask = [0] * n
        self.trail: list[int] = []
        self.wmark: list[int] = []
        self.wtrail: list[int] = []
        self.watch: list[list[int]] = [[] for _ in range(n * n)]
        self.watching: list[int] = []
        self.inst_fn = []
        self.inst_args = []
        self.leaf_identities = [i for i in problem.identities if i.uses_division]
        for ident in problem.identities:
            if ident.uses_division:
                continue
            fn = compile_instance(ident)
            for vals in product(range(n), repeat=len(ident.variables)):
                self.inst_fn.append(fn)
                self.inst_args.append(vals)
                self.watching.append(-1)
        self.nodes = 0
        self.models: list[CayleyTable] = []
        self.count = 0
        self.stopped_by = "complete"

    def _assign(self, cell: int, value: int) -> bool:
        """Assign and propagate.  On conflict returns False with the state
        partially extended; the caller undoes to its own mark."""
        n, nn = self.n, self.nn
        full = self.full
        cells, rowpos, colpos = self.cells, self.rowpos, self.colpos
        rowmask, colmask = self.rowmask, self.colmask
        watch, watching = self.watch, self.watching
        inst_fn, inst_args = self.inst_fn, self.inst_args
        trail, wmark, wtrail = self.trail, self.wmark, self.wtrail
        queue = [(cell, value)]
        while queue:
            cell, value = queue.pop()
            cur = cells[cell]
            if cur >= 0:
                if cur != value:
                    return False
                continue
            r, c = divmod(cell, n)
            bit = 1 << value
            if (rowmask[r] | colmask[c]) & bit:
                return False
            cells[cell] = value
            rowpos[r * n + value] = c
            colpos[c * n + value] = r
            rowmask[r] |= bit
            colmask[c] |= bit
            trail.append(cell)
            wmark.append(len(wtrail))
            # free cells in this row and column: empty domain fails, a
            # single remaining value is forced
            rm = rowmask[r]
            base = r * n
            for j in range(n):
                k = base + j
                if cells[k] < 0:
                    dom = full & ~(rm | colmask[j])
                    if not dom:
                        return False
                    if not dom & (dom - 1):
                        queue.append((k, dom.bit_length() - 1))
            cm = colmask[c]
            for i in range(n):
                k = i * n + c
                if cells[k] < 0:
                    dom = full & ~(rowmask[i] | cm)
                    if not dom:
                        return False
                    if not dom & (dom - 1):
                        queue.append((k, dom.bit_length() - 1))
            pending = watch[cell]
            if not pending:
                continue
            watch[cell] = keep = []
            for pos, i in enumerate(pending):
                if watching[i] != cell:
                    continue
                res = inst_fn[i](cells, rowpos, colpos, n, *inst_args[i])
                if res == -1:
                    keep.append(i)
                elif res >= 0:
                    watching[i] = res
                    watch[res].append(i)
                    wtrail.append(i * nn + cell)
                elif res == -2:
                    keep.extend(pending[pos:])
                    return False
                else:
                    d, v = divmod(-3 - res, n)
                    watching[i] = d
                    watch[d].append(i)
                    wtrail.append(i * nn + cell)
                    queue.append((d, v))
        return True

    def _undo(self, mark: int) -> None:
        n, nn = self.n, self.nn
        cells, rowpos, colpos = self.cells, self.rowpos, self.colpos
        rowmask, colmask = self.rowmask, self.colmask
        trail, wmark, wtrail = self.trail, self.wmark, self.wtrail
        watch, watching = self.watch, self.watching
        while len(trail) > mark:
            cell = trail.pop()
            wm = wmark.pop()
            while len(wtrail) > wm:
                i, back = divmod(wtrail.pop(), nn)
                watching[i] = back
                watch[back].append(i)
            r, c = divmod(cell, n)
            v = cells[cell]
            rowpos[r * n + v] = -1
            colpos[c * n + v] = -1
            bit = ~(1 << v)
            rowmask[r] &= bit
            colmask[c] &= bit
            cells[cell] = -1

    def setup(self, extra_fixed=()) -> bool:
        """Place every instance and assign fixed cells; False if the
        problem has no models."""
        n = self.n
        for i, fn in enumerate(self.inst_fn):
            res = fn(self.cells, self.rowpos, self.colpos, n, *self.inst_args[i])
            if res == -2:
                return False
            if res == -1:
                continue
            if res >= 0:
                self.watching[i] = res
                self.watch[res].append(i)
            else:
                d, v = divmod(-3 - res, n)
                self.watching[i] = d
                self.watch[d].append(i)
                if not self._assign(d, v):
                    return False
        for r, c, v in list(self.p.all_fixed_cells()) + list(extra_fixed):
            if not self._assign(r * n + c, v):
                return False
        return True

    def first_free(self, start: int = 0) -> int:
        cells = self.cells
        for k in range(start, len(cells)):
            if cells[k] < 0:
                return k
        return -1

    def candidates(self, cell: int) -> list[int]:
        r, c = divmod(cell, self.n)
        mask = self.full & ~(self.rowmask[r] | self.colmask[c])
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def _leaf(self) -> None:
        n = self.n
        t = CayleyTable(tuple(tuple(self.cells[r * n:(r + 1) * n]) for r in range(n)))
        for ident in self.leaf_identities:
            if not holds(t, ident):
                return
        self.count += 1
        if self.p.mode != "count":
            self.models.append(t)
        p = self.p
        if p.mode == "first" or (p.limit is not None and self.count >= p.limit):
            self.stopped_by = "limit"
            raise _Stop

    def _dfs(self, start: int) -> None:
        cell = self.first_free(start)
        if cell < 0:
            self._leaf()
            return
        budget = self.p.node_budget
        for v in self.candidates(cell):
            self.nodes += 1
            if budget is not None and self.nodes > budget:
                self.stopped_by = "budget"
                raise _Stop
            mark = len(self.trail)
            if self._assign(cell, v):
                self._dfs(cell + 1)
            self._undo(mark)

    def run(self, extra_fixed=(), count_extra_as_node: bool = False) -> SearchOutcome:
        if count_extra_as_node:
            self.nodes += 1
        if self.setup(extra_fixed):
            try:
                self._dfs(0)
            except _Stop:
                pass
        return SearchOutcome(
            models=self.models,
            count=self.count,
            exhausted=self.stopped_by == "complete",
            nodes_visited=self.nodes,
            stopped_by=self.stopped_by,
        )


def _check_fixed(problem: SearchProblem) -> None:
    seen: dict[tuple[int, int], int] = {}
    rows: dict[tuple[int, int], int] = {}
    cols: dict[tuple[int, int], int] = {}
    for r, c, v in problem.all_fixed_cells():
        if seen.get((r, c), v) != v:
            raise InconsistentProblem(f"cell ({r}, {c}) fixed to both {seen[(r, c)]} and {v}")
        seen[(r, c)] = v
        if rows.get((r, v), c) != c:
            raise InconsistentProblem(f"value {v} fixed twice in row {r}")
        rows[(r, v)] = c
        if cols.get((c, v), r) != r:
            raise InconsistentProblem(f"value {v} fixed twice in column {c}")
        cols[(c, v)] = r


def _run_branch(problem: SearchProblem, cell: int, value: int) -> SearchOutcome:
    n = problem.order
    return _Engine(problem).run([(cell // n, cell % n, value)], count_extra_as_node=True)


def search(problem: SearchProblem, jobs: int = 1) -> SearchOutcome:
    """Depth-first model search.

    ``jobs > 1`` splits the tree at the first free cell; models and counts
    are identical to the single-worker run.  Budgets apply per worker.
    """
    _check_fixed(problem)
    if jobs <= 1:
        out = _Engine(problem).run()
    else:
        out = _search_parallel(problem, jobs)
    if out.stopped_by == "budget":
        log.warning("node budget %s exhausted after %d models", problem.node_budget, out.count)
    return out


def _search_parallel(problem: SearchProblem, jobs: int) -> SearchOutcome:
    probe = _Engine(problem)
    if not probe.setup():
        return SearchOutcome(exhausted=True)
    cell = probe.first_free()
    if cell < 0:
        return _Engine(problem).run()
    values = probe.candidates(cell)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_branch, [problem] * len(values), [cell] * len(values), values))
    merged = SearchOutcome(exhausted=True)
    for part in parts:
        merged.nodes_visited += part.nodes_visited
        if part.stopped_by == "budget":
            merged.stopped_by = "budget"
            merged.exhausted = False
        take = part.models
        if problem.mode != "count" and problem.limit is not None:
            take = take[: max(0, problem.limit - len(merged.models))]
        if problem.mode == "first":
            take = take[: max(0, 1 - len(merged.models))]
        merged.models.extend(take)
        merged.count += part.count if problem.mode == "count" else len(take)
        stop_here = (problem.mode == "first" and merged.models) or (
            problem.mode == "enumerate" and problem.limit is not None and len(merged.models) >= problem.limit
        )
        if stop_here:
            merged.stopped_by = "limit"
            merged.exhausted = False
            break
    return merged


def count_latin(order: int) -> int:
    if order > MAX_COUNT_LATIN_ORDER:
        raise ValueError(f"count_latin is limited to order <= {MAX_COUNT_LATIN_ORDER}")
    return search(SearchProblem(order, mode="count")).count


def verify_model(t: CayleyTable, problem: SearchProblem) -> bool:
    """Independent re-check of a table against a problem."""
    if t.order != problem.order or not is_latin(t):
        return False
    m = t.rows
    for r, c, v in problem.all_fixed_cells():
        if m[r][c] != v:
            return False
    return all(holds(t, ident).holds for ident in problem.identities)


# --------------------------------------------------------------------------
# isomorphism classes (reporting only)


def canonical_form(t: CayleyTable) -> tuple[int, ...]:
    """Least row-major entry sequence over all relabelings."""
    n = t.order
    if n > MAX_CANONICAL_ORDER:
        raise ValueError(f"canonical form is limited to order <= {MAX_CANONICAL_ORDER}")
    m = t.rows
    best = None
    for perm in permutations(range(n)):
        inv = [0] * n
        for i, p in enumerate(perm):
            inv[p] = i
        # relabel x -> perm[x]: new[perm[x]][perm[y]] = perm[m[x][y]]
        cand = tuple(perm[m[inv[a]][inv[b]]] for a in range(n) for b in range(n))
        if best is None or cand < best:
            best = cand
    return best


def isomorphism_classes(models) -> list[CayleyTable]:
    reps: dict[tuple[int, ...], CayleyTable] = {}
    for t in models:
        key = canonical_form(t)
        reps.setdefault(key, t)
    n = next(iter(reps.values())).order if reps else 0
    return [CayleyTable(tuple(k[i * n:(i + 1) * n] for i in range(n))) for k in sorted(reps)]


# --------------------------------------------------------------------------
# problem files


def parse_problem(text: str) -> SearchProblem:
    """Parse ``order N`` / ``identity S`` / ``constraint C`` / ``fix r c v`` /
    ``mode M`` / ``limit K`` / ``budget B`` lines; ``#`` starts a comment."""
    order = None
    idents: list[Identity] = []
    cons: set[str] = set()
    fixed: list[tuple[int, int, int]] = []
    kw: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if key == "order":
                order = int(rest)
            elif key == "identity":
                idents.append(resolve(rest))
            elif key == "constraint":
                cons.add(rest if rest == "idempotent" else rest.removesuffix("_at_0"))
            elif key == "fix":
                r, c, v = (int(s) for s in rest.split())
                fixed.append((r, c, v))
            elif key == "mode":
                kw["mode"] = rest
            elif key == "limit":
                kw["limit"] = int(rest)
            elif key == "budget":
                kw["node_budget"] = int(rest)
            else:
                raise ValueError(f"unknown directive {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if order is None:
        raise ValueError("problem file has no 'order' line")
    return SearchProblem(order, tuple(idents), frozenset(cons), tuple(fixed), **kw)


def with_mode(problem: SearchProblem, mode: str, limit: int | None = None) -> SearchProblem:
    return replace(problem, mode=mode, limit=limit)
