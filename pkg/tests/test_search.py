import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import latin_squares
from qgkit.corpus import corpus_entry
from qgkit.gf2 import gf2r_construct
from qgkit.identities import REGISTRY, builtin, holds
from qgkit.search import (
    InconsistentProblem,
    SearchProblem,
    canonical_form,
    compile_instance,
    count_latin,
    isomorphism_classes,
    parse_problem,
    search,
    verify_model,
)
from qgkit.table import CayleyTable, cyclic_group_table

SQUARES = {n: [CayleyTable(s) for s in latin_squares(n)] for n in range(1, 5)}


def oracle_models(n, names=(), constraints=(), fixed=()):
    out = []
    for t in SQUARES[n]:
        if "idempotent" in constraints and any(t(i, i) != i for i in range(n)):
            continue
        if "left_identity" in constraints and t.rows[0] != tuple(range(n)):
            continue
        if "right_identity" in constraints and t.column(0) != tuple(range(n)):
            continue
        if any(t(r, c) != v for r, c, v in fixed):
            continue
        if all(holds(t, name) for name in names):
            out.append(t)
    return sorted(out, key=lambda t: t.flat())


def test_oracle_counts():
    assert [len(SQUARES[n]) for n in range(1, 5)] == [1, 2, 12, 576]


class TestAgainstOracle:
    @pytest.mark.parametrize("name", sorted(REGISTRY))
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_enumerate_matches(self, name, n):
        out = search(SearchProblem(n, (name,), mode="enumerate"))
        assert out.exhausted and out.stopped_by == "complete"
        assert out.models == oracle_models(n, (name,))

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize(
        "constraints",
        [("idempotent",), ("left_identity",), ("right_identity",), ("left_identity", "right_identity")],
    )
    def test_constraints(self, n, constraints):
        out = search(SearchProblem(n, (), frozenset(constraints), mode="enumerate"))
        assert out.models == oracle_models(n, (), constraints)

    def test_pair_of_identities(self):
        out = search(SearchProblem(4, ("schroeder2", "idempotent"), mode="enumerate"))
        assert out.models == oracle_models(4, ("schroeder2", "idempotent"))

    def test_fixed_cells(self):
        fixed = ((0, 1, 2), (3, 3, 0))
        out = search(SearchProblem(4, ("belousov_xyyx",), fixed_cells=fixed, mode="enumerate"))
        assert out.models == oracle_models(4, ("belousov_xyyx",), (), fixed)

    def test_first_is_least(self):
        out = search(SearchProblem(4, ("stein3",), mode="first"))
        assert out.models == oracle_models(4, ("stein3",))[:1]

    def test_count_mode(self):
        out = search(SearchProblem(4, ("medial",), mode="count"))
        assert out.count == len(oracle_models(4, ("medial",))) and not out.models


class TestExamples:
    def test_schroeder_order5(self):
        out = search(SearchProblem(5, ("schroeder2",), mode="count"))
        assert out.count == 0 and out.exhausted

    def test_idempotent_stein_order5(self):
        p = SearchProblem(5, ("stein3",), frozenset({"idempotent"}), mode="first")
        out = search(p)
        assert len(out.models) == 1 and verify_model(out.models[0], p)
        assert verify_model(corpus_entry("dot_order5").table, p)

    def test_order1(self):
        out = search(SearchProblem(1, mode="count"))
        assert out.count == 1 and out.exhausted

    def test_idempotent_schroeder_order4(self):
        p = SearchProblem(4, ("schroeder2", "idempotent"), mode="first")
        assert search(p).models
        assert verify_model(gf2r_construct(2, 2), p)

    def test_verify_model(self):
        t1 = corpus_entry("table1_order8").table
        assert verify_model(t1, SearchProblem(8, ("genassoc_q",)))
        assert verify_model(cyclic_group_table(2), SearchProblem(2, ("genassoc_q",), frozenset({"left_identity"})))
        assert not verify_model(t1, SearchProblem(8, ("idempotent",)))
        assert not verify_model(t1, SearchProblem(7, ("genassoc_q",)))


class TestCountLatin:
    @pytest.mark.parametrize("n, expected", [(1, 1), (2, 2), (3, 12), (4, 576)])
    def test_small(self, n, expected):
        assert count_latin(n) == expected == len(SQUARES[n])

    def test_too_large(self):
        with pytest.raises(ValueError):
            count_latin(6)


class TestControl:
    def test_limit(self):
        out = search(SearchProblem(4, mode="enumerate", limit=5))
        assert len(out.models) == 5 and out.stopped_by == "limit" and not out.exhausted
        assert out.models == [CayleyTable(s) for s in sorted(latin_squares(4))][:5]

    def test_budget_is_never_silent(self):
        out = search(SearchProblem(5, mode="count", node_budget=50))
        assert out.budget_exhausted and not out.exhausted

    def test_budget_monotone(self):
        small = search(SearchProblem(5, ("schroeder2",), mode="count", node_budget=100))
        big = search(SearchProblem(5, ("schroeder2",), mode="count", node_budget=10**6))
        assert small.budget_exhausted and big.exhausted and big.count == 0

    @pytest.mark.parametrize(
        "kw",
        [
            dict(fixed_cells=((0, 0, 1), (0, 0, 2))),
            dict(fixed_cells=((0, 0, 1), (0, 1, 1))),
            dict(fixed_cells=((0, 0, 1), (1, 0, 1))),
            dict(fixed_cells=((1, 1, 0),), constraints=frozenset({"idempotent"})),
        ],
    )
    def test_inconsistent(self, kw):
        with pytest.raises(InconsistentProblem):
            search(SearchProblem(3, **kw))

    def test_out_of_range_fix(self):
        with pytest.raises(InconsistentProblem):
            SearchProblem(3, fixed_cells=((0, 3, 0),))

    def test_bad_mode_and_constraint(self):
        with pytest.raises(ValueError):
            SearchProblem(3, mode="all")
        with pytest.raises(ValueError):
            SearchProblem(3, constraints=frozenset({"commutative"}))

    @pytest.mark.parametrize("mode", ["first", "count", "enumerate"])
    def test_jobs_do_not_change_results(self, mode):
        p = SearchProblem(4, ("belousov_xyyx",), mode=mode)
        a, b = search(p), search(p, jobs=3)
        assert (a.models, a.count, a.exhausted) == (b.models, b.count, b.exhausted)

    def test_division_identity_checked_at_leaves(self):
        out = search(SearchProblem(4, ("genassoc_div",), mode="enumerate"))
        assert out.models == search(SearchProblem(4, ("genassoc_q",), mode="enumerate")).models


class TestInstances:
    def test_generated_source_is_kept(self):
        fn = compile_instance(builtin("schroeder2"))
        assert "def" in fn.source

    def test_variable_named_v(self):
        # the variable v must not collide with generated names
        out = search(SearchProblem(3, ("(x*y)*(u*v) = (x*u)*(y*v)",), mode="count"))
        assert out.count == len(oracle_models(3, ("medial",)))


class TestProblemFiles:
    def test_parse(self):
        p = parse_problem(
            "# genassoc with a left identity\n"
            "order 4\nidentity genassoc_q\nconstraint left_identity_at_0\n"
            "fix 1 1 0\nmode count\nbudget 1000\n"
        )
        assert p.order == 4 and p.constraints == {"left_identity"} and p.fixed_cells == ((1, 1, 0),)
        assert p.mode == "count" and p.node_budget == 1000
        assert p.identities[0].name == "genassoc_q"

    def test_inline_identity(self):
        assert parse_problem("order 2\nidentity x*x = x\n").identities[0].source == "x*x = x"

    @pytest.mark.parametrize("text", ["identity stein3\n", "order 3\nfrobnicate 2\n", "order 3\nfix 1 2\n"])
    def test_errors(self, text):
        with pytest.raises(ValueError):
            parse_problem(text)


class TestIsomorphism:
    def test_canonical_form_is_invariant(self):
        t = SQUARES[3][5]
        perm = (2, 0, 1)
        inv = [perm.index(i) for i in range(3)]
        relabeled = CayleyTable(tuple(tuple(perm[t(inv[a], inv[b])] for b in range(3)) for a in range(3)))
        assert canonical_form(t) == canonical_form(relabeled)

    def test_classes_of_order3(self):
        # order-3 quasigroups fall into 5 isomorphism classes
        assert len(isomorphism_classes(SQUARES[3])) == 5


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)), max_size=3))
def test_random_fixed_cells(n, cells):
    cells = tuple((r % n, c % n, v % n) for r, c, v in cells)
    try:
        out = search(SearchProblem(n, ("belousov_xyyx",), fixed_cells=cells, mode="enumerate"))
    except InconsistentProblem:
        return
    assert out.models == oracle_models(n, ("belousov_xyyx",), (), cells)
