"""Unification, satisfaction, and instantiation: trivial cases plus the
brute-force enumeration oracle."""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from immunids.errors import LoadError, MalformedGraphError
from immunids.model import (
    Fact,
    canon_literal,
    instantiate,
    merge_bindings,
    parse_fact,
    satisfy,
    unify_fact,
)


def fact(text: str) -> Fact:
    return parse_fact(text)


# independent oracle: try every assignment of variables to pool literals
def brute_force_satisfy(pre, pool):
    variables = sorted({v for f in pre for v in f.variables()})
    literals = sorted({a for f in pool for a in f.args})
    results = []
    seen = set()
    for combo in itertools.product(literals, repeat=len(variables)):
        binding = dict(zip(variables, combo))
        if all(next(iter(instantiate([f], binding))) in pool for f in pre):
            key = tuple(sorted(binding.items()))
            if key not in seen:
                seen.add(key)
                results.append(binding)
    results.sort(key=lambda b: tuple(sorted(b.items())))
    return results


class TestUnify:
    def test_single_variable_match(self):
        got = unify_fact(fact("service_up(?h,21)"),
                         fact("service_up(10.0.0.5,21)"), {})
        assert got == {"h": "10.0.0.5"}

    def test_predicate_mismatch(self):
        assert unify_fact(fact("root_shell(?h)"),
                          fact("service_up(10.0.0.5,21)"), {}) is None

    def test_conflicting_seed_binding(self):
        assert unify_fact(fact("service_up(?h,21)"),
                          fact("service_up(10.0.0.5,21)"),
                          {"h": "10.0.0.9"}) is None

    def test_arity_mismatch_is_an_error_not_a_nonmatch(self):
        with pytest.raises(MalformedGraphError):
            unify_fact(fact("service_up(?h)"),
                       fact("service_up(10.0.0.5,21)"), {})

    def test_literal_mismatch(self):
        assert unify_fact(fact("service_up(?h,21)"),
                          fact("service_up(10.0.0.5,22)"), {}) is None

    def test_unify_then_instantiate_recovers_ground(self):
        pattern = fact("conn(?a,?b,21)")
        ground = fact("conn(10.0.0.1,10.0.0.2,21)")
        binding = unify_fact(pattern, ground, {})
        assert instantiate([pattern], binding) == {ground}


class TestSatisfy:
    def test_single_solution(self):
        got = satisfy({fact("service_up(?h,21)")},
                      {fact("service_up(10.0.0.5,21)"),
                       fact("reachable(10.0.0.5)")})
        assert got == [{"h": "10.0.0.5"}]

    def test_unsatisfiable(self):
        assert satisfy({fact("root_shell(?h)")},
                       {fact("service_up(10.0.0.5,21)")}) == []

    def test_two_solutions_enumerated(self):
        pre = {fact("service_up(?h,21)")}
        pool = {fact("service_up(10.0.0.5,21)"), fact("service_up(10.0.0.6,21)")}
        got = satisfy(pre, pool)
        assert got == brute_force_satisfy(pre, pool)
        assert got == [{"h": "10.0.0.5"}, {"h": "10.0.0.6"}]

    def test_matches_brute_force_on_random_instances(self):
        rng = random.Random(2024)
        variables = ["?a", "?b", "?c", "?d"]
        literals = ["1", "2", "10.0.0.5"]
        for _ in range(300):
            arity = {"p": rng.randrange(1, 3), "q": rng.randrange(1, 3),
                     "r": rng.randrange(1, 3)}
            pool = {
                Fact(pred, tuple(rng.choice(literals)
                                 for _ in range(arity[pred])))
                for pred in (rng.choice(sorted(arity))
                             for _ in range(rng.randrange(1, 9)))
            }
            pre = set()
            for _ in range(rng.randrange(1, 4)):
                pred = rng.choice(sorted(arity))
                pre.add(Fact(pred, tuple(rng.choice(variables + literals)
                                         for _ in range(arity[pred]))))
            assert satisfy(pre, pool) == brute_force_satisfy(pre, pool)

    def test_deterministic_ordering(self):
        pre = {fact("p(?x)"), fact("q(?y)")}
        pool = {fact("p(2)"), fact("p(1)"), fact("q(9)"), fact("q(3)")}
        first = satisfy(pre, pool)
        second = satisfy(pre, pool)
        assert first == second
        keys = [tuple(sorted(b.items())) for b in first]
        assert keys == sorted(keys)

    def test_seed_binding_restricts_solutions(self):
        pre = {fact("service_up(?h,21)")}
        pool = {fact("service_up(10.0.0.5,21)"), fact("service_up(10.0.0.6,21)")}
        assert satisfy(pre, pool, seed_binding={"h": "10.0.0.6"}) == \
            [{"h": "10.0.0.6"}]


class TestInstantiate:
    def test_bound_variable_replaced(self):
        assert instantiate({fact("root_shell(?h)")}, {"h": "10.0.0.5"}) == \
            {fact("root_shell(10.0.0.5)")}

    def test_unbound_variable_preserved(self):
        assert instantiate({fact("flooded(?v)")}, {"h": "10.0.0.5"}) == \
            {fact("flooded(?v)")}

    def test_empty_set(self):
        assert instantiate(set(), {"h": "10.0.0.5"}) == set()

    @given(st.dictionaries(st.sampled_from("abcd"),
                           st.sampled_from(["1", "2", "x"]), max_size=4))
    def test_applying_twice_equals_once(self, binding):
        facts = {fact("p(?a,?b)"), fact("q(?c,?d,5)")}
        once = instantiate(facts, binding)
        assert instantiate(once, binding) == once


class TestParsingAndLiterals:
    def test_canonical_integers(self):
        assert canon_literal("0021") == "21"
        assert canon_literal(21) == "21"

    def test_canonical_address_passthrough(self):
        assert canon_literal("10.0.0.5") == "10.0.0.5"

    def test_plain_string_untouched(self):
        assert canon_literal("ftp") == "ftp"

    def test_parse_round_trip(self):
        f = parse_fact("service_up(?h,0021)")
        assert f == Fact("service_up", ("?h", "21"))
        assert str(f) == "service_up(?h,21)"

    def test_parse_rejects_garbage(self):
        for bad in ["", "nope", "p(a, b)", "p(?)", "(x)"]:
            with pytest.raises(LoadError):
                parse_fact(bad)

    def test_zero_arity(self):
        assert parse_fact("alarm()") == Fact("alarm", ())


def test_merge_bindings_conflict():
    assert merge_bindings({"h": "1"}, {"h": "2"}) is None
    assert merge_bindings({"h": "1"}, {"v": "2"}) == {"h": "1", "v": "2"}
