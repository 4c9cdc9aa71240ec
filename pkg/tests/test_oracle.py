"""Explicit-state oracle: evaluation, successors, invariant and live checks."""
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_bool_system
from vmtkit.errors import DomainOverflow, UnsupportedForOracle
from vmtkit.model import load_vmt
from vmtkit.oracle import (
    DomainBounds,
    ExplicitSystem,
    check_invariant_explicit,
    check_live_explicit,
    evaluate,
    replay_lasso,
    replay_path,
    successors,
)
from vmtkit.smtlib import elaborate_term
from vmtkit.ltl import symbol_table
from vmtkit.terms import TRUE


def doc_of(init: str, trans: str, prop: str, kind: str = "invar-property", sort: str = "Int", extra: str = ""):
    return load_vmt(f"""
    (declare-fun x () {sort})(declare-fun x.next () {sort})
    {extra}
    (define-fun sv () {sort} (! x :next x.next))
    (define-fun init () Bool (! {init} :init))
    (define-fun trans () Bool (! {trans} :trans))
    (define-fun p () Bool (! {prop} :{kind} 0))""")


def term(doc, text):
    return elaborate_term(text, symbol_table(doc))


class TestEvaluate:
    def test_property_on_state(self, example_doc):
        assert evaluate(term(example_doc, "(> x 0)"), {"x": 1}) is True

    def test_constant(self):
        assert evaluate(TRUE, {}) is True

    def test_transition(self, example_doc):
        ts = example_doc.system
        assert evaluate(ts.trans, {"x": 1}, {"b": True}, {"x": 2}, ts=ts) is True
        assert evaluate(ts.trans, {"x": 1}, {"b": True}, {"x": 1}, ts=ts) is False

    @pytest.mark.parametrize("text,value", [
        ("(div (- 7) 2)", -4),
        ("(mod (- 7) 2)", 1),
        ("(div 7 (- 2))", -3),
        ("(abs (- 3))", 3),
        ("(bvudiv #x7 #x0)", 15),
        ("(bvurem #x7 #x0)", 7),
        ("(bvsdiv #xe #x3)", 0),
        ("(bvsrem #xe #x3)", 0xE),
        ("(bvsmod #xe #x3)", 1),
        ("(bvashr #x8 #x1)", 0xC),
        ("((_ rotate_left 1) #x9)", 0x3),
        ("((_ sign_extend 4) #x9)", 0xF9),
        ("(bvneg #x1)", 0xF),
        ("(bvcomp #x1 #x1)", 1),
    ])
    def test_arithmetic_semantics(self, text, value):
        doc = load_vmt("")
        assert evaluate(term(doc, text), {}) == value

    def test_arrays(self):
        doc = load_vmt("(declare-fun m () (Array Bool Int))")
        t = term(doc, "(select (store m true 5) true)")
        assert evaluate(t, {"m": (0, 0)}) == 5

    def test_domain_overflow(self, example_doc):
        ts = example_doc.system
        with pytest.raises(DomainOverflow):
            evaluate(ts.init, {"x": 99}, bounds=DomainBounds((0, 5)), ts=ts)


class TestSuccessors:
    def test_worked_example(self, example_doc):
        got = successors(example_doc, {"x": 1}, DomainBounds((0, 5)))
        assert got == {((("b", False),), (("x", 1),)), ((("b", True),), (("x", 2),))}

    def test_empty_relation(self):
        doc = doc_of("true", "false", "true", sort="Bool")
        assert successors(doc, {"x": True}) == set()

    def test_full_relation(self):
        doc = doc_of("true", "true", "true", sort="Bool", extra="(declare-fun i () Bool)")
        assert len(successors(doc, {"x": False})) == 2 * 2

    def test_out_of_bound_successor_is_dropped(self, example_doc):
        got = successors(example_doc, {"x": 5}, DomainBounds((0, 5)))
        assert got == {((("b", False),), (("x", 5),))}

    def test_unsupported_sort(self):
        doc = load_vmt("(declare-sort S 0)(declare-fun e () S)(declare-fun e2 () S)(define-fun s () S (! e :next e2))")
        with pytest.raises(UnsupportedForOracle):
            ExplicitSystem(doc)


class TestInvariant:
    def test_worked_example_exhausts(self, example_doc):
        r = check_invariant_explicit(example_doc, example_doc.property(1), DomainBounds((0, 12)), max_depth=12)
        assert r.counterexample is None
        assert r.exhausted
        assert r.reachable == 12

    def test_initial_violation(self):
        doc = doc_of("(= x 0)", "(= x.next x)", "(> x 0)")
        r = check_invariant_explicit(doc, doc.properties[0], DomainBounds((0, 3)))
        assert r.counterexample.states == [{"x": 0}]
        assert len(r.counterexample) == 1

    def test_two_step_path(self):
        doc = doc_of("(= x 1)", "(= x.next (- x 1))", "(> x 0)")
        r = check_invariant_explicit(doc, doc.properties[0], DomainBounds((-1, 1)))
        assert r.counterexample.states == [{"x": 1}, {"x": 0}]
        assert len(r.counterexample) == 2

    def test_depth_limit(self):
        doc = doc_of("(= x 0)", "(= x.next (+ x 1))", "(< x 5)")
        r = check_invariant_explicit(doc, doc.properties[0], DomainBounds((0, 9)), max_depth=4)
        assert r.counterexample is None and not r.exhausted
        r = check_invariant_explicit(doc, doc.properties[0], DomainBounds((0, 9)), max_depth=5)
        assert len(r.counterexample) == 6

    def test_live_property_rejected(self, example_doc):
        with pytest.raises(ValueError):
            check_invariant_explicit(example_doc, example_doc.property(2))


class TestLive:
    def test_worked_example_self_loop(self, example_doc):
        lasso = check_live_explicit(example_doc, example_doc.property(2), DomainBounds((0, 12)))
        assert lasso.stem.states == [{"x": 1}]
        assert lasso.stem.inputs == [{"b": False}]
        assert lasso.loop_start == 0
        assert replay_lasso(example_doc.system, lasso, example_doc.property(2))

    def test_no_infinite_paths(self):
        doc = doc_of("true", "false", "false", kind="live-property", sort="Bool")
        assert check_live_explicit(doc, doc.properties[0]) is None

    def test_alternating_two_cycle(self):
        doc = doc_of("(not x)", "(= x.next (not x))", "x", kind="live-property", sort="Bool")
        lasso = check_live_explicit(doc, doc.properties[0])
        assert len(lasso.loop) == 2
        assert {s["x"] for s in lasso.loop} == {False, True}
        assert replay_lasso(doc.system, lasso, doc.properties[0])

    def test_property_eventually_stable(self):
        doc = doc_of("(= x 0)", "(= x.next (ite (< x 3) (+ x 1) x))", "(= x 3)", kind="live-property")
        assert check_live_explicit(doc, doc.properties[0], DomainBounds((0, 3))) is None


class TestOracleProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_paths_replay_and_match_bfs_depth(self, seed):
        sys_ = random_bool_system(random.Random(seed))
        doc = load_vmt(sys_.to_vmt())
        r = check_invariant_explicit(doc, doc.properties[0], max_depth=20)
        depth = sys_.min_violation_depth()
        if depth is None:
            assert r.counterexample is None and r.exhausted
        else:
            assert len(r.counterexample) == depth + 1
            assert replay_path(doc.system, r.counterexample)
            assert not evaluate(doc.properties[0].formula, r.counterexample.states[-1])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_lassos_replay_and_match_cycle_search(self, seed):
        sys_ = random_bool_system(random.Random(seed))
        doc = load_vmt(sys_.to_vmt("live-property"))
        lasso = check_live_explicit(doc, doc.properties[0])
        assert (lasso is not None) == sys_.has_bad_cycle()
        if lasso is not None:
            assert replay_lasso(doc.system, lasso, doc.properties[0])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_monotonicity(self, seed):
        sys_ = random_bool_system(random.Random(seed))
        doc = load_vmt(sys_.to_vmt())
        found = [check_invariant_explicit(doc, doc.properties[0], max_depth=d).counterexample is not None
                 for d in range(8)]
        assert found == sorted(found)
