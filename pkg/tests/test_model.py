"""Transition-system extraction, validation, priming and printing."""
import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS
from helpers import random_bool_system
from vmtkit.errors import MixedStateVersions, NextNotInjective, PropertyNotFound
from vmtkit.model import (
    PropertyKind,
    StateVariable,
    check_text,
    load_vmt,
    prime,
    print_vmt,
    unprime,
    validate,
)
from vmtkit.oracle import DomainBounds, ExplicitSystem, reachable_graph
from vmtkit.smtlib import elaborate_term
from vmtkit.ltl import symbol_table
from vmtkit.terms import BOOL, INT, TRUE, free_vars, to_smtlib


class TestExtract:
    def test_worked_example(self, example_doc):
        ts = example_doc.system
        assert ts.states == (StateVariable("x", "x.next", INT),)
        assert ts.inputs == (("b", BOOL),)
        assert to_smtlib(ts.init) == "(= x 1)"
        assert to_smtlib(ts.trans) == "(= x.next (ite b (+ x 1) x))"
        props = [(p.kind, p.index, to_smtlib(p.formula)) for p in example_doc.properties]
        assert props == [
            (PropertyKind.INVARIANT, 1, "(> x 0)"),
            (PropertyKind.LIVE, 2, "(> x 10)"),
        ]

    def test_defaults_without_annotations(self):
        doc = load_vmt("(declare-fun a () Bool)(declare-fun a2 () Bool)(define-fun s () Bool (! a :next a2))")
        assert doc.system.init == TRUE and doc.system.trans == TRUE
        assert doc.system.states == (StateVariable("a", "a2", BOOL),)
        assert doc.properties == ()

    def test_shared_next_target(self):
        with pytest.raises(NextNotInjective):
            load_vmt("""
            (declare-fun a () Bool)(declare-fun b () Bool)(declare-fun n () Bool)
            (define-fun sa () Bool (! a :next n))
            (define-fun sb () Bool (! b :next n))""")

    def test_conjoined_annotations(self):
        doc = load_vmt((CORPUS / "valid" / "multi_init_trans.vmt").read_text())
        assert to_smtlib(doc.system.init) == "(and x (not y))"
        assert to_smtlib(doc.system.trans) == "(and (= x.next y) (= y.next x))"

    def test_property_lookup(self, example_doc):
        assert example_doc.property(2).kind is PropertyKind.LIVE
        assert example_doc.default_property(PropertyKind.INVARIANT).index == 1
        with pytest.raises(PropertyNotFound):
            example_doc.property(9)

    def test_defines_are_expanded(self):
        doc = load_vmt((CORPUS / "valid" / "macros.vmt").read_text())
        assert "bump" not in to_smtlib(doc.system.trans)
        assert to_smtlib(doc.properties[0].formula) == "(and (>= x 0) (<= x 9))"


class TestValidate:
    def test_worked_example_is_clean(self, example_doc):
        assert validate(example_doc) == []

    def test_init_uses_next(self):
        ds = check_text("""
        (declare-fun x () Int)(declare-fun x.next () Int)
        (define-fun sv () Int (! x :next x.next))
        (define-fun init () Bool (! (= x.next 1) :init))
        (define-fun p () Bool (! (> x 0) :invar-property 0))""")
        assert [(d.code, d.line) for d in ds] == [("InitUsesNextVar", 4)]
        assert "x.next" in ds[0].message

    def test_property_uses_input(self, example_text):
        text = example_text.replace("(> x 0) :invar-property 1", "(and b (> x 0)) :invar-property 1")
        ds = check_text(text)
        assert [d.code for d in ds] == ["PropertyUsesInput"]
        assert "'b'" in ds[0].message

    def test_no_properties_is_a_warning(self):
        ds = check_text("(declare-fun x () Bool)")
        assert [(d.code, d.severity) for d in ds] == [("NoProperties", "warning")]

    def test_diagnostic_format(self):
        ds = check_text("(declare-fun x () Int)\n(define-fun p () Bool (! (> y 0) :invar-property 0))")
        assert ds[0].format("f.vmt") == "f.vmt:2:29: error: UnknownSymbol: unknown symbol 'y'"


class TestPriming:
    def test_prime(self, example_doc):
        st_ = symbol_table(example_doc)
        t = elaborate_term("(> x 0)", st_)
        assert to_smtlib(prime(t, example_doc)) == "(> x.next 0)"

    def test_prime_constant(self, example_doc):
        assert prime(TRUE, example_doc) == TRUE

    def test_roundtrip(self, example_doc):
        t = elaborate_term("(= x 1)", symbol_table(example_doc))
        assert unprime(prime(t, example_doc), example_doc) == t

    def test_mixed_versions(self, example_doc):
        t = elaborate_term("(= x x.next)", symbol_table(example_doc))
        with pytest.raises(MixedStateVersions):
            prime(t, example_doc)
        with pytest.raises(MixedStateVersions):
            unprime(t, example_doc)


class TestPrint:
    def test_example_roundtrip(self, example_doc):
        assert load_vmt(print_vmt(example_doc)) == example_doc

    def test_empty_system(self):
        doc = load_vmt("")
        text = print_vmt(doc)
        assert "(! true :init)" in text and "(! true :trans)" in text
        assert load_vmt(text) == doc

    def test_printer_avoids_name_clashes(self):
        doc = load_vmt("""
        (declare-fun init () Bool)(declare-fun init2 () Bool)
        (define-fun s () Bool (! init :next init2))
        (define-fun p0 () Bool (! init :invar-property 0))""")
        text = print_vmt(doc)
        assert load_vmt(text) == doc
        assert "(define-fun init " not in text

    def test_hundred_state_vars(self):
        rng = random.Random(100)
        lines = []
        for i in range(100):
            lines += [f"(declare-fun s{i} () Bool)", f"(declare-fun s{i}.n () Bool)",
                      f"(define-fun d{i} () Bool (! s{i} :next s{i}.n))"]
        trans = " ".join(f"(= s{i}.n (xor s{i} s{rng.randrange(100)}))" for i in range(100))
        lines.append(f"(define-fun t () Bool (! (and {trans}) :trans))")
        lines.append("(define-fun p () Bool (! (or s0 s1) :live-property 4))")
        doc = load_vmt("\n".join(lines))
        assert len(doc.system.states) == 100
        assert load_vmt(print_vmt(doc)) == doc

    def test_print_is_idempotent(self, example_doc):
        once = print_vmt(example_doc)
        assert print_vmt(load_vmt(once)) == once


VALID = sorted((CORPUS / "valid").glob("*.vmt"))


class TestCorpusInvariants:
    @pytest.mark.parametrize("path", VALID, ids=lambda p: p.stem)
    def test_normalization_is_idempotent(self, path):
        doc = load_vmt(path.read_text())
        again = load_vmt(print_vmt(doc))
        assert again == doc

    @pytest.mark.parametrize("path", VALID, ids=lambda p: p.stem)
    def test_scope_rules(self, path):
        doc = load_vmt(path.read_text())
        ts = doc.system
        rigid = {f.name for f in doc.functions}
        assert len(ts.next_names) == len(ts.states)
        assert free_vars(ts.init) <= ts.current_names | rigid
        assert free_vars(ts.trans) <= ts.current_names | ts.next_names | ts.input_names | rigid
        for p in doc.properties:
            assert free_vars(p.formula) <= ts.current_names | rigid


def _rename(text: str, names: list[str]) -> str:
    mapping = {n: f"|renamed {i}|" for i, n in enumerate(names)}
    pattern = re.compile(r"(?<![\w.])(" + "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True)) + r")(?![\w.])")
    return pattern.sub(lambda m: mapping[m.group(1)], text)


class TestRenaming:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_alpha_renaming_is_isomorphic(self, seed):
        sys_ = random_bool_system(random.Random(seed), max_vars=3, max_inputs=1)
        text = sys_.to_vmt()
        names = sys_.names + [f"{n}.next" for n in sys_.names] + sys_.inputs
        renamed = load_vmt(_rename(text, names))
        assert all(n.startswith("renamed") for n in renamed.variable_sorts())
        a = ExplicitSystem(load_vmt(text), DomainBounds())
        b = ExplicitSystem(renamed, DomainBounds())
        _, order_a = reachable_graph(a)
        _, order_b = reachable_graph(b)
        edges_a = {s: sorted(n for _, n in a.successors(s)) for s in order_a}
        edges_b = {s: sorted(n for _, n in b.successors(s)) for s in order_b}
        assert edges_a == edges_b
