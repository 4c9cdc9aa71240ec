"""Horn, SMV and BTOR2 converters."""
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, GOLDEN, HAVE_Z3
from helpers import btor2_problems, random_bool_system
from vmtkit.bmc import bmc_invariant
from vmtkit.converters import btor_to_vmt, vmt_to_btor, vmt_to_horn, vmt_to_nuxmv
from vmtkit.errors import (
    LivePropertyUnsupported,
    MalformedBtor,
    QuantifiedSystem,
    UnsupportedNode,
    UnsupportedSort,
    UnsupportedSymbol,
)
from vmtkit.model import PropertyKind, load_vmt
from vmtkit.oracle import check_invariant_explicit
from vmtkit.solver import solve
from vmtkit.terms import to_smtlib

TOGGLE = """
(declare-fun v () Bool)(declare-fun v.next () Bool)
(define-fun sv () Bool (! v :next v.next))
(define-fun init () Bool (! (not v) :init))
(define-fun trans () Bool (! (= v.next (not v)) :trans))
(define-fun p () Bool (! true :invar-property 0))
"""

COUNTER = """
(declare-fun c () (_ BitVec 4))(declare-fun c.next () (_ BitVec 4))
(declare-fun en () Bool)
(define-fun sv () (_ BitVec 4) (! c :next c.next))
(define-fun init () Bool (! (= c #x0) :init))
(define-fun trans () Bool (! (= c.next (ite en (bvadd c #x1) c)) :trans))
(define-fun p () Bool (! (bvult c #x3) :invar-property 0))
"""

_BV_OPS = ["bvadd", "bvsub", "bvand", "bvor", "bvxor", "bvmul", "bvshl", "bvlshr"]
_BV_CMP = ["bvult", "bvule", "bvslt", "=", "distinct"]


def _bv_term(rng, leaves, depth):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.3:
            return f"#x{rng.randrange(16):x}"
        return rng.choice(leaves)
    if rng.random() < 0.2:
        return f"(ite {_bv_pred(rng, leaves, depth - 1)} {_bv_term(rng, leaves, depth - 1)} {_bv_term(rng, leaves, depth - 1)})"
    if rng.random() < 0.1:
        return f"(bvnot {_bv_term(rng, leaves, depth - 1)})"
    return f"({rng.choice(_BV_OPS)} {_bv_term(rng, leaves, depth - 1)} {_bv_term(rng, leaves, depth - 1)})"


def _bv_pred(rng, leaves, depth):
    return f"({rng.choice(_BV_CMP)} {_bv_term(rng, leaves, depth)} {_bv_term(rng, leaves, depth)})"


def random_bv_system(rng: random.Random) -> str:
    """Two 4-bit registers and one 4-bit input with random next functions."""
    names = ["r0", "r1"]
    leaves = names + ["inp"]
    lines = ["(declare-fun inp () (_ BitVec 4))"]
    for n in names:
        lines += [f"(declare-fun {n} () (_ BitVec 4))", f"(declare-fun {n}.next () (_ BitVec 4))",
                  f"(define-fun sv.{n} () (_ BitVec 4) (! {n} :next {n}.next))"]
    init = " ".join(f"(= {n} #x{rng.randrange(16):x})" for n in names)
    trans = " ".join(f"(= {n}.next {_bv_term(rng, leaves, 2)})" for n in names)
    if rng.random() < 0.3:
        trans += f" {_bv_pred(rng, leaves, 1)}"
    lines.append(f"(define-fun init () Bool (! (and {init}) :init))")
    lines.append(f"(define-fun trans () Bool (! (and {trans}) :trans))")
    lines.append(f"(define-fun p () Bool (! {_bv_pred(rng, names, 1)} :invar-property 0))")
    return "\n".join(lines)


def _first_violation(doc, prop, k_max, solver):
    t = bmc_invariant(doc, prop, k_max, solver)
    return None if t is None else t.k


class TestHorn:
    def test_golden(self, example_doc):
        assert vmt_to_horn(example_doc, 1).render() == (GOLDEN / "worked_example.horn").read_text()

    def test_live_property_rejected(self, example_doc):
        with pytest.raises(LivePropertyUnsupported) as exc:
            vmt_to_horn(example_doc, 2)
        assert exc.value.idx == 2

    def test_quantified_rejected(self):
        doc = load_vmt((CORPUS / "valid" / "quantified_property.vmt").read_text())
        with pytest.raises(QuantifiedSystem):
            vmt_to_horn(doc, doc.properties[0].index)

    def test_predicate_name_avoids_clashes(self):
        doc = load_vmt("""
        (declare-fun Inv () Bool)(declare-fun Inv.n () Bool)
        (define-fun s () Bool (! Inv :next Inv.n))
        (define-fun p () Bool (! Inv :invar-property 0))""")
        h = vmt_to_horn(doc, 0)
        assert h.predicate == "Inv_1"

    def test_stateless_system(self):
        doc = load_vmt("(define-fun p () Bool (! true :invar-property 0))")
        text = vmt_to_horn(doc, 0).render()
        assert "(declare-fun Inv () Bool)" in text
        assert "(assert (=> true Inv))" in text

    @pytest.mark.skipif(not HAVE_Z3, reason="z3 not installed")
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_satisfiable_exactly_when_safe(self, seed, smt_solver):
        sys_ = random_bool_system(random.Random(seed), max_vars=3, max_inputs=1)
        doc = load_vmt(sys_.to_vmt())
        safe = sys_.min_violation_depth() is None
        status = solve(smt_solver, vmt_to_horn(doc, 0).render()).status
        assert status == ("sat" if safe else "unsat")


class TestNuxmv:
    def test_golden(self, example_doc):
        assert vmt_to_nuxmv(example_doc) == (GOLDEN / "worked_example.smv").read_text()

    def test_arrays_rejected(self):
        doc = load_vmt((CORPUS / "valid" / "array_memory.vmt").read_text())
        with pytest.raises(UnsupportedSort):
            vmt_to_nuxmv(doc)

    def test_uninterpreted_rejected(self):
        doc = load_vmt((CORPUS / "valid" / "uninterpreted.vmt").read_text())
        with pytest.raises((UnsupportedSort, UnsupportedSymbol)):
            vmt_to_nuxmv(doc)

    def test_identifiers_are_sanitized(self):
        doc = load_vmt("""
        (declare-fun |a b| () Bool)(declare-fun n () Bool)
        (define-fun s () Bool (! |a b| :next n))
        (define-fun p () Bool (! |a b| :invar-property 0))""")
        text = vmt_to_nuxmv(doc)
        assert "|a b|" in text.splitlines()[1]
        var = [l for l in text.splitlines() if l.startswith("VAR ")][0]
        assert " " not in var.split(":")[0].strip()[4:]

    def test_bit_vectors(self):
        text = vmt_to_nuxmv(load_vmt(COUNTER))
        assert "VAR c : word[4];" in text
        assert "IVAR en : boolean;" in text
        assert "INVARSPEC" in text

    def test_one_section_per_property(self):
        text = vmt_to_nuxmv(load_vmt((CORPUS / "valid" / "two_properties_same_def.vmt").read_text()))
        assert text.count("INVARSPEC") + text.count("LTLSPEC") == 2


class TestBtorWriter:
    def test_toggle_golden(self):
        out = vmt_to_btor(load_vmt(TOGGLE)).render()
        assert out == (GOLDEN / "toggle.btor2").read_text()
        assert btor2_problems(out) == []

    def test_int_rejected(self, example_doc):
        with pytest.raises(LivePropertyUnsupported):
            vmt_to_btor(example_doc)
        doc = load_vmt("(declare-fun x () Int)(declare-fun y () Int)(define-fun s () Int (! x :next y))")
        with pytest.raises(UnsupportedSort):
            vmt_to_btor(doc)

    def test_well_formed_on_corpus(self):
        converted = 0
        for path in sorted((CORPUS / "valid").glob("*.vmt")):
            doc = load_vmt(path.read_text())
            try:
                out = vmt_to_btor(doc).render()
            except (UnsupportedSort, UnsupportedSymbol, LivePropertyUnsupported, QuantifiedSystem):
                continue
            converted += 1
            assert btor2_problems(out) == [], path.name
        assert converted >= 4

    def test_residual_constraints(self):
        doc = load_vmt("""
        (declare-fun a () (_ BitVec 2))(declare-fun a.next () (_ BitVec 2))
        (define-fun sv () (_ BitVec 2) (! a :next a.next))
        (define-fun init () Bool (! (bvult a #b10) :init))
        (define-fun trans () Bool (! (bvugt a.next a) :trans))
        (define-fun p () Bool (! (distinct a #b11) :invar-property 0))""")
        out = vmt_to_btor(doc).render()
        assert btor2_problems(out) == []
        assert any(l.split()[1] == "constraint" for l in out.splitlines())


class TestBtorReader:
    def test_toggle(self):
        doc = btor_to_vmt((GOLDEN / "toggle.btor2").read_text())
        assert [s.current for s in doc.system.states] == ["v"]
        assert to_smtlib(doc.system.init) == "(not v)"
        assert [p.kind for p in doc.properties] == [PropertyKind.INVARIANT]

    def test_forward_reference(self):
        with pytest.raises(MalformedBtor) as exc:
            btor_to_vmt("1 sort bitvec 1\n2 not 1 3\n3 state 1\n")
        assert exc.value.lineno == 2

    def test_non_increasing_ids(self):
        with pytest.raises(MalformedBtor):
            btor_to_vmt("2 sort bitvec 1\n1 state 2\n")

    def test_unsupported_node(self):
        with pytest.raises(UnsupportedNode):
            btor_to_vmt("1 sort bitvec 1\n2 state 1\n3 justice 1 2\n")

    def test_constraint_restricts_init_and_steps(self):
        doc = btor_to_vmt("""
1 sort bitvec 2
2 sort bitvec 1
3 state 1 a
4 input 1 d
5 next 1 3 4
6 constd 1 3
7 neq 2 3 6
8 constraint 7
9 eq 2 3 6
10 bad 9
""")
        init, trans = to_smtlib(doc.system.init), to_smtlib(doc.system.trans)
        assert "(distinct a #b11)" in init or "(not (= a #b11))" in init
        assert "a.next" in trans and ("(distinct a #b11)" in trans or "(not (= a #b11))" in trans)

    def test_frozen_state_keeps_value(self):
        doc = btor_to_vmt("1 sort bitvec 3\n2 state 1 f\n3 constd 1 5\n4 init 1 2 3\n5 sort bitvec 1\n6 eq 5 2 3\n7 bad 6\n")
        assert to_smtlib(doc.system.trans) == "(= f.next f)"


class TestBtorDifferential:
    def test_counter(self, solver):
        doc = load_vmt(COUNTER)
        back = btor_to_vmt(vmt_to_btor(doc).render())
        assert _first_violation(doc, doc.properties[0], 3, solver) == 3
        assert _first_violation(back, back.properties[0], 3, solver) == 3

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_round_trip_preserves_verdicts(self, seed, solver):
        doc = load_vmt(random_bv_system(random.Random(seed)))
        out = vmt_to_btor(doc).render()
        assert btor2_problems(out) == []
        back = btor_to_vmt(out)
        assert _first_violation(doc, doc.properties[0], 4, solver) == _first_violation(back, back.properties[0], 4, solver)

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_boolean_round_trip_matches_oracle(self, seed, solver):
        sys_ = random_bool_system(random.Random(seed), max_vars=3, max_inputs=1)
        doc = load_vmt(sys_.to_vmt())
        back = btor_to_vmt(vmt_to_btor(doc).render())
        r = check_invariant_explicit(doc, doc.properties[0], max_depth=4)
        expected = None if r.counterexample is None else len(r.counterexample) - 1
        assert _first_violation(back, back.properties[0], 4, solver) == expected
